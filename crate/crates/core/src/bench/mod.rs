//! Benchmark problems, a reference oracle for the correlation problem and
//! the suite runner.

mod ncm;
mod problems;
mod suite;

pub use ncm::{ncm_oracle, NCM_MAX_SWEEPS};
pub use problems::{
    build_cor, build_cor_ext, build_cor_ext_slack, build_cor_slack, build_hs71, gen_correlation_h,
    Cor, CorExt, CorSlack, Hs71Sdp,
};
pub use suite::{
    run_instance, run_suite, summarize, summary_table, to_csv, BenchRecord, InstanceSpec,
    SuiteSummary, CSV_HEADER,
};
