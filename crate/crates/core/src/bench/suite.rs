use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{lookup, RegistryOptions};
use crate::solver::{solve, EvalCounts, SolveResult, SolveStatus, SolverConfig};
use crate::verify::kkt_p2;

/// One benchmark instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub problem: String,
    pub m: usize,
    pub seed: u64,
    pub kappa: f64,
}

impl InstanceSpec {
    pub fn new(problem: impl Into<String>, m: usize, seed: u64) -> Self {
        Self {
            problem: problem.into(),
            m,
            seed,
            kappa: 10.0,
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    /// `count` instances with seeds `base_seed, base_seed + 1, …`.
    pub fn series(problem: &str, m: usize, base_seed: u64, count: usize, kappa: f64) -> Vec<Self> {
        (0..count as u64)
            .map(|i| Self::new(problem, m, base_seed.wrapping_add(i)).with_kappa(kappa))
            .collect()
    }

    pub fn options(&self) -> RegistryOptions {
        RegistryOptions {
            m: self.m,
            seed: self.seed,
            kappa: self.kappa,
        }
    }
}

/// Outcome of one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: InstanceSpec,
    /// `None` when the instance could not be built or the run aborted.
    pub status: Option<SolveStatus>,
    pub objective: f64,
    /// Worst KKT residual of the slack form at the returned point.
    pub kkt_residual: f64,
    /// Whether the slack-form KKT check passed at ten times the outer
    /// tolerance.
    pub certified: bool,
    pub feasibility: f64,
    pub wall_time: f64,
    pub evals: EvalCounts,
    pub error: Option<String>,
}

impl BenchRecord {
    fn errored(instance: InstanceSpec, msg: String) -> Self {
        Self {
            instance,
            status: None,
            objective: f64::NAN,
            kkt_residual: f64::NAN,
            certified: false,
            feasibility: f64::NAN,
            wall_time: 0.0,
            evals: EvalCounts::default(),
            error: Some(msg),
        }
    }

    pub fn failed(&self) -> bool {
        self.status != Some(SolveStatus::Converged) || !self.certified
    }

    fn status_label(&self) -> String {
        match self.status {
            Some(s) => format!("{s:?}"),
            None => "Error".to_string(),
        }
    }
}

/// Solves one instance and certifies the result.
pub fn run_instance(spec: &InstanceSpec, cfg: &SolverConfig) -> (BenchRecord, Option<SolveResult>) {
    let reg = match lookup(&spec.problem, &spec.options()) {
        Ok(r) => r,
        Err(e) => return (BenchRecord::errored(spec.clone(), e.to_string()), None),
    };
    let run = catch_unwind(AssertUnwindSafe(|| {
        let nlp = reg.nlp();
        let res = solve(nlp.as_ref(), &nlp.start(), cfg);
        let kp = reg.kkt_point(&res.point(), &res.multiplier_vector());
        let report = kkt_p2(
            reg.conic().as_ref(),
            &kp.x,
            &kp.y,
            &kp.lambda,
            &kp.mu,
            10.0 * cfg.outer_tol,
        );
        (res, report)
    }));
    match run {
        Ok((res, report)) => {
            let record = BenchRecord {
                instance: spec.clone(),
                status: Some(res.status),
                objective: res.objective,
                kkt_residual: report.worst_residual(),
                certified: report.verdict,
                feasibility: res.feasibility,
                wall_time: res.wall_time,
                evals: res.evals,
                error: None,
            };
            (record, Some(res))
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "solver panicked".to_string());
            (BenchRecord::errored(spec.clone(), msg), None)
        }
    }
}

/// Runs every instance on a pool of `jobs` threads (0 = rayon default).
/// Records come back in input order; failures are recorded, never raised.
pub fn run_suite(
    specs: &[InstanceSpec],
    cfg: &SolverConfig,
    jobs: usize,
) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(pool.install(|| specs.par_iter().map(|s| run_instance(s, cfg).0).collect()))
}

pub const CSV_HEADER: &str =
    "problem,m,seed,status,objective,kkt_residual,time_s,f_evals,g_evals,h_evals";

/// One line per record under [`CSV_HEADER`].
pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.10e},{:.3e},{:.6},{},{},{}",
            r.instance.problem,
            r.instance.m,
            r.instance.seed,
            r.status_label(),
            r.objective,
            r.kkt_residual,
            r.wall_time,
            r.evals.functions,
            r.evals.gradients,
            r.evals.hessians,
        );
    }
    out
}

/// Timing summary of the records sharing a problem and order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub problem: String,
    pub m: usize,
    pub instances: usize,
    pub mean_time: f64,
    pub min_time: f64,
    pub max_time: f64,
    pub fail: usize,
}

/// Groups records by `(problem, m)` in order of first appearance. Times
/// are taken over the instances that did not fail.
pub fn summarize(records: &[BenchRecord]) -> Vec<SuiteSummary> {
    let mut groups: Vec<SuiteSummary> = Vec::new();
    let mut times: Vec<Vec<f64>> = Vec::new();
    for r in records {
        let key = (&r.instance.problem, r.instance.m);
        let idx = match groups.iter().position(|g| (&g.problem, g.m) == key) {
            Some(i) => i,
            None => {
                groups.push(SuiteSummary {
                    problem: r.instance.problem.clone(),
                    m: r.instance.m,
                    instances: 0,
                    mean_time: f64::NAN,
                    min_time: f64::NAN,
                    max_time: f64::NAN,
                    fail: 0,
                });
                times.push(Vec::new());
                groups.len() - 1
            }
        };
        groups[idx].instances += 1;
        if r.failed() {
            groups[idx].fail += 1;
        } else {
            times[idx].push(r.wall_time);
        }
    }
    for (g, t) in groups.iter_mut().zip(&times) {
        if !t.is_empty() {
            g.mean_time = t.iter().sum::<f64>() / t.len() as f64;
            g.min_time = t.iter().copied().fold(f64::INFINITY, f64::min);
            g.max_time = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        }
    }
    groups
}

/// Aligned text table of [`summarize`].
pub fn summary_table(records: &[BenchRecord]) -> String {
    let mut out = format!(
        "{:<16} {:>4} {:>6} {:>10} {:>10} {:>10} {:>5}\n",
        "problem", "m", "runs", "mean (s)", "min (s)", "max (s)", "fail"
    );
    for g in summarize(records) {
        let _ = writeln!(
            out,
            "{:<16} {:>4} {:>6} {:>10.4} {:>10.4} {:>10.4} {:>5}",
            g.problem, g.m, g.instances, g.mean_time, g.min_time, g.max_time, g.fail
        );
    }
    out
}
