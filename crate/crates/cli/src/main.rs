//! `slacksdp`: solve, certify and benchmark nonlinear SDPs from the command
//! line.
//!
//! Exit status is 0 on success, 1 when a solve or certificate fails and 2
//! on usage errors.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use slacksdp::bench::{gen_correlation_h, run_suite, summary_table, to_csv, InstanceSpec};
use slacksdp::model::{
    check_derivatives, check_nlp_derivatives, lookup, registered_names, Registered, RegistryOptions,
};
use slacksdp::solver::{solve, SolveResult, SolverConfig};
use slacksdp::symalg::{smat, svec};
use slacksdp::verify::{
    kkt_p1, kkt_p2, licq_p2, mfcq_p1, nondegeneracy_p1, phi_membership, rank_tol_for, sonc_nlp,
    sonc_sdp, sosc_nlp, sosc_sdp,
};
use slacksdp::Error;

#[derive(Parser)]
#[command(
    name = "slacksdp",
    version,
    about = "Nonlinear SDP toolkit based on squared slack variables"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Solve a problem and print the result.
    Solve(SolveArgs),
    /// Check optimality certificates of a stored point.
    Verify(VerifyArgs),
    /// Run a seeded benchmark suite.
    Bench(BenchArgs),
    /// Compare analytic derivatives with finite differences.
    CheckDerivs(CheckArgs),
    /// Print the random data of a correlation instance.
    GenInstance(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct Instance {
    /// Registered problem name or path to an affine problem `.json` file.
    #[arg(long)]
    problem: String,
    /// Matrix order of the correlation problems.
    #[arg(long, default_value_t = 5)]
    m: usize,
    #[arg(long, env = "SLACKSDP_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10.0)]
    kappa: f64,
}

impl Instance {
    fn options(&self) -> RegistryOptions {
        RegistryOptions {
            m: self.m,
            seed: self.seed,
            kappa: self.kappa,
        }
    }

    fn lookup(&self) -> Result<Registered, Failure> {
        lookup(&self.problem, &self.options()).map_err(Failure::Usage)
    }
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Output {
    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.output {
            Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(e.into())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .map_err(|e| Failure::Usage(e.into()))
            }
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: Instance,
    /// Solver settings as `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: Instance,
    /// Point file written by `solve`, or a bare point object.
    #[arg(long)]
    point: PathBuf,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    instance: Instance,
    /// Number of instances; seeds run from `--seed` upwards.
    #[arg(long, default_value_t = 1)]
    instances: usize,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    output: Output,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    instance: Instance,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    instance: Instance,
    #[command(flatten)]
    output: Output,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

enum Failure {
    /// Bad flags, unreadable files or invalid input.
    Usage(Error),
    /// The run completed but did not succeed.
    Solver,
}

fn load_config(path: &Option<PathBuf>) -> Result<SolverConfig, Failure> {
    match path {
        Some(p) => SolverConfig::load(p).map_err(Failure::Usage),
        None => Ok(SolverConfig::default()),
    }
}

fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// The point interchange object: `x`, the slack `y` and matrix multiplier
/// `lambda` as svec arrays of order `m`, and the equality multipliers `mu`.
fn point_json(reg: &Registered, res: &SolveResult) -> Value {
    let kp = reg.kkt_point(&res.point(), &res.multiplier_vector());
    json!({
        "problem": reg.name(),
        "m": kp.y.dim(),
        "x": kp.x.as_slice(),
        "y": svec(&kp.y),
        "lambda": svec(&kp.lambda),
        "mu": kp.mu.as_slice(),
        "multipliers": res.multipliers,
    })
}

fn cmd_solve(args: &SolveArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    cfg.validate().map_err(Failure::Usage)?;
    let reg = args.instance.lookup()?;
    let nlp = reg.nlp();
    let res = solve(nlp.as_ref(), &nlp.start(), &cfg);
    let text = match args.format {
        Format::Json => {
            let mut v = serde_json::to_value(&res).expect("plain data serializes");
            v["point"] = point_json(&reg, &res);
            to_json(&v)
        }
        Format::Text => format!(
            "problem      {}\nstatus       {:?}\nobjective    {:.10}\nfeasibility  {:.3e}\nstationarity {:.3e}\niterations   {}\ntime (s)     {:.4}\n",
            res.problem, res.status, res.objective, res.feasibility, res.stationarity, res.iterations, res.wall_time
        ),
        Format::Csv => format!(
            "problem,status,objective,feasibility,stationarity,iterations,time_s\n{},{:?},{:.10e},{:.3e},{:.3e},{},{:.6}\n",
            res.problem, res.status, res.objective, res.feasibility, res.stationarity, res.iterations, res.wall_time
        ),
    };
    args.output.emit(&text)?;
    if res.converged() {
        Ok(())
    } else {
        Err(Failure::Solver)
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, Failure> {
    v.get(key)
        .ok_or_else(|| Failure::Usage(Error::Invalid(format!("point file lacks '{key}'"))))
}

fn floats(v: &Value, key: &str) -> Result<Vec<f64>, Failure> {
    serde_json::from_value(field(v, key)?.clone()).map_err(|e| Failure::Usage(e.into()))
}

fn outcome<T: serde::Serialize>(r: slacksdp::Result<T>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).expect("plain data serializes"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let reg = args.instance.lookup()?;
    let text = fs::read_to_string(&args.point).map_err(|e| Failure::Usage(e.into()))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(e.into()))?;
    let pt = doc.get("point").unwrap_or(&doc);
    let prob = reg.conic();
    let x = nalgebra::DVector::from_vec(floats(pt, "x")?);
    let y = smat(&floats(pt, "y")?).map_err(Failure::Usage)?;
    let lambda = smat(&floats(pt, "lambda")?).map_err(Failure::Usage)?;
    let mu = nalgebra::DVector::from_vec(floats(pt, "mu")?);
    let dims = [
        (x.len(), prob.n()),
        (y.dim(), prob.m()),
        (lambda.dim(), prob.m()),
        (mu.len(), prob.p()),
    ];
    if let Some(&(found, expected)) = dims.iter().find(|(f, e)| f != e) {
        return Err(Failure::Usage(Error::DimensionMismatch { expected, found }));
    }
    let tol = args.tol;
    let rank_tol = rank_tol_for(tol, prob.m());
    let p2 = kkt_p2(prob.as_ref(), &x, &y, &lambda, &mu, tol);
    let report = json!({
        "problem": reg.name(),
        "tol": tol,
        "verdict": p2.verdict,
        "kkt_p1": kkt_p1(prob.as_ref(), &x, &lambda, &mu, tol),
        "kkt_p2": p2,
        "phi_membership": outcome(phi_membership(&lambda, &y, tol)),
        "nondegeneracy_p1": nondegeneracy_p1(prob.as_ref(), &x, rank_tol),
        "licq_p2": licq_p2(prob.as_ref(), &x, &y, rank_tol),
        "mfcq_p1": mfcq_p1(prob.as_ref(), &x),
        "sosc_sdp": outcome(sosc_sdp(prob.as_ref(), &x, &lambda, &mu, tol)),
        "sonc_sdp": outcome(sonc_sdp(prob.as_ref(), &x, &lambda, &mu, tol)),
        "sosc_nlp": outcome(sosc_nlp(prob.as_ref(), &x, &y, &lambda, &mu, tol)),
        "sonc_nlp": outcome(sonc_nlp(prob.as_ref(), &x, &y, &lambda, &mu, tol)),
    });
    args.output.emit(&to_json(&report))?;
    if p2.verdict {
        Ok(())
    } else {
        Err(Failure::Solver)
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    if args.instances == 0 {
        return Err(Failure::Usage(Error::Invalid(
            "--instances must be positive".into(),
        )));
    }
    let cfg = load_config(&args.config)?;
    // Surface bad names and sizes as usage errors rather than failed rows.
    args.instance.lookup()?;
    let i = &args.instance;
    let specs = InstanceSpec::series(&i.problem, i.m, i.seed, args.instances, i.kappa);
    let records = run_suite(&specs, &cfg, args.jobs).map_err(Failure::Usage)?;
    let text = match args.format {
        Format::Csv => {
            eprint!("{}", summary_table(&records));
            to_csv(&records)
        }
        Format::Text => summary_table(&records),
        Format::Json => to_json(&records),
    };
    args.output.emit(&text)?;
    if records.iter().any(|r| r.failed()) {
        Err(Failure::Solver)
    } else {
        Ok(())
    }
}

fn cmd_check(args: &CheckArgs) -> Result<(), Failure> {
    let reg = args.instance.lookup()?;
    let seed = args.instance.seed;
    let mut reports = Vec::new();
    if let Registered::Nsdp(p) = &reg {
        reports.push(check_derivatives(p.as_ref(), &p.start(), seed));
    }
    let nlp = reg.nlp();
    reports.push(check_nlp_derivatives(nlp.as_ref(), &nlp.start(), seed));
    let passed = reports.iter().all(|r| r.passed());
    let body = json!({ "passed": passed, "reports": reports });
    args.output.emit(&to_json(&body))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Solver)
    }
}

fn cmd_gen(args: &GenArgs) -> Result<(), Failure> {
    let i = &args.instance;
    if !i.problem.starts_with("cor") {
        return Err(Failure::Usage(Error::Invalid(format!(
            "{} has no random data",
            i.problem
        ))));
    }
    i.lookup()?;
    let h = gen_correlation_h(i.m, i.seed);
    let text = match args.format {
        Format::Json => {
            let rows: Vec<Vec<f64>> = h
                .as_matrix()
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect();
            to_json(&json!({
                "problem": i.problem,
                "m": i.m,
                "seed": i.seed,
                "kappa": i.kappa,
                "h": rows,
            }))
        }
        Format::Text | Format::Csv => slacksdp::symalg::write_matrix_text(&h),
    };
    args.output.emit(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.verb {
        Verb::Solve(a) => cmd_solve(a),
        Verb::Verify(a) => cmd_verify(a),
        Verb::Bench(a) => cmd_bench(a),
        Verb::CheckDerivs(a) => cmd_check(a),
        Verb::GenInstance(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Solver) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            eprintln!("known problems: {}", registered_names().join(", "));
            ExitCode::from(2)
        }
    }
}
