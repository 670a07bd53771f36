//! Augmented-Lagrangian solver for
//!
//! ```text
//! minimize f(z)  s.t.  c(z) = 0,  lower ≤ z ≤ upper.
//! ```
//!
//! The outer loop minimizes `Φ_ρ(z; λ) = f(z) − λᵀc(z) + (ρ/2)‖c(z)‖²` over
//! the box, updates `λ ← λ − ρ c(z)` and grows `ρ` when the constraint
//! violation stalls. The inner loop is a projected Newton method with a
//! Levenberg shift on the free variables and an Armijo search along the
//! projection arc.

mod config;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::nlp::{Bounds, EqualityNlp};

pub use config::SolverConfig;

/// Iterates or objective values beyond this magnitude count as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Smallest line-search step before the inner solve gives up.
pub const MIN_STEP: f64 = 1e-16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    InnerFailure,
    Diverged,
}

/// Evaluation counts of the merit function, its gradient and its Hessian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub functions: usize,
    pub gradients: usize,
    pub hessians: usize,
}

/// State after one outer iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub iteration: usize,
    pub objective: f64,
    pub feasibility: f64,
    pub stationarity: f64,
    pub rho: f64,
    pub inner_iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub problem: String,
    /// Final iterate.
    pub z: Vec<f64>,
    /// Equality multipliers `λ` (Lagrangian `f − λᵀc`).
    pub multipliers: Vec<f64>,
    /// Multipliers of the box; positive at an active lower bound, negative
    /// at an active upper bound.
    pub bound_multipliers: Vec<f64>,
    pub status: SolveStatus,
    /// Outer iterations performed.
    pub iterations: usize,
    pub evals: EvalCounts,
    pub history: Vec<OuterRecord>,
    pub objective: f64,
    /// `‖c(z)‖∞`.
    pub feasibility: f64,
    /// [`stationarity_norm`] at the final iterate.
    pub stationarity: f64,
    /// Whether the starting point had to be projected into the box.
    pub start_clipped: bool,
    pub wall_time: f64,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn point(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.z)
    }

    pub fn multiplier_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.multipliers)
    }

    /// JSON with the timing field zeroed, for reproducibility comparisons.
    pub fn to_json_without_timing(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time = 0.0;
        serde_json::to_string(&copy).expect("plain data serializes")
    }
}

/// `∇f(z) − J(z)ᵀλ`.
pub fn lagrangian_gradient<N: EqualityNlp + ?Sized>(
    nlp: &N,
    z: &DVector<f64>,
    lambda: &DVector<f64>,
) -> DVector<f64> {
    let mut g = nlp.gradient(z);
    if !lambda.is_empty() {
        g -= nlp.jacobian(z).transpose() * lambda;
    }
    g
}

/// `‖P(z − r) − z‖∞` with `r = ∇f − Jᵀλ − ν`: the projected Lagrangian
/// gradient. With `ν = 0` it is the box-projected gradient, which already
/// vanishes at first-order points; passing consistent bound multipliers
/// leaves it unchanged.
pub fn stationarity_norm<N: EqualityNlp + ?Sized>(
    nlp: &N,
    z: &DVector<f64>,
    lambda: &DVector<f64>,
    bound_multipliers: &DVector<f64>,
) -> f64 {
    let r = lagrangian_gradient(nlp, z, lambda) - bound_multipliers;
    nlp.bounds().projected_step(z, &r).amax()
}

/// Bound multipliers read off the Lagrangian gradient at active bounds.
fn bound_multipliers(bounds: &Bounds, z: &DVector<f64>, g: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(z.len(), |i, _| {
        if z[i] <= bounds.lower[i] && g[i] > 0.0 || z[i] >= bounds.upper[i] && g[i] < 0.0 {
            g[i]
        } else {
            0.0
        }
    })
}

fn norm_inf(v: &DVector<f64>) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.amax()
    }
}

/// One evaluation of `Φ`, its gradient and the pieces needed for the Hessian.
struct Merit<'a, N: ?Sized> {
    nlp: &'a N,
    lambda: &'a DVector<f64>,
    rho: f64,
    evals: &'a mut EvalCounts,
}

impl<N: EqualityNlp + ?Sized> Merit<'_, N> {
    fn value(&mut self, z: &DVector<f64>) -> f64 {
        self.evals.functions += 1;
        let c = self.nlp.constraints(z);
        self.nlp.objective(z) - self.lambda.dot(&c) + 0.5 * self.rho * c.norm_squared()
    }

    /// Gradient of Φ and the shifted multipliers `λ − ρc` it was built from.
    fn gradient(&mut self, z: &DVector<f64>) -> (DVector<f64>, DVector<f64>, DMatrix<f64>) {
        self.evals.gradients += 1;
        let c = self.nlp.constraints(z);
        let w = self.lambda - &c * self.rho;
        let jac = self.nlp.jacobian(z);
        let g = self.nlp.gradient(z) - jac.transpose() * &w;
        (g, w, jac)
    }

    fn hessian(&mut self, z: &DVector<f64>, w: &DVector<f64>, jac: &DMatrix<f64>) -> DMatrix<f64> {
        self.evals.hessians += 1;
        let mut h = self.nlp.lagrangian_hessian(z, w);
        h += jac.transpose() * jac * self.rho;
        h
    }
}

enum InnerOutcome {
    Done(usize),
    Stalled(usize),
    Diverged(usize),
}

/// Solves `(H_FF + τI) d = −g_F`, raising `τ` from zero by doubling until
/// the Cholesky factorization succeeds.
fn shifted_newton(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    free: &[usize],
    tau_floor: f64,
    last_tau: &mut f64,
) -> DVector<f64> {
    let k = free.len();
    let hff = DMatrix::from_fn(k, k, |a, b| h[(free[a], free[b])]);
    let gf = DVector::from_fn(k, |a, _| -g[free[a]]);
    let scale = (0..k).fold(1.0_f64, |acc, a| acc.max(hff[(a, a)].abs()));
    let mut tau = 0.0;
    loop {
        let mut m = hff.clone();
        for a in 0..k {
            m[(a, a)] += tau;
        }
        if let Some(ch) = m.cholesky() {
            *last_tau = tau;
            return ch.solve(&gf);
        }
        tau = if tau == 0.0 {
            tau_floor.max(1e-10 * scale).max(0.25 * *last_tau)
        } else {
            2.0 * tau
        };
        if !tau.is_finite() {
            return gf;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn inner_solve<N: EqualityNlp + ?Sized>(
    nlp: &N,
    bounds: &Bounds,
    z: &mut DVector<f64>,
    lambda: &DVector<f64>,
    rho: f64,
    tol: f64,
    cfg: &SolverConfig,
    evals: &mut EvalCounts,
) -> InnerOutcome {
    let mut merit = Merit {
        nlp,
        lambda,
        rho,
        evals,
    };
    let n = z.len();
    let mut phi = merit.value(z);
    let mut last_tau = 0.0;
    for it in 0..cfg.max_inner {
        let (g, w, jac) = merit.gradient(z);
        let pg = bounds.projected_step(z, &g);
        let pg_norm = norm_inf(&pg);
        if pg_norm <= tol {
            return InnerOutcome::Done(it);
        }
        // Variables within eps of a bound with the gradient pushing outward
        // are held fixed; the rest get a Newton step.
        let eps = pg_norm.min(1e-3);
        let fixed = |i: usize| {
            (z[i] <= bounds.lower[i] + eps && g[i] > 0.0)
                || (z[i] >= bounds.upper[i] - eps && g[i] < 0.0)
        };
        let free: Vec<usize> = (0..n).filter(|&i| !fixed(i)).collect();
        let mut d = -&g;
        if !free.is_empty() {
            let h = merit.hessian(z, &w, &jac);
            let df = shifted_newton(&h, &g, &free, cfg.levenberg_min, &mut last_tau);
            for (a, &i) in free.iter().enumerate() {
                d[i] = df[a];
            }
        }

        let mut accepted = None;
        for dir in [d, -&g] {
            if let Some(step) = arc_search(&mut merit, bounds, z, phi, &g, &dir, pg_norm, cfg) {
                accepted = Some(step);
                break;
            }
        }
        match accepted {
            Some((z_new, phi_new)) => {
                *z = z_new;
                phi = phi_new;
            }
            None => return InnerOutcome::Stalled(it),
        }
        if z.amax() > DIVERGENCE_LIMIT || !phi.is_finite() {
            return InnerOutcome::Diverged(it + 1);
        }
    }
    InnerOutcome::Done(cfg.max_inner)
}

/// Armijo backtracking along `α ↦ P(z + αd)`. A step whose merit change is
/// lost in rounding is still accepted when it shrinks the projected
/// gradient.
#[allow(clippy::too_many_arguments)]
fn arc_search<N: EqualityNlp + ?Sized>(
    merit: &mut Merit<'_, N>,
    bounds: &Bounds,
    z: &DVector<f64>,
    phi: f64,
    g: &DVector<f64>,
    d: &DVector<f64>,
    pg_norm: f64,
    cfg: &SolverConfig,
) -> Option<(DVector<f64>, f64)> {
    let noise = 64.0 * f64::EPSILON * (1.0 + phi.abs());
    let mut alpha = 1.0;
    while alpha >= MIN_STEP {
        let trial = bounds.projected(&(z + d * alpha));
        let predicted = g.dot(&(&trial - z));
        if predicted < 0.0 {
            let phi_t = merit.value(&trial);
            if phi_t <= phi + cfg.ls_armijo_c * predicted {
                return Some((trial, phi_t));
            }
            if phi_t <= phi + noise && alpha == 1.0 {
                let (gt, _, _) = merit.gradient(&trial);
                if norm_inf(&bounds.projected_step(&trial, &gt)) < pg_norm {
                    return Some((trial, phi_t));
                }
            }
        }
        alpha *= cfg.ls_backtrack;
    }
    None
}

/// Runs the augmented-Lagrangian method from `start` (projected into the
/// box if necessary).
pub fn solve<N: EqualityNlp + ?Sized>(
    nlp: &N,
    start: &DVector<f64>,
    cfg: &SolverConfig,
) -> SolveResult {
    let clock = Instant::now();
    let bounds = nlp.bounds();
    assert_eq!(start.len(), nlp.dim(), "start point dimension mismatch");
    let mut z = bounds.projected(start);
    let start_clipped = &z != start;
    let mut lambda = DVector::zeros(nlp.num_constraints());
    let mut rho = cfg.rho0;
    let mut evals = EvalCounts::default();
    let mut history = Vec::new();
    let mut feas = norm_inf(&nlp.constraints(&z));
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;

    for outer in 1..=cfg.max_outer {
        iterations = outer;
        let inner_tol = cfg.inner_tol_factor * feas.max(cfg.outer_tol);
        let outcome = inner_solve(
            nlp, &bounds, &mut z, &lambda, rho, inner_tol, cfg, &mut evals,
        );
        let c = nlp.constraints(&z);
        let feas_new = norm_inf(&c);
        lambda -= &c * rho;
        let stat = stationarity_norm(nlp, &z, &lambda, &DVector::zeros(z.len()));
        let objective = nlp.objective(&z);
        let inner_iterations = match outcome {
            InnerOutcome::Done(k) | InnerOutcome::Stalled(k) | InnerOutcome::Diverged(k) => k,
        };
        history.push(OuterRecord {
            iteration: outer,
            objective,
            feasibility: feas_new,
            stationarity: stat,
            rho,
            inner_iterations,
        });
        if matches!(outcome, InnerOutcome::Diverged(_))
            || z.amax() > DIVERGENCE_LIMIT
            || objective.abs() > DIVERGENCE_LIMIT
            || !objective.is_finite()
        {
            status = SolveStatus::Diverged;
            break;
        }
        if feas_new <= cfg.outer_tol && stat <= cfg.outer_tol {
            status = SolveStatus::Converged;
            break;
        }
        if let InnerOutcome::Stalled(_) = outcome {
            status = SolveStatus::InnerFailure;
            break;
        }
        if feas_new > cfg.feas_improvement * feas {
            rho *= cfg.rho_growth;
        }
        feas = feas_new;
    }

    let g = lagrangian_gradient(nlp, &z, &lambda);
    let nu = bound_multipliers(&bounds, &z, &g);
    let feasibility = norm_inf(&nlp.constraints(&z));
    SolveResult {
        problem: nlp.name().to_string(),
        objective: nlp.objective(&z),
        stationarity: stationarity_norm(nlp, &z, &lambda, &nu),
        feasibility,
        z: z.as_slice().to_vec(),
        multipliers: lambda.as_slice().to_vec(),
        bound_multipliers: nu.as_slice().to_vec(),
        status,
        iterations,
        evals,
        history,
        start_clipped,
        wall_time: clock.elapsed().as_secs_f64(),
    }
}
