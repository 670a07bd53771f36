//! Finite-difference validation of derivative callbacks.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{adjoint_of, dg_apply, NsdpProblem};
use crate::nlp::EqualityNlp;
use crate::symalg::{svec, SymMatrix};

/// Largest relative error a derivative check may report and still pass.
pub const DERIVATIVE_PASS_THRESHOLD: f64 = 1e-5;

const DIRECTIONS: usize = 5;

fn step(xi: f64) -> f64 {
    1e-6 * (1.0 + xi.abs())
}

/// Central-difference Jacobian of a vector map, one column per coordinate.
pub fn central_jacobian<F>(f: F, x: &DVector<f64>) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let h = step(x[i]);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        cols.push((f(&xp) - f(&xm)) / (2.0 * h));
    }
    let rows = cols.first().map_or(0, |c| c.len());
    DMatrix::from_fn(rows, n, |r, c| cols[c][r])
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeCheck {
    pub name: String,
    pub max_rel_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeReport {
    pub problem: String,
    pub seed: u64,
    pub threshold: f64,
    pub checks: Vec<DerivativeCheck>,
}

impl DerivativeReport {
    pub fn max_error(&self) -> f64 {
        self.checks.iter().fold(0.0, |a, c| a.max(c.max_rel_error))
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.max_rel_error < self.threshold)
    }

    pub fn failures(&self) -> Vec<&DerivativeCheck> {
        self.checks
            .iter()
            .filter(|c| c.max_rel_error.is_nan() || c.max_rel_error >= self.threshold)
            .collect()
    }
}

/// Accumulates the worst error of one callback over several directions.
struct Tracker {
    checks: Vec<DerivativeCheck>,
}

impl Tracker {
    fn record(&mut self, name: &str, analytic: &[f64], fd: &[f64], wnorm: f64) {
        let err = relative_error(analytic, fd, wnorm);
        match self.checks.iter_mut().find(|c| c.name == name) {
            Some(c) => c.max_rel_error = c.max_rel_error.max(err),
            None => self.checks.push(DerivativeCheck {
                name: name.to_string(),
                max_rel_error: err,
            }),
        }
    }
}

/// Both inputs are directional changes along a step of length `wnorm`; they
/// are rescaled to unit step and compared relative to `max(1, |a|, |b|)`.
fn relative_error(a: &[f64], b: &[f64], wnorm: f64) -> f64 {
    if wnorm == 0.0 {
        return 0.0;
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt() / wnorm;
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let err = norm(&diff) / norm(a).max(norm(b)).max(1.0);
    if err.is_nan() {
        f64::INFINITY
    } else {
        err
    }
}

/// Random direction scaled coordinatewise by the finite-difference step.
fn scaled_direction(rng: &mut ChaCha8Rng, x: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(x.len(), |i, _| rng.gen_range(-1.0..1.0) * step(x[i]))
}

fn central<T, F>(f: F, x: &DVector<f64>, w: &DVector<f64>) -> (T, T)
where
    F: Fn(&DVector<f64>) -> T,
{
    (f(&(x + w)), f(&(x - w)))
}

/// Compares every derivative callback of `prob` against central differences
/// along 5 seeded random directions.
///
/// Finite-difference probes may step slightly outside the bounds; the
/// callbacks are expected to be defined there.
pub fn check_derivatives<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    seed: u64,
) -> DerivativeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tracker { checks: Vec::new() };
    let m = prob.m();
    let lambda = SymMatrix::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
    let mu = DVector::from_fn(prob.p(), |_, _| rng.gen_range(-1.0..1.0));
    for _ in 0..DIRECTIONS {
        let w = scaled_direction(&mut rng, x);
        let wn = w.norm();

        let (fp, fm) = central(|y| prob.objective(y), x, &w);
        t.record(
            "gradient",
            &[prob.gradient(x).dot(&w)],
            &[(fp - fm) / 2.0],
            wn,
        );

        let (gp, gm) = central(|y| prob.gradient(y), x, &w);
        let an = prob.hessian(x) * &w;
        t.record("hessian", an.as_slice(), ((gp - gm) / 2.0).as_slice(), wn);

        if m > 0 {
            let (gp, gm) = central(|y| prob.matrix_constraint(y), x, &w);
            let fd = svec(&((&gp - &gm) * 0.5));
            t.record(
                "matrix_constraint_partials",
                &svec(&dg_apply(prob, x, &w)),
                &fd,
                wn,
            );

            let (ap, am) = central(
                |y| adjoint_of(&prob.matrix_constraint_partials(y), &lambda),
                x,
                &w,
            );
            let an = prob.matrix_constraint_curvature(x, &lambda) * &w;
            t.record(
                "matrix_constraint_curvature",
                an.as_slice(),
                ((ap - am) / 2.0).as_slice(),
                wn,
            );
        }

        if prob.p() > 0 {
            let (hp, hm) = central(|y| prob.equalities(y), x, &w);
            let an = prob.equality_jacobian(x) * &w;
            t.record(
                "equality_jacobian",
                an.as_slice(),
                ((hp - hm) / 2.0).as_slice(),
                wn,
            );

            let (jp, jm) = central(|y| prob.equality_jacobian(y).transpose() * &mu, x, &w);
            let an = prob.equality_curvature(x, &mu) * &w;
            t.record(
                "equality_curvature",
                an.as_slice(),
                ((jp - jm) / 2.0).as_slice(),
                wn,
            );
        }
    }
    DerivativeReport {
        problem: prob.name().to_string(),
        seed,
        threshold: DERIVATIVE_PASS_THRESHOLD,
        checks: t.checks,
    }
}

/// The same check for an equality-constrained NLP: gradient, constraint
/// Jacobian and the multiplier-weighted Lagrangian Hessian.
pub fn check_nlp_derivatives<N: EqualityNlp + ?Sized>(
    nlp: &N,
    z: &DVector<f64>,
    seed: u64,
) -> DerivativeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tracker { checks: Vec::new() };
    let weights = DVector::from_fn(nlp.num_constraints(), |_, _| rng.gen_range(-1.0..1.0));
    for _ in 0..DIRECTIONS {
        let w = scaled_direction(&mut rng, z);
        let wn = w.norm();

        let (fp, fm) = central(|y| nlp.objective(y), z, &w);
        t.record(
            "gradient",
            &[nlp.gradient(z).dot(&w)],
            &[(fp - fm) / 2.0],
            wn,
        );

        let (cp, cm) = central(|y| nlp.constraints(y), z, &w);
        let an = nlp.jacobian(z) * &w;
        t.record("jacobian", an.as_slice(), ((cp - cm) / 2.0).as_slice(), wn);

        let lag_grad = |y: &DVector<f64>| nlp.gradient(y) - nlp.jacobian(y).transpose() * &weights;
        let (lp, lm) = central(lag_grad, z, &w);
        let an = nlp.lagrangian_hessian(z, &weights) * &w;
        t.record(
            "lagrangian_hessian",
            an.as_slice(),
            ((lp - lm) / 2.0).as_slice(),
            wn,
        );
    }
    DerivativeReport {
        problem: nlp.name().to_string(),
        seed,
        threshold: DERIVATIVE_PASS_THRESHOLD,
        checks: t.checks,
    }
}
