//! Optimality certificates for both formulations.
//!
//! (P1) is the conic problem `min f(x) s.t. G(x) ⪰ 0` (with the scalar
//! equalities and bounds of [`NsdpProblem`]); (P2) is its slack form
//! `min f(x) s.t. G(x) = Y∘Y`. Every checker takes explicit tolerances and
//! extracts subspaces as orthonormal bases at a relative rank tolerance.

mod cq;
mod linalg;
mod second_order;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{lagrangian_grad, NsdpProblem};
use crate::symalg::{
    default_rank_tol, jordan_product, numeric_rank, orthonormal_basis, orthonormal_coords,
    pseudo_inverse, SymMatrix,
};

pub use cq::{licq_p2, mfcq_p1, nondegeneracy_p1};
pub use linalg::{min_eigenvalue, null_space, rank, singular_values};
pub use second_order::{
    critical_subspace, sonc_nlp, sonc_sdp, sosc_nlp, sosc_sdp, Condition, SecondOrderReport,
};

/// Rank tolerance used alongside a residual tolerance `tol`.
pub fn rank_tol_for(tol: f64, m: usize) -> f64 {
    tol.max(default_rank_tol(m))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KktReport {
    /// ∞-norm of the box-projected `∇f − ∇G*Λ − Jhᵀμ`.
    pub stationarity_residual: f64,
    /// `max(0, −λ_min(Λ))`; always 0 for the slack form, which has no sign
    /// condition.
    pub dual_feas_violation: f64,
    /// (P1): `max(0, −λ_min(G)) + ‖h‖∞ + bound violation`.
    /// (P2): `‖G − Y∘Y‖_F + ‖h‖∞ + bound violation`.
    pub primal_feas_violation: f64,
    /// (P1): `‖Λ∘G‖_F`. (P2): `‖Λ∘Y‖_F`.
    pub complementarity_residual: f64,
    pub strict_complementarity: bool,
    pub rank_g: usize,
    pub rank_lambda: usize,
    pub tol: f64,
    pub verdict: bool,
}

impl KktReport {
    pub fn worst_residual(&self) -> f64 {
        self.stationarity_residual
            .max(self.dual_feas_violation)
            .max(self.primal_feas_violation)
            .max(self.complementarity_residual)
    }
}

fn check_dims<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    lambda: &SymMatrix,
    mu: &DVector<f64>,
) {
    assert_eq!(x.len(), prob.n(), "point dimension mismatch");
    assert_eq!(lambda.dim(), prob.m(), "multiplier order mismatch");
    assert_eq!(mu.len(), prob.p(), "equality multiplier length mismatch");
}

fn stationarity<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    lambda: &SymMatrix,
    mu: &DVector<f64>,
) -> f64 {
    let r = lagrangian_grad(prob, x, lambda, mu);
    let s = prob.bounds().projected_step(x, &r);
    if s.is_empty() {
        0.0
    } else {
        s.amax()
    }
}

fn equality_and_bounds<P: NsdpProblem + ?Sized>(prob: &P, x: &DVector<f64>) -> f64 {
    let h = prob.equalities(x);
    let hn = if h.is_empty() { 0.0 } else { h.amax() };
    hn + prob.bounds().violation(x)
}

/// KKT residuals of (P1) at `(x, Λ, μ)`.
pub fn kkt_p1<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    lambda: &SymMatrix,
    mu: &DVector<f64>,
    tol: f64,
) -> KktReport {
    check_dims(prob, x, lambda, mu);
    let m = prob.m();
    let g = prob.matrix_constraint(x);
    let rank_tol = rank_tol_for(tol, m);
    let neg = |a: &SymMatrix| {
        if m == 0 {
            0.0
        } else {
            (-a.min_eigenvalue()).max(0.0)
        }
    };
    let mut r = KktReport {
        stationarity_residual: stationarity(prob, x, lambda, mu),
        dual_feas_violation: neg(lambda),
        primal_feas_violation: neg(&g) + equality_and_bounds(prob, x),
        complementarity_residual: jordan_product(lambda, &g).frobenius_norm(),
        strict_complementarity: false,
        rank_g: numeric_rank(&g, rank_tol),
        rank_lambda: numeric_rank(lambda, rank_tol),
        tol,
        verdict: false,
    };
    r.strict_complementarity = r.rank_g + r.rank_lambda == m;
    r.verdict = r.worst_residual() <= tol;
    r
}

/// KKT residuals of (P2) at `(x, Y, Λ, μ)`.
pub fn kkt_p2<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    y: &SymMatrix,
    lambda: &SymMatrix,
    mu: &DVector<f64>,
    tol: f64,
) -> KktReport {
    check_dims(prob, x, lambda, mu);
    assert_eq!(y.dim(), prob.m(), "slack order mismatch");
    let m = prob.m();
    let g = prob.matrix_constraint(x);
    let rank_tol = rank_tol_for(tol, m);
    let mut r = KktReport {
        stationarity_residual: stationarity(prob, x, lambda, mu),
        dual_feas_violation: 0.0,
        primal_feas_violation: (&g - &y.square()).frobenius_norm() + equality_and_bounds(prob, x),
        complementarity_residual: jordan_product(lambda, y).frobenius_norm(),
        strict_complementarity: false,
        rank_g: numeric_rank(&g, rank_tol),
        rank_lambda: numeric_rank(lambda, rank_tol),
        tol,
        verdict: false,
    };
    r.strict_complementarity = r.rank_g + r.rank_lambda == m;
    r.verdict = r.worst_residual() <= tol;
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PhiMembership {
    /// `⟨W∘W, Λ⟩ > 0` on `ker L_Y \ {0}`.
    pub member: bool,
    /// `rank Λ = m − rank Y`.
    pub rank_check: bool,
    /// No two nonzero eigenvalues of `Y` sum to zero.
    pub eig_sum_check: bool,
}

/// Matrix of `L_Y` in orthonormal coordinates of S^m.
fn lyap_matrix(y: &SymMatrix) -> DMatrix<f64> {
    let basis = orthonormal_basis(y.dim());
    let nn = basis.len();
    let mut l = DMatrix::zeros(nn, nn);
    for (b, e) in basis.iter().enumerate() {
        l.set_column(b, &orthonormal_coords(&jordan_product(y, e)));
    }
    l
}

/// Combines orthonormal-coordinate vectors (columns of `coords`) into
/// matrices.
fn matrices_from_coords(coords: &DMatrix<f64>, m: usize) -> Vec<SymMatrix> {
    let basis = orthonormal_basis(m);
    coords
        .column_iter()
        .map(|col| {
            let mut w = SymMatrix::zeros(m);
            for (c, e) in col.iter().zip(&basis) {
                if *c != 0.0 {
                    w += &(e * *c);
                }
            }
            w
        })
        .collect()
}

/// Tests `Y ∈ Φ(Λ)`: the quadratic form `W ↦ ⟨W∘W, Λ⟩` restricted to
/// `ker L_Y` must be positive definite.
pub fn phi_membership(lambda: &SymMatrix, y: &SymMatrix, tol: f64) -> Result<PhiMembership> {
    assert_eq!(lambda.dim(), y.dim(), "phi_membership: order mismatch");
    let m = y.dim();
    let comm = jordan_product(y, lambda).frobenius_norm();
    let scale = 1.0_f64.max(y.frobenius_norm() * lambda.frobenius_norm());
    if comm > tol * scale {
        return Err(Error::NotCommuting(comm));
    }
    let kernel = null_space(&lyap_matrix(y), tol);
    let ws = matrices_from_coords(&kernel, m);
    let k = ws.len();
    let q = DMatrix::from_fn(k, k, |a, b| jordan_product(&ws[a], &ws[b]).inner(lambda));
    let member = min_eigenvalue(&q) > tol;

    let rank_tol = rank_tol_for(tol, m);
    let rank_check = numeric_rank(lambda, rank_tol) + numeric_rank(y, rank_tol) == m;

    let eig = y.eigen();
    let thr = eig.rank_threshold(rank_tol);
    let nz: Vec<f64> = eig
        .eigenvalues
        .iter()
        .copied()
        .filter(|l| l.abs() > thr)
        .collect();
    let eig_sum_check =
        (0..nz.len()).all(|i| (i + 1..nz.len()).all(|j| (nz[i] + nz[j]).abs() > thr));
    Ok(PhiMembership {
        member,
        rank_check,
        eig_sum_check,
    })
}

/// `H(x, Λ)_ij = 2 tr(∂_iG · G† · ∂_jG · Λ)`, symmetrized.
pub fn h_matrix<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    lambda: &SymMatrix,
    rank_tol: f64,
) -> DMatrix<f64> {
    let n = prob.n();
    let g = prob.matrix_constraint(x);
    let gp = pseudo_inverse(&g, rank_tol);
    let partials = prob.matrix_constraint_partials(x);
    // Left factors ∂_iG · G† and right factors ∂_jG · Λ.
    let left: Vec<DMatrix<f64>> = partials
        .iter()
        .map(|gi| gi.as_matrix() * gp.as_matrix())
        .collect();
    let right: Vec<DMatrix<f64>> = partials
        .iter()
        .map(|gj| gj.as_matrix() * lambda.as_matrix())
        .collect();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // tr(AB) = Σ A_rs B_sr
            h[(i, j)] = 2.0 * left[i].component_mul(&right[j].transpose()).sum();
        }
    }
    (&h + h.transpose()) * 0.5
}
