use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::linalg::{min_eigenvalue, null_space, sym_norm};
use super::{h_matrix, kkt_p1, kkt_p2, rank_tol_for, KktReport};
use crate::error::{Error, Result};
use crate::model::{lagrangian_hess, NsdpProblem};
use crate::symalg::{
    jordan_product, numeric_rank, orthonormal_basis, orthonormal_coords, SymMatrix,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum Condition {
    #[serde(rename = "SOSC_SDP")]
    SoscSdp,
    #[serde(rename = "SONC_SDP")]
    SoncSdp,
    #[serde(rename = "SOSC_NLP")]
    SoscNlp,
    #[serde(rename = "SONC_NLP")]
    SoncNlp,
}

impl Condition {
    fn strict(self) -> bool {
        matches!(self, Condition::SoscSdp | Condition::SoscNlp)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecondOrderReport {
    pub condition: Condition,
    pub subspace_dim: usize,
    /// `+∞` when the subspace is `{0}`.
    pub min_reduced_eigenvalue: f64,
    /// `εpd = tol·(1 + ‖M‖₂)`; SOSC needs `λ_min > εpd`, SONC `λ_min ≥ −εpd`.
    pub threshold: f64,
    pub verdict: bool,
    /// `H(x, Λ)`, row by row (SDP conditions only).
    pub h_matrix: Option<Vec<Vec<f64>>>,
}

fn require_kkt(r: KktReport) -> Result<()> {
    if r.verdict {
        Ok(())
    } else {
        Err(Error::NotKkt {
            tol: r.tol,
            residual: r.worst_residual(),
        })
    }
}

fn active_bounds<P: NsdpProblem + ?Sized>(prob: &P, x: &DVector<f64>, rank_tol: f64) -> Vec<usize> {
    let b = prob.bounds();
    (0..x.len())
        .filter(|&i| {
            let near = |v: f64| v.is_finite() && (x[i] - v).abs() <= rank_tol * (1.0 + v.abs());
            near(b.lower[i]) || near(b.upper[i])
        })
        .collect()
}

/// Orthonormal basis of the critical cone under strict complementarity:
/// `{d : Uᵀ(∇G(x)d)U = 0, Jh(x)d = 0, d_i = 0 on active bounds}` with `U`
/// spanning `ker G(x)`.
pub fn critical_subspace<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    lambda: &SymMatrix,
    rank_tol: f64,
) -> Result<DMatrix<f64>> {
    let (n, m, p) = (prob.n(), prob.m(), prob.p());
    let g = prob.matrix_constraint(x);
    let rank_g = numeric_rank(&g, rank_tol);
    let rank_lambda = numeric_rank(lambda, rank_tol);
    if rank_g + rank_lambda != m {
        return Err(Error::StrictComplementarityRequired {
            rank_g,
            rank_lambda,
            m,
        });
    }
    let u = g.eigen().kernel_basis(rank_tol);
    let k = u.ncols();
    let nk = k * (k + 1) / 2;
    let active = active_bounds(prob, x, rank_tol);
    let mut a = DMatrix::zeros(nk + p + active.len(), n);
    for (i, gi) in prob.matrix_constraint_partials(x).iter().enumerate() {
        a.view_mut((0, i), (nk, 1))
            .copy_from(&orthonormal_coords(&gi.congruence(&u)));
    }
    if p > 0 {
        a.view_mut((nk, 0), (p, n))
            .copy_from(&prob.equality_jacobian(x));
    }
    for (r, &i) in active.iter().enumerate() {
        a[(nk + p + r, i)] = 1.0;
    }
    Ok(null_space(&a, rank_tol))
}

fn reduce(
    condition: Condition,
    form: &DMatrix<f64>,
    basis: &DMatrix<f64>,
    tol: f64,
    h: Option<&DMatrix<f64>>,
) -> SecondOrderReport {
    let threshold = tol * (1.0 + sym_norm(form));
    let reduced = basis.transpose() * form * basis;
    let lmin = min_eigenvalue(&reduced);
    let verdict = if condition.strict() {
        lmin > threshold
    } else {
        lmin >= -threshold
    };
    SecondOrderReport {
        condition,
        subspace_dim: basis.ncols(),
        min_reduced_eigenvalue: lmin,
        threshold,
        verdict,
        h_matrix: h.map(|h| h.row_iter().map(|r| r.iter().copied().collect()).collect()),
    }
}

fn sdp_condition<P: NsdpProblem + ?Sized>(
    condition: Condition,
    prob: &P,
    x: &DVector<f64>,
    lambda: &SymMatrix,
    mu: &DVector<f64>,
    tol: f64,
) -> Result<SecondOrderReport> {
    require_kkt(kkt_p1(prob, x, lambda, mu, tol))?;
    let rank_tol = rank_tol_for(tol, prob.m());
    let basis = critical_subspace(prob, x, lambda, rank_tol)?;
    let h = h_matrix(prob, x, lambda, rank_tol);
    let form = lagrangian_hess(prob, x, lambda, mu) + &h;
    Ok(reduce(condition, &form, &basis, tol, Some(&h)))
}

/// Second-order sufficient condition of (P1):
/// `⟨(∇²L + H(x,Λ))d, d⟩ > 0` on the critical subspace.
pub fn sosc_sdp<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    lambda: &SymMatrix,
    mu: &DVector<f64>,
    tol: f64,
) -> Result<SecondOrderReport> {
    sdp_condition(Condition::SoscSdp, prob, x, lambda, mu, tol)
}

/// Second-order necessary condition of (P1): the same form `≥ 0`.
pub fn sonc_sdp<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    lambda: &SymMatrix,
    mu: &DVector<f64>,
    tol: f64,
) -> Result<SecondOrderReport> {
    sdp_condition(Condition::SoncSdp, prob, x, lambda, mu, tol)
}

fn nlp_condition<P: NsdpProblem + ?Sized>(
    condition: Condition,
    prob: &P,
    x: &DVector<f64>,
    y: &SymMatrix,
    lambda: &SymMatrix,
    mu: &DVector<f64>,
    tol: f64,
) -> Result<SecondOrderReport> {
    require_kkt(kkt_p2(prob, x, y, lambda, mu, tol))?;
    let (n, m, p) = (prob.n(), prob.m(), prob.p());
    let rank_tol = rank_tol_for(tol, m);
    let basis = orthonormal_basis(m);
    let nn = basis.len();

    // Q(v, W) = ⟨∇²L v, v⟩ + 2⟨W∘W, Λ⟩ in (v, orthonormal W) coordinates.
    let mut form = DMatrix::zeros(n + nn, n + nn);
    form.view_mut((0, 0), (n, n))
        .copy_from(&lagrangian_hess(prob, x, lambda, mu));
    for a in 0..nn {
        for b in a..nn {
            let v = 2.0 * jordan_product(&basis[a], &basis[b]).inner(lambda);
            form[(n + a, n + b)] = v;
            form[(n + b, n + a)] = v;
        }
    }

    // Linearized constraints (v, W) ↦ (∇G v − 2 Y∘W, Jh v, v_active).
    let active = active_bounds(prob, x, rank_tol);
    let mut a = DMatrix::zeros(nn + p + active.len(), n + nn);
    for (i, gi) in prob.matrix_constraint_partials(x).iter().enumerate() {
        a.view_mut((0, i), (nn, 1))
            .copy_from(&orthonormal_coords(gi));
    }
    for (b, e) in basis.iter().enumerate() {
        let col = orthonormal_coords(&(&jordan_product(y, e) * -2.0));
        a.view_mut((0, n + b), (nn, 1)).copy_from(&col);
    }
    if p > 0 {
        a.view_mut((nn, 0), (p, n))
            .copy_from(&prob.equality_jacobian(x));
    }
    for (r, &i) in active.iter().enumerate() {
        a[(nn + p + r, i)] = 1.0;
    }
    let z = null_space(&a, rank_tol);
    Ok(reduce(condition, &form, &z, tol, None))
}

/// Second-order sufficient condition of (P2):
/// `⟨∇²L v, v⟩ + 2⟨W∘W, Λ⟩ > 0` whenever `∇G(x)v − 2Y∘W = 0`, `Jh v = 0`.
pub fn sosc_nlp<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    y: &SymMatrix,
    lambda: &SymMatrix,
    mu: &DVector<f64>,
    tol: f64,
) -> Result<SecondOrderReport> {
    nlp_condition(Condition::SoscNlp, prob, x, y, lambda, mu, tol)
}

/// Second-order necessary condition of (P2): the same form `≥ 0`.
pub fn sonc_nlp<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    y: &SymMatrix,
    lambda: &SymMatrix,
    mu: &DVector<f64>,
    tol: f64,
) -> Result<SecondOrderReport> {
    nlp_condition(Condition::SoncNlp, prob, x, y, lambda, mu, tol)
}
