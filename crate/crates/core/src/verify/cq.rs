use nalgebra::{DMatrix, DVector};

use super::linalg::rank;
use crate::model::{dg_apply, NsdpProblem};
use crate::symalg::{jordan_product, orthonormal_basis, orthonormal_coords, SymMatrix};

/// Subgradient iterations spent by [`mfcq_p1`].
pub const MFCQ_BUDGET: usize = 2000;

/// Margin a certificate direction must achieve in [`mfcq_p1`].
pub const MFCQ_MARGIN: f64 = 1e-8;

/// Nondegeneracy of (P1) at `x`: the map `(C, μ) ↦ ∇G(x)*(U C Uᵀ) + Jh(x)ᵀμ`
/// is injective, where `U` spans `ker G(x)`, so `{U C Uᵀ}` is the orthogonal
/// complement of the lineality space of the tangent cone.
pub fn nondegeneracy_p1<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    rank_tol: f64,
) -> bool {
    let (n, p) = (prob.n(), prob.p());
    let u = prob.matrix_constraint(x).eigen().kernel_basis(rank_tol);
    let k = u.ncols();
    let basis = orthonormal_basis(k);
    let partials = prob.matrix_constraint_partials(x);
    let cols = basis.len() + p;
    let mut a = DMatrix::zeros(n, cols);
    let ut = u.transpose();
    for (c, e) in basis.iter().enumerate() {
        let lifted = e.congruence(&ut);
        for (i, gi) in partials.iter().enumerate() {
            a[(i, c)] = gi.inner(&lifted);
        }
    }
    if p > 0 {
        a.view_mut((0, basis.len()), (n, p))
            .copy_from(&prob.equality_jacobian(x).transpose());
    }
    rank(&a, rank_tol) == cols
}

/// LICQ of (P2) at `(x, Y)`: the map `(W, μ) ↦ (∇G(x)*W + Jh(x)ᵀμ, −2Y∘W)`,
/// the transpose of the constraint Jacobian, is injective.
pub fn licq_p2<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    y: &SymMatrix,
    rank_tol: f64,
) -> bool {
    let (n, p) = (prob.n(), prob.p());
    let basis = orthonormal_basis(prob.m());
    let nn = basis.len();
    let partials = prob.matrix_constraint_partials(x);
    let mut a = DMatrix::zeros(n + nn, nn + p);
    for (c, e) in basis.iter().enumerate() {
        for (i, gi) in partials.iter().enumerate() {
            a[(i, c)] = gi.inner(e);
        }
        let slack = orthonormal_coords(&(&jordan_product(y, e) * -2.0));
        a.view_mut((n, c), (nn, 1)).copy_from(&slack);
    }
    if p > 0 {
        a.view_mut((0, nn), (n, p))
            .copy_from(&prob.equality_jacobian(x).transpose());
    }
    rank(&a, rank_tol) == nn + p
}

/// One-sided MFCQ certificate for the matrix constraint: searches for
/// `‖d‖∞ ≤ 1` with `λ_min(G(x) + ∇G(x)d) > 1e-8` by projected subgradient
/// ascent. `true` is certified by the direction found; `false` only means
/// none was found within [`MFCQ_BUDGET`] iterations.
pub fn mfcq_p1<P: NsdpProblem + ?Sized>(prob: &P, x: &DVector<f64>) -> bool {
    let n = prob.n();
    let g = prob.matrix_constraint(x);
    if prob.m() == 0 || g.min_eigenvalue() > MFCQ_MARGIN {
        return true;
    }
    let partials = prob.matrix_constraint_partials(x);
    let mut d = DVector::zeros(n);
    for k in 0..MFCQ_BUDGET {
        let trial = &g + &dg_apply(prob, x, &d);
        let eig = trial.eigen();
        let lmin = *eig.eigenvalues.last().expect("m > 0");
        if lmin > MFCQ_MARGIN {
            return true;
        }
        // ∂λ_min/∂d_i = uᵀ(∂_iG)u for the bottom eigenvector u.
        let u = eig.eigenvectors.column(eig.dim() - 1).into_owned();
        let s = DVector::from_iterator(
            n,
            partials
                .iter()
                .map(|gi| (u.transpose() * gi.as_matrix() * &u)[(0, 0)]),
        );
        let norm = s.norm();
        if norm == 0.0 {
            return false;
        }
        let step = 1.0 / ((k + 1) as f64).sqrt();
        d += s * (step / norm);
        d.apply(|v| *v = v.clamp(-1.0, 1.0));
    }
    false
}
