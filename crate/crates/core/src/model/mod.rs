//! Nonlinear semidefinite programs
//!
//! ```text
//! minimize f(x)  s.t.  G(x) ⪰ 0,  h(x) = 0,  lower ≤ x ≤ upper
//! ```
//!
//! described by derivative callbacks. The matrix constraint is the cone
//! constraint proper; scalar equalities and bounds exist because the
//! benchmark problems need them and are carried as separate multiplier
//! blocks everywhere downstream.

mod affine;
mod derivs;
mod registry;

use nalgebra::{DMatrix, DVector};

use crate::nlp::Bounds;
use crate::symalg::SymMatrix;

pub use affine::AffineProblem;
pub use derivs::{
    central_jacobian, check_derivatives, check_nlp_derivatives, DerivativeCheck, DerivativeReport,
    DERIVATIVE_PASS_THRESHOLD,
};
pub use registry::{lookup, registered_names, Registered, RegistryOptions};

/// A (P1)-form problem. Callbacks must be pure functions of their arguments.
pub trait NsdpProblem: Send + Sync {
    fn name(&self) -> &str;

    /// Number of decision variables.
    fn n(&self) -> usize;

    /// Order of the matrix constraint.
    fn m(&self) -> usize;

    /// Number of scalar equality constraints.
    fn p(&self) -> usize {
        0
    }

    fn bounds(&self) -> Bounds {
        Bounds::free(self.n())
    }

    /// Default starting point.
    fn start(&self) -> DVector<f64>;

    fn objective(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// `G(x)`.
    fn matrix_constraint(&self, x: &DVector<f64>) -> SymMatrix;

    /// The partial derivative matrices `∂G/∂x_i`, `i = 0..n`.
    fn matrix_constraint_partials(&self, x: &DVector<f64>) -> Vec<SymMatrix>;

    /// The `n×n` matrix with entries `⟨Λ, ∂²G/∂x_i∂x_j⟩`.
    ///
    /// Defaults to central differences of `x ↦ ∇G(x)*Λ`; affine maps should
    /// override it with zeros.
    fn matrix_constraint_curvature(&self, x: &DVector<f64>, lambda: &SymMatrix) -> DMatrix<f64> {
        let jac = central_jacobian(
            |y| adjoint_of(&self.matrix_constraint_partials(y), lambda),
            x,
        );
        symmetric_part(&jac)
    }

    /// `h(x)`.
    fn equalities(&self, _x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(0)
    }

    /// Jacobian of `h`, one row per equality.
    fn equality_jacobian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(0, self.n())
    }

    /// `Σ_k μ_k ∇²h_k(x)`; defaults to central differences of `Jh(x)ᵀμ`.
    fn equality_curvature(&self, x: &DVector<f64>, mu: &DVector<f64>) -> DMatrix<f64> {
        if self.p() == 0 {
            return DMatrix::zeros(self.n(), self.n());
        }
        let jac = central_jacobian(|y| self.equality_jacobian(y).transpose() * mu, x);
        symmetric_part(&jac)
    }
}

pub(crate) fn symmetric_part(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub(crate) fn adjoint_of(partials: &[SymMatrix], z: &SymMatrix) -> DVector<f64> {
    DVector::from_iterator(partials.len(), partials.iter().map(|gi| gi.inner(z)))
}

/// `∇G(x)v = Σ_i v_i ∂G/∂x_i`.
pub fn dg_apply<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    v: &DVector<f64>,
) -> SymMatrix {
    let partials = prob.matrix_constraint_partials(x);
    let mut out = SymMatrix::zeros(prob.m());
    for (gi, vi) in partials.iter().zip(v.iter()) {
        if *vi != 0.0 {
            out += &(gi * *vi);
        }
    }
    out
}

/// `∇G(x)*Z = (⟨∂G/∂x_1, Z⟩, …, ⟨∂G/∂x_n, Z⟩)`.
pub fn dg_adjoint<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    z: &SymMatrix,
) -> DVector<f64> {
    assert_eq!(z.dim(), prob.m(), "dg_adjoint: multiplier order mismatch");
    adjoint_of(&prob.matrix_constraint_partials(x), z)
}

/// Hessian of `L(x, Λ, μ) = f(x) − ⟨G(x), Λ⟩ − μᵀh(x)` in `x`.
pub fn lagrangian_hess<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    lambda: &SymMatrix,
    mu: &DVector<f64>,
) -> DMatrix<f64> {
    assert_eq!(
        lambda.dim(),
        prob.m(),
        "lagrangian_hess: multiplier order mismatch"
    );
    let mut h = prob.hessian(x);
    if lambda.max_abs() > 0.0 {
        h -= prob.matrix_constraint_curvature(x, lambda);
    }
    if prob.p() > 0 && mu.amax() > 0.0 {
        h -= prob.equality_curvature(x, mu);
    }
    h
}

/// `∇f(x) − ∇G(x)*Λ − Jh(x)ᵀμ`, the Lagrangian gradient before bound terms.
pub fn lagrangian_grad<P: NsdpProblem + ?Sized>(
    prob: &P,
    x: &DVector<f64>,
    lambda: &SymMatrix,
    mu: &DVector<f64>,
) -> DVector<f64> {
    let mut g = prob.gradient(x) - dg_adjoint(prob, x, lambda);
    if prob.p() > 0 {
        g -= prob.equality_jacobian(x).transpose() * mu;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symalg::smat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// min x1² + x1 x2 + x2³  s.t.  G(x) = [[x1², x1 x2], [x1 x2, 1 + x2]] ⪰ 0,
    /// h(x) = x1 + x2² − 1.
    struct Toy;

    impl NsdpProblem for Toy {
        fn name(&self) -> &str {
            "toy"
        }
        fn n(&self) -> usize {
            2
        }
        fn m(&self) -> usize {
            2
        }
        fn p(&self) -> usize {
            1
        }
        fn start(&self) -> DVector<f64> {
            DVector::from_vec(vec![0.5, 0.5])
        }
        fn objective(&self, x: &DVector<f64>) -> f64 {
            x[0] * x[0] + x[0] * x[1] + x[1].powi(3)
        }
        fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_vec(vec![2.0 * x[0] + x[1], x[0] + 3.0 * x[1] * x[1]])
        }
        fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 6.0 * x[1]])
        }
        fn matrix_constraint(&self, x: &DVector<f64>) -> SymMatrix {
            smat(&[x[0] * x[0], x[0] * x[1], 1.0 + x[1]]).unwrap()
        }
        fn matrix_constraint_partials(&self, x: &DVector<f64>) -> Vec<SymMatrix> {
            vec![
                smat(&[2.0 * x[0], x[1], 0.0]).unwrap(),
                smat(&[0.0, x[0], 1.0]).unwrap(),
            ]
        }
        fn equalities(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_vec(vec![x[0] + x[1] * x[1] - 1.0])
        }
        fn equality_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::from_row_slice(1, 2, &[1.0, 2.0 * x[1]])
        }
    }

    #[test]
    fn dg_apply_examples() {
        let x = DVector::from_vec(vec![0.3, -0.7]);
        assert_eq!(dg_apply(&Toy, &x, &DVector::zeros(2)), SymMatrix::zeros(2));
        let e1 = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(
            dg_apply(&Toy, &x, &e1),
            Toy.matrix_constraint_partials(&x)[1]
        );
        let v = DVector::from_vec(vec![0.4, -1.1]);
        let eps = 1e-6;
        let fd = (&Toy.matrix_constraint(&(&x + &v * eps))
            - &Toy.matrix_constraint(&(&x - &v * eps)))
            * (0.5 / eps);
        let an = dg_apply(&Toy, &x, &v);
        assert!((&fd - &an).frobenius_norm() < 1e-5 * an.frobenius_norm());
    }

    #[test]
    fn adjoint_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = DVector::from_fn(2, |_, _| rng.gen_range(-2.0..2.0));
            let v = DVector::from_fn(2, |_, _| rng.gen_range(-2.0..2.0));
            let z = smat(&[rng.gen(), rng.gen(), rng.gen()]).unwrap();
            let lhs = dg_apply(&Toy, &x, &v).inner(&z);
            let rhs = v.dot(&dg_adjoint(&Toy, &x, &z));
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }
        let x = Toy.start();
        assert_eq!(dg_adjoint(&Toy, &x, &SymMatrix::zeros(2)).amax(), 0.0);
    }

    #[test]
    fn lagrangian_hessian_matches_finite_differences() {
        let x = DVector::from_vec(vec![0.8, -0.4]);
        let lambda = smat(&[1.5, -0.3, 0.7]).unwrap();
        let mu = DVector::from_vec(vec![0.9]);
        assert_eq!(
            lagrangian_hess(&Toy, &x, &SymMatrix::zeros(2), &DVector::zeros(1)),
            Toy.hessian(&x)
        );
        let an = lagrangian_hess(&Toy, &x, &lambda, &mu);
        let fd = central_jacobian(|y| lagrangian_grad(&Toy, y, &lambda, &mu), &x);
        assert!((&an - &fd).norm() < 1e-5 * an.norm());
        // Analytic curvature of G contracted with Λ: only ∂²G/∂x1² = 2E11 and
        // ∂²G/∂x1∂x2 = E12 + E21 are nonzero.
        let expect = DMatrix::from_row_slice(
            2,
            2,
            &[
                2.0 * lambda[(0, 0)],
                2.0 * lambda[(0, 1)],
                2.0 * lambda[(0, 1)],
                0.0,
            ],
        );
        let sigma = Toy.matrix_constraint_curvature(&x, &lambda);
        assert!((sigma - expect).norm() < 1e-6);
    }
}
