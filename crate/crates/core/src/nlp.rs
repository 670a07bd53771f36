//! Equality-constrained nonlinear programs with box bounds.
//!
//! This is the problem class the augmented-Lagrangian solver handles: the
//! squared-slack reformulation of an NSDP lands here, as do the natively
//! formulated slack problems of the benchmark registry.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Per-coordinate box `lower ≤ z ≤ upper`; infinities mean "unbounded".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn free(n: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn is_free(&self) -> bool {
        self.lower.iter().all(|l| *l == f64::NEG_INFINITY)
            && self.upper.iter().all(|u| *u == f64::INFINITY)
    }

    /// Appends `k` unbounded coordinates.
    pub fn extended_free(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.lower.extend(std::iter::repeat_n(f64::NEG_INFINITY, k));
        out.upper.extend(std::iter::repeat_n(f64::INFINITY, k));
        out
    }

    pub fn project(&self, z: &mut DVector<f64>) {
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = zi.clamp(self.lower[i], self.upper[i]);
        }
    }

    pub fn projected(&self, z: &DVector<f64>) -> DVector<f64> {
        let mut out = z.clone();
        self.project(&mut out);
        out
    }

    pub fn contains(&self, z: &DVector<f64>) -> bool {
        self.violation(z) == 0.0
    }

    /// Largest distance of a coordinate outside its interval.
    pub fn violation(&self, z: &DVector<f64>) -> f64 {
        z.iter().enumerate().fold(0.0_f64, |acc, (i, &zi)| {
            acc.max(self.lower[i] - zi).max(zi - self.upper[i])
        })
    }

    /// `P(z − r) − z`: the bound-projected version of a gradient-like vector
    /// `r`. Its norm vanishes exactly at first-order points of the box.
    pub fn projected_step(&self, z: &DVector<f64>, r: &DVector<f64>) -> DVector<f64> {
        let mut trial = z - r;
        self.project(&mut trial);
        trial - z
    }
}

/// `minimize f(z)  s.t.  c(z) = 0,  lower ≤ z ≤ upper`.
///
/// The Lagrangian convention is `f(z) − wᵀc(z)`.
pub trait EqualityNlp: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn num_constraints(&self) -> usize;

    fn bounds(&self) -> Bounds {
        Bounds::free(self.dim())
    }

    /// Default starting point.
    fn start(&self) -> DVector<f64>;

    fn objective(&self, z: &DVector<f64>) -> f64;

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64>;

    fn constraints(&self, z: &DVector<f64>) -> DVector<f64>;

    /// Constraint Jacobian, one row per constraint.
    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64>;

    /// `∇²f(z) − Σ_k w_k ∇²c_k(z)`.
    fn lagrangian_hessian(&self, z: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64>;
}

impl<T: EqualityNlp + ?Sized> EqualityNlp for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn num_constraints(&self) -> usize {
        (**self).num_constraints()
    }
    fn bounds(&self) -> Bounds {
        (**self).bounds()
    }
    fn start(&self) -> DVector<f64> {
        (**self).start()
    }
    fn objective(&self, z: &DVector<f64>) -> f64 {
        (**self).objective(z)
    }
    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        (**self).gradient(z)
    }
    fn constraints(&self, z: &DVector<f64>) -> DVector<f64> {
        (**self).constraints(z)
    }
    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        (**self).jacobian(z)
    }
    fn lagrangian_hessian(&self, z: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        (**self).lagrangian_hessian(z, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projected_step_vanishes_at_box_kkt() {
        let b = Bounds {
            lower: vec![0.0, f64::NEG_INFINITY],
            upper: vec![1.0, f64::INFINITY],
        };
        let z = DVector::from_vec(vec![0.0, 3.0]);
        // Gradient pushes coordinate 0 out of the box: no feasible descent.
        let r = DVector::from_vec(vec![2.0, 0.0]);
        assert_eq!(b.projected_step(&z, &r).amax(), 0.0);
        let r = DVector::from_vec(vec![-2.0, 0.5]);
        let s = b.projected_step(&z, &r);
        assert_eq!(s.as_slice(), &[1.0, -0.5]);
        assert_eq!(b.violation(&DVector::from_vec(vec![1.5, 0.0])), 0.5);
        assert!(b.contains(&z));
    }
}
