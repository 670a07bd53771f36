//! Dense symmetric-matrix algebra over the space S^m.
//!
//! [`SymMatrix`] keeps symmetry structural: every constructor writes one
//! triangle and mirrors it, so `a[(i, j)] == a[(j, i)]` holds bit-for-bit.
//! All inner products on S^m are trace inner products `⟨A, B⟩ = tr(AB)`.

mod packed;
mod spectral;

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use nalgebra::DMatrix;

pub use packed::{
    from_orthonormal_coords, jordan_square_hessian, orthonormal_basis, orthonormal_coords,
    packed_dim, packed_order, read_matrix_text, smat, svec, svec_basis, svec_index, svec_pairing,
    write_matrix_text,
};
pub use spectral::{
    default_rank_tol, lyap_invertible, lyap_solve, numeric_rank, project_psd, psd_sqrt,
    pseudo_inverse, SpectralDecomposition,
};

/// Dense real symmetric matrix.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl SymMatrix {
    pub fn zeros(m: usize) -> Self {
        Self {
            data: DMatrix::zeros(m, m),
        }
    }

    pub fn identity(m: usize) -> Self {
        Self {
            data: DMatrix::identity(m, m),
        }
    }

    pub fn scaled_identity(m: usize, alpha: f64) -> Self {
        Self::identity(m) * alpha
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let m = diag.len();
        Self::from_fn(m, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Builds a matrix from `f(i, j)` evaluated on the lower triangle (`i >= j`).
    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = DMatrix::zeros(m, m);
        for j in 0..m {
            for i in j..m {
                let v = f(i, j);
                data[(i, j)] = v;
                data[(j, i)] = v;
            }
        }
        Self { data }
    }

    /// Takes the lower triangle of a square matrix as authoritative.
    ///
    /// # Panics
    /// If `mat` is not square.
    pub fn from_lower(mat: &DMatrix<f64>) -> Self {
        assert!(mat.is_square(), "from_lower needs a square matrix");
        Self::from_fn(mat.nrows(), |i, j| mat[(i, j)])
    }

    /// Symmetric part `(A + Aᵀ)/2` of a square matrix.
    pub fn symmetrize(mat: &DMatrix<f64>) -> Self {
        assert!(mat.is_square(), "symmetrize needs a square matrix");
        Self::from_fn(mat.nrows(), |i, j| 0.5 * (mat[(i, j)] + mat[(j, i)]))
    }

    /// Rank-one matrix `u uᵀ`.
    pub fn outer(u: &[f64]) -> Self {
        Self::from_fn(u.len(), |i, j| u[i] * u[j])
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// Trace inner product `tr(self · other)`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        assert_same_dim(self, other);
        self.data.dot(&other.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.amax()
    }

    /// Spectral norm `max |λ_i|`.
    pub fn spectral_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.eigen()
            .eigenvalues
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)]).collect()
    }

    /// Ordinary matrix square `A²` (which equals `A ∘ A`).
    pub fn square(&self) -> SymMatrix {
        Self::symmetrize(&(&self.data * &self.data))
    }

    /// Congruence `Qᵀ A Q` for a (possibly rectangular) `Q`.
    pub fn congruence(&self, q: &DMatrix<f64>) -> SymMatrix {
        assert_eq!(
            q.nrows(),
            self.dim(),
            "congruence: row count must equal dim"
        );
        Self::symmetrize(&(q.transpose() * &self.data * q))
    }

    /// Eigendecomposition with eigenvalues sorted in descending order.
    pub fn eigen(&self) -> SpectralDecomposition {
        SpectralDecomposition::new(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.dim() == 0 {
            return f64::INFINITY;
        }
        *self.eigen().eigenvalues.last().unwrap()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        if self.dim() == 0 {
            return f64::NEG_INFINITY;
        }
        self.eigen().eigenvalues[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Block-diagonal matrix `diag(blocks[0], blocks[1], ...)`.
    pub fn block_diag(blocks: &[&SymMatrix]) -> SymMatrix {
        let m: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut data = DMatrix::zeros(m, m);
        let mut off = 0;
        for b in blocks {
            let k = b.dim();
            data.view_mut((off, off), (k, k)).copy_from(&b.data);
            off += k;
        }
        Self { data }
    }

    /// Principal sub-block starting at `offset` of order `k`.
    pub fn sub_block(&self, offset: usize, k: usize) -> SymMatrix {
        Self::from_lower(&self.data.view((offset, offset), (k, k)).into_owned())
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.data[idx]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix{}", self.data)
    }
}

fn assert_same_dim(a: &SymMatrix, b: &SymMatrix) {
    assert_eq!(
        a.dim(),
        b.dim(),
        "symmetric matrices of different order ({} vs {})",
        a.dim(),
        b.dim()
    );
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        assert_same_dim(self, rhs);
        SymMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl Add for SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: SymMatrix) -> SymMatrix {
        &self + &rhs
    }
}

impl AddAssign<&SymMatrix> for SymMatrix {
    fn add_assign(&mut self, rhs: &SymMatrix) {
        assert_same_dim(self, rhs);
        self.data += &rhs.data;
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        assert_same_dim(self, rhs);
        SymMatrix {
            data: &self.data - &rhs.data,
        }
    }
}

impl Sub for SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: SymMatrix) -> SymMatrix {
        &self - &rhs
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        SymMatrix {
            data: &self.data * rhs,
        }
    }
}

impl Mul<f64> for SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        &self * rhs
    }
}

impl Neg for SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        self * -1.0
    }
}

/// Jordan product `W ∘ Z = (WZ + ZW)/2`.
///
/// # Panics
/// If the orders differ.
pub fn jordan_product(w: &SymMatrix, z: &SymMatrix) -> SymMatrix {
    assert_same_dim(w, z);
    let wz = &w.data * &z.data;
    SymMatrix::from_fn(w.dim(), |i, j| 0.5 * (wz[(i, j)] + wz[(j, i)]))
}

/// Lyapunov operator `L_A(E) = A ∘ E`.
pub fn lyap_apply(a: &SymMatrix, e: &SymMatrix) -> SymMatrix {
    jordan_product(a, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        let m = rows.len();
        SymMatrix::from_fn(m, |i, j| rows[i][j])
    }

    fn arb_sym(m: usize) -> impl Strategy<Value = SymMatrix> {
        proptest::collection::vec(-5.0..5.0f64, m * m)
            .prop_map(move |v| SymMatrix::from_fn(m, |i, j| v[i * m + j]))
    }

    #[test]
    fn identity_is_jordan_unit() {
        let a = sym(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 5.0], &[3.0, 5.0, 6.0]]);
        assert_eq!(jordan_product(&SymMatrix::identity(3), &a), a);
    }

    #[test]
    fn jordan_square_is_matrix_square() {
        let z = sym(&[&[1.0, -2.0], &[-2.0, 0.5]]);
        let sq = z.square();
        let jz = jordan_product(&z, &z);
        assert!((&sq - &jz).max_abs() < 1e-15);
        assert_eq!(sq[(0, 0)], 5.0);
        assert_eq!(sq[(0, 1)], -3.0);
    }

    #[test]
    fn anticommuting_pair_has_zero_jordan_product() {
        let w = sym(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let z = sym(&[&[1.0, 0.0], &[0.0, -1.0]]);
        // Dense oracle: WZ + ZW computed entrywise.
        let wz = w.as_matrix() * z.as_matrix();
        let zw = z.as_matrix() * w.as_matrix();
        assert_eq!((wz + zw).amax(), 0.0);
        assert_eq!(jordan_product(&w, &z), SymMatrix::zeros(2));
    }

    #[test]
    fn lyap_diag_is_entrywise_average() {
        let a = [2.0, -1.0, 0.5];
        let d = SymMatrix::from_diagonal(&a);
        let e = sym(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 5.0], &[3.0, 5.0, 6.0]]);
        let out = lyap_apply(&d, &e);
        for i in 0..3 {
            for j in 0..3 {
                assert!((out[(i, j)] - e[(i, j)] * (a[i] + a[j]) / 2.0).abs() < 1e-15);
            }
        }
        let zero = lyap_apply(
            &SymMatrix::from_diagonal(&[1.0, -1.0]),
            &sym(&[&[0.0, 1.0], &[1.0, 0.0]]),
        );
        assert_eq!(zero, SymMatrix::zeros(2));
        assert_eq!(lyap_apply(&SymMatrix::identity(3), &e), e);
    }

    #[test]
    #[should_panic]
    fn mismatched_orders_panic() {
        jordan_product(&SymMatrix::identity(2), &SymMatrix::identity(3));
    }

    proptest! {
        #[test]
        fn jordan_is_commutative_and_bilinear(
            a in arb_sym(4), b in arb_sym(4), c in arb_sym(4), s in -3.0..3.0f64
        ) {
            let scale = 1.0 + a.max_abs() * (b.max_abs() + c.max_abs());
            let ab = jordan_product(&a, &b);
            prop_assert!((&ab - &jordan_product(&b, &a)).max_abs() <= 1e-12 * scale);
            let lhs = jordan_product(&a, &(&b + &(&c * s)));
            let rhs = &ab + &(&jordan_product(&a, &c) * s);
            prop_assert!((&lhs - &rhs).max_abs() <= 1e-12 * scale * (1.0 + s.abs()));
            for i in 0..4 { for j in 0..4 { prop_assert_eq!(ab[(i, j)], ab[(j, i)]); } }
        }
    }
}
