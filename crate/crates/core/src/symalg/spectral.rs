use nalgebra::{DMatrix, SymmetricEigen};

use super::SymMatrix;
use crate::error::{Error, Result};

/// `A = Q diag(λ) Qᵀ` with `λ` sorted in descending order and `Q` orthogonal.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn new(a: &SymMatrix) -> Self {
        let m = a.dim();
        if m == 0 {
            return Self {
                eigenvalues: Vec::new(),
                eigenvectors: DMatrix::zeros(0, 0),
            };
        }
        let eig = SymmetricEigen::new(a.as_matrix().clone());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = DMatrix::from_fn(m, m, |i, c| eig.eigenvectors[(i, order[c])]);
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Q diag(f(λ)) Qᵀ`.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> SymMatrix {
        let q = &self.eigenvectors;
        let mut scaled = q.clone();
        for (c, &lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            scaled.column_mut(c).scale_mut(s);
        }
        SymMatrix::symmetrize(&(scaled * q.transpose()))
    }

    pub fn reassemble(&self) -> SymMatrix {
        self.map(|l| l)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |a, l| a.max(l.abs()))
    }

    /// Eigenvalue magnitude at or below which an eigenvalue counts as zero.
    pub fn rank_threshold(&self, rank_tol: f64) -> f64 {
        rank_tol * self.spectral_norm().max(1.0)
    }

    /// Columns of `Q` whose eigenvalues are numerically zero.
    pub fn kernel_basis(&self, rank_tol: f64) -> DMatrix<f64> {
        let thr = self.rank_threshold(rank_tol);
        self.select_columns(|l| l.abs() <= thr)
    }

    /// Columns of `Q` whose eigenvalues are numerically nonzero.
    pub fn range_basis(&self, rank_tol: f64) -> DMatrix<f64> {
        let thr = self.rank_threshold(rank_tol);
        self.select_columns(|l| l.abs() > thr)
    }

    fn select_columns(&self, keep: impl Fn(f64) -> bool) -> DMatrix<f64> {
        let cols: Vec<usize> = (0..self.dim())
            .filter(|&c| keep(self.eigenvalues[c]))
            .collect();
        DMatrix::from_fn(self.dim(), cols.len(), |i, c| {
            self.eigenvectors[(i, cols[c])]
        })
    }
}

/// Default relative rank tolerance `1e-8·m`.
pub fn default_rank_tol(m: usize) -> f64 {
    1e-8 * m.max(1) as f64
}

/// Whether `L_A` is invertible: no eigenvalue pair (including an eigenvalue with
/// itself) sums to within `tol·max(1, ‖A‖₂)` of zero.
pub fn lyap_invertible(a: &SymMatrix, tol: f64) -> bool {
    assert!(tol > 0.0, "tolerance must be positive");
    let eig = a.eigen();
    let thr = tol * eig.spectral_norm().max(1.0);
    let l = &eig.eigenvalues;
    (0..l.len()).all(|i| (i..l.len()).all(|j| (l[i] + l[j]).abs() > thr))
}

/// Solves `A ∘ X = B` spectrally: in the eigenbasis of `A`,
/// `X̃_ij = 2 B̃_ij / (λ_i + λ_j)`.
pub fn lyap_solve(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    assert_eq!(a.dim(), b.dim(), "lyap_solve: order mismatch");
    if !lyap_invertible(a, tol) {
        return Err(Error::NotInvertible);
    }
    let eig = a.eigen();
    let q = &eig.eigenvectors;
    let bt = b.congruence(q);
    let l = &eig.eigenvalues;
    let xt = SymMatrix::from_fn(a.dim(), |i, j| 2.0 * bt[(i, j)] / (l[i] + l[j]));
    Ok(xt.congruence(&q.transpose()))
}

/// Positive semidefinite square root. Eigenvalues with
/// `|λ| ≤ tol·(1+‖A‖₂)` are clamped to zero, so roundoff in the kernel does
/// not turn into `√ε`-sized entries; anything more negative is an error.
pub fn psd_sqrt(a: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    let eig = a.eigen();
    let band = tol * (1.0 + eig.spectral_norm());
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -band {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(eig.map(|l| if l <= band { 0.0 } else { l.sqrt() }))
}

/// Spectral Moore–Penrose pseudo-inverse; eigenvalues with
/// `|λ| ≤ rank_tol·max(1, max|λ|)` are treated as zero.
pub fn pseudo_inverse(a: &SymMatrix, rank_tol: f64) -> SymMatrix {
    assert!(rank_tol > 0.0, "rank tolerance must be positive");
    let eig = a.eigen();
    let thr = eig.rank_threshold(rank_tol);
    eig.map(|l| if l.abs() > thr { 1.0 / l } else { 0.0 })
}

/// Number of eigenvalues with `|λ| > rank_tol·max(1, max|λ|)`.
pub fn numeric_rank(a: &SymMatrix, rank_tol: f64) -> usize {
    assert!(rank_tol > 0.0, "rank tolerance must be positive");
    let eig = a.eigen();
    let thr = eig.rank_threshold(rank_tol);
    eig.eigenvalues.iter().filter(|l| l.abs() > thr).count()
}

/// Frobenius-nearest PSD matrix (negative eigenvalues zeroed).
pub fn project_psd(a: &SymMatrix) -> SymMatrix {
    a.eigen().map(|l| l.max(0.0))
}
