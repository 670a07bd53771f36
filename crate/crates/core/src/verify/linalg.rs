//! Rank and null-space extraction shared by the checkers.

use nalgebra::{DMatrix, SymmetricEigen};

/// Singular values of `a`, descending. Empty matrices have none.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Cutoff below which a singular value counts as zero:
/// `rank_tol · max(1, σ_max)`.
pub fn cutoff(s: &[f64], rank_tol: f64) -> f64 {
    rank_tol * s.first().copied().unwrap_or(0.0).max(1.0)
}

pub fn rank(a: &DMatrix<f64>, rank_tol: f64) -> usize {
    let s = singular_values(a);
    let c = cutoff(&s, rank_tol);
    s.iter().filter(|&&v| v > c).count()
}

/// Orthonormal basis (as columns) of `{v : a v = 0}`.
pub fn null_space(a: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // Pad to at least n rows so the SVD returns a full right factor.
    let rows = a.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = s.iter().fold(0.0_f64, |m, v| m.max(*v));
    let c = rank_tol * smax.max(1.0);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= c).collect();
    DMatrix::from_fn(n, keep.len(), |r, k| vt[(keep[k], r)])
}

/// Smallest eigenvalue of a symmetric matrix; `+∞` for an empty one.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = (a + a.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(*v))
}

/// Spectral norm of a symmetric matrix.
pub fn sym_norm(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let sym = (a + a.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.amax()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_deficient_map() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
        let z = null_space(&a, 1e-10);
        assert_eq!(z.ncols(), 2);
        assert!((&a * &z).amax() < 1e-12);
        assert!((z.transpose() * &z - DMatrix::identity(2, 2)).amax() < 1e-12);
        assert_eq!(rank(&a, 1e-10), 1);
        assert_eq!(null_space(&DMatrix::zeros(0, 3), 1e-10).ncols(), 3);
        assert_eq!(null_space(&DMatrix::identity(3, 3), 1e-10).ncols(), 0);
    }

    #[test]
    fn eigen_helpers() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!((min_eigenvalue(&a) - 1.0).abs() < 1e-12);
        assert!((sym_norm(&a) - 3.0).abs() < 1e-12);
        assert_eq!(min_eigenvalue(&DMatrix::zeros(0, 0)), f64::INFINITY);
    }
}
