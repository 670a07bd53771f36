//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slacksdp::model::AffineProblem;
use slacksdp::SymMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_sym(rng: &mut ChaCha8Rng, m: usize) -> SymMatrix {
    let a = uniform_matrix(rng, m, m);
    SymMatrix::symmetrize(&a)
}

/// Haar-ish orthogonal matrix from the QR factor of a random matrix.
pub fn orthogonal(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    loop {
        let a = uniform_matrix(rng, m, m);
        if m == 0 || a.determinant().abs() > 1e-3 {
            return a.qr().q();
        }
    }
}

/// `Q diag(d) Qᵀ`.
pub fn spectral(q: &DMatrix<f64>, d: &[f64]) -> SymMatrix {
    let m = DMatrix::from_diagonal(&DVector::from_column_slice(d));
    SymMatrix::symmetrize(&(q * m * q.transpose()))
}

/// Values of magnitude in `[lo, hi]`.
pub fn magnitudes(rng: &mut ChaCha8Rng, k: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..k).map(|_| rng.gen_range(lo..hi)).collect()
}

/// A strictly complementary primal-dual pair of order `m` sharing the
/// eigenbasis `q`: `G = Q diag(D, 0) Qᵀ` with `rank G = r` and
/// `Λ = Q diag(0, C) Qᵀ` with `C ≻ 0`.
pub fn complementary_pair(rng: &mut ChaCha8Rng, m: usize, r: usize) -> (SymMatrix, SymMatrix) {
    let q = orthogonal(rng, m);
    let mut g = magnitudes(rng, r, 0.5, 2.0);
    g.resize(m, 0.0);
    let mut l = vec![0.0; r];
    l.extend(magnitudes(rng, m - r, 0.5, 2.0));
    (spectral(&q, &g), spectral(&q, &l))
}

/// `min cᵀx + ½xᵀQx  s.t.  G0 + Σ x_i A_i ⪰ 0` with random `A_i`, a
/// prescribed Hessian and `c` chosen so that `(0, Λ)` is a KKT pair.
pub fn affine_kkt_instance(
    rng: &mut ChaCha8Rng,
    g0: &SymMatrix,
    lambda: &SymMatrix,
    n: usize,
    hess: DMatrix<f64>,
) -> AffineProblem {
    let m = g0.dim();
    let a: Vec<SymMatrix> = (0..n).map(|_| random_sym(rng, m)).collect();
    let c: Vec<f64> = a.iter().map(|ai| ai.inner(lambda)).collect();
    AffineProblem::new(g0.clone(), a, DVector::from_vec(c), hess)
}

/// Random symmetric Hessian with entries in `[-scale, scale]`.
pub fn random_hessian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    random_sym(rng, n).into_matrix() * scale
}
