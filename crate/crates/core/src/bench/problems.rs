//! The benchmark problems and their random data.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::NsdpProblem;
use crate::nlp::{Bounds, EqualityNlp};
use crate::reformulate::{SlackKktPoint, SlackNlp};
use crate::symalg::{
    jordan_product, jordan_square_hessian, packed_dim, smat, svec, svec_basis, svec_index,
    svec_pairing, SymMatrix,
};

/// Random correlation-like data: unit diagonal, off-diagonal entries drawn
/// i.i.d. uniform on `(−1, 1)` from ChaCha8 seeded with `seed`, filled
/// column by column in svec order.
pub fn gen_correlation_h(m: usize, seed: u64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SymMatrix::from_fn(m, |i, j| {
        if i == j {
            1.0
        } else {
            rng.gen_range(-1.0..1.0)
        }
    })
}

fn sym(m: usize, entries: &[(usize, usize, f64)]) -> SymMatrix {
    let mut a = DMatrix::zeros(m, m);
    for &(i, j, v) in entries {
        a[(i, j)] = v;
        a[(j, i)] = v;
    }
    SymMatrix::from_lower(&a)
}

/// Weights `w_a` with `Σ w_a v_a² = ‖smat v‖²_F`.
fn frobenius_weights(m: usize) -> Vec<f64> {
    svec_pairing(&SymMatrix::from_fn(m, |_, _| 1.0))
}

/// The six-variable test problem with a 4×4 matrix constraint.
#[derive(Clone, Debug, Default)]
pub struct Hs71Sdp;

pub fn build_hs71() -> Hs71Sdp {
    Hs71Sdp
}

impl NsdpProblem for Hs71Sdp {
    fn name(&self) -> &str {
        "hs71sdp"
    }
    fn n(&self) -> usize {
        6
    }
    fn m(&self) -> usize {
        4
    }
    fn p(&self) -> usize {
        2
    }
    fn bounds(&self) -> Bounds {
        let inf = f64::INFINITY;
        Bounds {
            lower: vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0],
            upper: vec![5.0, 5.0, 5.0, 5.0, inf, inf],
        }
    }
    fn start(&self) -> DVector<f64> {
        DVector::from_vec(vec![5.0, 5.0, 5.0, 5.0, 0.0, 0.0])
    }
    fn objective(&self, x: &DVector<f64>) -> f64 {
        x[0] * x[3] * (x[0] + x[1] + x[2]) + x[2]
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let s = x[0] + x[1] + x[2];
        DVector::from_vec(vec![
            x[3] * (x[0] + s),
            x[0] * x[3],
            x[0] * x[3] + 1.0,
            x[0] * s,
            0.0,
            0.0,
        ])
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(6, 6);
        h[(0, 0)] = 2.0 * x[3];
        h[(0, 1)] = x[3];
        h[(0, 2)] = x[3];
        h[(0, 3)] = 2.0 * x[0] + x[1] + x[2];
        h[(1, 3)] = x[0];
        h[(2, 3)] = x[0];
        for i in 0..4 {
            for j in 0..i {
                h[(i, j)] = h[(j, i)];
            }
        }
        h
    }
    fn matrix_constraint(&self, x: &DVector<f64>) -> SymMatrix {
        sym(
            4,
            &[
                (0, 0, x[0]),
                (1, 0, x[1]),
                (1, 1, x[3]),
                (2, 1, x[1] + x[2]),
                (2, 2, x[3]),
                (3, 2, x[2]),
                (3, 3, x[0]),
            ],
        )
    }
    fn matrix_constraint_partials(&self, _x: &DVector<f64>) -> Vec<SymMatrix> {
        vec![
            sym(4, &[(0, 0, 1.0), (3, 3, 1.0)]),
            sym(4, &[(1, 0, 1.0), (2, 1, 1.0)]),
            sym(4, &[(2, 1, 1.0), (3, 2, 1.0)]),
            sym(4, &[(1, 1, 1.0), (2, 2, 1.0)]),
            SymMatrix::zeros(4),
            SymMatrix::zeros(4),
        ]
    }
    fn matrix_constraint_curvature(&self, _x: &DVector<f64>, _l: &SymMatrix) -> DMatrix<f64> {
        DMatrix::zeros(6, 6)
    }
    fn equalities(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(vec![
            x[0] * x[1] * x[2] * x[3] - x[4] - 25.0,
            x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3] - x[5] - 40.0,
        ])
    }
    fn equality_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            2,
            6,
            &[
                x[1] * x[2] * x[3],
                x[0] * x[2] * x[3],
                x[0] * x[1] * x[3],
                x[0] * x[1] * x[2],
                -1.0,
                0.0,
                2.0 * x[0],
                2.0 * x[1],
                2.0 * x[2],
                2.0 * x[3],
                0.0,
                -1.0,
            ],
        )
    }
    fn equality_curvature(&self, x: &DVector<f64>, mu: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(6, 6);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let prod: f64 = (0..4).filter(|&k| k != i && k != j).map(|k| x[k]).product();
                    h[(i, j)] = mu[0] * prod;
                }
            }
            h[(i, i)] = 2.0 * mu[1];
        }
        h
    }
}

/// `min ⟨X − H, X − H⟩  s.t.  X_ii = 1,  X ⪰ 0`, over `x = svec X`.
#[derive(Clone, Debug)]
pub struct Cor {
    m: usize,
    h: Vec<f64>,
    w: Vec<f64>,
}

pub fn build_cor(h: &SymMatrix) -> Cor {
    let m = h.dim();
    Cor {
        m,
        h: svec(h),
        w: frobenius_weights(m),
    }
}

impl NsdpProblem for Cor {
    fn name(&self) -> &str {
        "cor"
    }
    fn n(&self) -> usize {
        self.h.len()
    }
    fn m(&self) -> usize {
        self.m
    }
    fn p(&self) -> usize {
        self.m
    }
    fn start(&self) -> DVector<f64> {
        DVector::from_vec(svec(&SymMatrix::identity(self.m)))
    }
    fn objective(&self, x: &DVector<f64>) -> f64 {
        (0..self.n())
            .map(|a| self.w[a] * (x[a] - self.h[a]).powi(2))
            .sum()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.n(), |a, _| 2.0 * self.w[a] * (x[a] - self.h[a]))
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_fn(self.n(), |a, _| 2.0 * self.w[a]))
    }
    fn matrix_constraint(&self, x: &DVector<f64>) -> SymMatrix {
        smat(x.as_slice()).expect("packed length")
    }
    fn matrix_constraint_partials(&self, _x: &DVector<f64>) -> Vec<SymMatrix> {
        svec_basis(self.m)
    }
    fn matrix_constraint_curvature(&self, _x: &DVector<f64>, _l: &SymMatrix) -> DMatrix<f64> {
        DMatrix::zeros(self.n(), self.n())
    }
    fn equalities(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.m, |i, _| x[svec_index(self.m, i, i)] - 1.0)
    }
    fn equality_jacobian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.m, self.n());
        for i in 0..self.m {
            j[(i, svec_index(self.m, i, i))] = 1.0;
        }
        j
    }
    fn equality_curvature(&self, _x: &DVector<f64>, _mu: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(self.n(), self.n())
    }
}

/// `min ‖X∘X − H‖²  s.t.  (X∘X)_ii = 1` over unrestricted symmetric `X`;
/// the matrix variable is its own slack.
#[derive(Clone, Debug)]
pub struct CorSlack {
    h: SymMatrix,
}

pub fn build_cor_slack(h: &SymMatrix) -> CorSlack {
    CorSlack { h: h.clone() }
}

impl CorSlack {
    fn unpack(&self, z: &DVector<f64>) -> SymMatrix {
        smat(z.as_slice()).expect("packed length")
    }

    pub fn h(&self) -> &SymMatrix {
        &self.h
    }

    /// Recovers `X∘X`, the solution of the underlying conic problem.
    pub fn solution_matrix(&self, z: &DVector<f64>) -> SymMatrix {
        self.unpack(z).square()
    }

    /// The conic problem this one is the slack form of.
    pub fn conic_form(&self) -> Cor {
        build_cor(&self.h)
    }

    /// Maps an iterate and its multipliers to a slack-form point of
    /// [`conic_form`](Self::conic_form): `x = svec(X∘X)`, `Y = X` and
    /// `Λ = 2(X∘X − H) − Diag(μ)`, the multiplier that makes the
    /// x-stationarity of the conic form hold exactly.
    pub fn kkt_point(&self, z: &DVector<f64>, w: &DVector<f64>) -> SlackKktPoint {
        let y = self.unpack(z);
        let sq = y.square();
        let lambda = &(&(&sq - &self.h) * 2.0) - &SymMatrix::from_diagonal(w.as_slice());
        SlackKktPoint {
            x: DVector::from_vec(svec(&sq)),
            y,
            lambda,
            mu: w.clone(),
        }
    }

    /// Columns `svec(X B_a + B_a X)`.
    fn square_jacobian(x: &SymMatrix) -> DMatrix<f64> {
        crate::reformulate::jordan_square_jacobian(x)
    }
}

impl EqualityNlp for CorSlack {
    fn name(&self) -> &str {
        "cor-slack"
    }
    fn dim(&self) -> usize {
        packed_dim(self.h.dim())
    }
    fn num_constraints(&self) -> usize {
        self.h.dim()
    }
    fn start(&self) -> DVector<f64> {
        DVector::from_vec(svec(&SymMatrix::identity(self.h.dim())))
    }
    fn objective(&self, z: &DVector<f64>) -> f64 {
        let r = &self.unpack(z).square() - &self.h;
        r.inner(&r)
    }
    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let x = self.unpack(z);
        let r = &x.square() - &self.h;
        let s = jordan_product(&r, &x);
        DVector::from_vec(svec_pairing(&s)) * 4.0
    }
    fn constraints(&self, z: &DVector<f64>) -> DVector<f64> {
        let sq = self.unpack(z).square();
        DVector::from_iterator(self.h.dim(), sq.diagonal().into_iter().map(|d| d - 1.0))
    }
    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let m = self.h.dim();
        let x = self.unpack(z);
        let mut j = DMatrix::zeros(m, self.dim());
        for i in 0..m {
            for k in 0..m {
                j[(i, svec_index(m, i, k))] = 2.0 * x[(i, k)];
            }
        }
        j
    }
    fn lagrangian_hessian(&self, z: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        let x = self.unpack(z);
        let r = &x.square() - &self.h;
        // 2⟨∂R/∂a, ∂R/∂b⟩ + 2⟨R, ∂²R/∂a∂b⟩ for R = X² − H, minus constraint curvature.
        let jq = Self::square_jacobian(&x);
        let d = DVector::from_vec(frobenius_weights(x.dim()));
        let mut jd = jq.clone();
        for (r_idx, mut row) in jd.row_iter_mut().enumerate() {
            row *= d[r_idx];
        }
        let mut h = jq.transpose() * jd * 2.0;
        h += jordan_square_hessian(&r) * 2.0;
        h -= jordan_square_hessian(&SymMatrix::from_diagonal(w.as_slice()));
        (&h + h.transpose()) * 0.5
    }
}

/// `min ⟨zX − H, zX − H⟩  s.t.  zX_ii = 1,  I ⪯ X ⪯ κI` over `(svec X, z)`.
/// The two cone constraints are stacked as `G = diag(κI − X, X − I)`.
#[derive(Clone, Debug)]
pub struct CorExt {
    m: usize,
    kappa: f64,
    h: Vec<f64>,
    w: Vec<f64>,
}

pub fn build_cor_ext(h: &SymMatrix, kappa: f64) -> CorExt {
    assert!(kappa > 1.0, "κ must exceed 1");
    let m = h.dim();
    CorExt {
        m,
        kappa,
        h: svec(h),
        w: frobenius_weights(m),
    }
}

impl CorExt {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `(X, z)` from the decision vector.
    pub fn unpack(&self, x: &DVector<f64>) -> (SymMatrix, f64) {
        let nn = self.h.len();
        (smat(&x.as_slice()[..nn]).expect("packed length"), x[nn])
    }
}

impl NsdpProblem for CorExt {
    fn name(&self) -> &str {
        "cor-ext"
    }
    fn n(&self) -> usize {
        self.h.len() + 1
    }
    fn m(&self) -> usize {
        2 * self.m
    }
    fn p(&self) -> usize {
        self.m
    }
    fn start(&self) -> DVector<f64> {
        let mut v = svec(&SymMatrix::identity(self.m));
        v.push(1.0);
        DVector::from_vec(v)
    }
    fn objective(&self, x: &DVector<f64>) -> f64 {
        let nn = self.h.len();
        let z = x[nn];
        (0..nn)
            .map(|a| self.w[a] * (z * x[a] - self.h[a]).powi(2))
            .sum()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let nn = self.h.len();
        let z = x[nn];
        let mut g = DVector::zeros(nn + 1);
        for a in 0..nn {
            let r = z * x[a] - self.h[a];
            g[a] = 2.0 * self.w[a] * z * r;
            g[nn] += 2.0 * self.w[a] * x[a] * r;
        }
        g
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let nn = self.h.len();
        let z = x[nn];
        let mut h = DMatrix::zeros(nn + 1, nn + 1);
        for a in 0..nn {
            h[(a, a)] = 2.0 * self.w[a] * z * z;
            let cross = 2.0 * self.w[a] * (2.0 * z * x[a] - self.h[a]);
            h[(a, nn)] = cross;
            h[(nn, a)] = cross;
            h[(nn, nn)] += 2.0 * self.w[a] * x[a] * x[a];
        }
        h
    }
    fn matrix_constraint(&self, x: &DVector<f64>) -> SymMatrix {
        let (xm, _) = self.unpack(x);
        let upper = &SymMatrix::scaled_identity(self.m, self.kappa) - &xm;
        let lower = &xm - &SymMatrix::identity(self.m);
        SymMatrix::block_diag(&[&upper, &lower])
    }
    fn matrix_constraint_partials(&self, _x: &DVector<f64>) -> Vec<SymMatrix> {
        let mut out: Vec<SymMatrix> = svec_basis(self.m)
            .iter()
            .map(|b| SymMatrix::block_diag(&[&-b.clone(), b]))
            .collect();
        out.push(SymMatrix::zeros(2 * self.m));
        out
    }
    fn matrix_constraint_curvature(&self, _x: &DVector<f64>, _l: &SymMatrix) -> DMatrix<f64> {
        DMatrix::zeros(self.n(), self.n())
    }
    fn equalities(&self, x: &DVector<f64>) -> DVector<f64> {
        let nn = self.h.len();
        DVector::from_fn(self.m, |i, _| x[nn] * x[svec_index(self.m, i, i)] - 1.0)
    }
    fn equality_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let nn = self.h.len();
        let mut j = DMatrix::zeros(self.m, nn + 1);
        for i in 0..self.m {
            let d = svec_index(self.m, i, i);
            j[(i, d)] = x[nn];
            j[(i, nn)] = x[d];
        }
        j
    }
    fn equality_curvature(&self, _x: &DVector<f64>, mu: &DVector<f64>) -> DMatrix<f64> {
        let nn = self.h.len();
        let mut h = DMatrix::zeros(nn + 1, nn + 1);
        for i in 0..self.m {
            let d = svec_index(self.m, i, i);
            h[(d, nn)] = mu[i];
            h[(nn, d)] = mu[i];
        }
        h
    }
}

/// The extended problem with one slack per cone block, started at
/// `z = 1, X = Y₂ = I, Y₁ = 3I`.
pub fn build_cor_ext_slack(h: &SymMatrix, kappa: f64) -> SlackNlp {
    let m = h.dim();
    let base: Arc<dyn NsdpProblem> = Arc::new(build_cor_ext(h, kappa));
    SlackNlp::with_blocks(base, vec![m, m])
        .with_name("cor-ext-slack")
        .with_start_slacks(vec![
            SymMatrix::scaled_identity(m, 3.0),
            SymMatrix::identity(m),
        ])
}
