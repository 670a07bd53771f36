//! Squared-slack reformulation.
//!
//! An NSDP `min f(x) s.t. G(x) ⪰ 0, h(x) = 0` becomes the equality-constrained
//! NLP
//!
//! ```text
//! minimize f(x)  s.t.  G(x) − Y∘Y = 0,  h(x) = 0
//! ```
//!
//! over `(x, svec Y)`. When `G(x)` is block diagonal by construction, each
//! diagonal block may get its own slack matrix ([`SlackNlp::with_blocks`]);
//! the off-diagonal blocks of `G` are then assumed identically zero and are
//! not constrained.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{lagrangian_hess, NsdpProblem};
use crate::nlp::{Bounds, EqualityNlp};
use crate::symalg::{
    jordan_product, jordan_square_hessian, packed_dim, project_psd, psd_sqrt, smat, svec,
    svec_basis, svec_pairing, SymMatrix,
};

/// How the slack matrix is initialized from `x0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SlackInit {
    Identity,
    SqrtProjection,
    ScaledIdentity(f64),
}

/// A point of the reformulated problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SlackPoint {
    pub x: DVector<f64>,
    pub y: SymMatrix,
}

/// A primal-dual point of the slack form: `(x, Y)` with the matrix
/// multiplier Λ and the scalar-equality multipliers μ.
#[derive(Clone, Debug, PartialEq)]
pub struct SlackKktPoint {
    pub x: DVector<f64>,
    pub y: SymMatrix,
    pub lambda: SymMatrix,
    pub mu: DVector<f64>,
}

/// The slack NLP built around a base problem.
#[derive(Clone)]
pub struct SlackNlp {
    base: Arc<dyn NsdpProblem>,
    name: String,
    blocks: Vec<usize>,
    start_y: Vec<SymMatrix>,
}

/// Reformulates `prob` with a single slack of order `m`, initialized to the
/// identity.
pub fn to_slack(prob: Arc<dyn NsdpProblem>) -> SlackNlp {
    let m = prob.m();
    SlackNlp::with_blocks(prob, vec![m])
}

/// Slack matrix for `x0` under `strategy`.
pub fn init_slack<P: NsdpProblem + ?Sized>(
    prob: &P,
    x0: &DVector<f64>,
    strategy: SlackInit,
) -> SlackPoint {
    let m = prob.m();
    let y = match strategy {
        SlackInit::Identity => SymMatrix::identity(m),
        SlackInit::ScaledIdentity(a) => SymMatrix::scaled_identity(m, a),
        SlackInit::SqrtProjection => sqrt_of_projection(&prob.matrix_constraint(x0)),
    };
    SlackPoint { x: x0.clone(), y }
}

fn sqrt_of_projection(g: &SymMatrix) -> SymMatrix {
    psd_sqrt(&project_psd(g), 0.0).expect("projection onto the PSD cone is PSD")
}

/// Λ with `⟨Λ, C⟩ = w · svec(C)` for all symmetric `C`: the diagonal of `w`
/// is kept and off-diagonal entries are halved.
pub fn recover_multiplier(w: &[f64]) -> Result<SymMatrix> {
    let lambda = smat(w)?;
    let m = lambda.dim();
    Ok(SymMatrix::from_fn(m, |i, j| {
        if i == j {
            lambda[(i, j)]
        } else {
            0.5 * lambda[(i, j)]
        }
    }))
}

/// Inverse of [`recover_multiplier`].
pub fn multiplier_vector(lambda: &SymMatrix) -> Vec<f64> {
    svec_pairing(lambda)
}

/// `(∂svec(Y∘Y)/∂svec(Y))`, column `a` equal to `2 svec(B_a ∘ Y)`.
pub fn jordan_square_jacobian(y: &SymMatrix) -> DMatrix<f64> {
    let m = y.dim();
    let nn = packed_dim(m);
    let mut jac = DMatrix::zeros(nn, nn);
    for (a, b) in svec_basis(m).iter().enumerate() {
        let col = svec(&(&jordan_product(b, y) * 2.0));
        for (r, v) in col.into_iter().enumerate() {
            jac[(r, a)] = v;
        }
    }
    jac
}

impl SlackNlp {
    /// One slack matrix per diagonal block of `G`, of the given orders.
    pub fn with_blocks(base: Arc<dyn NsdpProblem>, blocks: Vec<usize>) -> Self {
        assert_eq!(
            blocks.iter().sum::<usize>(),
            base.m(),
            "slack blocks must partition the order of G"
        );
        let start_y = blocks.iter().map(|&k| SymMatrix::identity(k)).collect();
        let name = format!("{}-slack", base.name());
        Self {
            base,
            name,
            blocks,
            start_y,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Applies `strategy` blockwise at the base problem's start.
    pub fn with_init(mut self, strategy: SlackInit) -> Self {
        let g = self.base.matrix_constraint(&self.base.start());
        let mut off = 0;
        for (k, &size) in self.blocks.iter().enumerate() {
            self.start_y[k] = match strategy {
                SlackInit::Identity => SymMatrix::identity(size),
                SlackInit::ScaledIdentity(a) => SymMatrix::scaled_identity(size, a),
                SlackInit::SqrtProjection => sqrt_of_projection(&g.sub_block(off, size)),
            };
            off += size;
        }
        self
    }

    /// Explicit starting slacks, one per block.
    pub fn with_start_slacks(mut self, ys: Vec<SymMatrix>) -> Self {
        assert_eq!(ys.len(), self.blocks.len());
        for (y, &k) in ys.iter().zip(&self.blocks) {
            assert_eq!(y.dim(), k, "starting slack order mismatch");
        }
        self.start_y = ys;
        self
    }

    pub fn base(&self) -> &Arc<dyn NsdpProblem> {
        &self.base
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// Number of slack coordinates.
    pub fn slack_dim(&self) -> usize {
        self.blocks.iter().map(|&k| packed_dim(k)).sum()
    }

    fn block_offsets(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        // (offset in G, order, offset in the packed slack vector)
        let mut g_off = 0;
        let mut s_off = 0;
        self.blocks.iter().map(move |&k| {
            let out = (g_off, k, s_off);
            g_off += k;
            s_off += packed_dim(k);
            out
        })
    }

    /// Packs a point; `y` must be block diagonal along the slack blocks.
    pub fn join_point(&self, p: &SlackPoint) -> DVector<f64> {
        let mut z = p.x.as_slice().to_vec();
        for (g_off, k, _) in self.block_offsets() {
            z.extend(svec(&p.y.sub_block(g_off, k)));
        }
        DVector::from_vec(z)
    }

    /// Unpacks `z` into `x` and the block-diagonal slack `Y`.
    pub fn split_point(&self, z: &DVector<f64>) -> SlackPoint {
        let n = self.base.n();
        let x = z.rows(0, n).into_owned();
        let ys = self.slack_blocks(z);
        let refs: Vec<&SymMatrix> = ys.iter().collect();
        SlackPoint {
            x,
            y: SymMatrix::block_diag(&refs),
        }
    }

    fn slack_blocks(&self, z: &DVector<f64>) -> Vec<SymMatrix> {
        let n = self.base.n();
        self.block_offsets()
            .map(|(_, k, s_off)| {
                let nn = packed_dim(k);
                smat(&z.as_slice()[n + s_off..n + s_off + nn]).expect("packed block length")
            })
            .collect()
    }

    /// Splits NLP multipliers into the matrix multiplier Λ (block diagonal)
    /// and the scalar-equality block μ.
    pub fn split_multipliers(&self, w: &DVector<f64>) -> (SymMatrix, DVector<f64>) {
        let lambdas: Vec<SymMatrix> = self
            .block_offsets()
            .map(|(_, k, s_off)| {
                recover_multiplier(&w.as_slice()[s_off..s_off + packed_dim(k)])
                    .expect("packed block length")
            })
            .collect();
        let refs: Vec<&SymMatrix> = lambdas.iter().collect();
        let s = self.slack_dim();
        (
            SymMatrix::block_diag(&refs),
            w.rows(s, w.len() - s).into_owned(),
        )
    }

    /// Splits a solver iterate and its multipliers.
    pub fn kkt_point(&self, z: &DVector<f64>, w: &DVector<f64>) -> SlackKktPoint {
        let SlackPoint { x, y } = self.split_point(z);
        let (lambda, mu) = self.split_multipliers(w);
        SlackKktPoint { x, y, lambda, mu }
    }

    /// Inverse of [`split_multipliers`](Self::split_multipliers).
    pub fn join_multipliers(&self, lambda: &SymMatrix, mu: &DVector<f64>) -> DVector<f64> {
        let mut w = Vec::with_capacity(self.num_constraints());
        for (g_off, k, _) in self.block_offsets() {
            w.extend(multiplier_vector(&lambda.sub_block(g_off, k)));
        }
        w.extend(mu.iter());
        DVector::from_vec(w)
    }
}

impl EqualityNlp for SlackNlp {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.base.n() + self.slack_dim()
    }

    fn num_constraints(&self) -> usize {
        self.slack_dim() + self.base.p()
    }

    fn bounds(&self) -> Bounds {
        self.base.bounds().extended_free(self.slack_dim())
    }

    fn start(&self) -> DVector<f64> {
        let mut z = self.base.start().as_slice().to_vec();
        for y in &self.start_y {
            z.extend(svec(y));
        }
        DVector::from_vec(z)
    }

    fn objective(&self, z: &DVector<f64>) -> f64 {
        self.base.objective(&z.rows(0, self.base.n()).into_owned())
    }

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let n = self.base.n();
        let mut g = DVector::zeros(self.dim());
        g.rows_mut(0, n)
            .copy_from(&self.base.gradient(&z.rows(0, n).into_owned()));
        g
    }

    fn constraints(&self, z: &DVector<f64>) -> DVector<f64> {
        let n = self.base.n();
        let x = z.rows(0, n).into_owned();
        let g = self.base.matrix_constraint(&x);
        let mut c = Vec::with_capacity(self.num_constraints());
        for ((g_off, k, _), y) in self.block_offsets().zip(self.slack_blocks(z)) {
            c.extend(svec(&(&g.sub_block(g_off, k) - &y.square())));
        }
        c.extend(self.base.equalities(&x).iter());
        DVector::from_vec(c)
    }

    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let n = self.base.n();
        let x = z.rows(0, n).into_owned();
        let mut jac = DMatrix::zeros(self.num_constraints(), self.dim());
        let partials = self.base.matrix_constraint_partials(&x);
        for ((g_off, k, s_off), y) in self.block_offsets().zip(self.slack_blocks(z)) {
            for (i, gi) in partials.iter().enumerate() {
                for (r, v) in svec(&gi.sub_block(g_off, k)).into_iter().enumerate() {
                    jac[(s_off + r, i)] = v;
                }
            }
            let nn = packed_dim(k);
            let jy = jordan_square_jacobian(&y);
            jac.view_mut((s_off, n + s_off), (nn, nn)).copy_from(&(-jy));
        }
        let s = self.slack_dim();
        if self.base.p() > 0 {
            jac.view_mut((s, 0), (self.base.p(), n))
                .copy_from(&self.base.equality_jacobian(&x));
        }
        jac
    }

    fn lagrangian_hessian(&self, z: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        let n = self.base.n();
        let x = z.rows(0, n).into_owned();
        let (lambda, mu) = self.split_multipliers(w);
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        h.view_mut((0, 0), (n, n)).copy_from(&lagrangian_hess(
            self.base.as_ref(),
            &x,
            &lambda,
            &mu,
        ));
        for (g_off, k, s_off) in self.block_offsets() {
            let nn = packed_dim(k);
            let hy = jordan_square_hessian(&lambda.sub_block(g_off, k));
            h.view_mut((n + s_off, n + s_off), (nn, nn)).copy_from(&hy);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{central_jacobian, check_nlp_derivatives, AffineProblem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ray() -> Arc<dyn NsdpProblem> {
        // min x  s.t.  x ≥ 0
        let p = AffineProblem::new(
            SymMatrix::zeros(1),
            vec![SymMatrix::identity(1)],
            DVector::from_vec(vec![1.0]),
            DMatrix::zeros(1, 1),
        );
        Arc::new(p)
    }

    fn random_affine(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Arc<dyn NsdpProblem> {
        let sym = |rng: &mut ChaCha8Rng| SymMatrix::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        let a0 = sym(rng);
        let a = (0..n).map(|_| sym(rng)).collect();
        let c = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        Arc::new(AffineProblem::new(a0, a, c, DMatrix::identity(n, n)))
    }

    #[test]
    fn scalar_cone_gives_scalar_slack() {
        let nlp = to_slack(ray());
        assert_eq!((nlp.dim(), nlp.num_constraints()), (2, 1));
        let z = DVector::from_vec(vec![4.0, 1.5]);
        assert_eq!(nlp.constraints(&z)[0], 4.0 - 2.25);
        assert_eq!(nlp.jacobian(&z).as_slice(), &[1.0, -3.0]);
    }

    #[test]
    fn initialization_strategies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_affine(&mut rng, 2, 4);
        let x0 = p.start();
        assert_eq!(
            init_slack(p.as_ref(), &x0, SlackInit::Identity).y,
            SymMatrix::identity(4)
        );
        assert_eq!(
            init_slack(p.as_ref(), &x0, SlackInit::ScaledIdentity(3.0)).y,
            SymMatrix::scaled_identity(4, 3.0)
        );
        // Make x0 feasible by shifting A0 until G(x0) ≻ 0.
        let feasible = AffineProblem::new(
            &p.matrix_constraint(&x0) + &SymMatrix::scaled_identity(4, 5.0),
            p.matrix_constraint_partials(&x0),
            DVector::zeros(2),
            DMatrix::zeros(2, 2),
        );
        let sp = init_slack(&feasible, &x0, SlackInit::SqrtProjection);
        let nlp = to_slack(Arc::new(feasible));
        let c = nlp.constraints(&nlp.join_point(&sp));
        assert!(c.amax() <= 1e-10);
    }

    #[test]
    fn multiplier_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(recover_multiplier(&[0.0; 6]).unwrap(), SymMatrix::zeros(3));
        let d = recover_multiplier(&[2.0, 0.0, 0.0, 3.0, 0.0, 4.0]).unwrap();
        assert_eq!(d, SymMatrix::from_diagonal(&[2.0, 3.0, 4.0]));
        for _ in 0..20 {
            let w: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c = SymMatrix::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
            let lambda = recover_multiplier(&w).unwrap();
            let pairing: f64 = w.iter().zip(svec(&c)).map(|(a, b)| a * b).sum();
            assert!((lambda.inner(&c) - pairing).abs() < 1e-12);
            assert_eq!(multiplier_vector(&lambda), w);
        }
        assert!(recover_multiplier(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn objective_ignores_slack_and_jacobian_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let nlp = to_slack(random_affine(&mut rng, 3, 3));
        let z = DVector::from_fn(nlp.dim(), |_, _| rng.gen_range(-1.0..1.0));
        let g = nlp.gradient(&z);
        assert_eq!(g.rows(3, 6).amax(), 0.0);
        let fd = central_jacobian(|y| nlp.constraints(y), &z);
        let an = nlp.jacobian(&z);
        assert!((&fd - &an).amax() < 1e-6 * (1.0 + an.amax()));
        assert!(check_nlp_derivatives(&nlp, &z, 2).passed());
    }

    #[test]
    fn residual_vanishes_exactly_when_g_is_a_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let nlp = to_slack(random_affine(&mut rng, 2, 3));
        let x = DVector::from_vec(vec![0.3, -0.2]);
        let y = SymMatrix::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
        let c = nlp.constraints(&nlp.join_point(&SlackPoint {
            x: x.clone(),
            y: y.clone(),
        }));
        let g = nlp.base().matrix_constraint(&x);
        assert!((&smat(c.as_slice()).unwrap() - &(&g - &y.square())).max_abs() < 1e-14);
    }

    #[test]
    fn block_slacks_split_and_join() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a0 = SymMatrix::block_diag(&[&SymMatrix::identity(2), &SymMatrix::identity(3)]);
        let a1 = SymMatrix::block_diag(&[
            &SymMatrix::from_fn(2, |_, _| rng.gen_range(-1.0..1.0)),
            &SymMatrix::from_fn(3, |_, _| rng.gen_range(-1.0..1.0)),
        ]);
        let p = AffineProblem::new(a0, vec![a1], DVector::zeros(1), DMatrix::zeros(1, 1));
        let nlp = SlackNlp::with_blocks(Arc::new(p), vec![2, 3]).with_start_slacks(vec![
            SymMatrix::scaled_identity(2, 3.0),
            SymMatrix::identity(3),
        ]);
        assert_eq!((nlp.dim(), nlp.num_constraints()), (1 + 3 + 6, 9));
        let z = nlp.start();
        let sp = nlp.split_point(&z);
        assert_eq!(sp.y.sub_block(0, 2), SymMatrix::scaled_identity(2, 3.0));
        assert_eq!(nlp.join_point(&sp), z);
        let w = DVector::from_fn(9, |_, _| rng.gen_range(-1.0..1.0));
        let (l, mu) = nlp.split_multipliers(&w);
        assert_eq!(mu.len(), 0);
        assert_eq!(nlp.join_multipliers(&l, &mu), w);
        let zr = DVector::from_fn(nlp.dim(), |_, _| rng.gen_range(-1.0..1.0));
        assert!(check_nlp_derivatives(&nlp, &zr, 4).passed());
    }
}
