mod common;

use proptest::prelude::*;
use slacksdp::reformulate::{multiplier_vector, recover_multiplier};
use slacksdp::symalg::{
    from_orthonormal_coords, jordan_product, lyap_apply, lyap_solve, orthonormal_coords,
    project_psd, psd_sqrt, pseudo_inverse, smat, svec, svec_pairing,
};
use slacksdp::SymMatrix;

fn sym(max_m: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=max_m).prop_flat_map(|m| {
        prop::collection::vec(-3.0..3.0f64, m * (m + 1) / 2).prop_map(|v| smat(&v).unwrap())
    })
}

fn pair(max_m: usize) -> impl Strategy<Value = (SymMatrix, SymMatrix)> {
    (1..=max_m).prop_flat_map(|m| {
        let n = m * (m + 1) / 2;
        (
            prop::collection::vec(-3.0..3.0f64, n),
            prop::collection::vec(-3.0..3.0f64, n),
        )
            .prop_map(|(a, b)| (smat(&a).unwrap(), smat(&b).unwrap()))
    })
}

proptest! {
    #[test]
    fn packing_round_trips(a in sym(6)) {
        prop_assert_eq!(smat(&svec(&a)).unwrap(), a.clone());
        let back = from_orthonormal_coords(orthonormal_coords(&a).as_slice()).unwrap();
        prop_assert!((&back - &a).max_abs() < 1e-12);
        prop_assert!((orthonormal_coords(&a).norm() - a.frobenius_norm()).abs() < 1e-10);
    }

    #[test]
    fn pairing_vector_represents_the_trace_inner_product((a, b) in pair(6)) {
        let d: f64 = svec_pairing(&a).iter().zip(svec(&b)).map(|(x, y)| x * y).sum();
        prop_assert!((d - a.inner(&b)).abs() < 1e-10 * (1.0 + a.frobenius_norm() * b.frobenius_norm()));
        let round = recover_multiplier(&multiplier_vector(&a)).unwrap();
        prop_assert!((&round - &a).max_abs() < 1e-14);
    }

    #[test]
    fn jordan_product_is_commutative_and_traces_agree((a, b) in pair(5)) {
        let ab = jordan_product(&a, &b);
        prop_assert_eq!(&ab, &jordan_product(&b, &a));
        prop_assert!((ab.trace() - a.inner(&b)).abs() < 1e-10 * (1.0 + a.frobenius_norm() * b.frobenius_norm()));
    }

    #[test]
    fn lyapunov_solution_satisfies_the_equation((a, b) in pair(5)) {
        if let Ok(x) = lyap_solve(&a, &b, 1e-6) {
            let res = (&lyap_apply(&a, &x) - &b).frobenius_norm();
            prop_assert!(res <= 1e-6 * (1.0 + b.frobenius_norm()) * (1.0 + x.frobenius_norm()));
        }
    }

    #[test]
    fn projection_and_root_are_consistent(a in sym(6)) {
        let p = project_psd(&a);
        prop_assert!(p.min_eigenvalue() >= -1e-12);
        let s = psd_sqrt(&p, 1e-12).unwrap();
        prop_assert!((&s.square() - &p).frobenius_norm() <= 1e-8 * (1.0 + p.frobenius_norm()));
        // The projection residual is negative semidefinite and orthogonal to p.
        let r = &a - &p;
        prop_assert!(r.max_eigenvalue() <= 1e-10);
        prop_assert!(r.inner(&p).abs() <= 1e-8 * (1.0 + a.frobenius_norm().powi(2)));
    }

    #[test]
    fn pseudo_inverse_identities(a in sym(5)) {
        let ap = pseudo_inverse(&a, 1e-10);
        let (a_, p_) = (a.as_matrix(), ap.as_matrix());
        let scale = 1.0 + a.frobenius_norm() * ap.frobenius_norm() * a.frobenius_norm();
        prop_assert!((a_ * p_ * a_ - a_).amax() <= 1e-8 * scale);
        let scale = 1.0 + ap.frobenius_norm() * a.frobenius_norm() * ap.frobenius_norm();
        prop_assert!((p_ * a_ * p_ - p_).amax() <= 1e-8 * scale);
    }
}
