use nalgebra::DVector;
use slacksdp::bench::{
    build_cor, build_cor_ext, build_hs71, gen_correlation_h, ncm_oracle, run_suite, summarize,
    summary_table, to_csv, InstanceSpec, CSV_HEADER,
};
use slacksdp::model::check_derivatives;
use slacksdp::solver::{SolveStatus, SolverConfig};
use slacksdp::symalg::project_psd;
use slacksdp::{NsdpProblem, SymMatrix};

#[test]
fn correlation_data_has_unit_diagonal_and_bounded_entries() {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for seed in 0..50 {
        let h = gen_correlation_h(6, seed);
        assert!(h.diagonal().iter().all(|&d| d == 1.0));
        for i in 0..6 {
            for j in 0..i {
                lo = lo.min(h[(i, j)]);
                hi = hi.max(h[(i, j)]);
                assert_eq!(h[(i, j)], h[(j, i)]);
            }
        }
    }
    // 750 draws: the range is inside (−1, 1) and nearly fills it.
    assert!(lo > -1.0 && hi < 1.0);
    assert!(lo < -0.95 && hi > 0.95);
    assert_eq!(gen_correlation_h(6, 7), gen_correlation_h(6, 7));
    assert_ne!(gen_correlation_h(6, 7), gen_correlation_h(6, 8));
}

#[test]
fn hs_data_at_the_start() {
    let hs = build_hs71();
    let x = DVector::from_vec(vec![5.0, 5.0, 5.0, 5.0, 0.0, 0.0]);
    assert_eq!((hs.n(), hs.m(), hs.p()), (6, 4, 2));
    assert_eq!(hs.objective(&x), 380.0);
    let g = hs.matrix_constraint(&x);
    let expected = [
        [5.0, 5.0, 0.0, 0.0],
        [5.0, 5.0, 10.0, 0.0],
        [0.0, 10.0, 5.0, 5.0],
        [0.0, 0.0, 5.0, 5.0],
    ];
    for (i, row) in expected.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert_eq!(g[(i, j)], *v);
        }
    }
    assert!(check_derivatives(&hs, &x, 0).passed());
}

#[test]
fn cor_is_minimized_at_a_correlation_target() {
    let h = SymMatrix::from_fn(3, |i, j| if i == j { 1.0 } else { 0.3 });
    let cor = build_cor(&h);
    let x = DVector::from_vec(slacksdp::symalg::svec(&h));
    assert_eq!(cor.objective(&x), 0.0);
    assert!(cor.gradient(&x).amax() == 0.0);
}

#[test]
fn cor_ext_feasible_points_have_bounded_spectrum() {
    let h = gen_correlation_h(4, 2);
    let prob = build_cor_ext(&h, 10.0);
    let x = SymMatrix::from_diagonal(&[1.0, 4.0, 9.0, 10.0]);
    let mut v = slacksdp::symalg::svec(&x);
    v.push(0.5);
    let g = prob.matrix_constraint(&DVector::from_vec(v));
    assert!(g.min_eigenvalue() >= 0.0);
}

#[test]
fn oracle_is_a_fixed_point_on_correlation_matrices_and_clamps_2x2() {
    let h = SymMatrix::from_fn(3, |i, j| if i == j { 1.0 } else { -0.2 });
    assert!((&ncm_oracle(&h, 1e-12).unwrap() - &h).max_abs() < 1e-10);
    let h = SymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 2.0 });
    let x = ncm_oracle(&h, 1e-12).unwrap();
    assert!((x[(0, 1)] - 1.0).abs() < 1e-8);
    assert_eq!(x.diagonal(), vec![1.0, 1.0]);
}

#[test]
fn oracle_beats_every_feasible_competitor() {
    let h = gen_correlation_h(5, 3);
    let best = ncm_oracle(&h, 1e-12).unwrap();
    let obj = |x: &SymMatrix| (x - &h).frobenius_norm();
    assert!(best.min_eigenvalue() >= -1e-10);
    // A naive competitor: project, then rescale to unit diagonal.
    let p = project_psd(&h);
    let d: Vec<f64> = p.diagonal().iter().map(|v| 1.0 / v.sqrt()).collect();
    let naive = SymMatrix::from_fn(5, |i, j| p[(i, j)] * d[i] * d[j]);
    assert!(obj(&best) <= obj(&naive) + 1e-10);
    assert!(obj(&best) <= obj(&SymMatrix::identity(5)) + 1e-10);
}

#[test]
fn suite_records_every_instance_and_is_reproducible() {
    let mut specs = InstanceSpec::series("cor-slack", 4, 10, 5, 10.0);
    specs.push(InstanceSpec::new("hs71sdp", 4, 0));
    specs.push(InstanceSpec::new("cor", 1, 0));
    specs.push(InstanceSpec::new("no-such-problem", 3, 0));
    let cfg = SolverConfig::default();
    let a = run_suite(&specs, &cfg, 2).unwrap();
    assert_eq!(a.len(), specs.len());
    for (r, s) in a.iter().zip(&specs) {
        assert_eq!(&r.instance, s);
    }
    assert!(a[..6]
        .iter()
        .all(|r| r.status == Some(SolveStatus::Converged) && r.certified && !r.failed()));
    assert!((a[5].objective - 87.7105).abs() < 1e-2);
    assert!(a[6].failed() && a[6].error.is_some());
    assert!(a[7].failed() && a[7].status.is_none());

    let b = run_suite(&specs, &cfg, 1).unwrap();
    let strip = |csv: String| -> Vec<String> {
        csv.lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(6);
                f.join(",")
            })
            .collect()
    };
    assert_eq!(strip(to_csv(&a)), strip(to_csv(&b)));
    let csv = to_csv(&a);
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert_eq!(csv.lines().count(), specs.len() + 1);
    assert!(csv.lines().nth(8).unwrap().contains(",Error,"));
}

#[test]
fn summary_groups_by_problem_and_order() {
    let mut specs = InstanceSpec::series("cor-slack", 3, 0, 3, 10.0);
    specs.extend(InstanceSpec::series("cor-slack", 4, 0, 2, 10.0));
    let records = run_suite(&specs, &SolverConfig::default(), 0).unwrap();
    let s = summarize(&records);
    assert_eq!(s.len(), 2);
    assert_eq!((s[0].m, s[0].instances, s[0].fail), (3, 3, 0));
    assert_eq!((s[1].m, s[1].instances), (4, 2));
    assert!(s[0].min_time <= s[0].mean_time && s[0].mean_time <= s[0].max_time);
    let table = summary_table(&records);
    assert!(table.lines().next().unwrap().contains("mean (s)"));
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn invalid_config_is_rejected_before_running() {
    let cfg = SolverConfig {
        outer_tol: -1.0,
        ..SolverConfig::default()
    };
    assert!(run_suite(&[InstanceSpec::new("cor", 3, 0)], &cfg, 1).is_err());
}
