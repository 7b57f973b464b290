use expray_core::fractaldim::{
    box_dimension, build_cover_root, count_covering_squares, count_covering_squares_ln, refine_cover,
    run_cover_experiment, CoverConfig, ParabolaRegion, SquareCount,
};
use expray_core::pararay::trace_parameter_ray;
use expray_core::{ComplexPoint, ExternalAddress};

#[test]
fn first_refinement_at_xi0_20() {
    let root = build_cover_root(20.0).unwrap();
    let region = ParabolaRegion::new(2.0, 10.0).unwrap();
    let k = root.config.k_koebe;
    let child = refine_cover(&root, &region, 10.0).unwrap();
    assert!(child.max_children_ratio.unwrap() <= 1.0);
    assert!(child.min_re() >= 20f64.exp() / 2.0);
    let parent_diam = root.elements[0].diam_estimate(k);
    let factor = (20f64.exp() - 1.0) / k;
    for e in &child.elements {
        assert!(e.min_re >= 20f64.exp() / 2.0);
        assert!(region.contains(ComplexPoint::new(e.min_re + 1.0, 0.0)));
        assert!(parent_diam / e.diam_estimate(k) >= factor);
    }
    let n = child.square_count().unwrap();
    assert!(n as f64 <= count_covering_squares(2.0, 20.0, 10.0).unwrap() as f64);
}

#[test]
fn dichotomy_over_three_generations() {
    let report = run_cover_experiment(2.0, 20.0, 10.0, &[1.6, 1.3], 3, None, CoverConfig::default()).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert!(report.strictly_decreasing(0));
    assert!(report.strictly_increasing(1));
    assert!(report.max_children_ratio.unwrap() <= 1.0);
    for w in report.rows.windows(2) {
        assert!(w[1].min_re >= w[0].min_re.exp_half());
    }
    assert!(report.rows.iter().skip(2).all(|r| r.analytic));
    assert!(!report.rows[1].analytic);
    assert!(matches!(report.rows[1].count, SquareCount::Exact(_)));
    assert!(report.cap.is_some());
}

#[test]
fn larger_roots_keep_the_dichotomy() {
    for xi0 in [20.0, 24.0, 28.0] {
        let report = run_cover_experiment(2.0, xi0, 10.0, &[1.6, 1.3], 3, None, CoverConfig::default()).unwrap();
        assert!(report.strictly_decreasing(0), "xi0={xi0}");
        assert!(report.strictly_increasing(1), "xi0={xi0}");
    }
}

#[test]
fn counting_formula_scaling() {
    let ratio = (count_covering_squares_ln(2.0, 21.0, 10.0).unwrap() - count_covering_squares_ln(2.0, 20.0, 10.0).unwrap()).exp();
    let target = 1.5f64.exp();
    assert!((ratio / target - 1.0).abs() < 0.05);
    let mut last = 0;
    for m in [0.0, 1.0, 10.0, 1e3, 1e6] {
        let n = count_covering_squares(2.0, 5.0, m).unwrap();
        assert!(n >= last);
        last = n;
    }
}

#[test]
fn parameter_ray_box_dimension() {
    let line = trace_parameter_ray(&ExternalAddress::zeros(), 2.0, 30.0, 20_000, 1e-10).unwrap();
    assert!(!line.truncated);
    let fit = box_dimension(&line.points(), 1.0, 0.01, 6).unwrap();
    assert!((fit.slope - 1.0).abs() <= 0.15, "{}", fit.slope);
    let line = trace_parameter_ray(&ExternalAddress::finite(vec![1, -2]).unwrap(), 2.0, 30.0, 5_000, 1e-10).unwrap();
    let fit = box_dimension(&line.points(), 1.0, 0.01, 6).unwrap();
    assert!((0.85..=1.15).contains(&fit.slope), "{}", fit.slope);
}
