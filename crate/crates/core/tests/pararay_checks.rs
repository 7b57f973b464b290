use expray_core::dynray::RayConfig;
use expray_core::family::{singular_orbit, DEFAULT_ESCAPE_RE};
use expray_core::pararay::{
    classify_parabola_membership, derivative_growth_profile, initial_guess, singular_asymptotics_profile,
    solve_parameter_ray_point, trace_parameter_ray, ParamConfig,
};
use expray_core::{Error, ExternalAddress};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn address(bound: i64) -> impl Strategy<Value = ExternalAddress> {
    let entries = prop::collection::vec(-bound..=bound, 0..4);
    prop_oneof![
        entries.clone().prop_map(|p| ExternalAddress::finite(p).unwrap()),
        (entries, prop::collection::vec(-bound..=bound, 1..3)).prop_map(|(p, q)| ExternalAddress::periodic(p, q).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solved_points_reverify_at_double_depth(s in address(8), t in 2.0..30.0f64) {
        let cfg = ParamConfig::default();
        let p = cfg.solve_parameter_ray_point(&s, t, TOL).unwrap();
        prop_assert!(p.residual < TOL);
        prop_assert!(p.newton_steps <= cfg.step_cap);
        let mut deep = RayConfig::default();
        deep.max_depth *= 2;
        let g = deep.ray_point_adaptive(p.kappa, &s, t, TOL / 10.0).unwrap().value;
        prop_assert!((g - p.kappa).norm() < TOL, "{:e}", (g - p.kappa).norm());
    }

    #[test]
    fn conjugate_address_gives_conjugate_parameter(s in address(8), t in 2.0..30.0f64) {
        let a = solve_parameter_ray_point(&s, t, TOL).unwrap();
        let b = solve_parameter_ray_point(&s.negate(), t, TOL).unwrap();
        prop_assert!((a.kappa.conj() - b.kappa).norm() < 10.0 * TOL);
    }

    #[test]
    fn solved_points_escape(s in address(8), t in 2.0..30.0f64) {
        let p = solve_parameter_ray_point(&s, t, TOL).unwrap();
        prop_assert!(singular_orbit(p.kappa, 100, DEFAULT_ESCAPE_RE).escaped());
    }

    #[test]
    fn asymptotics_profile(s in address(8), t in 5.0..30.0f64) {
        let p = solve_parameter_ray_point(&s, t, TOL).unwrap();
        let d = singular_asymptotics_profile(&p, &s, 100);
        prop_assert!(!d.is_empty());
        prop_assert_eq!(d[0], (p.kappa - initial_guess(&s, t)).norm());
        prop_assert!(d.iter().all(|&x| x < 2.0), "{:?}", d);
        prop_assert!(d[1..].windows(2).all(|w| w[1] <= w[0]), "{:?}", d);
    }

    #[test]
    fn derivative_growth(s in address(8), t in 5.0..30.0f64) {
        let p = solve_parameter_ray_point(&s, t, TOL).unwrap();
        let g = derivative_growth_profile(&p, 100);
        prop_assert_eq!(g[0], 1.0);
        // For 6.55 < t < 13.8, E^1 is already past the guard while
        // |(E^1)'| = |e^κ + 1| is still below 10^6.
        if g.len() > 2 || t > 14.0 {
            prop_assert!(*g.last().unwrap() > 1e6, "{:?}", g);
        }
        let orbit = expray_core::family::singular_orbit_with_derivative(p.kappa, 100);
        let entry = (0..g.len() - 1).find(|&k| orbit.values[k].re > 1.0 && g[k] > 2.0);
        if let Some(k) = entry {
            prop_assert!(g[k..].windows(2).all(|w| w[1] > w[0]), "{:?}", g);
        }
    }

    // The orbit past E^1(κ) ≈ F(t) + 2πi s_2 lies beyond double precision, so
    // membership is decided on E^0 and E^1 alone. E^1 is inside P_{2,1} once
    // 2π|s_2| < sqrt(F(t)), which holds for |s_2| ≤ 1 at t ≥ 5 and for
    // |s_2| ≤ 8 at t ≥ 10.
    #[test]
    fn parabola_membership_small_entries(s in address(1), t in 5.0..30.0f64) {
        let p = solve_parameter_ray_point(&s, t, TOL).unwrap();
        prop_assert!(classify_parabola_membership(&p, 2.0, 1.0, 100).unwrap().first_inside.is_some());
    }

    #[test]
    fn parabola_membership_large_t(s in address(8), t in 10.0..30.0f64) {
        let p = solve_parameter_ray_point(&s, t, TOL).unwrap();
        prop_assert!(classify_parabola_membership(&p, 2.0, 1.0, 100).unwrap().first_inside.is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn continuation_matches_fresh_solves(s in address(8)) {
        let line = trace_parameter_ray(&s, 2.0, 30.0, 60, TOL).unwrap();
        prop_assert!(!line.truncated);
        prop_assert_eq!(line.entries.len(), 60);
        for e in &line.entries {
            prop_assert!(e.residual < TOL);
            let fresh = solve_parameter_ray_point(&s, e.t, TOL).unwrap();
            prop_assert!((fresh.kappa - e.value).norm() < 1e-6, "t={} {} vs {}", e.t, fresh.kappa, e.value);
        }
    }
}

#[test]
fn pure_zeros_are_real() {
    for t in [2.0, 5.0, 10.0, 30.0, 200.0] {
        let p = solve_parameter_ray_point(&ExternalAddress::zeros(), t, TOL).unwrap();
        assert!(p.kappa.im.abs() < 1e-9, "t={t}: {}", p.kappa);
        assert!(p.residual < TOL);
    }
}

#[test]
fn newton_step_counts() {
    let s = ExternalAddress::finite(vec![1]).unwrap();
    let cfg = ParamConfig::default();
    let p = cfg.solve_parameter_ray_point(&s, 6.0, TOL).unwrap();
    assert!(p.newton_steps <= 8);
    let again = cfg.solve_from(&s, 6.0, TOL, p.kappa).unwrap();
    assert_eq!(again.newton_steps, 1);
}

#[test]
fn traced_rays_go_to_infinity_and_stay_apart() {
    let zero = trace_parameter_ray(&ExternalAddress::zeros(), 3.0, 25.0, 120, TOL).unwrap();
    let one = trace_parameter_ray(&ExternalAddress::finite(vec![1]).unwrap(), 3.0, 25.0, 120, TOL).unwrap();
    for line in [&zero, &one] {
        assert!(!line.truncated);
        let (first, last) = (line.entries[0].value, line.entries.last().unwrap().value);
        assert!(last.re > first.re);
        assert!(last.norm() > first.norm());
        assert!(line.entries.windows(2).all(|w| w[1].t > w[0].t && w[1].value != w[0].value));
    }
    let min = zero
        .points()
        .iter()
        .flat_map(|a| one.points().into_iter().map(move |b| (a - b).norm()))
        .fold(f64::INFINITY, f64::min);
    assert!(min > 0.1, "{min}");
}

#[test]
fn refusals() {
    let s = ExternalAddress::zeros();
    assert!(matches!(solve_parameter_ray_point(&s, 0.5, TOL), Err(Error::BelowFloor { .. })));
    let wild = ExternalAddress::finite(vec![65]).unwrap();
    assert!(matches!(solve_parameter_ray_point(&wild, 5.0, TOL), Err(Error::Inadmissible { .. })));
    assert!(trace_parameter_ray(&s, 5.0, 3.0, 10, TOL).is_err());
}
