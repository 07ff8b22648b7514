use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use weyl_lab::covering::{check_cover, greedy_cover, phi_kt, LargeValue};
use weyl_lab::torus::reduce_unit;
use weyl_lab::vinogradov::{count, count_naive};
use weyl_lab::weyl::{weyl_sum, Method};
use weyl_lab::{Rectangle, TorusPoint, WeightSequence};

fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, d)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reduce_unit_lands_in_unit_interval(x in -1e12..1e12f64) {
        let r = reduce_unit(x);
        prop_assert!((0.0..1.0).contains(&r));
    }

    #[test]
    fn negation_conjugates(x in point(3), n in 1u64..400) {
        let w = WeightSequence::unit();
        let p = TorusPoint::new(x).unwrap();
        let a = weyl_sum(&p, n, &w, Method::Incremental).unwrap().value;
        let b = weyl_sum(&p.negated(), n, &w, Method::Incremental).unwrap().value;
        assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-9);
        assert_abs_diff_eq!(a.im, -b.im, epsilon = 1e-9);
    }

    #[test]
    fn kernels_agree(x in point(2), n in 1u64..2000) {
        let w = WeightSequence::alternating();
        let p = TorusPoint::new(x).unwrap();
        let a = weyl_sum(&p, n, &w, Method::Direct).unwrap();
        let b = weyl_sum(&p, n, &w, Method::Incremental).unwrap();
        let budget = a.phase_error_budget + b.phase_error_budget;
        prop_assert!((a.value - b.value).norm() <= budget, "{} > {budget}", (a.value - b.value).norm());
    }

    #[test]
    fn trivial_bound(x in point(4), n in 1u64..300) {
        let p = TorusPoint::new(x).unwrap();
        let s = weyl_sum(&p, n, &WeightSequence::unit(), Method::Incremental).unwrap();
        prop_assert!(s.value.norm() <= n as f64 + 1e-9);
    }

    #[test]
    fn greedy_cover_contract(
        pts in prop::collection::vec((point(2), 1.0..100.0f64), 1..60),
        z1 in 0.005..0.2f64,
        z2 in 0.001..0.05f64,
    ) {
        let points: Vec<LargeValue> = pts.into_iter().map(|(coords, w)| LargeValue { coords, w }).collect();
        let report = greedy_cover(&points, &[z1, z2]).unwrap();
        prop_assert!(check_cover(&report, &points).holds());
        prop_assert!(report.rectangles.len() <= points.len());
    }

    #[test]
    fn phi_scales_with_t(
        h in prop::collection::vec(0.01..1.0f64, 3),
        c in 0.1..3.0f64,
        k in 0usize..3,
        dt in 0.0..1.0f64,
    ) {
        let t = (k as f64 + dt).max(1e-3);
        let r = Rectangle::new(vec![0.5; 3], h).unwrap();
        let lhs = phi_kt(&r.scaled(c), k, t).unwrap();
        let rhs = c.powf(t) * phi_kt(&r, k, t).unwrap();
        assert_abs_diff_eq!(lhs / rhs, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn vinogradov_matches_enumeration(n in 1u64..5, a in -6i64..7, b in -30i64..31) {
        let w = WeightSequence::unit();
        let fast = count(2, 2, n, &[a, b], &w).unwrap().count.exact().unwrap();
        let slow = count_naive(2, 2, n, &[a, b], &w).unwrap().exact().unwrap();
        let mirror = count(2, 2, n, &[-a, -b], &w).unwrap().count.exact().unwrap();
        prop_assert_eq!(fast, slow);
        prop_assert_eq!(fast, mirror);
    }
}

#[test]
fn phi_is_continuous_across_integer_t() {
    let r = Rectangle::new(vec![0.5; 3], vec![0.3, 0.02, 0.1]).unwrap();
    for k in 1..3 {
        let at = phi_kt(&r, k, k as f64).unwrap();
        let below = phi_kt(&r, k - 1, k as f64).unwrap();
        assert_abs_diff_eq!(at, below, epsilon = 1e-14);
    }
}
