//! Property-based tests: invariances that should hold for arbitrary
//! in-range inputs, not just hand-picked cases.

use expo_surf::bodies::ConvexBody;
use expo_surf::measure::{norm, MeasureParams};
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = (usize, f64)> {
    (2usize..40, prop_oneof![Just(0.5), Just(1.0), Just(2.0), Just(4.0), 0.3..8.0f64])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn density_is_rotation_invariant((n, p) in params_strategy(),
                                     seed in any::<u64>(),
                                     scale in 0.1..3.0f64) {
        // Coordinate permutation composed with sign flips is orthogonal, so
        // the density must not change.
        let m = MeasureParams::new(n, p).unwrap();
        let mut rng = expo_surf::rng::substream(seed, 0);
        let mut x = vec![0.0; n];
        m.sample_into(&mut x, &mut rng);
        x.iter_mut().for_each(|v| *v *= scale);
        let mut y: Vec<f64> = (0..n).map(|i| x[(i + 1) % n]).collect();
        y[0] = -y[0];
        let a = m.log_density(&x).unwrap();
        let b = m.log_density(&y).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn radial_cdf_monotone_and_quantile_round_trips((n, p) in params_strategy(),
                                                    q in 0.01..0.99f64) {
        let m = MeasureParams::new(n, p).unwrap();
        let r = m.radial_quantile(q).unwrap();
        prop_assert!((m.radial_cdf(r) - q).abs() < 1e-9);
        prop_assert!(m.radial_cdf(r * 1.01) >= m.radial_cdf(r));
    }

    #[test]
    fn body_json_round_trips(n in 2usize..12,
                             radius in 0.1..5.0f64,
                             offset in 0.1..4.0f64,
                             k in 1usize..6,
                             seed in any::<u64>()) {
        let mut rng = expo_surf::rng::substream(seed, 1);
        let mut dirs = Vec::new();
        for _ in 0..k {
            let mut v = vec![0.0; n];
            loop {
                use rand_distr::Distribution;
                for c in v.iter_mut() {
                    *c = rand_distr::StandardNormal.sample(&mut rng);
                }
                let nn = norm(&v);
                if nn > 1e-6 {
                    v.iter_mut().for_each(|c| *c /= nn);
                    break;
                }
            }
            dirs.push(v);
        }
        let mut normal = vec![0.0; n];
        normal[0] = 1.0;
        let bodies = [
            ConvexBody::ball(n, radius).unwrap(),
            ConvexBody::cube(n, radius).unwrap(),
            ConvexBody::slab(n, offset, normal).unwrap(),
            ConvexBody::halfspace_intersection(n, offset, dirs).unwrap(),
        ];
        for body in &bodies {
            let back = ConvexBody::from_json(&body.to_json()).unwrap();
            prop_assert_eq!(back.to_json(), body.to_json());
        }
    }

    #[test]
    fn distance_and_contains_agree((n, p) in params_strategy(),
                                   seed in any::<u64>(),
                                   radius in 0.5..3.0f64) {
        let m = MeasureParams::new(n, p).unwrap();
        let mut rng = expo_surf::rng::substream(seed, 2);
        let bodies = [
            ConvexBody::ball(n, radius).unwrap(),
            ConvexBody::cube(n, radius).unwrap(),
        ];
        let mut x = vec![0.0; n];
        for body in &bodies {
            for _ in 0..16 {
                m.sample_into(&mut x, &mut rng);
                let inside = body.contains(&x).unwrap();
                let (d, _) = body.distance(&x).unwrap();
                // Exact-distance bodies: inside iff distance zero.
                prop_assert_eq!(inside, d == 0.0);
                prop_assert!(d >= 0.0);
            }
        }
    }

    #[test]
    fn halfspace_distance_is_a_lower_bound(n in 2usize..8,
                                           seed in any::<u64>(),
                                           offset in 0.2..2.0f64) {
        // The max-violation distance never exceeds the true Euclidean
        // distance to the intersection; cross-check against the distance to
        // the nearest single halfspace, which for one constraint is exact.
        let mut rng = expo_surf::rng::substream(seed, 3);
        use rand_distr::Distribution;
        let mut dirs = Vec::new();
        for _ in 0..3 {
            let mut v: Vec<f64> = (0..n).map(|_| rand_distr::StandardNormal.sample(&mut rng)).collect();
            let nn = norm(&v);
            prop_assume!(nn > 1e-6);
            v.iter_mut().for_each(|c| *c /= nn);
            dirs.push(v);
        }
        let body = ConvexBody::halfspace_intersection(n, offset, dirs.clone()).unwrap();
        let m = MeasureParams::new(n, 2.0).unwrap();
        let mut x = vec![0.0; n];
        m.sample_into(&mut x, &mut rng);
        let (d, flag) = body.distance(&x).unwrap();
        prop_assert!(matches!(flag, expo_surf::bodies::DistanceFlag::LowerBound));
        // Reported distance equals the worst single-constraint violation.
        let worst = dirs
            .iter()
            .map(|u| (expo_surf::measure::dot(u, &x) - offset).max(0.0))
            .fold(0.0f64, f64::max);
        prop_assert!((d - worst).abs() <= 1e-12);
    }

    #[test]
    fn sphere_surface_positive_and_bounded((n, p) in params_strategy(),
                                           radius in 0.2..4.0f64) {
        let m = MeasureParams::new(n, p).unwrap();
        let est = expo_surf::surface::sphere_surface_exact(&m, radius).unwrap();
        prop_assert!(est.value >= 0.0);
        let rough = expo_surf::surface::rough_upper_bound(&m).unwrap();
        prop_assert!(est.value <= rough * (1.0 + 1e-9));
    }
}
