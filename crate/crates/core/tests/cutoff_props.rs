use proptest::prelude::*;
use vancal_core::cutoff::{angle_threshold, lower_bound, make_params, quartic_expansion, upper_bound, CutoffProfile};

fn admissible() -> impl Strategy<Value = (usize, f64)> {
    (3usize..=12, 0.001f64..0.999).prop_map(|(n, s)| (n, lower_bound(n) + s * (upper_bound(n) - lower_bound(n))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn middle_lies_between_kappa_and_the_envelope((n, a) in admissible(), s in 0.0f64..=1.0) {
        let params = make_params(n, a).unwrap();
        let profile = CutoffProfile::new(params);
        let t = s * params.tan_theta;
        let mid = profile.middle(t);
        prop_assert!(mid >= params.kappa - 1e-12);
        prop_assert!(mid <= 1.0 - params.delta * t * t + 1e-12);
        prop_assert!(params.kappa > 0.0 && params.delta > 0.0);
    }

    #[test]
    fn quartic_matches_direct_evaluation((n, a) in admissible(), s in 0.0f64..=1.0) {
        let params = make_params(n, a).unwrap();
        let t = s * params.tan_theta;
        let direct = CutoffProfile::new(params).middle(t);
        let quartic = quartic_expansion(&params, t).unwrap();
        prop_assert!((direct - quartic).abs() <= 1e-13 * direct.abs());
    }

    #[test]
    fn half_angle_stays_above_the_threshold((n, a) in admissible()) {
        let params = make_params(n, a).unwrap();
        prop_assert!(2.0 * params.theta > angle_threshold(n).unwrap());
        prop_assert!(params.theta < std::f64::consts::FRAC_PI_4);
    }

    #[test]
    fn coefficients_vanish_past_the_interface((n, a) in admissible(), s in 1.0001f64..10.0) {
        let params = make_params(n, a).unwrap();
        let profile = CutoffProfile::new(params);
        let t = s * params.tan_theta;
        prop_assert_eq!(profile.gamma(t), 0.0);
        prop_assert_eq!(profile.c_coef(t), 0.0);
        prop_assert_eq!(profile.s_coef(t), 0.0);
    }
}
