use nalgebra::DMatrix;
use vancal_core::calibration::{
    build_vanishing_calibration, sum_pair_calibration, verify_calibration, verify_pair, CalibrationCheckOptions,
    WedgeCoordinates,
};
use vancal_core::current::{ball_mesh, ball_pair_check, calibration_inequality_check, integrate_form};
use vancal_core::cutoff::{make_params, CutoffProfile};
use vancal_core::exterior::{AlternatingTensor, ConstantField, FormField};
use vancal_core::numeric::{fit_order, seeded_rng, GridBox};
use vancal_core::retraction::RetractionMap;
use vancal_core::subspace::{intersect_and_split, plane_pair_with_angles, OrientedSubspace};

/// Jacobian of `(x, y) -> rho(t) x` with `rho = gamma^{1/n}`, assembled by the chain rule.
fn chain_rule_jacobian(n: usize, a: f64, p: &[f64]) -> DMatrix<f64> {
    let params = make_params(n, a).unwrap();
    let profile = CutoffProfile::new(params);
    let dim = p.len();
    let (x, y) = p.split_at(n);
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let z = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let t = z / r;
    let g = profile.gamma(t);
    let rho = g.powf(1.0 / n as f64);
    let drho = profile.derivative_left(t) * g.powf(1.0 / n as f64 - 1.0) / n as f64;
    // dt/dx_j = -z x_j / r^3, dt/dy_b = y_b / (z r)
    let mut grad_t = vec![0.0; dim];
    for j in 0..n {
        grad_t[j] = -z * x[j] / r.powi(3);
    }
    for b in 0..y.len() {
        grad_t[n + b] = y[b] / (z * r);
    }
    DMatrix::from_fn(dim, dim, |i, j| {
        if i >= n {
            return 0.0;
        }
        let identity = if i == j { rho } else { 0.0 };
        identity + x[i] * drho * grad_t[j]
    })
}

#[test]
fn retraction_jacobian_matches_the_chain_rule() {
    let map = RetractionMap::new(&make_params(3, 2.5).unwrap(), &WedgeCoordinates::standard(3, 3, 0)).unwrap();
    let mut rng = seeded_rng(11);
    for _ in 0..50 {
        let p = map.sample_wedge_point(&mut rng, (0.5, 1.5));
        if map.interface_distance(&p) < 0.05 || p[3..].iter().all(|v| *v == 0.0) {
            continue;
        }
        let fd = map.differential(&p, 1e-5).unwrap();
        let exact = chain_rule_jacobian(3, 2.5, &p);
        assert!((fd - &exact).amax() < 1e-6 * exact.amax().max(1.0));
    }
}

#[test]
fn disk_area_converges_at_second_order() {
    let divisions = [8usize, 16, 32, 64];
    let errors: Vec<f64> = divisions.iter().map(|d| (std::f64::consts::PI - ball_mesh(2, *d).unwrap().mass()).abs()).collect();
    let steps: Vec<f64> = divisions.iter().map(|d| 2.0 / *d as f64).collect();
    let order = fit_order(&steps, &errors).unwrap();
    assert!((order - 2.0).abs() < 0.1, "order {order}, errors {errors:?}");
    // 2 * 71^2 = 10082 triangles
    let disk = ball_mesh(2, 71).unwrap();
    assert!(disk.len() >= 10_000);
    assert!((disk.mass() - std::f64::consts::PI).abs() < 1e-3);
}

#[test]
fn vanishing_calibration_pairs_to_the_mass_of_a_three_ball() {
    let cal = build_vanishing_calibration(&make_params(3, 2.5).unwrap(), &WedgeCoordinates::standard(3, 3, 0)).unwrap();
    let ball = ball_mesh(3, 6).unwrap().embed(&DMatrix::from_fn(6, 3, |i, j| f64::from(i == j)), None).unwrap();
    let check = calibration_inequality_check(&ball, &cal, 1.0, 2).unwrap();
    assert!(check.calibrated, "{check:?}");
    assert!((check.pairing - check.mass).abs() <= 1e-6 * check.mass);
    let vol = ConstantField(AlternatingTensor::basis(6, &[0, 1, 2]).unwrap());
    assert!((integrate_form(&ball, &vol, 1).unwrap().value - check.mass).abs() < 1e-12);
}

#[test]
fn rotated_coordinates_pass_the_full_check() {
    let mut rng = seeded_rng(5);
    let q = vancal_core::numeric::random_orthonormal_frame(&mut rng, 6, 6);
    let coords = WedgeCoordinates::from_frame(3, 3, 0, q).unwrap();
    let cal = build_vanishing_calibration(&make_params(3, 2.5).unwrap(), &coords).unwrap();
    assert_eq!(cal.degree(), 3);
    let opts = CalibrationCheckOptions { per_axis: 5, closedness_points: 8, value_samples: 50, ..Default::default() };
    let report = verify_calibration(&cal, &GridBox::cube(6, 1.5), &opts).unwrap();
    assert!(report.pass, "{report:#?}");
}

#[test]
fn generic_pair_above_the_budget() {
    let params = make_params(3, 2.5).unwrap();
    let budget = 2.0 * params.theta;
    let (p1, p2) = plane_pair_with_angles(3, 0, &[budget + 0.02, budget + 0.04, 1.5]).unwrap();
    let mut rng = seeded_rng(9);
    let q = vancal_core::numeric::random_orthonormal_frame(&mut rng, 6, 6);
    let pair = intersect_and_split(&p1.transformed(&q).unwrap(), &p2.transformed(&q).unwrap()).unwrap();
    let cal = sum_pair_calibration(&params, &pair).unwrap();
    let opts = CalibrationCheckOptions { per_axis: 6, closedness_points: 8, value_samples: 50, ..Default::default() };
    let report = verify_pair(&cal, &GridBox::cube(6, 1.0), &opts).unwrap();
    assert!(report.pass, "{report:#?}");
    let balls = ball_pair_check(&cal, 3, 2, &[0.1]).unwrap();
    assert!(balls.pass, "{balls:#?}");
}

#[test]
fn reversed_plane_orientation_is_calibrated_by_the_reversed_form() {
    let p1 = OrientedSubspace::coordinate(6, &[0, 1, 2]).unwrap();
    let p2 = OrientedSubspace::coordinate(6, &[4, 3, 5]).unwrap();
    let pair = intersect_and_split(&p1, &p2).unwrap();
    let cal = sum_pair_calibration(&make_params(3, 2.5).unwrap(), &pair).unwrap();
    // the second summand evaluates to 1 on the frame (e4, e3, e5)
    let frame = DMatrix::from_fn(6, 3, |i, j| f64::from(i == [4, 3, 5][j]));
    let value = cal.eval(&[0.0, 0.0, 0.0, 0.3, 0.2, 0.1]).evaluate_columns(&frame).unwrap();
    assert!((value - 1.0).abs() < 1e-12);
}
