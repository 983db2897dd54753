//! The 1-homogeneous retraction `Pi(x, y, l) = (gamma(t)^{1/n} x, 0, l)` onto the
//! calibrated plane, and checks that it does not increase n-dimensional volume.

use nalgebra::DMatrix;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::WedgeCoordinates;
use crate::cutoff::{CutoffParams, CutoffProfile};
use crate::error::{Error, Result};
use crate::numeric::{random_orthonormal_frame, random_unit_vector, seeded_rng, Rng};

#[derive(Debug, Clone)]
pub struct RetractionMap {
    coords: WedgeCoordinates,
    profile: CutoffProfile,
}

impl RetractionMap {
    pub fn new(params: &CutoffParams, coords: &WedgeCoordinates) -> Result<Self> {
        if !params.is_admissible() {
            return Err(Error::Inadmissible(format!(
                "a = {} outside (4n/(n+2), n(n-2)) for n = {}",
                params.a, params.n
            )));
        }
        Self::unchecked(params, coords)
    }

    /// No admissibility check; used for negative controls.
    pub fn unchecked(params: &CutoffParams, coords: &WedgeCoordinates) -> Result<Self> {
        if params.n != coords.n() {
            return Err(Error::InvalidArgument(format!(
                "cutoff dimension {} does not match the x-block dimension {}",
                params.n,
                coords.n()
            )));
        }
        Ok(Self { coords: coords.clone(), profile: CutoffProfile::new(*params) })
    }

    pub fn coords(&self) -> &WedgeCoordinates {
        &self.coords
    }

    pub fn params(&self) -> &CutoffParams {
        &self.profile.params
    }

    /// `gamma(t)^{1/n}`, zero from the interface on.
    pub fn scale(&self, t: f64) -> f64 {
        let g = self.profile.gamma(t);
        if g <= 0.0 {
            0.0
        } else {
            g.powf(1.0 / self.params().n as f64)
        }
    }

    pub fn apply_into(&self, p: &[f64], out: &mut [f64]) {
        let (n, m) = (self.coords.n(), self.coords.m());
        let mut u = [0.0f64; 16];
        let u = &mut u[..self.coords.ambient_dim()];
        self.coords.adapted(p, u);
        let (r, z) = self.coords.rz_adapted(u);
        let s = if r > 0.0 { self.scale(z / r) } else { 0.0 };
        for v in &mut u[..n] {
            *v *= s;
        }
        u[n..n + m].fill(0.0);
        self.coords.ambient(u, out);
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; p.len()];
        self.apply_into(p, &mut out);
        out
    }

    /// Distance from `p` to the cone `z = r tan theta`.
    pub fn interface_distance(&self, p: &[f64]) -> f64 {
        let (r, z) = self.coords.rz(p);
        let tan = self.params().tan_theta;
        (z - tan * r).abs() / (1.0 + tan * tan).sqrt()
    }

    /// Central-difference Jacobian. The stencil must stay `2h` away from the interface
    /// and from `r = 0`.
    pub fn differential(&self, p: &[f64], h: f64) -> Result<DMatrix<f64>> {
        let dim = self.coords.ambient_dim();
        if p.len() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: p.len() });
        }
        let (r, _) = self.coords.rz(p);
        if r <= 2.0 * h || self.interface_distance(p) <= 2.0 * h {
            return Err(Error::StencilOnSingularLocus { point: p.to_vec(), step: h });
        }
        let mut jac = DMatrix::zeros(dim, dim);
        let mut q = p.to_vec();
        let mut plus = vec![0.0; dim];
        let mut minus = vec![0.0; dim];
        for j in 0..dim {
            q[j] = p[j] + h;
            self.apply_into(&q, &mut plus);
            q[j] = p[j] - h;
            self.apply_into(&q, &mut minus);
            q[j] = p[j];
            for i in 0..dim {
                jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        Ok(jac)
    }

    /// Closed-form supremum of the n-volume scaling at slope `t`:
    /// `sqrt((gamma - (t/n) gamma')^2 + (gamma'/n)^2)` inside the wedge, 0 outside.
    pub fn closed_form_scaling(&self, t: f64) -> f64 {
        if t >= self.params().tan_theta {
            return 0.0;
        }
        self.profile.c_coef(t).hypot(self.profile.s_coef(t))
    }

    /// A random point of the open wedge with `r` in `r_range`, `t` uniform in
    /// `[0, tan theta)` and l-coordinates uniform in `[-1, 1]`.
    pub fn sample_wedge_point(&self, rng: &mut Rng, r_range: (f64, f64)) -> Vec<f64> {
        let (n, m, k) = (self.coords.n(), self.coords.m(), self.coords.k());
        let r = r_range.0 + (r_range.1 - r_range.0) * rng.random::<f64>();
        let t = self.params().tan_theta * rng.random::<f64>();
        let x: Vec<f64> = random_unit_vector(rng, n).iter().map(|v| v * r).collect();
        let y: Vec<f64> = random_unit_vector(rng, m).iter().map(|v| v * r * t).collect();
        let l: Vec<f64> = (0..k).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        self.coords.point(&x, &y, &l)
    }
}

/// n-volume scaling of `jac` on the plane spanned by the orthonormal columns of
/// `plane`: the product of the singular values of `jac * plane`.
pub fn volume_scaling(jac: &DMatrix<f64>, plane: &DMatrix<f64>) -> f64 {
    (jac * plane).singular_values().iter().product()
}

/// Largest n-volume scaling over all n-planes: the product of the top `n` singular values.
pub fn max_volume_scaling(jac: &DMatrix<f64>, n: usize) -> f64 {
    let mut sv: Vec<f64> = jac.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.iter().take(n).product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub samples: usize,
    pub planes_per_sample: usize,
    pub step: f64,
    /// Points where the Jacobian was evaluated.
    pub evaluated_points: usize,
    /// Points within `2h` of the interface, examined by difference quotients only.
    pub interface_points: usize,
    pub max_plane_scaling: f64,
    pub max_top_scaling: f64,
    /// Largest deviation of the top-n scaling from its closed form.
    pub max_closed_form_gap: f64,
    /// Largest difference quotient `|Pi(p) - Pi(q)| / |p - q|` at interface points.
    pub interface_max_quotient: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Samples wedge points (`r` in `[0.5, 1.5]`) and random n-planes and records the
/// n-volume scaling of the finite-difference Jacobian.
pub fn verify_area_nonincreasing(map: &RetractionMap, samples: usize, planes_per_sample: usize, seed: u64) -> AreaReport {
    const STEP: f64 = 1e-4;
    const TOL: f64 = 1e-8;
    let n = map.coords.n();
    let dim = map.coords.ambient_dim();

    struct Sample {
        interface: bool,
        plane_max: f64,
        top: f64,
        gap: f64,
        quotient: f64,
    }
    let results: Vec<Sample> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(seed ^ (i as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03));
            let p = map.sample_wedge_point(&mut rng, (0.5, 1.5));
            let d = map.interface_distance(&p);
            if d <= 2.0 * STEP {
                let image = map.apply(&p);
                let dir = random_unit_vector(&mut rng, dim);
                let q: Vec<f64> = p.iter().zip(&dir).map(|(a, b)| a + STEP * b).collect();
                let other = map.apply(&q);
                let dist: f64 = image.iter().zip(&other).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                return Sample { interface: true, plane_max: 0.0, top: 0.0, gap: 0.0, quotient: dist / STEP };
            }
            // shrink the step near the interface, where the derivative blows up
            let h = STEP.min(d / 100.0);
            let jac = map.differential(&p, h).expect("stencil clear of the interface");
            let plane_max = (0..planes_per_sample)
                .map(|_| volume_scaling(&jac, &random_orthonormal_frame(&mut rng, dim, n)))
                .fold(0.0, f64::max);
            let top = max_volume_scaling(&jac, n);
            let t = map.coords.t(&p).expect("r > 0 in the sampled shell");
            let gap = (top - map.closed_form_scaling(t)).abs();
            Sample { interface: false, plane_max, top, gap, quotient: 0.0 }
        })
        .collect();

    let interface_points = results.iter().filter(|s| s.interface).count();
    let max_plane_scaling = results.iter().map(|s| s.plane_max).fold(0.0, f64::max);
    let max_top_scaling = results.iter().map(|s| s.top).fold(0.0, f64::max);
    AreaReport {
        samples,
        planes_per_sample,
        step: STEP,
        evaluated_points: samples - interface_points,
        interface_points,
        max_plane_scaling,
        max_top_scaling,
        max_closed_form_gap: results.iter().map(|s| s.gap).fold(0.0, f64::max),
        interface_max_quotient: results.iter().map(|s| s.quotient).fold(0.0, f64::max),
        tolerance: TOL,
        pass: max_plane_scaling <= 1.0 + TOL && max_top_scaling <= 1.0 + TOL,
    }
}

/// Largest relative error of `Pi(s p) = s Pi(p)` over random `s` in `(0, 3)` and
/// random points of the box `[-1.5, 1.5]^N`.
pub fn homogeneity_error(map: &RetractionMap, samples: usize, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    let dim = map.coords.ambient_dim();
    (0..samples)
        .map(|_| {
            let p: Vec<f64> = (0..dim).map(|_| 3.0 * rng.random::<f64>() - 1.5).collect();
            let s = 3.0 * rng.random::<f64>();
            let lhs = map.apply(&p.iter().map(|v| s * v).collect::<Vec<_>>());
            let rhs: Vec<f64> = map.apply(&p).iter().map(|v| s * v).collect();
            let scale = rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let err = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if scale > 1e-300 {
                err / scale
            } else {
                err
            }
        })
        .fold(0.0, f64::max)
}

/// Largest `|Pi(Pi(p)) - Pi(p)|` over random points of `[-1.5, 1.5]^N`.
pub fn idempotence_error(map: &RetractionMap, samples: usize, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    let dim = map.coords.ambient_dim();
    (0..samples)
        .map(|_| {
            let p: Vec<f64> = (0..dim).map(|_| 3.0 * rng.random::<f64>() - 1.5).collect();
            let once = map.apply(&p);
            let twice = map.apply(&once);
            once.iter().zip(&twice).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Checks that the curve `(rho cos a) ^ -n = gamma(tan a)` in the plane of a unit x-vector
/// `x0` and a unit y-vector is a level set of `Pi`: every point on it maps to `x0`.
/// Returns the largest deviation over `angles` values of `a` in `[0, theta)`.
pub fn level_set_error(map: &RetractionMap, angles: usize) -> f64 {
    let (n, m, k) = (map.coords.n(), map.coords.m(), map.coords.k());
    let mut x0 = vec![0.0; n];
    x0[0] = 1.0;
    let mut y0 = vec![0.0; m];
    y0[0] = 1.0;
    let target = map.coords.point(&x0, &vec![0.0; m], &vec![0.0; k]);
    let theta = map.params().theta;
    (0..angles)
        .map(|i| {
            let a = theta * i as f64 / angles as f64;
            let rho = map.profile.gamma(a.tan()).powf(-1.0 / n as f64) / a.cos();
            let x: Vec<f64> = x0.iter().map(|v| v * rho * a.cos()).collect();
            let y: Vec<f64> = y0.iter().map(|v| v * rho * a.sin()).collect();
            let image = map.apply(&map.coords.point(&x, &y, &vec![0.0; k]));
            image.iter().zip(&target).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::make_params;

    fn map() -> RetractionMap {
        RetractionMap::new(&make_params(3, 2.5).unwrap(), &WedgeCoordinates::standard(3, 3, 0)).unwrap()
    }

    #[test]
    fn fixes_the_plane_and_collapses_the_exterior() {
        let m = map();
        let p = [0.3, -0.2, 1.0, 0.0, 0.0, 0.0];
        assert_eq!(m.apply(&p), p.to_vec());
        let tan = m.params().tan_theta;
        assert_eq!(m.apply(&[1.0, 0.0, 0.0, tan, 0.0, 0.0]), vec![0.0; 6]);
        assert_eq!(m.apply(&[0.0, 0.0, 0.0, 1.0, 0.0, 0.0]), vec![0.0; 6]);
    }

    #[test]
    fn homogeneous_and_idempotent() {
        let m = map();
        let p = [0.7, 0.1, -0.3, 0.2, 0.1, -0.1];
        let a = m.apply(&p.map(|v| 2.0 * v));
        let b: Vec<f64> = m.apply(&p).iter().map(|v| 2.0 * v).collect();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
        assert!(homogeneity_error(&m, 100, 1) < 1e-12);
        assert!(idempotence_error(&m, 100, 2) < 1e-12);
    }

    #[test]
    fn jacobian_on_the_plane_is_the_x_projection() {
        let m = map();
        let jac = m.differential(&[0.5, 0.5, 0.5, 0.0, 0.0, 0.0], 1e-5).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j && i < 3 { 1.0 } else { 0.0 };
                assert!((jac[(i, j)] - want).abs() < 1e-8, "({i}, {j})");
            }
        }
        let plane = DMatrix::from_fn(6, 3, |i, j| if i == j { 1.0 } else { 0.0 });
        assert!((volume_scaling(&jac, &plane) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn jacobian_vanishes_outside_the_wedge() {
        let m = map();
        let jac = m.differential(&[1.0, 0.0, 0.0, 2.0, 0.0, 0.0], 1e-4).unwrap();
        assert_eq!(jac.amax(), 0.0);
    }

    #[test]
    fn stencil_near_interface_is_refused() {
        let m = map();
        let tan = m.params().tan_theta;
        let r = m.differential(&[1.0, 0.0, 0.0, tan + 1e-5, 0.0, 0.0], 1e-4);
        assert!(matches!(r, Err(Error::StencilOnSingularLocus { .. })));
    }

    #[test]
    fn level_sets_follow_the_integral_curves() {
        assert!(level_set_error(&map(), 50) < 1e-12);
    }

    #[test]
    fn area_nonincreasing_small_run() {
        let report = verify_area_nonincreasing(&map(), 100, 20, 7);
        assert!(report.pass, "{report:?}");
        assert!(report.max_closed_form_gap < 1e-5, "{report:?}");
    }

    #[test]
    fn violating_the_inequality_is_detected() {
        let bad = RetractionMap::unchecked(&CutoffParams::unchecked(3, 1.5), &WedgeCoordinates::standard(3, 3, 0)).unwrap();
        assert!(!verify_area_nonincreasing(&bad, 200, 20, 7).pass);
    }
}
