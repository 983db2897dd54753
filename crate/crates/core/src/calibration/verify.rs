use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::vanishing::{psi_bar, VanishingCalibration};
use crate::error::{Error, Result};
use crate::exterior::{comass, finite_difference_exterior_derivative, ComassOptions, FormField};
use crate::numeric::{fit_order, random_unit_vector, seeded_rng, GridBox};

/// Largest number of grid points handed to the optimizer when the coefficient norm
/// does not certify the comass bound.
const OPTIMIZER_BUDGET: usize = 32;

fn spot_options(seed: u64) -> ComassOptions {
    ComassOptions { multistarts: 16, seed, ..ComassOptions::default() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridComassReport {
    pub per_axis: usize,
    pub points: usize,
    /// Grid points on the singular locus (not evaluated).
    pub skipped: usize,
    /// Largest Euclidean coefficient norm, an upper bound for the comass.
    pub max_norm: f64,
    pub argmax: Vec<f64>,
    /// Certified maximum: the norm where it is at most the cap, the optimizer value elsewhere.
    pub max_comass: f64,
    /// Points whose norm exceeded the cap.
    pub exceeding_norm: usize,
    pub optimizer_runs: usize,
    /// Exceeding points left unchecked once the optimizer budget ran out.
    pub unchecked: usize,
    pub spot_checks: usize,
    /// Largest optimizer-minus-norm difference over the spot checks (never positive
    /// beyond optimizer tolerance, since the norm bounds the comass).
    pub spot_max_excess: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone)]
struct Candidate {
    norm: f64,
    index: usize,
}

#[derive(Clone, Default)]
struct GridAcc {
    skipped: usize,
    exceeding: usize,
    max_norm: f64,
    argmax: usize,
    top: Vec<Candidate>,
}

impl GridAcc {
    fn push_top(&mut self, c: Candidate) {
        self.top.push(c);
        if self.top.len() > 2 * OPTIMIZER_BUDGET {
            self.trim();
        }
    }

    fn trim(&mut self) {
        self.top.sort_by(|a, b| b.norm.total_cmp(&a.norm).then(a.index.cmp(&b.index)));
        self.top.truncate(OPTIMIZER_BUDGET);
    }

    fn merge(mut self, other: Self) -> Self {
        self.skipped += other.skipped;
        self.exceeding += other.exceeding;
        if other.max_norm > self.max_norm || (other.max_norm == self.max_norm && other.argmax < self.argmax) {
            self.max_norm = other.max_norm;
            self.argmax = other.argmax;
        }
        self.top.extend(other.top);
        self.trim();
        self
    }
}

/// Comass bound of `field` over the tensor grid of `region` with `per_axis` points per axis.
///
/// The Euclidean norm of the coefficients bounds the comass from above and equals it
/// for simple forms; points whose norm exceeds `1 + tolerance` are passed to the
/// optimizer (up to a fixed budget). `spot_checks` random grid points are also run
/// through the optimizer as a consistency check.
pub fn grid_comass<F: FormField + ?Sized>(
    field: &F,
    region: &GridBox,
    per_axis: usize,
    tolerance: f64,
    spot_checks: usize,
    seed: u64,
) -> Result<GridComassReport> {
    let dim = field.ambient_dim();
    if region.dim() != dim {
        return Err(Error::DimensionMismatch { left: dim, right: region.dim() });
    }
    if per_axis == 0 {
        return Err(Error::InvalidArgument("grid needs at least one point per axis".into()));
    }
    let cap = 1.0 + tolerance;
    let total = region.point_count(per_axis);
    let len = field.coefficient_len();
    let acc = (0..total)
        .into_par_iter()
        .fold(
            || (GridAcc::default(), vec![0.0; dim], vec![0.0; len]),
            |(mut acc, mut p, mut out), index| {
                region.point(per_axis, index, &mut p);
                if field.near_singular(&p, 0.0) {
                    acc.skipped += 1;
                } else {
                    field.eval_into(&p, &mut out);
                    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > acc.max_norm || (norm == acc.max_norm && index < acc.argmax) {
                        acc.max_norm = norm;
                        acc.argmax = index;
                    }
                    if norm > cap {
                        acc.exceeding += 1;
                        acc.push_top(Candidate { norm, index });
                    }
                }
                (acc, p, out)
            },
        )
        .map(|(acc, _, _)| acc)
        .reduce(GridAcc::default, GridAcc::merge);

    let mut point = vec![0.0; dim];
    let mut max_comass = if acc.exceeding == 0 { acc.max_norm } else { 0.0 };
    if acc.exceeding > 0 {
        // the largest certified norm below the cap is not tracked separately; take the cap
        max_comass = cap.min(acc.max_norm);
    }
    let mut top = acc.top.clone();
    top.sort_by(|a, b| b.norm.total_cmp(&a.norm).then(a.index.cmp(&b.index)));
    top.truncate(OPTIMIZER_BUDGET);
    let optimized: Vec<f64> = top
        .par_iter()
        .map(|c| {
            let mut p = vec![0.0; dim];
            region.point(per_axis, c.index, &mut p);
            comass(&field.eval(&p), &spot_options(seed)).map(|r| r.value)
        })
        .collect::<Result<_>>()?;
    for v in &optimized {
        max_comass = max_comass.max(*v);
    }

    let mut rng = seeded_rng(seed);
    let spot_indices: Vec<usize> = (0..spot_checks).map(|_| rng.random_range(0..total)).collect();
    let spot_excess: Vec<f64> = spot_indices
        .par_iter()
        .map(|&index| {
            let mut p = vec![0.0; dim];
            region.point(per_axis, index, &mut p);
            if field.near_singular(&p, 0.0) {
                return Ok(f64::NEG_INFINITY);
            }
            let form = field.eval(&p);
            if form.is_zero() {
                return Ok(0.0);
            }
            Ok(comass(&form, &spot_options(seed))?.value - form.norm())
        })
        .collect::<Result<_>>()?;

    region.point(per_axis, acc.argmax, &mut point);
    let unchecked = acc.exceeding - optimized.len();
    Ok(GridComassReport {
        per_axis,
        points: total,
        skipped: acc.skipped,
        max_norm: acc.max_norm,
        argmax: point,
        max_comass,
        exceeding_norm: acc.exceeding,
        optimizer_runs: optimized.len(),
        unchecked,
        spot_checks,
        spot_max_excess: spot_excess.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0),
        tolerance,
        pass: max_comass <= cap && unchecked == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosednessReport {
    pub points: usize,
    pub steps: Vec<f64>,
    /// Largest `|d phi|` coefficient at each step, over all points.
    pub residuals: Vec<f64>,
    pub fitted_order: Option<f64>,
    /// Residual at the finest step below `exact_tolerance`: closed up to rounding.
    pub exactly_closed: bool,
    pub min_order: f64,
    pub pass: bool,
}

/// Finite-difference closedness: the residual `max |d phi|` at each step in `steps`
/// (decreasing), with its fitted convergence order.
pub fn closedness<F: FormField + ?Sized>(field: &F, points: &[Vec<f64>], steps: &[f64], min_order: f64) -> Result<ClosednessReport> {
    const EXACT: f64 = 1e-10;
    if steps.len() < 2 {
        return Err(Error::InvalidArgument("closedness needs at least two steps".into()));
    }
    let residuals: Vec<f64> = steps
        .iter()
        .map(|&h| {
            let per_point: Vec<f64> = points
                .par_iter()
                .map(|p| finite_difference_exterior_derivative(field, p, h).map(|d| d.max_abs()))
                .collect::<Result<_>>()?;
            Ok(per_point.into_iter().fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    let exactly_closed = *residuals.last().expect("two steps") <= EXACT;
    let fitted_order = fit_order(steps, &residuals);
    let pass = exactly_closed || fitted_order.is_some_and(|o| o >= min_order);
    Ok(ClosednessReport {
        points: points.len(),
        steps: steps.to_vec(),
        residuals,
        fitted_order,
        exactly_closed,
        min_order,
        pass,
    })
}

/// Seeded points of `region` at distance more than `margin` from the singular locus of
/// `field` where the field is nonzero. May return fewer than `count` points if the
/// region holds little support.
pub fn sample_field_points<F: FormField + ?Sized>(field: &F, region: &GridBox, count: usize, margin: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed);
    let mut points = Vec::with_capacity(count);
    for _ in 0..count.saturating_mul(1000) {
        if points.len() == count {
            break;
        }
        let p = region.sample(&mut rng);
        if field.near_singular(&p, margin) || field.eval(&p).is_zero() {
            continue;
        }
        points.push(p);
    }
    points
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCheckOptions {
    pub per_axis: usize,
    pub comass_tolerance: f64,
    pub closedness_steps: Vec<f64>,
    pub closedness_points: usize,
    pub min_order: f64,
    pub value_samples: usize,
    pub value_tolerance: f64,
    pub spot_checks: usize,
    pub seed: u64,
}

impl Default for CalibrationCheckOptions {
    fn default() -> Self {
        Self {
            per_axis: 20,
            comass_tolerance: 1e-9,
            closedness_steps: vec![1e-2, 5e-3, 2.5e-3],
            closedness_points: 32,
            min_order: 1.8,
            value_samples: 200,
            value_tolerance: 1e-10,
            spot_checks: 16,
            seed: 0,
        }
    }
}

impl CalibrationCheckOptions {
    /// Distance kept from the singular locus by closedness stencils.
    pub fn closedness_margin(&self) -> f64 {
        4.0 * self.closedness_steps.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub comass: GridComassReport,
    pub closedness: ClosednessReport,
    /// Largest `|phi(xi) - 1|` over oriented tangent frames of the calibrated plane.
    pub max_value_error: f64,
    pub value_samples: usize,
    /// Grid points with `t > tan theta`.
    pub vanishing_points: usize,
    /// Largest coefficient at those points (must be exactly zero).
    pub max_vanishing_abs: f64,
    /// Largest excess of the coefficient norm over `sqrt(1 - delta t^2)` inside the wedge.
    pub envelope_excess: f64,
    /// `|gamma psi_bar|` just inside the interface along sampled rays.
    pub primitive_gap: f64,
    pub pass: bool,
}

/// Value of `field` on the oriented calibrated plane of `coords`, at `samples` seeded
/// points of that plane with `|x|` in `[0.5, 2]` and l-coordinates in `[-1, 1]`.
pub(crate) fn max_plane_value_error<F: FormField + ?Sized>(
    field: &F,
    coords: &super::WedgeCoordinates,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = seeded_rng(seed);
    let frame = coords.x_plane_frame();
    let (n, m, k) = (coords.n(), coords.m(), coords.k());
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let r = 0.5 + 1.5 * rng.random::<f64>();
        let x: Vec<f64> = random_unit_vector(&mut rng, n).iter().map(|v| v * r).collect();
        let l: Vec<f64> = (0..k).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let p = coords.point(&x, &vec![0.0; m], &l);
        let value = field.eval(&p).evaluate_columns(&frame)?;
        worst = worst.max((value - 1.0).abs());
    }
    Ok(worst)
}

/// Full check of a vanishing calibration on `region`: grid comass, closedness away
/// from the interface, value on the calibrated plane, exact vanishing outside the
/// wedge, the comass envelope and continuity of the primitive at the interface.
pub fn verify_calibration(cal: &VanishingCalibration, region: &GridBox, opts: &CalibrationCheckOptions) -> Result<CalibrationReport> {
    let comass_report = grid_comass(cal, region, opts.per_axis, opts.comass_tolerance, opts.spot_checks, opts.seed)?;

    let points = sample_field_points(cal, region, opts.closedness_points, opts.closedness_margin(), opts.seed);
    let closedness_report = if points.is_empty() {
        // no support in the region: the zero field is closed
        ClosednessReport {
            points: 0,
            steps: opts.closedness_steps.clone(),
            residuals: vec![0.0; opts.closedness_steps.len()],
            fitted_order: None,
            exactly_closed: true,
            min_order: opts.min_order,
            pass: true,
        }
    } else {
        closedness(cal, &points, &opts.closedness_steps, opts.min_order)?
    };

    let max_value_error = max_plane_value_error(cal, cal.coords(), opts.value_samples, opts.seed)?;

    let dim = cal.ambient_dim();
    let tan = cal.params().tan_theta;
    let len = cal.coefficient_len();
    let (vanishing_points, max_vanishing_abs, envelope_excess) = (0..region.point_count(opts.per_axis))
        .into_par_iter()
        .fold(
            || ((0usize, 0.0f64, f64::NEG_INFINITY), vec![0.0; dim], vec![0.0; len]),
            |((count, vmax, excess), mut p, mut out), index| {
                region.point(opts.per_axis, index, &mut p);
                let (r, z) = cal.coords().rz(&p);
                if r == 0.0 {
                    return ((count, vmax, excess), p, out);
                }
                let t = z / r;
                cal.eval_into(&p, &mut out);
                if t > tan {
                    let m = out.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                    ((count + 1, vmax.max(m), excess), p, out)
                } else {
                    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
                    ((count, vmax, excess.max(norm - cal.comass_envelope(t))), p, out)
                }
            },
        )
        .map(|(acc, _, _)| acc)
        .reduce(|| (0, 0.0, f64::NEG_INFINITY), |a, b| (a.0 + b.0, a.1.max(b.1), a.2.max(b.2)));

    let primitive_gap = primitive_gap(cal, opts.seed)?;

    let pass = comass_report.pass
        && closedness_report.pass
        && max_value_error <= opts.value_tolerance
        && max_vanishing_abs == 0.0
        && envelope_excess <= opts.comass_tolerance
        && primitive_gap <= 1e-6;
    Ok(CalibrationReport {
        comass: comass_report,
        closedness: closedness_report,
        max_value_error,
        value_samples: opts.value_samples,
        vanishing_points,
        max_vanishing_abs,
        envelope_excess: envelope_excess.max(0.0),
        primitive_gap,
        pass,
    })
}

/// Largest `|gamma(t) psi_bar(p)|` at `t = tan theta (1 - 1e-9)` on 16 rays with `r = 1`.
fn primitive_gap(cal: &VanishingCalibration, seed: u64) -> Result<f64> {
    let coords = cal.coords();
    let (n, m, k) = (coords.n(), coords.m(), coords.k());
    let t = cal.params().tan_theta * (1.0 - 1e-9);
    let gamma = cal.profile().gamma(t);
    let mut rng = seeded_rng(seed ^ 0x5EED);
    let mut worst: f64 = 0.0;
    for _ in 0..16 {
        let x = random_unit_vector(&mut rng, n);
        let y: Vec<f64> = random_unit_vector(&mut rng, m).iter().map(|v| v * t).collect();
        let p = coords.point(&x, &y, &vec![0.0; k]);
        worst = worst.max(gamma * psi_bar(coords, &p)?.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{build_vanishing_calibration, WedgeCoordinates};
    use crate::cutoff::{make_params, CutoffParams};

    fn region() -> GridBox {
        GridBox::new(vec![0.5, 0.5, 0.5, -1.0, -1.0, -1.0], vec![1.5, 1.5, 1.5, 1.0, 1.0, 1.0])
    }

    #[test]
    fn small_grid_passes() {
        let cal = build_vanishing_calibration(&make_params(3, 2.5).unwrap(), &WedgeCoordinates::standard(3, 3, 0)).unwrap();
        let opts = CalibrationCheckOptions { per_axis: 6, closedness_points: 8, value_samples: 40, ..Default::default() };
        let report = verify_calibration(&cal, &region(), &opts).unwrap();
        assert!(report.pass, "{report:#?}");
        assert!(report.vanishing_points > 0);
        assert!(report.comass.max_comass <= 1.0 + 1e-9);
        assert!(report.comass.spot_max_excess < 1e-8);
    }

    #[test]
    fn inadmissible_parameter_fails_the_comass_bound() {
        let bad = VanishingCalibration::unchecked(&CutoffParams::unchecked(3, 1.5), &WedgeCoordinates::standard(3, 3, 0)).unwrap();
        let opts = CalibrationCheckOptions { per_axis: 6, closedness_points: 4, value_samples: 10, spot_checks: 2, ..Default::default() };
        let report = verify_calibration(&bad, &region(), &opts).unwrap();
        assert!(!report.comass.pass);
        assert!(report.comass.max_comass > 1.0 + 1e-6);
        assert!(!report.pass);
    }

    #[test]
    fn region_outside_the_wedge_is_trivial() {
        let cal = build_vanishing_calibration(&make_params(3, 2.5).unwrap(), &WedgeCoordinates::standard(3, 3, 0)).unwrap();
        let far = GridBox::new(vec![0.1, 0.1, 0.1, 2.0, 2.0, 2.0], vec![0.2, 0.2, 0.2, 3.0, 3.0, 3.0]);
        let opts = CalibrationCheckOptions { per_axis: 4, value_samples: 10, ..Default::default() };
        let report = verify_calibration(&cal, &far, &opts).unwrap();
        assert!(report.pass, "{report:#?}");
        assert_eq!(report.comass.max_comass, 0.0);
        assert_eq!(report.vanishing_points, 4usize.pow(6));
    }

    #[test]
    fn closedness_of_a_non_closed_field_fails() {
        let field = crate::exterior::FnField::new(2, 1, |p: &[f64], out: &mut [f64]| {
            out[0] = 0.0;
            out[1] = p[0] * p[0] + 0.3;
        });
        let points = vec![vec![0.2, 0.1], vec![-0.4, 0.5]];
        let report = closedness(&field, &points, &[1e-2, 5e-3], 1.8).unwrap();
        assert!(!report.pass);
    }
}
