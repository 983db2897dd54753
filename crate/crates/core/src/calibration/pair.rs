use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coords::WedgeCoordinates;
use super::vanishing::{build_vanishing_calibration, VanishingCalibration};
use super::verify::{
    closedness, grid_comass, max_plane_value_error, sample_field_points, CalibrationCheckOptions, ClosednessReport,
    GridComassReport,
};
use crate::cutoff::CutoffParams;
use crate::error::{Error, Result};
use crate::exterior::FormField;
use crate::numeric::GridBox;
use crate::subspace::{intersection_angle, AngleConvention, PlanePair};

/// `Phi + Psi`: one vanishing calibration around each plane of a transverse pair, in
/// coordinates adapted to that plane with the shared intersection as the l-block.
#[derive(Debug, Clone)]
pub struct PairCalibration {
    first: VanishingCalibration,
    second: VanishingCalibration,
    angle: f64,
    budget: f64,
    intersection_dim: usize,
}

/// Builds `Phi + Psi` for `pair`. The minimal principal angle between the complements
/// must exceed `2 theta`, which keeps the two wedges disjoint.
pub fn sum_pair_calibration(params: &CutoffParams, pair: &PlanePair) -> Result<PairCalibration> {
    let n = pair.complement1.dim();
    if pair.complement2.dim() != n {
        return Err(Error::InvalidArgument("the two planes must have equal dimension".into()));
    }
    if params.n != n {
        return Err(Error::InvalidArgument(format!(
            "cutoff dimension {} does not match the complement dimension {n}",
            params.n
        )));
    }
    let dim = pair.p1.ambient_dim();
    let k = pair.intersection.dim();
    if dim != 2 * n + k {
        return Err(Error::InvalidArgument(format!(
            "ambient dimension {dim} must equal 2n + k = {} for a transverse pair",
            2 * n + k
        )));
    }
    let angle = intersection_angle(pair, AngleConvention::MinPrincipal)?;
    let budget = 2.0 * params.theta;
    if angle <= budget {
        return Err(Error::AngleBudget { angle, budget });
    }
    let first = build_vanishing_calibration(params, &WedgeCoordinates::adapted_to(pair, false)?)?;
    let second = build_vanishing_calibration(params, &WedgeCoordinates::adapted_to(pair, true)?)?;
    Ok(PairCalibration { first, second, angle, budget, intersection_dim: k })
}

impl PairCalibration {
    pub fn first(&self) -> &VanishingCalibration {
        &self.first
    }

    pub fn second(&self) -> &VanishingCalibration {
        &self.second
    }

    /// Minimal principal angle between the complements.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// `2 theta`.
    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn intersection_dim(&self) -> usize {
        self.intersection_dim
    }
}

impl FormField for PairCalibration {
    fn ambient_dim(&self) -> usize {
        self.first.ambient_dim()
    }

    fn degree(&self) -> usize {
        self.first.degree()
    }

    fn eval_into(&self, p: &[f64], out: &mut [f64]) {
        self.first.eval_into(p, out);
        let mut other = vec![0.0; out.len()];
        self.second.eval_into(p, &mut other);
        for (o, v) in out.iter_mut().zip(other) {
            *o += v;
        }
    }

    fn near_singular(&self, p: &[f64], margin: f64) -> bool {
        self.first.near_singular(p, margin) || self.second.near_singular(p, margin)
    }
}

pub type PairCheckOptions = CalibrationCheckOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub intersection_dim: usize,
    pub angle: f64,
    pub budget: f64,
    /// Grid points where both summands are nonzero.
    pub overlap_points: usize,
    pub comass: GridComassReport,
    pub closedness: ClosednessReport,
    pub first_value_error: f64,
    pub second_value_error: f64,
    pub pass: bool,
}

/// Grid comass, wedge disjointness, closedness and calibrated values on both sheets.
pub fn verify_pair(cal: &PairCalibration, region: &GridBox, opts: &PairCheckOptions) -> Result<PairReport> {
    let comass_report = grid_comass(cal, region, opts.per_axis, opts.comass_tolerance, opts.spot_checks, opts.seed)?;

    let dim = cal.ambient_dim();
    let len = cal.coefficient_len();
    let overlap_points = (0..region.point_count(opts.per_axis))
        .into_par_iter()
        .fold(
            || (0usize, vec![0.0; dim], vec![0.0; len]),
            |(count, mut p, mut out), index| {
                region.point(opts.per_axis, index, &mut p);
                cal.first.eval_into(&p, &mut out);
                let a = out.iter().any(|v| *v != 0.0);
                cal.second.eval_into(&p, &mut out);
                let b = out.iter().any(|v| *v != 0.0);
                (count + usize::from(a && b), p, out)
            },
        )
        .map(|(count, _, _)| count)
        .sum();

    let points = sample_field_points(cal, region, opts.closedness_points, opts.closedness_margin(), opts.seed);
    if points.is_empty() {
        return Err(Error::InvalidArgument("region contains no support of the calibration".into()));
    }
    let closedness_report = closedness(cal, &points, &opts.closedness_steps, opts.min_order)?;
    let first_value_error = max_plane_value_error(cal, cal.first.coords(), opts.value_samples, opts.seed)?;
    let second_value_error = max_plane_value_error(cal, cal.second.coords(), opts.value_samples, opts.seed ^ 1)?;

    let pass = comass_report.pass
        && overlap_points == 0
        && closedness_report.pass
        && first_value_error <= opts.value_tolerance
        && second_value_error <= opts.value_tolerance;
    Ok(PairReport {
        intersection_dim: cal.intersection_dim,
        angle: cal.angle,
        budget: cal.budget,
        overlap_points,
        comass: comass_report,
        closedness: closedness_report,
        first_value_error,
        second_value_error,
        pass,
    })
}
