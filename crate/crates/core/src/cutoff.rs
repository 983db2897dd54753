//! The quadratic cutoff family `gamma(t) = 1 - c t^2` (cut off at `t = tan theta`)
//! and its comass inequality
//!
//! ```text
//! 0 < kappa <= (gamma - (t/n) gamma')^2 + (gamma'/n)^2 <= 1 - delta t^2,   0 <= t <= tan theta.
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack below which an inequality counts as violated.
pub const SLACK_TOL: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffParams {
    pub n: usize,
    pub a: f64,
    pub c: f64,
    pub theta: f64,
    pub tan_theta: f64,
    pub delta: f64,
    pub kappa: f64,
}

/// Lower end `4n/(n+2)` of the admissible interval.
pub fn lower_bound(n: usize) -> f64 {
    4.0 * n as f64 / (n as f64 + 2.0)
}

/// Upper end `n(n-2)` of the admissible interval.
pub fn upper_bound(n: usize) -> f64 {
    (n * (n - 2)) as f64
}

/// Constants for `(n, a)`; fails unless `4n/(n+2) < a < n(n-2)`.
pub fn make_params(n: usize, a: f64) -> Result<CutoffParams> {
    if n < 3 {
        return Err(Error::PlaneDimensionTooSmall(n));
    }
    let (lo, hi) = (lower_bound(n), upper_bound(n));
    if !(a > lo) {
        return Err(Error::Inadmissible(format!("a = {a} <= 4n/(n+2) = {lo}")));
    }
    if !(a < hi) {
        return Err(Error::Inadmissible(format!("a = {a} >= n(n-2) = {hi}")));
    }
    Ok(CutoffParams::unchecked(n, a))
}

impl CutoffParams {
    /// Evaluates the closed forms without the admissibility check, for negative controls.
    /// Requires `n >= 3` and `a > 0`.
    pub fn unchecked(n: usize, a: f64) -> Self {
        let nf = n as f64;
        let m = nf - 2.0;
        let tan_theta = (a / (nf * m)).sqrt();
        Self {
            n,
            a,
            c: nf * m / a,
            theta: tan_theta.atan(),
            tan_theta,
            delta: m * m * (a * (nf + 2.0) - 4.0 * nf) / (a * a * nf),
            kappa: 4.0 * (a - 1.0) / (a * a),
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.n >= 3 && self.a > lower_bound(self.n) && self.a < upper_bound(self.n)
    }

    /// Discriminant of the quartic as a quadratic in `t^2`: `-16(a-1)(n-2)^4/a^4`.
    pub fn discriminant(&self) -> f64 {
        let m = self.n as f64 - 2.0;
        -16.0 * (self.a - 1.0) * m.powi(4) / self.a.powi(4)
    }

    /// Location `t^2 = (a-2)/(n-2)^2` of the quartic's minimum.
    pub fn quartic_axis(&self) -> f64 {
        let m = self.n as f64 - 2.0;
        (self.a - 2.0) / (m * m)
    }

    /// Whether the quartic's minimum lies in `[0, tan^2 theta]` (equivalently `2 <= a <= n`).
    pub fn axis_in_range(&self) -> bool {
        let u = self.quartic_axis();
        u >= 0.0 && u <= self.tan_theta * self.tan_theta
    }
}

/// `gamma` with its one-sided derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    pub params: CutoffParams,
}

impl CutoffProfile {
    pub fn new(params: CutoffParams) -> Self {
        Self { params }
    }

    pub fn gamma(&self, t: f64) -> f64 {
        if t >= self.params.tan_theta {
            0.0
        } else {
            1.0 - self.params.c * t * t
        }
    }

    /// Left derivative; equals `-2ct` on `(0, tan theta]`.
    pub fn derivative_left(&self, t: f64) -> f64 {
        if t > self.params.tan_theta {
            0.0
        } else {
            -2.0 * self.params.c * t
        }
    }

    /// Right derivative; zero from `tan theta` on.
    pub fn derivative_right(&self, t: f64) -> f64 {
        if t >= self.params.tan_theta {
            0.0
        } else {
            -2.0 * self.params.c * t
        }
    }

    /// `gamma - (t/n) gamma'` on the closed wedge, using the left derivative at the interface;
    /// zero outside.
    pub fn c_coef(&self, t: f64) -> f64 {
        if t > self.params.tan_theta {
            return 0.0;
        }
        let n = self.params.n as f64;
        1.0 - self.params.c * (n - 2.0) * t * t / n
    }

    /// `gamma' / n` on the closed wedge (left derivative at the interface); zero outside.
    pub fn s_coef(&self, t: f64) -> f64 {
        if t > self.params.tan_theta {
            return 0.0;
        }
        -2.0 * self.params.c * t / self.params.n as f64
    }

    /// `(gamma - (t/n) gamma')^2 + (gamma'/n)^2` assembled from `gamma` and `gamma'` directly.
    pub fn middle(&self, t: f64) -> f64 {
        let n = self.params.n as f64;
        let g = 1.0 - self.params.c * t * t;
        let dg = -2.0 * self.params.c * t;
        (g - t / n * dg).powi(2) + (dg / n).powi(2)
    }
}

/// `1 - 2(n-2)^2(a-2)/a^2 t^2 + (n-2)^4/a^2 t^4` for `t` in `[0, tan theta]`.
pub fn quartic_expansion(params: &CutoffParams, t: f64) -> Result<f64> {
    if !(0.0..=params.tan_theta).contains(&t) {
        return Err(Error::OutOfRange { t, tan_theta: params.tan_theta });
    }
    Ok(quartic_unchecked(params, t))
}

fn quartic_unchecked(params: &CutoffParams, t: f64) -> f64 {
    let m2 = (params.n as f64 - 2.0).powi(2);
    let a2 = params.a * params.a;
    let t2 = t * t;
    1.0 - 2.0 * m2 * (params.a - 2.0) / a2 * t2 + m2 * m2 / a2 * t2 * t2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub n: usize,
    pub a: f64,
    pub grid_points: usize,
    /// `kappa` itself: slack of `0 < kappa`.
    pub kappa_slack: f64,
    /// Minimum over the grid of `middle - kappa`.
    pub lower_slack: f64,
    /// Minimum over the grid of `1 - delta t^2 - middle`.
    pub upper_slack: f64,
    pub min_middle: f64,
    pub argmin_t: f64,
    pub axis_in_range: bool,
    /// `|gamma|` just below the interface.
    pub gamma_at_interface: f64,
    pub pass: bool,
}

/// Evaluates the inequality on `grid_points` uniformly spaced values of `t` in `[0, tan theta]`.
pub fn verify_inequality_one(params: &CutoffParams, grid_points: usize) -> Result<InequalityReport> {
    if grid_points < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 grid points, got {grid_points}")));
    }
    let profile = CutoffProfile::new(*params);
    let tan = params.tan_theta;
    let last = (grid_points - 1) as f64;
    let t_at = |i: usize| if i + 1 == grid_points { tan } else { tan * i as f64 / last };

    struct Acc {
        lower: f64,
        upper: f64,
        min: (f64, usize),
    }
    let identity = || Acc { lower: f64::INFINITY, upper: f64::INFINITY, min: (f64::INFINITY, usize::MAX) };
    let acc = (0..grid_points)
        .into_par_iter()
        .fold(identity, |mut acc, i| {
            let t = t_at(i);
            let mid = profile.middle(t);
            acc.lower = acc.lower.min(mid - params.kappa);
            acc.upper = acc.upper.min(1.0 - params.delta * t * t - mid);
            if (mid, i) < acc.min {
                acc.min = (mid, i);
            }
            acc
        })
        .reduce(identity, |x, y| Acc {
            lower: x.lower.min(y.lower),
            upper: x.upper.min(y.upper),
            min: if y.min < x.min { y.min } else { x.min },
        });

    let gamma_at_interface = (1.0 - params.c * tan * tan).abs();
    let pass = params.kappa > 0.0 && acc.lower >= SLACK_TOL && acc.upper >= SLACK_TOL;
    Ok(InequalityReport {
        n: params.n,
        a: params.a,
        grid_points,
        kappa_slack: params.kappa,
        lower_slack: acc.lower,
        upper_slack: acc.upper,
        min_middle: acc.min.0,
        argmin_t: t_at(acc.min.1),
        axis_in_range: params.axis_in_range(),
        gamma_at_interface,
        pass,
    })
}

/// `2 arctan(2 / sqrt(n^2 - 4))`, the infimum of `2 theta(n, a)` over admissible `a`.
pub fn angle_threshold(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::PlaneDimensionTooSmall(n));
    }
    let nf = n as f64;
    Ok(2.0 * (2.0 / (nf * nf - 4.0).sqrt()).atan())
}

/// Which half-angle determined the parameter chosen by [`choose_a_for_angle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleBranch {
    Target,
    Cap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleChoice {
    pub a: f64,
    pub half_angle: f64,
    pub branch: AngleBranch,
    pub params: CutoffParams,
}

/// `a = n(n-2) tan^2(min(target, arctan(2/sqrt((n-2)(n+3/2)))))`, so that the wedge half-angle
/// `theta(n, a)` never exceeds the target.
pub fn choose_a_for_angle(n: usize, target_half_angle: f64) -> Result<AngleChoice> {
    let threshold = angle_threshold(n)? / 2.0;
    if !(target_half_angle > threshold) {
        return Err(Error::NoAdmissibleParameter(format!(
            "half-angle {target_half_angle} must exceed arctan(2/sqrt(n^2-4)) = {threshold}"
        )));
    }
    let nf = n as f64;
    let cap = (2.0 / ((nf - 2.0) * (nf + 1.5)).sqrt()).atan();
    let (half_angle, branch) = if target_half_angle <= cap {
        (target_half_angle, AngleBranch::Target)
    } else {
        (cap, AngleBranch::Cap)
    };
    let a = nf * (nf - 2.0) * half_angle.tan().powi(2);
    let params = make_params(n, a)?;
    Ok(AngleChoice { a, half_angle, branch, params })
}

/// `count` values strictly inside the admissible interval, spaced uniformly in `log a`.
pub fn admissible_log_grid(n: usize, count: usize) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(Error::PlaneDimensionTooSmall(n));
    }
    let (lo, hi) = (lower_bound(n).ln(), upper_bound(n).ln());
    Ok((1..=count)
        .map(|i| (lo + (hi - lo) * i as f64 / (count + 1) as f64).exp())
        .collect())
}
