use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::vanishing::VanishingCalibration;
use crate::error::{Error, Result};
use crate::exterior::{AlternatingTensor, ConstantField, FormField};
use crate::numeric::GridBox;
use crate::retraction::RetractionMap;

type ScaleFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `(f o Pi) phi`: a vanishing calibration scaled by a function on the calibrated plane,
/// pulled back along the retraction.
#[derive(Clone)]
pub struct ScaledCalibration {
    cal: VanishingCalibration,
    retraction: RetractionMap,
    f: ScaleFn,
}

impl fmt::Debug for ScaledCalibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScaledCalibration").field("cal", &self.cal).finish_non_exhaustive()
    }
}

/// Builds `(f o Pi) phi`, where `f` receives the ambient coordinates of `Pi(p)`.
/// `|f o Pi|` is sampled on the tensor grid of `region`; any value above 1 is an error.
pub fn scaled_calibration<F>(cal: &VanishingCalibration, f: F, region: &GridBox, per_axis: usize) -> Result<ScaledCalibration>
where
    F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
{
    let retraction = RetractionMap::unchecked(cal.params(), cal.coords())?;
    if region.dim() != cal.ambient_dim() {
        return Err(Error::DimensionMismatch { left: cal.ambient_dim(), right: region.dim() });
    }
    let dim = region.dim();
    let worst = (0..region.point_count(per_axis))
        .into_par_iter()
        .map(|index| {
            let mut p = vec![0.0; dim];
            region.point(per_axis, index, &mut p);
            let image = retraction.apply(&p);
            (f(&image).abs(), index, image)
        })
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    if let Some((value, _, point)) = worst {
        if value > 1.0 {
            return Err(Error::ScaleTooLarge { value, point });
        }
    }
    Ok(ScaledCalibration { cal: cal.clone(), retraction, f: Arc::new(f) })
}

impl ScaledCalibration {
    pub fn calibration(&self) -> &VanishingCalibration {
        &self.cal
    }

    pub fn scale_at(&self, p: &[f64]) -> f64 {
        (self.f)(&self.retraction.apply(p))
    }
}

impl FormField for ScaledCalibration {
    fn ambient_dim(&self) -> usize {
        self.cal.ambient_dim()
    }

    fn degree(&self) -> usize {
        self.cal.degree()
    }

    fn eval_into(&self, p: &[f64], out: &mut [f64]) {
        self.cal.eval_into(p, out);
        if out.iter().all(|v| *v == 0.0) {
            return;
        }
        let s = self.scale_at(p);
        for v in out.iter_mut() {
            *v *= s;
        }
    }

    fn near_singular(&self, p: &[f64], margin: f64) -> bool {
        self.cal.near_singular(p, margin)
    }
}

/// The constant form `dx_1 ^ .. ^ dx_c + dy_1 ^ .. ^ dy_c` on `R^dim`, with x on the
/// first `c` axes and y on the next `c`.
pub fn coordinate_plane_sum(c: usize, dim: usize) -> Result<ConstantField> {
    coordinate_plane_sum_with_block(c, dim, 0)
}

/// `(dx_1 ^ .. ^ dx_c + dy_1 ^ .. ^ dy_c) ^ dl_1 ^ .. ^ dl_k`, with the l-block on axes
/// `2c .. 2c + k`.
pub fn coordinate_plane_sum_with_block(c: usize, dim: usize, k: usize) -> Result<ConstantField> {
    if c == 1 {
        return Err(Error::CoordinatePlaneDegree);
    }
    if c == 0 || 2 * c + k > dim {
        return Err(Error::InvalidArgument(format!("need 2 <= c and 2c + k <= N, got c = {c}, k = {k}, N = {dim}")));
    }
    let l: Vec<usize> = (2 * c..2 * c + k).collect();
    let x: Vec<usize> = (0..c).chain(l.iter().copied()).collect();
    let y: Vec<usize> = (c..2 * c).chain(l.iter().copied()).collect();
    let form = AlternatingTensor::basis(dim, &x)?.try_add(&AlternatingTensor::basis(dim, &y)?)?;
    Ok(ConstantField(form))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{build_vanishing_calibration, closedness, grid_comass, sample_field_points, WedgeCoordinates};
    use crate::cutoff::make_params;
    use crate::exterior::{comass, comass_oracle, ComassOptions};

    fn cal() -> VanishingCalibration {
        build_vanishing_calibration(&make_params(3, 2.5).unwrap(), &WedgeCoordinates::standard(3, 3, 0)).unwrap()
    }

    fn region() -> GridBox {
        GridBox::new(vec![0.5, 0.5, 0.5, -1.0, -1.0, -1.0], vec![1.5, 1.5, 1.5, 1.0, 1.0, 1.0])
    }

    #[test]
    fn unit_scale_is_the_calibration() {
        let c = cal();
        let s = scaled_calibration(&c, |_| 1.0, &region(), 4).unwrap();
        let p = [0.9, 1.1, 0.7, 0.2, -0.1, 0.3];
        assert_eq!(s.eval(&p), c.eval(&p));
    }

    #[test]
    fn zero_scale_is_the_zero_field() {
        let s = scaled_calibration(&cal(), |_| 0.0, &region(), 4).unwrap();
        let report = grid_comass(&s, &region(), 5, 1e-9, 2, 0).unwrap();
        assert_eq!(report.max_comass, 0.0);
    }

    #[test]
    fn oversized_scale_is_refused() {
        let err = scaled_calibration(&cal(), |x| 1.0 + x[0] * x[0], &region(), 4).unwrap_err();
        assert!(matches!(err, Error::ScaleTooLarge { .. }));
    }

    #[test]
    fn scaled_field_is_closed_with_comass_below_one() {
        let s = scaled_calibration(&cal(), |x| (x.iter().map(|v| v * v).sum::<f64>()).cos(), &region(), 6).unwrap();
        let points = sample_field_points(&s, &region(), 8, 0.04, 3);
        assert_eq!(points.len(), 8);
        let report = closedness(&s, &points, &[1e-2, 5e-3, 2.5e-3], 1.8).unwrap();
        assert!(report.pass && !report.exactly_closed, "{report:?}");
        assert!(grid_comass(&s, &region(), 6, 1e-9, 4, 0).unwrap().pass);
    }

    #[test]
    fn coordinate_plane_sums() {
        for (c, dim) in [(2, 4), (3, 6), (2, 5)] {
            let form = coordinate_plane_sum(c, dim).unwrap().0;
            let opt = comass(&form, &ComassOptions::default()).unwrap().value;
            assert!((opt - 1.0).abs() < 1e-9, "c = {c}: {opt}");
        }
        assert_eq!(coordinate_plane_sum(1, 2).unwrap_err(), Error::CoordinatePlaneDegree);
        let dx_dy = AlternatingTensor::one_form(&[1.0, 1.0]).unwrap();
        assert!((comass_oracle(&dx_dy, 10_000, 0) - 2f64.sqrt()).abs() < 1e-3);
        let block = coordinate_plane_sum_with_block(2, 5, 1).unwrap().0;
        assert_eq!(block.coeff(&[0, 1, 4]), 1.0);
        assert_eq!(block.coeff(&[2, 3, 4]), 1.0);
    }
}
