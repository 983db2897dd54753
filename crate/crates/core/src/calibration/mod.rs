//! Vanishing calibrations around a plane, their sums over plane pairs, scaled
//! variants and constant coordinate-plane calibrations.

mod coords;
mod pair;
mod scaled;
mod vanishing;
mod verify;

pub use coords::WedgeCoordinates;
pub use pair::{sum_pair_calibration, verify_pair, PairCalibration, PairCheckOptions, PairReport};
pub use scaled::{coordinate_plane_sum, coordinate_plane_sum_with_block, scaled_calibration, ScaledCalibration};
pub use vanishing::{build_vanishing_calibration, psi_bar, VanishingCalibration};
pub use verify::{
    closedness, grid_comass, sample_field_points, verify_calibration, CalibrationCheckOptions, CalibrationReport,
    ClosednessReport, GridComassReport,
};
