use serde::{Deserialize, Serialize};

use super::chain::TriangulatedCurrent;
use super::integrate::{calibration_inequality_check, InequalityCheck};
use super::mesh::{ball_mesh, bump_perturbation};
use crate::calibration::PairCalibration;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetitorReport {
    pub epsilon: f64,
    pub same_boundary: bool,
    pub mass: f64,
    pub pairing: f64,
    /// `M(T') - M(T)`.
    pub mass_excess: f64,
    /// `M(T') - T'(F)`.
    pub pairing_deficit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPairReport {
    pub divisions: usize,
    pub simplices: usize,
    pub first: InequalityCheck,
    pub second: InequalityCheck,
    pub total: InequalityCheck,
    pub competitors: Vec<CompetitorReport>,
    pub pass: bool,
}

/// Unit balls in both planes of the pair (in their calibrated orientation), checked for
/// equality against `Phi + Psi`, and graphical competitors bumping the first ball by
/// `eps (1 - |u|^2)^2` along a normal direction while keeping the boundary.
pub fn ball_pair_check(cal: &PairCalibration, divisions: usize, order: usize, epsilons: &[f64]) -> Result<BallPairReport> {
    let sheet = |coords: &crate::calibration::WedgeCoordinates| -> Result<TriangulatedCurrent> {
        ball_mesh(coords.n() + coords.k(), divisions)?.embed(&coords.x_plane_frame(), None)
    };
    let c1 = cal.first().coords();
    let first_sheet = sheet(c1)?;
    let second_sheet = sheet(cal.second().coords())?;
    let total_current = first_sheet.sum(&second_sheet)?;
    let first = calibration_inequality_check(&first_sheet, cal, 1.0, order)?;
    let second = calibration_inequality_check(&second_sheet, cal, 1.0, order)?;
    let total = calibration_inequality_check(&total_current, cal, 1.0, order)?;

    let plane = c1.x_plane_frame();
    let normal: Vec<f64> = c1.frame().column(c1.n()).iter().copied().collect();
    let boundary = total_current.boundary()?.geometric_signature();
    let competitors = epsilons
        .iter()
        .map(|&epsilon| {
            let bumped = bump_perturbation(&first_sheet, &plane, &normal, epsilon)?.sum(&second_sheet)?;
            let same_boundary = bumped.boundary()?.geometric_signature() == boundary;
            let check = calibration_inequality_check(&bumped, cal, 1.0, order)?;
            let mass_excess = check.mass - total.mass;
            let pairing_deficit = check.mass - check.pairing;
            Ok(CompetitorReport {
                epsilon,
                same_boundary,
                mass: check.mass,
                pairing: check.pairing,
                mass_excess,
                pairing_deficit,
                pass: same_boundary && check.holds && mass_excess > 0.0 && pairing_deficit > 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let pass = first.calibrated
        && second.calibrated
        && total.calibrated
        && total.mass - total.pairing <= 1e-6 * total.mass
        && competitors.iter().all(|c| c.pass);
    Ok(BallPairReport { divisions, simplices: total_current.len(), first, second, total, competitors, pass })
}
