//! Integer-multiplicity simplicial currents: mass, boundary, pairing with form fields.

mod chain;
mod competitor;
mod integrate;
mod io;
mod mesh;
mod quadrature;

pub use chain::{Simplex, TriangulatedCurrent, MIN_SIMPLEX_VOLUME};
pub use competitor::{ball_pair_check, BallPairReport, CompetitorReport};
pub use integrate::{calibration_inequality_check, integrate_form, InequalityCheck, Integral};
pub use io::{parse_mesh, write_mesh};
pub use mesh::{ball_mesh, bump_perturbation, cube_mesh, square_mesh};
pub use quadrature::{simplex_rule, SimplexRule};
