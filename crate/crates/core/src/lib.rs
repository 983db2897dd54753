//! Vanishing calibrations around transversely intersecting planes, and numerical
//! verification of the estimates that make them calibrations.
//!
//! The crate is organised bottom-up:
//!
//! - [`exterior`]: alternating tensors, form fields, comass optimization.
//! - [`cutoff`]: the quadratic cutoff family and its inequality.
//! - [`subspace`]: oriented subspaces, intersections and principal angles.
//! - [`calibration`]: the vanishing calibration, pair sums, scaled and coordinate-plane forms.
//! - [`retraction`]: the area-nonincreasing retraction onto the calibrated plane.
//! - [`fermi`]: first-order volume expansion along normal displacements.
//! - [`current`]: simplicial integral currents, mass and form integration.

pub mod error;
pub mod cutoff;
pub mod exterior;
pub mod numeric;
pub mod subspace;
pub mod calibration;
pub mod retraction;
pub mod fermi;
pub mod current;

pub use error::{Error, Result};
