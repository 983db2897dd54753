use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::TriangulatedCurrent;
use super::quadrature::{simplex_rule, SimplexRule};
use crate::error::{Error, Result};
use crate::exterior::FormField;
use crate::numeric::pairwise_sum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    /// `2 |Q_p - Q_{p+1}|`.
    pub error_estimate: f64,
    pub order: usize,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn pairing<F: FormField + ?Sized>(current: &TriangulatedCurrent, field: &F, rule: &SimplexRule) -> Result<f64> {
    let k = current.degree();
    let scale = 1.0 / factorial(k);
    let per_simplex: Vec<f64> = current
        .simplices()
        .par_iter()
        .map(|s| {
            let edges = current.edges(s);
            let mut node = vec![0.0; current.ambient_dim()];
            let mut total = 0.0;
            for (bary, w) in rule.nodes.iter().zip(&rule.weights) {
                node.fill(0.0);
                for (b, v) in bary.iter().zip(&s.vertices) {
                    for (n, x) in node.iter_mut().zip(&current.vertices()[*v]) {
                        *n += b * x;
                    }
                }
                if field.near_singular(&node, 0.0) {
                    return Err(Error::QuadratureNodeOnSingularLocus(node));
                }
                let value = if k == 0 { field.eval(&node).coeffs()[0] } else { field.eval(&node).evaluate_columns(&edges)? };
                total += w * value;
            }
            Ok(s.multiplicity as f64 * scale * total)
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&per_simplex))
}

/// `T(F) = sum m int_simplex F`, each simplex integrated by the symmetric rule exact to
/// degree `order`, paired with the constant tangent k-vector of the simplex.
pub fn integrate_form<F: FormField + ?Sized>(current: &TriangulatedCurrent, field: &F, order: usize) -> Result<Integral> {
    if field.ambient_dim() != current.ambient_dim() {
        return Err(Error::DimensionMismatch { left: current.ambient_dim(), right: field.ambient_dim() });
    }
    if field.degree() != current.degree() {
        return Err(Error::DegreeMismatch { expected: current.degree(), found: field.degree() });
    }
    let k = current.degree();
    let value = pairing(current, field, &simplex_rule(k, order))?;
    let finer = pairing(current, field, &simplex_rule(k, order + 1))?;
    Ok(Integral { value, error_estimate: 2.0 * (value - finer).abs(), order })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub pairing: f64,
    pub mass: f64,
    pub comass_cap: f64,
    /// `M(T) cap - T(F)`.
    pub slack: f64,
    pub error_estimate: f64,
    /// `T(F)` equals `M(T) cap` to 1e-6 relative.
    pub calibrated: bool,
    /// `slack >= -1e-8`.
    pub holds: bool,
}

/// Checks `T(F) <= M(T) comass_cap`, flagging equality.
pub fn calibration_inequality_check<F: FormField + ?Sized>(
    current: &TriangulatedCurrent,
    field: &F,
    comass_cap: f64,
    order: usize,
) -> Result<InequalityCheck> {
    let integral = integrate_form(current, field, order)?;
    let mass = current.mass();
    let bound = mass * comass_cap;
    let slack = bound - integral.value;
    Ok(InequalityCheck {
        pairing: integral.value,
        mass,
        comass_cap,
        slack,
        error_estimate: integral.error_estimate,
        calibrated: slack.abs() <= 1e-6 * bound,
        holds: slack >= -1e-8,
    })
}
