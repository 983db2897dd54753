//! Oriented linear subspaces, the splitting of a plane pair along its common
//! intersection, and principal angles.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::orthonormalize_columns;

/// Singular values at or above this count as 1 when detecting the intersection.
pub const INTERSECTION_THRESHOLD: f64 = 1.0 - 1e-10;

/// Span of the columns of `basis`, oriented by column order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedSubspace {
    basis: DMatrix<f64>,
    orthonormal: DMatrix<f64>,
}

impl OrientedSubspace {
    /// Fails with [`Error::RankDeficient`] unless the smallest singular value of
    /// `basis` exceeds `1e-10` times the largest.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if basis.ncols() > 0 {
            let sv = basis.singular_values();
            let largest = sv.max();
            let smallest = sv.min();
            if !(smallest > 1e-10 * largest) || basis.ncols() > basis.nrows() {
                return Err(Error::RankDeficient { smallest, largest });
            }
        }
        let orthonormal = if basis.ncols() == 0 {
            basis.clone()
        } else {
            orthonormalize_columns(&basis, 1e-12).ok_or(Error::RankDeficient {
                smallest: 0.0,
                largest: basis.norm(),
            })?
        };
        Ok(Self { basis, orthonormal })
    }

    pub fn from_vectors(dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: bad.len() });
        }
        Self::new(DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i]))
    }

    /// The span of the given coordinate axes, in the given order.
    pub fn coordinate(dim: usize, axes: &[usize]) -> Result<Self> {
        if let Some(a) = axes.iter().find(|a| **a >= dim) {
            return Err(Error::InvalidArgument(format!("axis {a} out of range for R^{dim}")));
        }
        Self::new(DMatrix::from_fn(dim, axes.len(), |i, j| if axes[j] == i { 1.0 } else { 0.0 }))
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthonormal basis with the same orientation.
    pub fn orthonormal_basis(&self) -> &DMatrix<f64> {
        &self.orthonormal
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.orthonormal * self.orthonormal.transpose()
    }

    /// Distance of `v` from the subspace.
    pub fn distance(&self, v: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(v);
        let proj = &self.orthonormal * (self.orthonormal.transpose() * &v);
        (v - proj).norm()
    }

    /// Applies the linear map `q` to every basis vector.
    pub fn transformed(&self, q: &DMatrix<f64>) -> Result<Self> {
        Self::new(q * &self.basis)
    }
}

/// Spectral-norm distance of the orthogonal projectors; the sine of the largest
/// principal angle when the dimensions agree.
pub fn projection_distance(a: &OrientedSubspace, b: &OrientedSubspace) -> f64 {
    let diff = a.projector() - b.projector();
    diff.singular_values().max()
}

fn sorted_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|i, j| svd.singular_values[*j].total_cmp(&svd.singular_values[*i]));
    let sv = order.iter().map(|i| svd.singular_values[*i]).collect();
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v = DMatrix::from_fn(v_t.ncols(), order.len(), |r, c| v_t[(order[c], r)]);
    (u, sv, v)
}

/// Principal angles between two subspaces: arccos of the singular values of
/// `Q1^T Q2`, clamped to `[0, 1]`, in increasing order (cosines nonincreasing).
pub fn principal_angles(p1: &OrientedSubspace, p2: &OrientedSubspace) -> Result<Vec<f64>> {
    if p1.ambient_dim() != p2.ambient_dim() {
        return Err(Error::DimensionMismatch { left: p1.ambient_dim(), right: p2.ambient_dim() });
    }
    if p1.dim() == 0 || p2.dim() == 0 {
        return Ok(Vec::new());
    }
    let m = p1.orthonormal.transpose() * &p2.orthonormal;
    let (_, sv, _) = sorted_svd(&m);
    Ok(sv.into_iter().map(|s| s.clamp(0.0, 1.0).acos()).collect())
}

/// Two planes of equal dimension split as `P_i = P_i' x L` with `L` their intersection.
#[derive(Debug, Clone)]
pub struct PlanePair {
    pub p1: OrientedSubspace,
    pub p2: OrientedSubspace,
    pub intersection: OrientedSubspace,
    /// `P_1'`, oriented so that `P_1' ^ L` has the orientation of `P_1`.
    pub complement1: OrientedSubspace,
    /// `P_2'`, oriented so that `P_2' ^ L` has the orientation of `P_2`.
    pub complement2: OrientedSubspace,
    /// Principal angles between the complements, increasing.
    pub principal_angles: Vec<f64>,
}

fn columns(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}

/// Flips the first column of `first` (or of `second` if `first` is empty) when the
/// concatenation `[first | second]`, written in the coordinates `coords`, is negatively oriented.
fn orient(first: &mut DMatrix<f64>, second: &mut DMatrix<f64>, coords: &DMatrix<f64>) {
    let joined = DMatrix::from_fn(coords.ncols(), first.ncols() + second.ncols(), |r, c| {
        let col = if c < first.ncols() { first.column(c) } else { second.column(c - first.ncols()) };
        coords.column(r).dot(&col)
    });
    if joined.nrows() == 0 || joined.determinant() > 0.0 {
        return;
    }
    if first.ncols() > 0 {
        first.column_mut(0).neg_mut();
    } else if second.ncols() > 0 {
        second.column_mut(0).neg_mut();
    }
}

pub fn intersect_and_split(p1: &OrientedSubspace, p2: &OrientedSubspace) -> Result<PlanePair> {
    if p1.ambient_dim() != p2.ambient_dim() {
        return Err(Error::DimensionMismatch { left: p1.ambient_dim(), right: p2.ambient_dim() });
    }
    if p1.dim() != p2.dim() {
        return Err(Error::DimensionMismatch { left: p1.dim(), right: p2.dim() });
    }
    let (q1, q2) = (&p1.orthonormal, &p2.orthonormal);
    let n = p1.dim();
    let (u, sv, v) = sorted_svd(&(q1.transpose() * q2));
    let shared: Vec<usize> = (0..n).filter(|i| sv[*i] >= INTERSECTION_THRESHOLD).collect();
    let rest: Vec<usize> = (0..n).filter(|i| sv[*i] < INTERSECTION_THRESHOLD).collect();

    let mut l = q1 * columns(&u, &shared);
    let mut c1 = q1 * columns(&u, &rest);
    let mut c2 = q2 * columns(&v, &rest);
    orient(&mut c1, &mut l, q1);
    // the intersection keeps the orientation fixed by p1; with empty complements only
    // the copy can flip
    orient(&mut c2, &mut l.clone(), q2);

    let principal = rest.iter().map(|i| sv[*i].clamp(0.0, 1.0).acos()).collect();
    Ok(PlanePair {
        p1: p1.clone(),
        p2: p2.clone(),
        intersection: OrientedSubspace::new(l)?,
        complement1: OrientedSubspace::new(c1)?,
        complement2: OrientedSubspace::new(c2)?,
        principal_angles: principal,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleConvention {
    /// Smallest principal angle between the complements.
    #[default]
    MinPrincipal,
    /// Supremum of `arccos |<v, w>|` over unit `v` in `P_1'`, `w` in `P_2'`, taken as
    /// arccos of the smallest singular value of the complement cross-Gram matrix.
    SupArccos,
}

pub fn intersection_angle(pair: &PlanePair, convention: AngleConvention) -> Result<f64> {
    let angles = &pair.principal_angles;
    if angles.is_empty() {
        return Err(Error::EmptyComplements);
    }
    Ok(match convention {
        AngleConvention::MinPrincipal => angles[0],
        AngleConvention::SupArccos => angles[angles.len() - 1],
    })
}

/// Two oriented n-planes in `R^{2n-k}` sharing the last `k` axes, whose complements
/// have the given principal angles (one per complement direction).
pub fn plane_pair_with_angles(n: usize, k: usize, angles: &[f64]) -> Result<(OrientedSubspace, OrientedSubspace)> {
    if k > n || angles.len() != n - k {
        return Err(Error::InvalidArgument(format!(
            "need {} angles for n = {n}, k = {k}, got {}",
            n.saturating_sub(k),
            angles.len()
        )));
    }
    let m = n - k;
    let dim = 2 * m + k;
    let mut b1 = DMatrix::zeros(dim, n);
    let mut b2 = DMatrix::zeros(dim, n);
    for (i, alpha) in angles.iter().enumerate() {
        b1[(i, i)] = 1.0;
        b2[(i, i)] = alpha.cos();
        b2[(m + i, i)] = alpha.sin();
    }
    for j in 0..k {
        b1[(2 * m + j, m + j)] = 1.0;
        b2[(2 * m + j, m + j)] = 1.0;
    }
    Ok((OrientedSubspace::new(b1)?, OrientedSubspace::new(b2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{random_orthonormal_frame, seeded_rng};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    #[test]
    fn orthogonal_planes_in_r4() {
        let x = OrientedSubspace::coordinate(4, &[0, 1]).unwrap();
        let y = OrientedSubspace::coordinate(4, &[2, 3]).unwrap();
        let pair = intersect_and_split(&x, &y).unwrap();
        assert_eq!(pair.intersection.dim(), 0);
        assert_eq!(pair.complement1.dim(), 2);
        assert!(projection_distance(&pair.complement1, &x) < 1e-12);
        for a in principal_angles(&x, &y).unwrap() {
            assert!((a - FRAC_PI_2).abs() < 1e-12);
        }
        for conv in [AngleConvention::MinPrincipal, AngleConvention::SupArccos] {
            assert!((intersection_angle(&pair, conv).unwrap() - FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn shared_axis_is_split_off() {
        let a = OrientedSubspace::coordinate(4, &[0, 1]).unwrap();
        let b = OrientedSubspace::coordinate(4, &[0, 2]).unwrap();
        let pair = intersect_and_split(&a, &b).unwrap();
        assert_eq!(pair.intersection.dim(), 1);
        assert!(pair.intersection.distance(&[1.0, 0.0, 0.0, 0.0]) < 1e-12);
        assert!(pair.complement1.distance(&[0.0, 1.0, 0.0, 0.0]) < 1e-12);
        assert!(pair.complement2.distance(&[0.0, 0.0, 1.0, 0.0]) < 1e-12);
    }

    #[test]
    fn equal_planes_have_empty_complements() {
        let a = OrientedSubspace::coordinate(5, &[1, 3, 4]).unwrap();
        let pair = intersect_and_split(&a, &a).unwrap();
        assert_eq!(pair.intersection.dim(), 3);
        assert_eq!(pair.complement1.dim(), 0);
        assert_eq!(intersection_angle(&pair, AngleConvention::MinPrincipal), Err(Error::EmptyComplements));
    }

    #[test]
    fn rotated_plane_angles() {
        let alpha = 0.3f64;
        let p1 = OrientedSubspace::coordinate(3, &[0, 1]).unwrap();
        let p2 = OrientedSubspace::from_vectors(3, &[vec![alpha.cos(), 0.0, alpha.sin()], vec![0.0, 1.0, 0.0]]).unwrap();
        let angles = principal_angles(&p1, &p2).unwrap();
        assert!(angles[0].abs() < 1e-7 && (angles[1] - alpha).abs() < 1e-12);
        let pair = intersect_and_split(&p1, &p2).unwrap();
        assert_eq!(pair.intersection.dim(), 1);
        for conv in [AngleConvention::MinPrincipal, AngleConvention::SupArccos] {
            assert!((intersection_angle(&pair, conv).unwrap() - alpha).abs() < 1e-12);
        }
    }

    #[test]
    fn conventions_differ_on_mixed_spectrum() {
        let (p1, p2) = plane_pair_with_angles(2, 0, &[FRAC_PI_2, FRAC_PI_6]).unwrap();
        let pair = intersect_and_split(&p1, &p2).unwrap();
        let min = intersection_angle(&pair, AngleConvention::MinPrincipal).unwrap();
        let sup = intersection_angle(&pair, AngleConvention::SupArccos).unwrap();
        assert!((min - FRAC_PI_6).abs() < 1e-12);
        assert!((sup - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_basis_is_rejected() {
        let r = OrientedSubspace::from_vectors(3, &[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]);
        assert!(matches!(r, Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn complements_carry_the_plane_orientation() {
        let mut rng = seeded_rng(5);
        let (p1, p2) = plane_pair_with_angles(3, 1, &[1.2, 0.9]).unwrap();
        let q = random_orthonormal_frame(&mut rng, 5, 5);
        let (p1, p2) = (p1.transformed(&q).unwrap(), p2.transformed(&q).unwrap());
        let pair = intersect_and_split(&p1, &p2).unwrap();
        for (plane, comp) in [(&p1, &pair.complement1), (&p2, &pair.complement2)] {
            let mut joined = comp.basis().clone().resize_horizontally(3, 0.0);
            joined.set_column(2, &pair.intersection.basis().column(0));
            let coords = plane.orthonormal_basis().transpose() * joined;
            assert!(coords.determinant() > 0.5);
        }
    }
}
