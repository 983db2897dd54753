use std::ops::{Mul, Neg};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::basis::{self, binomial, merge_sign, MAX_DIM};
use crate::error::{Error, Result};

/// A k-covector on `R^N`: one coefficient per strictly increasing multi-index,
/// ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternatingTensor {
    dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl AlternatingTensor {
    pub fn zeros(dim: usize, degree: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if degree > dim {
            return Err(Error::DegreeOverflow { left: degree, right: 0, dim });
        }
        Ok(Self { dim, degree, coeffs: vec![0.0; binomial(dim, degree)] })
    }

    pub fn from_coeffs(dim: usize, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let mut t = Self::zeros(dim, degree)?;
        if coeffs.len() != t.coeffs.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients for degree {degree} in R^{dim}, got {}",
                t.coeffs.len(),
                coeffs.len()
            )));
        }
        t.coeffs = coeffs;
        Ok(t)
    }

    pub fn scalar(dim: usize, value: f64) -> Result<Self> {
        Self::from_coeffs(dim, 0, vec![value])
    }

    pub fn one_form(coeffs: &[f64]) -> Result<Self> {
        Self::from_coeffs(coeffs.len(), 1, coeffs.to_vec())
    }

    /// `dx_{i1} ^ ... ^ dx_{ik}` for zero-based, pairwise distinct axes in any order.
    pub fn basis(dim: usize, axes: &[usize]) -> Result<Self> {
        let mut t = Self::zeros(dim, axes.len())?;
        let mut mask = 0u32;
        let mut sign = 1.0;
        for &a in axes {
            if a >= dim {
                return Err(Error::InvalidArgument(format!("axis {a} out of range for R^{dim}")));
            }
            if mask & (1 << a) != 0 {
                return Ok(t);
            }
            // moving a past the higher axes already placed
            if (mask >> a).count_ones() % 2 == 1 {
                sign = -sign;
            }
            mask |= 1 << a;
        }
        t.coeffs[basis::rank(dim, mask)] = sign;
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient of the basis element with the given strictly increasing axes.
    pub fn coeff(&self, axes: &[usize]) -> f64 {
        let mask = axes.iter().fold(0u32, |m, a| m | (1 << a));
        debug_assert_eq!(mask.count_ones() as usize, axes.len());
        self.coeffs[basis::rank(self.dim, mask)]
    }

    /// Multi-indices paired with their coefficients, in basis order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        basis::masks(self.dim, self.degree)
            .iter()
            .zip(&self.coeffs)
            .map(|(m, c)| (basis::indices(*m), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    /// Euclidean norm of the coefficient vector; an upper bound for the comass,
    /// attained exactly when the tensor is simple.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: f64, other: &Self) -> Result<()> {
        self.check_same_space(other)?;
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(1.0, other)?;
        Ok(out)
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        if self.degree + other.degree > self.dim {
            return Err(Error::DegreeOverflow {
                left: self.degree,
                right: other.degree,
                dim: self.dim,
            });
        }
        let mut out = Self::zeros(self.dim, self.degree + other.degree)?;
        let left_masks = basis::masks(self.dim, self.degree);
        let right_masks = basis::masks(other.dim, other.degree);
        for (lm, lc) in left_masks.iter().zip(&self.coeffs) {
            if *lc == 0.0 {
                continue;
            }
            for (rm, rc) in right_masks.iter().zip(&other.coeffs) {
                if *rc == 0.0 || lm & rm != 0 {
                    continue;
                }
                out.coeffs[basis::rank(self.dim, lm | rm)] += merge_sign(*lm, *rm) * lc * rc;
            }
        }
        Ok(out)
    }

    /// Interior product `i_w self`, inserting `w` into the first slot.
    pub fn interior(&self, w: &[f64]) -> Result<Self> {
        if w.len() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: w.len() });
        }
        if self.degree == 0 {
            return Err(Error::InteriorOfScalar);
        }
        let mut out = Self::zeros(self.dim, self.degree - 1)?;
        for (m, c) in basis::masks(self.dim, self.degree).iter().zip(&self.coeffs) {
            if *c == 0.0 {
                continue;
            }
            let mut rest = *m;
            let mut position = 0;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let sign = if position % 2 == 0 { 1.0 } else { -1.0 };
                out.coeffs[basis::rank(self.dim, m & !(1 << i))] += sign * w[i] * c;
                position += 1;
            }
        }
        Ok(out)
    }

    /// Value on the k-vector `v_1 ^ ... ^ v_k` given by the columns of `frame`:
    /// the sum over multi-indices of coefficient times the matching k x k minor.
    pub fn evaluate_columns(&self, frame: &DMatrix<f64>) -> Result<f64> {
        if frame.nrows() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: frame.nrows() });
        }
        if frame.ncols() != self.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: frame.ncols() });
        }
        let k = self.degree;
        if k == 0 {
            return Ok(self.coeffs[0]);
        }
        let mut minor = [0.0f64; MAX_DIM * MAX_DIM];
        let mut total = 0.0;
        for (m, c) in basis::masks(self.dim, k).iter().zip(&self.coeffs) {
            if *c == 0.0 {
                continue;
            }
            let mut rest = *m;
            let mut row = 0;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                for col in 0..k {
                    minor[row * k + col] = frame[(i, col)];
                }
                row += 1;
            }
            total += c * determinant(&mut minor[..k * k], k);
        }
        Ok(total)
    }

    pub fn evaluate(&self, xi: &SimpleKVector) -> Result<f64> {
        self.evaluate_columns(&xi.frame)
    }

    /// The 1-form `w -> self(v_1, .., v_{j-1}, w, v_{j+1}, .., v_k)` for the
    /// columns `v` of `frame`: the partial gradient of the pairing in column `j`.
    pub fn partial_gradient(&self, frame: &DMatrix<f64>, j: usize) -> Result<Vec<f64>> {
        let k = self.degree;
        if frame.ncols() != k || j >= k {
            return Err(Error::DegreeMismatch { expected: k, found: frame.ncols() });
        }
        let mut form = self.clone();
        for col in (0..k).filter(|c| *c != j) {
            let v: Vec<f64> = frame.column(col).iter().copied().collect();
            form = form.interior(&v)?;
        }
        // the free slot ended up last; moving it to position j costs k-1-j swaps
        let sign = if (k - 1 - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(form.coeffs.iter().map(|c| sign * c).collect())
    }
}

impl Mul<f64> for &AlternatingTensor {
    type Output = AlternatingTensor;

    fn mul(self, rhs: f64) -> AlternatingTensor {
        AlternatingTensor {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * rhs).collect(),
        }
    }
}

impl Neg for &AlternatingTensor {
    type Output = AlternatingTensor;

    fn neg(self) -> AlternatingTensor {
        self * -1.0
    }
}

/// Precomputed index map for `alpha ^ omega` with `alpha` a 1-form and `omega`
/// of fixed degree; used on hot paths where a tensor is rebuilt at every grid point.
#[derive(Debug, Clone)]
pub struct OneFormWedge {
    dim: usize,
    degree: usize,
    // (source rank, axis, target rank, sign)
    entries: Vec<(u32, u8, u32, f64)>,
}

impl OneFormWedge {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if degree + 1 > dim {
            return Err(Error::DegreeOverflow { left: 1, right: degree, dim });
        }
        let mut entries = Vec::new();
        for (src, m) in basis::masks(dim, degree).iter().enumerate() {
            for axis in 0..dim {
                if m & (1 << axis) != 0 {
                    continue;
                }
                let sign = merge_sign(1 << axis, *m);
                entries.push((src as u32, axis as u8, basis::rank(dim, m | (1 << axis)) as u32, sign));
            }
        }
        Ok(Self { dim, degree, entries })
    }

    /// Writes `alpha ^ omega` into `out` (coefficients of degree `degree + 1`).
    pub fn apply(&self, alpha: &[f64], omega: &[f64], out: &mut [f64]) {
        debug_assert_eq!(alpha.len(), self.dim);
        debug_assert_eq!(omega.len(), binomial(self.dim, self.degree));
        out.iter_mut().for_each(|c| *c = 0.0);
        for &(src, axis, dst, sign) in &self.entries {
            out[dst as usize] += sign * alpha[axis as usize] * omega[src as usize];
        }
    }

    pub fn output_len(&self) -> usize {
        binomial(self.dim, self.degree + 1)
    }
}

/// The `degree`-th compound of a square matrix `q`: row-major `C(N,k) x C(N,k)`
/// entries `det q[A, B]` over multi-indices `A` (rows) and `B` (columns).
///
/// If `u = q^T p` are new coordinates, `du_B = sum_A det q[A, B] dp_A`, so this matrix
/// rewrites coefficients in the `u` basis as coefficients in the `p` basis.
pub fn compound_matrix(q: &DMatrix<f64>, degree: usize) -> Vec<f64> {
    let dim = q.nrows();
    let masks = basis::masks(dim, degree);
    let len = masks.len();
    let mut out = vec![0.0; len * len];
    let mut minor = vec![0.0; degree * degree];
    for (ai, am) in masks.iter().enumerate() {
        let rows = basis::indices(*am);
        for (bi, bm) in masks.iter().enumerate() {
            let cols = basis::indices(*bm);
            for (r, row) in rows.iter().enumerate() {
                for (c, col) in cols.iter().enumerate() {
                    minor[r * degree + c] = q[(*row, *col)];
                }
            }
            out[ai * len + bi] = determinant(&mut minor, degree);
        }
    }
    out
}

/// Determinant of a row-major `k x k` matrix by Gaussian elimination with
/// partial pivoting. Overwrites `a`.
pub(crate) fn determinant(a: &mut [f64], k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => {
            let mut det = 1.0;
            for col in 0..k {
                let pivot = (col..k)
                    .max_by(|x, y| a[x * k + col].abs().total_cmp(&a[y * k + col].abs()))
                    .unwrap();
                if a[pivot * k + col] == 0.0 {
                    return 0.0;
                }
                if pivot != col {
                    for c in 0..k {
                        a.swap(pivot * k + c, col * k + c);
                    }
                    det = -det;
                }
                let p = a[col * k + col];
                det *= p;
                for row in col + 1..k {
                    let f = a[row * k + col] / p;
                    if f != 0.0 {
                        for c in col..k {
                            a[row * k + c] -= f * a[col * k + c];
                        }
                    }
                }
            }
            det
        }
    }
}

/// A simple k-vector `v_1 ^ ... ^ v_k`, stored through its frame (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleKVector {
    frame: DMatrix<f64>,
}

impl SimpleKVector {
    pub fn new(frame: DMatrix<f64>) -> Self {
        Self { frame }
    }

    pub fn from_vectors(vectors: &[Vec<f64>]) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: bad.len() });
        }
        Ok(Self::new(DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i])))
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn degree(&self) -> usize {
        self.frame.ncols()
    }

    /// Largest entry of `F^T F - I`.
    pub fn gram_defect(&self) -> f64 {
        let g = self.frame.transpose() * &self.frame;
        let k = g.nrows();
        (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| (g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    /// Unit simple k-vector: the frame is orthonormal to 1e-12.
    pub fn is_unit(&self) -> bool {
        self.gram_defect() <= 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, axes: &[usize]) -> AlternatingTensor {
        AlternatingTensor::basis(dim, axes).unwrap()
    }

    #[test]
    fn wedge_basis_and_antisymmetry() {
        let dx1 = e(2, &[0]);
        let dx2 = e(2, &[1]);
        assert_eq!(dx1.wedge(&dx2).unwrap().coeffs(), &[1.0]);
        assert_eq!(dx2.wedge(&dx1).unwrap().coeffs(), &[-1.0]);
    }

    #[test]
    fn wedge_by_bilinearity() {
        // (dx1 + dx2) ^ (dx1 - dx2) = -dx1^dx2 + dx2^dx1 = -2 e12
        let a = AlternatingTensor::one_form(&[1.0, 1.0]).unwrap();
        let b = AlternatingTensor::one_form(&[1.0, -1.0]).unwrap();
        assert_eq!(a.wedge(&b).unwrap().coeffs(), &[-2.0]);
    }

    #[test]
    fn wedge_errors() {
        let a = e(3, &[0, 1]);
        assert!(matches!(a.wedge(&a), Err(Error::DegreeOverflow { .. })));
        assert!(matches!(a.wedge(&e(4, &[0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn basis_with_unsorted_axes_carries_sign() {
        assert_eq!(e(3, &[2, 0]).coeff(&[0, 2]), -1.0);
        assert_eq!(e(3, &[1, 2, 0]).coeff(&[0, 1, 2]), 1.0);
        assert!(e(3, &[1, 1]).is_zero());
    }

    #[test]
    fn interior_product_basis_cases() {
        let e12 = e(3, &[0, 1]);
        assert_eq!(e12.interior(&[1.0, 0.0, 0.0]).unwrap(), e(3, &[1]));
        assert_eq!(e12.interior(&[0.0, 1.0, 0.0]).unwrap(), -&e(3, &[0]));
        assert!(e12.interior(&[0.0, 0.0, 1.0]).unwrap().is_zero());
        assert_eq!(
            AlternatingTensor::scalar(3, 2.0).unwrap().interior(&[1.0, 0.0, 0.0]),
            Err(Error::InteriorOfScalar)
        );
    }

    #[test]
    fn evaluate_dual_basis_and_orientation() {
        let e12 = e(2, &[0, 1]);
        let fwd = SimpleKVector::from_vectors(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let rev = SimpleKVector::from_vectors(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(e12.evaluate(&fwd).unwrap(), 1.0);
        assert_eq!(e12.evaluate(&rev).unwrap(), -1.0);
    }

    #[test]
    fn evaluate_sum_of_coordinate_planes() {
        // (e12 + e34)((e1+e3)/sqrt2, (e2+e4)/sqrt2) = 1/2 + 1/2
        let u = e(4, &[0, 1]).try_add(&e(4, &[2, 3])).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let xi = SimpleKVector::from_vectors(&[vec![s, 0.0, s, 0.0], vec![0.0, s, 0.0, s]]).unwrap();
        assert!((u.evaluate(&xi).unwrap() - 1.0).abs() < 1e-15);
        assert!(xi.is_unit());
    }

    #[test]
    fn evaluate_rejects_wrong_degree() {
        let u = e(3, &[0, 1]);
        let xi = SimpleKVector::from_vectors(&[vec![1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(u.evaluate(&xi), Err(Error::DegreeMismatch { expected: 2, found: 1 }));
    }

    #[test]
    fn large_determinant_matches_nalgebra() {
        let m = DMatrix::from_fn(5, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 + if i == j { 2.5 } else { 0.1 });
        let mut flat: Vec<f64> = (0..25).map(|x| m[(x / 5, x % 5)]).collect();
        assert!((determinant(&mut flat, 5) - m.determinant()).abs() < 1e-9);
    }

    #[test]
    fn one_form_wedge_matches_general_wedge() {
        let omega = AlternatingTensor::from_coeffs(5, 2, (0..10).map(|i| i as f64 - 3.5).collect()).unwrap();
        let alpha = [0.3, -1.0, 2.0, 0.5, 0.25];
        let w = OneFormWedge::new(5, 2).unwrap();
        let mut out = vec![0.0; w.output_len()];
        w.apply(&alpha, omega.coeffs(), &mut out);
        let want = AlternatingTensor::one_form(&alpha).unwrap().wedge(&omega).unwrap();
        for (a, b) in out.iter().zip(want.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn compound_matrix_rewrites_coordinates() {
        // u = q^T p with q a rotation in the (0, 1) plane
        let (c, s) = (0.6, 0.8);
        let q = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        let m = compound_matrix(&q, 1);
        // du_0 = c dp_0 + s dp_1
        assert_eq!((m[0], m[3], m[6]), (c, s, 0.0));
        let m2 = compound_matrix(&q, 2);
        // du_0 ^ du_1 = dp_0 ^ dp_1
        assert!((m2[0] - 1.0).abs() < 1e-15 && m2[3].abs() < 1e-15 && m2[6].abs() < 1e-15);
    }

    #[test]
    fn partial_gradient_is_the_slot_derivative() {
        let u = AlternatingTensor::from_coeffs(4, 3, vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        let frame = DMatrix::from_fn(4, 3, |i, j| ((i + 2 * j) as f64 * 0.7).sin());
        for j in 0..3 {
            let g = u.partial_gradient(&frame, j).unwrap();
            for axis in 0..4 {
                let mut f = frame.clone();
                f[(axis, j)] += 1.0;
                let diff = u.evaluate_columns(&f).unwrap() - u.evaluate_columns(&frame).unwrap();
                assert!((diff - g[axis]).abs() < 1e-12, "column {j} axis {axis}");
            }
        }
    }
}
