//! Differential form fields on `R^N` and their finite-difference exterior derivative.

use super::basis::binomial;
use super::tensor::{AlternatingTensor, OneFormWedge};
use crate::error::{Error, Result};

/// A k-form field, possibly undefined (or only Lipschitz) on a singular locus.
pub trait FormField: Send + Sync {
    fn ambient_dim(&self) -> usize;

    fn degree(&self) -> usize;

    /// Writes the coefficients at `p` into `out` (length `binomial(N, k)`).
    /// Behaviour on the singular locus is implementation defined.
    fn eval_into(&self, p: &[f64], out: &mut [f64]);

    /// True if `p` lies within `margin` of the singular locus.
    fn near_singular(&self, _p: &[f64], _margin: f64) -> bool {
        false
    }

    fn coefficient_len(&self) -> usize {
        binomial(self.ambient_dim(), self.degree())
    }

    fn eval(&self, p: &[f64]) -> AlternatingTensor {
        let mut out = vec![0.0; self.coefficient_len()];
        self.eval_into(p, &mut out);
        AlternatingTensor::from_coeffs(self.ambient_dim(), self.degree(), out)
            .expect("field produces tensors of its own shape")
    }

    /// [`FormField::eval`], refusing points on the singular locus.
    fn try_eval(&self, p: &[f64]) -> Result<AlternatingTensor> {
        if p.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { left: self.ambient_dim(), right: p.len() });
        }
        if self.near_singular(p, 0.0) {
            return Err(Error::SingularPoint(p.to_vec()));
        }
        Ok(self.eval(p))
    }
}

impl<F: FormField + ?Sized> FormField for &F {
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn eval_into(&self, p: &[f64], out: &mut [f64]) {
        (**self).eval_into(p, out)
    }
    fn near_singular(&self, p: &[f64], margin: f64) -> bool {
        (**self).near_singular(p, margin)
    }
}

impl<F: FormField + ?Sized> FormField for Box<F> {
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn eval_into(&self, p: &[f64], out: &mut [f64]) {
        (**self).eval_into(p, out)
    }
    fn near_singular(&self, p: &[f64], margin: f64) -> bool {
        (**self).near_singular(p, margin)
    }
}

/// The same tensor at every point.
#[derive(Debug, Clone)]
pub struct ConstantField(pub AlternatingTensor);

impl FormField for ConstantField {
    fn ambient_dim(&self) -> usize {
        self.0.dim()
    }
    fn degree(&self) -> usize {
        self.0.degree()
    }
    fn eval_into(&self, _p: &[f64], out: &mut [f64]) {
        out.copy_from_slice(self.0.coeffs());
    }
}

/// A field given by a closure returning coefficients, with no singular locus.
pub struct FnField<F> {
    dim: usize,
    degree: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, degree: usize, f: F) -> Self {
        Self { dim, degree, f }
    }
}

impl<F> FormField for FnField<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn ambient_dim(&self) -> usize {
        self.dim
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval_into(&self, p: &[f64], out: &mut [f64]) {
        (self.f)(p, out)
    }
}

/// Pointwise sum of fields of equal shape; singular wherever any summand is.
pub struct SumField<A, B> {
    pub left: A,
    pub right: B,
}

impl<A: FormField, B: FormField> SumField<A, B> {
    pub fn new(left: A, right: B) -> Result<Self> {
        if left.ambient_dim() != right.ambient_dim() {
            return Err(Error::DimensionMismatch { left: left.ambient_dim(), right: right.ambient_dim() });
        }
        if left.degree() != right.degree() {
            return Err(Error::DegreeMismatch { expected: left.degree(), found: right.degree() });
        }
        Ok(Self { left, right })
    }
}

impl<A: FormField, B: FormField> FormField for SumField<A, B> {
    fn ambient_dim(&self) -> usize {
        self.left.ambient_dim()
    }
    fn degree(&self) -> usize {
        self.left.degree()
    }
    fn eval_into(&self, p: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; out.len()];
        self.left.eval_into(p, out);
        self.right.eval_into(p, &mut tmp);
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o += t;
        }
    }
    fn near_singular(&self, p: &[f64], margin: f64) -> bool {
        self.left.near_singular(p, margin) || self.right.near_singular(p, margin)
    }
}

/// Central-difference approximation of `dF` at `p`:
/// `sum_i dx_i ^ (F(p + h e_i) - F(p - h e_i)) / 2h`.
///
/// Refuses stencils whose `2h`-neighbourhood meets the singular locus.
pub fn finite_difference_exterior_derivative<F: FormField + ?Sized>(
    field: &F,
    p: &[f64],
    h: f64,
) -> Result<AlternatingTensor> {
    let (dim, k) = (field.ambient_dim(), field.degree());
    if p.len() != dim {
        return Err(Error::DimensionMismatch { left: dim, right: p.len() });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let wedge = OneFormWedge::new(dim, k)?;
    if field.near_singular(p, 2.0 * h) {
        return Err(Error::StencilOnSingularLocus { point: p.to_vec(), step: h });
    }
    let len = field.coefficient_len();
    let mut plus = vec![0.0; len];
    let mut minus = vec![0.0; len];
    let mut term = vec![0.0; wedge.output_len()];
    let mut total = vec![0.0; wedge.output_len()];
    let mut q = p.to_vec();
    let mut axis = vec![0.0; dim];
    for i in 0..dim {
        q[i] = p[i] + h;
        field.eval_into(&q, &mut plus);
        q[i] = p[i] - h;
        field.eval_into(&q, &mut minus);
        q[i] = p[i];
        for (a, b) in plus.iter_mut().zip(&minus) {
            *a = (*a - b) / (2.0 * h);
        }
        axis[i] = 1.0;
        wedge.apply(&axis, &plus, &mut term);
        axis[i] = 0.0;
        for (t, v) in total.iter_mut().zip(&term) {
            *t += v;
        }
    }
    AlternatingTensor::from_coeffs(dim, k + 1, total)
}
