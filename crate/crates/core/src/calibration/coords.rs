use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numeric::orthonormalize_columns;
use crate::subspace::PlanePair;

/// Orthonormal splitting `R^N = R^n (x) + R^m (y) + R^k (l)` with
/// `r = |x|`, `z = |y|`, `t = z / r`.
///
/// The split is given by an orthogonal frame whose first `n` columns span the
/// x-block, the next `m` the y-block and the last `k` the l-block; adapted
/// coordinates are `u = frame^T p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeCoordinates {
    n: usize,
    m: usize,
    k: usize,
    frame: DMatrix<f64>,
    standard: bool,
}

impl WedgeCoordinates {
    /// x = the first `n` coordinate axes, y = the next `m`, l = the last `k`.
    pub fn standard(n: usize, m: usize, k: usize) -> Self {
        let dim = n + m + k;
        Self { n, m, k, frame: DMatrix::identity(dim, dim), standard: true }
    }

    pub fn from_frame(n: usize, m: usize, k: usize, frame: DMatrix<f64>) -> Result<Self> {
        let dim = n + m + k;
        if frame.nrows() != dim || frame.ncols() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: frame.nrows().max(frame.ncols()) });
        }
        let defect = (frame.transpose() * &frame - DMatrix::<f64>::identity(dim, dim)).amax();
        if defect > 1e-10 {
            return Err(Error::NotOrthonormal(defect));
        }
        let standard = frame == DMatrix::identity(dim, dim);
        Ok(Self { n, m, k, frame, standard })
    }

    /// Coordinates adapted to the first (`second = false`) or second plane of `pair`:
    /// x spans that plane's complement, l the shared intersection, y the normal space.
    /// The x-block and l-block are ordered so that `x ^ l` carries the plane's orientation.
    pub fn adapted_to(pair: &PlanePair, second: bool) -> Result<Self> {
        let complement = if second { &pair.complement2 } else { &pair.complement1 };
        let x = complement.orthonormal_basis();
        let l = pair.intersection.orthonormal_basis();
        let dim = pair.p1.ambient_dim();
        let (n, k) = (x.ncols(), l.ncols());
        if n == 0 {
            return Err(Error::EmptyComplements);
        }
        let m = dim - n - k;
        // complete x and l by the normal space, extracted from the identity
        let mut cols: Vec<nalgebra::DVector<f64>> = x.column_iter().map(|c| c.into_owned()).collect();
        cols.extend(l.column_iter().map(|c| c.into_owned()));
        let mut normals = Vec::with_capacity(m);
        for axis in 0..dim {
            if normals.len() == m {
                break;
            }
            let mut v = nalgebra::DVector::zeros(dim);
            v[axis] = 1.0;
            for c in cols.iter().chain(normals.iter()) {
                let proj = c.dot(&v);
                v.axpy(-proj, c, 1.0);
            }
            for c in cols.iter().chain(normals.iter()) {
                let proj = c.dot(&v);
                v.axpy(-proj, c, 1.0);
            }
            let norm = v.norm();
            if norm > 1e-6 {
                normals.push(v / norm);
            }
        }
        let mut frame = DMatrix::zeros(dim, dim);
        for j in 0..n {
            frame.set_column(j, &x.column(j));
        }
        for (j, v) in normals.iter().enumerate() {
            frame.set_column(n + j, v);
        }
        for j in 0..k {
            frame.set_column(n + m + j, &l.column(j));
        }
        let frame = orthonormalize_columns(&frame, 1e-8).ok_or(Error::NotOrthonormal(f64::NAN))?;
        Self::from_frame(n, m, k, frame)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + self.m + self.k
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn is_standard(&self) -> bool {
        self.standard
    }

    /// `u = frame^T p`.
    pub fn adapted(&self, p: &[f64], out: &mut [f64]) {
        if self.standard {
            out.copy_from_slice(p);
            return;
        }
        let dim = self.ambient_dim();
        for (j, o) in out.iter_mut().enumerate().take(dim) {
            *o = (0..dim).map(|i| self.frame[(i, j)] * p[i]).sum();
        }
    }

    /// Inverse of [`WedgeCoordinates::adapted`]: `p = frame u`.
    pub fn ambient(&self, u: &[f64], out: &mut [f64]) {
        if self.standard {
            out.copy_from_slice(u);
            return;
        }
        let dim = self.ambient_dim();
        for (i, o) in out.iter_mut().enumerate().take(dim) {
            *o = (0..dim).map(|j| self.frame[(i, j)] * u[j]).sum();
        }
    }

    /// `(r, z)` of an adapted coordinate vector.
    pub fn rz_adapted(&self, u: &[f64]) -> (f64, f64) {
        let r = u[..self.n].iter().map(|v| v * v).sum::<f64>().sqrt();
        let z = u[self.n..self.n + self.m].iter().map(|v| v * v).sum::<f64>().sqrt();
        (r, z)
    }

    pub fn rz(&self, p: &[f64]) -> (f64, f64) {
        let mut u = [0.0; 16];
        let u = &mut u[..self.ambient_dim()];
        self.adapted(p, u);
        self.rz_adapted(u)
    }

    /// `t = z / r`; `None` at `r = 0`.
    pub fn t(&self, p: &[f64]) -> Option<f64> {
        let (r, z) = self.rz(p);
        (r > 0.0).then(|| z / r)
    }

    /// Orthonormal frame of the oriented calibrated plane: x-block then l-block.
    pub fn x_plane_frame(&self) -> DMatrix<f64> {
        let dim = self.ambient_dim();
        DMatrix::from_fn(dim, self.n + self.k, |i, j| {
            let col = if j < self.n { j } else { self.n + self.m + (j - self.n) };
            self.frame[(i, col)]
        })
    }

    /// The point with adapted coordinates `(x, y, l)`.
    pub fn point(&self, x: &[f64], y: &[f64], l: &[f64]) -> Vec<f64> {
        let u: Vec<f64> = x.iter().chain(y).chain(l).copied().collect();
        let mut p = vec![0.0; u.len()];
        self.ambient(&u, &mut p);
        p
    }
}
