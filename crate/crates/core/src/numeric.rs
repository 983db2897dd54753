//! Small numerical helpers shared by the verification routines.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Deterministic generator used by every stochastic routine in the crate.
pub type Rng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count)
                .map(|i| if i + 1 == count { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// Least-squares slope of `log(values)` against `log(steps)`.
///
/// Returns `None` when fewer than two usable (positive, finite) pairs exist.
pub fn fit_order(steps: &[f64], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .zip(values)
        .filter(|(h, v)| **h > 0.0 && **v > 0.0 && v.is_finite())
        .map(|(h, v)| (h.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Polynomial extrapolation of samples `(x_i, f_i)` to `x = 0` (Neville's scheme).
pub fn extrapolate_to_zero(xs: &[f64], fs: &[f64]) -> f64 {
    assert_eq!(xs.len(), fs.len());
    assert!(!xs.is_empty());
    let mut p = fs.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xa, xb) = (xs[i], xs[i + level]);
            p[i] = (xa * p[i + 1] - xb * p[i]) / (xa - xb);
        }
    }
    p[0]
}

/// Sum in a fixed pairwise tree order, independent of any scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        len => {
            let (a, b) = values.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Orientation-preserving orthonormalization of the columns of `m`
/// (modified Gram-Schmidt, equivalent to QR with a positive diagonal).
///
/// Returns `None` if a column collapses below `rel_tol` times its original norm.
pub fn orthonormalize_columns(m: &DMatrix<f64>, rel_tol: f64) -> Option<DMatrix<f64>> {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        let original = q.column(j).norm();
        for i in 0..j {
            let proj = q.column(i).dot(&q.column(j));
            let qi = q.column(i).clone_owned();
            q.column_mut(j).axpy(-proj, &qi, 1.0);
        }
        // second pass keeps orthogonality at machine precision
        for i in 0..j {
            let proj = q.column(i).dot(&q.column(j));
            let qi = q.column(i).clone_owned();
            q.column_mut(j).axpy(-proj, &qi, 1.0);
        }
        let norm = q.column(j).norm();
        if !(norm > rel_tol * original) || norm == 0.0 {
            return None;
        }
        q.column_mut(j).scale_mut(1.0 / norm);
    }
    Some(q)
}

/// Gaussian random `rows x cols` matrix.
pub fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Uniformly distributed orthonormal `dim x k` frame.
pub fn random_orthonormal_frame(rng: &mut Rng, dim: usize, k: usize) -> DMatrix<f64> {
    loop {
        let g = gaussian_matrix(rng, dim, k);
        if let Some(q) = orthonormalize_columns(&g, 1e-8) {
            return q;
        }
    }
}

/// Uniform random unit vector in `R^dim`.
pub fn random_unit_vector(rng: &mut Rng, dim: usize) -> Vec<f64> {
    random_orthonormal_frame(rng, dim, 1).column(0).iter().copied().collect()
}

/// Axis-aligned box with a tensor-product uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box corners must have equal length");
        Self { lo, hi }
    }

    /// The cube `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64) -> Self {
        Self::new(vec![-half; dim], vec![half; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    /// Number of points of the grid with `per_axis` points along every axis.
    pub fn point_count(&self, per_axis: usize) -> usize {
        per_axis.pow(self.dim() as u32)
    }

    /// Grid point with linear index `index` (first axis varies slowest).
    pub fn point(&self, per_axis: usize, mut index: usize, out: &mut [f64]) {
        for axis in (0..self.dim()).rev() {
            let i = index % per_axis;
            index /= per_axis;
            out[axis] = if per_axis == 1 {
                0.5 * (self.lo[axis] + self.hi[axis])
            } else {
                self.lo[axis] + (self.hi[axis] - self.lo[axis]) * i as f64 / (per_axis - 1) as f64
            };
        }
    }

    /// Uniform random point inside the box.
    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        use rand::Rng as _;
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_hits_both_ends() {
        let v = linspace(0.5, 1.5, 20);
        assert_eq!(v.len(), 20);
        assert_eq!(v[0], 0.5);
        assert_eq!(v[19], 1.5);
    }

    #[test]
    fn fit_order_recovers_power_law() {
        let hs = [1e-2, 5e-3, 2.5e-3];
        let vs: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        assert!((fit_order(&hs, &vs).unwrap() - 2.0).abs() < 1e-12);
        assert!(fit_order(&hs, &[0.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn neville_is_exact_on_polynomials() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let fs: Vec<f64> = xs.iter().map(|x| -4.0 + 6.0 * x - 4.0 * x * x + x * x * x).collect();
        assert!((extrapolate_to_zero(&xs, &fs) + 4.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
    }

    #[test]
    fn orthonormalize_preserves_orientation() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 3.0]);
        let q = orthonormalize_columns(&m, 1e-12).unwrap();
        assert!((q.determinant() - 1.0).abs() < 1e-14);
        let r = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let q = orthonormalize_columns(&r, 1e-12).unwrap();
        assert!((q.determinant() + 1.0).abs() < 1e-14);
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        assert!(orthonormalize_columns(&singular, 1e-12).is_none());
    }

    #[test]
    fn grid_points_are_tensor_product() {
        let b = GridBox::new(vec![0.0, -1.0], vec![1.0, 1.0]);
        let mut p = [0.0; 2];
        b.point(3, 0, &mut p);
        assert_eq!(p, [0.0, -1.0]);
        b.point(3, 1, &mut p);
        assert_eq!(p, [0.0, 0.0]);
        b.point(3, 8, &mut p);
        assert_eq!(p, [1.0, 1.0]);
        assert_eq!(b.point_count(3), 9);
    }
}
