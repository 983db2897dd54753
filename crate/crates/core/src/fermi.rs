//! First-order expansion of the volume element along normal displacements of a
//! submanifold of Euclidean space:
//!
//! ```text
//! det g(y nu) / det g(0) = 1 - 2 H^nu y + O(y^2),   H^nu = g^{ij} <X_ij, nu>
//! ```

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::extrapolate_to_zero;

type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type HintFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

/// Fourth-order central difference weights at offsets -2h, -h, h, 2h.
const D1: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];

/// A parameterized n-dimensional patch `X: box -> R^N`.
#[derive(Clone)]
pub struct SurfacePatch {
    name: String,
    n: usize,
    ambient: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    map: MapFn,
    normal_hint: Option<HintFn>,
    step: f64,
}

impl fmt::Debug for SurfacePatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfacePatch")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("ambient", &self.ambient)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .finish_non_exhaustive()
    }
}

impl SurfacePatch {
    pub fn new<F>(name: &str, ambient: usize, lo: Vec<f64>, hi: Vec<f64>, map: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        let n = lo.len();
        if hi.len() != n {
            return Err(Error::DimensionMismatch { left: n, right: hi.len() });
        }
        if n == 0 || n >= ambient {
            return Err(Error::InvalidArgument(format!("patch dimension {n} must lie in 1..{ambient}")));
        }
        Ok(Self {
            name: name.to_string(),
            n,
            ambient,
            lo,
            hi,
            map: Arc::new(map),
            normal_hint: None,
            step: 1e-3,
        })
    }

    /// Vectors whose normal projections, orthonormalized in order, define the normal frame.
    /// Without a hint the coordinate axes with the largest normal parts at the base point are used.
    pub fn with_normal_hint<F>(mut self, hint: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    {
        self.normal_hint = Some(Arc::new(hint));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn codim(&self) -> usize {
        self.ambient - self.n
    }

    pub fn point(&self, u: &[f64]) -> Vec<f64> {
        (self.map)(u)
    }

    fn check_param(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: u.len() });
        }
        if u.iter().zip(self.lo.iter().zip(&self.hi)).any(|(v, (lo, hi))| v < lo || v > hi) {
            return Err(Error::InvalidArgument(format!("parameter {u:?} outside the patch box")));
        }
        Ok(())
    }

    /// Fourth-order finite-difference partial derivative of `f` along parameter axis `i`.
    fn partial<F: Fn(&[f64]) -> Vec<f64>>(&self, f: &F, u: &[f64], i: usize) -> Vec<f64> {
        let h = self.step;
        let mut out = vec![0.0; self.ambient];
        let mut v = u.to_vec();
        for (offset, w) in D1 {
            v[i] = u[i] + offset * h;
            for (o, x) in out.iter_mut().zip(f(&v)) {
                *o += w * x / h;
            }
        }
        out
    }

    /// Tangent vectors `X_i` as the columns of an `N x n` matrix.
    pub fn tangents(&self, u: &[f64]) -> DMatrix<f64> {
        let f = |v: &[f64]| (self.map)(v);
        let cols: Vec<DVector<f64>> = (0..self.n).map(|i| DVector::from_vec(self.partial(&f, u, i))).collect();
        DMatrix::from_columns(&cols)
    }

    pub fn metric(&self, u: &[f64]) -> DMatrix<f64> {
        let t = self.tangents(u);
        t.transpose() * t
    }

    /// Errors unless the tangents have full rank (smallest singular value above 1e-8).
    pub fn check_immersion(&self, u: &[f64]) -> Result<()> {
        self.check_param(u)?;
        let sv = self.tangents(u).singular_values();
        if sv.min() <= 1e-8 {
            return Err(Error::NotImmersion(u.to_vec()));
        }
        Ok(())
    }

    fn seeds_at(&self, base: &[f64]) -> Vec<Vec<f64>> {
        if let Some(hint) = &self.normal_hint {
            return hint(base);
        }
        let q = self.tangents(base).qr().q();
        let mut axes: Vec<(f64, usize)> = (0..self.ambient)
            .map(|a| {
                let tangential: f64 = (0..self.n).map(|j| q[(a, j)].powi(2)).sum();
                (1.0 - tangential, a)
            })
            .collect();
        axes.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        axes.iter()
            .take(self.codim())
            .map(|&(_, a)| {
                let mut e = vec![0.0; self.ambient];
                e[a] = 1.0;
                e
            })
            .collect()
    }

    fn frame_from_seeds(&self, u: &[f64], seeds: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let q = self.tangents(u).qr().q();
        let mut frame: Vec<DVector<f64>> = Vec::with_capacity(self.codim());
        for seed in seeds.iter().take(self.codim()) {
            let mut v = DVector::from_column_slice(seed);
            for _ in 0..2 {
                for j in 0..self.n {
                    let c = q.column(j).dot(&v);
                    v.axpy(-c, &q.column(j), 1.0);
                }
                for w in &frame {
                    let c = w.dot(&v);
                    v.axpy(-c, w, 1.0);
                }
            }
            let norm = v.norm();
            if norm <= 1e-6 {
                return Err(Error::InvalidArgument(format!("normal hint is tangential at {u:?}")));
            }
            frame.push(v / norm);
        }
        if frame.len() != self.codim() {
            return Err(Error::InvalidArgument("normal hint provides too few vectors".into()));
        }
        Ok(DMatrix::from_columns(&frame))
    }

    /// Orthonormal normal frame (`N x m`) at `u`.
    pub fn normal_frame(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        self.check_immersion(u)?;
        self.frame_from_seeds(u, &self.seeds_at(u))
    }

    /// Unit normal `sum_a nu_a nu_a(v)` along the patch near `base`, built from seeds
    /// fixed at `base` so that it is smooth in `v`.
    fn normal_field(&self, base: &[f64], nu: &[f64]) -> Result<impl Fn(&[f64]) -> Vec<f64> + '_> {
        if nu.len() != self.codim() {
            return Err(Error::DimensionMismatch { left: self.codim(), right: nu.len() });
        }
        let norm = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("normal direction has norm {norm}, expected 1")));
        }
        let fixed = self.normal_hint.is_none().then(|| self.seeds_at(base));
        let nu = nu.to_vec();
        Ok(move |v: &[f64]| {
            let seeds = fixed.clone().unwrap_or_else(|| (self.normal_hint.as_ref().expect("hint"))(v));
            let frame = self.frame_from_seeds(v, &seeds).expect("normal frame near the base point");
            (frame * DVector::from_column_slice(&nu)).iter().copied().collect()
        })
    }

    /// Second fundamental form `A^a_ij = <X_ij, nu_a>`, one `n x n` matrix per normal.
    pub fn second_fundamental_form(&self, u: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let normals = self.normal_frame(u)?;
        let f = |v: &[f64]| (self.map)(v);
        let mut second = vec![vec![vec![0.0; self.ambient]; self.n]; self.n];
        for i in 0..self.n {
            for j in i..self.n {
                let g = |v: &[f64]| self.partial(&f, v, j);
                second[i][j] = self.partial(&g, u, i);
                second[j][i] = second[i][j].clone();
            }
        }
        Ok((0..self.codim())
            .map(|a| {
                DMatrix::from_fn(self.n, self.n, |i, j| {
                    second[i][j].iter().zip(normals.column(a).iter()).map(|(x, y)| x * y).sum()
                })
            })
            .collect())
    }

    /// `H^a = g^{ij} A^a_ij`, the trace of the second fundamental form (sum of principal
    /// curvatures, no 1/n normalization).
    pub fn mean_curvature_trace(&self, u: &[f64]) -> Result<Vec<f64>> {
        let ginv = self.metric(u).try_inverse().ok_or_else(|| Error::NotImmersion(u.to_vec()))?;
        Ok(self.second_fundamental_form(u)?.iter().map(|a| ginv.component_mul(a).sum()).collect())
    }

    /// Principal curvatures in the direction `nu`: eigenvalues of `g^{-1} A^nu`.
    pub fn principal_curvatures(&self, u: &[f64], nu: &[f64]) -> Result<Vec<f64>> {
        let a = self.directional_form(u, nu)?;
        let g = self.metric(u);
        // symmetric form via the Cholesky factor: L^-1 A L^-T
        let chol = g.cholesky().ok_or_else(|| Error::NotImmersion(u.to_vec()))?;
        let linv = chol.l().try_inverse().ok_or_else(|| Error::NotImmersion(u.to_vec()))?;
        let s = &linv * a * linv.transpose();
        let s = (&s + s.transpose()) * 0.5;
        Ok(s.symmetric_eigenvalues().iter().copied().collect())
    }

    fn directional_form(&self, u: &[f64], nu: &[f64]) -> Result<DMatrix<f64>> {
        if nu.len() != self.codim() {
            return Err(Error::DimensionMismatch { left: self.codim(), right: nu.len() });
        }
        let forms = self.second_fundamental_form(u)?;
        Ok(forms.iter().zip(nu).fold(DMatrix::zeros(self.n, self.n), |acc, (a, w)| acc + a * *w))
    }

    /// `1 / max |kappa|` in direction `nu` (infinite for a flat direction).
    pub fn focal_radius(&self, u: &[f64], nu: &[f64]) -> Result<f64> {
        let kmax = self.principal_curvatures(u, nu)?.iter().fold(0.0f64, |m, k| m.max(k.abs()));
        Ok(if kmax == 0.0 { f64::INFINITY } else { 1.0 / kmax })
    }
}

/// `det g(y nu) / det g(0)` for the displaced patch `X + y nu`, with `nu` given by its
/// coefficients in the normal frame.
pub fn fermi_volume_ratio(patch: &SurfacePatch, u: &[f64], nu: &[f64], y: f64) -> Result<f64> {
    patch.check_immersion(u)?;
    let focal = patch.focal_radius(u, nu)?;
    if y.abs() >= focal {
        return Err(Error::BeyondFocalRadius { y, focal });
    }
    let field = patch.normal_field(u, nu)?;
    let displaced = |v: &[f64]| -> Vec<f64> {
        let x = patch.point(v);
        x.iter().zip(field(v)).map(|(a, b)| a + y * b).collect()
    };
    let cols: Vec<DVector<f64>> = (0..patch.n).map(|i| DVector::from_vec(patch.partial(&displaced, u, i))).collect();
    let t = DMatrix::from_columns(&cols);
    Ok((t.transpose() * &t).determinant() / patch.metric(u).determinant())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermiReport {
    pub surface: String,
    pub u: Vec<f64>,
    pub nu: Vec<f64>,
    pub ys: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Extrapolated `d ratio / dy` at `y = 0`.
    pub beta: f64,
    /// `H^nu = sum_a H^a nu_a`.
    pub mean_curvature: f64,
    pub error: f64,
    pub tolerance: f64,
    pub focal_radius: f64,
    pub pass: bool,
}

/// Fits `ratio(y) = 1 + beta y + O(y^2)` by extrapolating `(ratio - 1) / y` to zero and
/// compares `beta` with `-2 H^nu` (relative tolerance 1e-3 against `max(1, |H^nu|)`).
pub fn verify_first_order(patch: &SurfacePatch, u: &[f64], nu: &[f64], ys: &[f64]) -> Result<FermiReport> {
    const TOL: f64 = 1e-3;
    if ys.is_empty() || ys.iter().any(|y| *y == 0.0) {
        return Err(Error::InvalidArgument("displacements must be nonzero".into()));
    }
    if ys.windows(2).any(|w| w[1].abs() >= w[0].abs()) {
        return Err(Error::InvalidArgument("displacements must decrease in magnitude".into()));
    }
    let ratios: Vec<f64> = ys.iter().map(|&y| fermi_volume_ratio(patch, u, nu, y)).collect::<Result<_>>()?;
    let quotients: Vec<f64> = ratios.iter().zip(ys).map(|(r, y)| (r - 1.0) / y).collect();
    let beta = extrapolate_to_zero(ys, &quotients);
    let mean_curvature: f64 = patch.mean_curvature_trace(u)?.iter().zip(nu).map(|(h, w)| h * w).sum();
    let error = (beta + 2.0 * mean_curvature).abs();
    Ok(FermiReport {
        surface: patch.name.clone(),
        u: u.to_vec(),
        nu: nu.to_vec(),
        ys: ys.to_vec(),
        ratios,
        beta,
        mean_curvature,
        error,
        tolerance: TOL,
        focal_radius: patch.focal_radius(u, nu)?,
        pass: error <= TOL * mean_curvature.abs().max(1.0),
    })
}

/// Relative deviation of `beta` from linearity in the normal direction. In codimension 1
/// it compares `beta(-nu)` with `-beta(nu)`; otherwise `beta((nu_1 + nu_2)/sqrt 2)` with
/// `(beta(nu_1) + beta(nu_2))/sqrt 2`.
pub fn linearity_error(patch: &SurfacePatch, u: &[f64], ys: &[f64]) -> Result<f64> {
    let m = patch.codim();
    let beta = |nu: &[f64]| verify_first_order(patch, u, nu, ys).map(|r| r.beta);
    let mut e1 = vec![0.0; m];
    e1[0] = 1.0;
    let (lhs, rhs) = if m == 1 {
        (beta(&[-1.0])?, -beta(&e1)?)
    } else {
        let mut e2 = vec![0.0; m];
        e2[1] = 1.0;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut mix = vec![0.0; m];
        mix[0] = s;
        mix[1] = s;
        (beta(&mix)?, s * (beta(&e1)? + beta(&e2)?))
    };
    Ok((lhs - rhs).abs() / rhs.abs().max(1.0))
}

/// A real polynomial in variables `x0, x1, ...`, parsed from text such as
/// `0.5*x0^2 - 0.5*x1^2 + x0*x1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn num_vars(&self) -> usize {
        self.terms.iter().map(|(_, e)| e.len()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, exps)| c * exps.iter().enumerate().map(|(i, e)| x[i].powi(*e as i32)).product::<f64>())
            .sum()
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidArgument(format!("polynomial {s:?}: {msg}"));
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(bad("empty"));
        }
        // split at + or - that start a term (not after e/E or ^)
        let mut pieces = Vec::new();
        let mut start = 0;
        let bytes = text.as_bytes();
        for i in 1..bytes.len() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'^' | b'*') {
                pieces.push(&text[start..i]);
                start = i;
            }
        }
        pieces.push(&text[start..]);
        let mut terms = Vec::new();
        for piece in pieces {
            let (sign, body) = match piece.as_bytes()[0] {
                b'+' => (1.0, &piece[1..]),
                b'-' => (-1.0, &piece[1..]),
                _ => (1.0, piece),
            };
            let mut coef = sign;
            let mut exps: Vec<u32> = Vec::new();
            for factor in body.split('*') {
                if let Some(var) = factor.strip_prefix('x') {
                    let (idx, pow) = match var.split_once('^') {
                        Some((i, p)) => (i, p.parse::<u32>().map_err(|_| bad("bad exponent"))?),
                        None => (var, 1),
                    };
                    let idx: usize = idx.parse().map_err(|_| bad("bad variable index"))?;
                    if exps.len() <= idx {
                        exps.resize(idx + 1, 0);
                    }
                    exps[idx] += pow;
                } else {
                    coef *= factor.parse::<f64>().map_err(|_| bad("bad coefficient"))?;
                }
            }
            terms.push((coef, exps));
        }
        Ok(Self { terms })
    }
}

/// Named test surfaces with known curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SurfacePreset {
    /// Round n-sphere of radius `radius` in `R^{n+1}` (central projection of a cube face),
    /// with the inward normal.
    Sphere { n: usize, radius: f64 },
    /// `S^1_R x R` in `R^3`, inward normal.
    Cylinder { radius: f64 },
    /// Catenoid `(c cosh(v/c) cos u, c cosh(v/c) sin u, v)` in `R^3`, outward normal.
    Catenoid { scale: f64 },
    /// Coordinate n-plane in `R^{n+m}`.
    Plane { n: usize, m: usize },
    /// Graph `u -> (u, p_1(u), .., p_m(u))` over `R^n`.
    Graph { n: usize, components: Vec<Polynomial> },
}

impl SurfacePreset {
    pub fn build(&self) -> Result<SurfacePatch> {
        match self {
            Self::Sphere { n, radius } => {
                let (n, r) = (*n, *radius);
                if r <= 0.0 {
                    return Err(Error::InvalidArgument("radius must be positive".into()));
                }
                let map = move |u: &[f64]| {
                    let norm = (u.iter().map(|v| v * v).sum::<f64>() + 1.0).sqrt();
                    u.iter().map(|v| r * v / norm).chain(std::iter::once(r / norm)).collect()
                };
                let hint = move |u: &[f64]| {
                    let x: Vec<f64> = map(u);
                    vec![x.iter().map(|v| -v).collect()]
                };
                Ok(SurfacePatch::new("sphere", n + 1, vec![-1.0; n], vec![1.0; n], map)?.with_normal_hint(hint))
            }
            Self::Cylinder { radius } => {
                let r = *radius;
                if r <= 0.0 {
                    return Err(Error::InvalidArgument("radius must be positive".into()));
                }
                let map = move |u: &[f64]| vec![r * u[0].cos(), r * u[0].sin(), u[1]];
                let hint = |u: &[f64]| vec![vec![-u[0].cos(), -u[0].sin(), 0.0]];
                let tau = std::f64::consts::TAU;
                Ok(SurfacePatch::new("cylinder", 3, vec![-tau, -10.0], vec![tau, 10.0], map)?.with_normal_hint(hint))
            }
            Self::Catenoid { scale } => {
                let c = *scale;
                if c <= 0.0 {
                    return Err(Error::InvalidArgument("scale must be positive".into()));
                }
                let map = move |u: &[f64]| {
                    let rho = c * (u[1] / c).cosh();
                    vec![rho * u[0].cos(), rho * u[0].sin(), u[1]]
                };
                let hint = |u: &[f64]| vec![vec![u[0].cos(), u[0].sin(), 0.0]];
                let tau = std::f64::consts::TAU;
                Ok(SurfacePatch::new("catenoid", 3, vec![-tau, -2.0 * c], vec![tau, 2.0 * c], map)?.with_normal_hint(hint))
            }
            Self::Plane { n, m } => {
                let (n, m) = (*n, *m);
                if m == 0 {
                    return Err(Error::InvalidArgument("codimension must be positive".into()));
                }
                let map = move |u: &[f64]| u.iter().copied().chain(std::iter::repeat_n(0.0, m)).collect();
                SurfacePatch::new("plane", n + m, vec![-10.0; n], vec![10.0; n], map)
            }
            Self::Graph { n, components } => {
                let n = *n;
                if components.is_empty() {
                    return Err(Error::InvalidArgument("graph needs at least one component".into()));
                }
                if let Some(p) = components.iter().find(|p| p.num_vars() > n) {
                    return Err(Error::InvalidArgument(format!("component uses {} variables, graph has {n}", p.num_vars())));
                }
                let m = components.len();
                let polys = components.clone();
                let map = move |u: &[f64]| u.iter().copied().chain(polys.iter().map(|p| p.eval(u))).collect();
                let hint = move |_: &[f64]| {
                    (0..m)
                        .map(|a| {
                            let mut e = vec![0.0; n + m];
                            e[n + a] = 1.0;
                            e
                        })
                        .collect()
                };
                Ok(SurfacePatch::new("graph", n + m, vec![-10.0; n], vec![10.0; n], map)?.with_normal_hint(hint))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const YS: [f64; 5] = [0.04, 0.02, 0.01, 0.005, 0.0025];

    #[test]
    fn sphere_ratio_matches_closed_form() {
        for (n, r) in [(2usize, 1.0), (3, 2.0)] {
            let patch = SurfacePreset::Sphere { n, radius: r }.build().unwrap();
            let u = vec![0.1; n];
            for y in [0.05, 0.2] {
                let ratio = fermi_volume_ratio(&patch, &u, &[1.0], y).unwrap();
                let want = (1.0 - y / r).powi(2 * n as i32);
                assert!((ratio - want).abs() < 1e-9, "n = {n}: {ratio} vs {want}");
            }
            let h = patch.mean_curvature_trace(&u).unwrap()[0];
            assert!((h - n as f64 / r).abs() < 1e-8);
            let report = verify_first_order(&patch, &u, &[1.0], &YS).unwrap();
            assert!(report.pass && report.beta < 0.0, "{report:?}");
            assert!((report.beta + 2.0 * n as f64 / r).abs() < 1e-3 * 2.0 * n as f64 / r);
        }
    }

    #[test]
    fn cylinder_and_plane() {
        let cyl = SurfacePreset::Cylinder { radius: 2.0 }.build().unwrap();
        let ratio = fermi_volume_ratio(&cyl, &[0.3, 0.1], &[1.0], 0.1).unwrap();
        assert!((ratio - (1.0f64 - 0.05).powi(2)).abs() < 1e-9);
        assert!(verify_first_order(&cyl, &[0.3, 0.1], &[1.0], &YS).unwrap().pass);

        let plane = SurfacePreset::Plane { n: 2, m: 2 }.build().unwrap();
        assert_eq!(fermi_volume_ratio(&plane, &[0.3, 0.1], &[0.6, 0.8], 0.5).unwrap(), 1.0);
        let report = verify_first_order(&plane, &[0.3, 0.1], &[1.0, 0.0], &YS).unwrap();
        assert_eq!(report.beta, 0.0);
    }

    #[test]
    fn catenoid_is_minimal() {
        let cat = SurfacePreset::Catenoid { scale: 1.0 }.build().unwrap();
        for u in [[0.0, 0.0], [0.7, 0.5], [2.0, -1.0]] {
            let report = verify_first_order(&cat, &u, &[1.0], &YS).unwrap();
            assert!(report.beta.abs() <= 1e-3, "{report:?}");
            assert!(report.mean_curvature.abs() < 1e-8);
        }
        assert!(linearity_error(&cat, &[0.7, 0.5], &YS).unwrap() < 1e-2);
    }

    #[test]
    fn codimension_two_graph() {
        let components = vec!["x0^2 + 0.5*x1^2".parse().unwrap(), "x0*x1 - 0.25*x1^2".parse().unwrap()];
        let patch = SurfacePreset::Graph { n: 2, components }.build().unwrap();
        let u = [0.0, 0.0];
        // at a critical point H^a is the Laplacian of the component: 3 and -0.5
        let h = patch.mean_curvature_trace(&u).unwrap();
        assert!((h[0] - 3.0).abs() < 1e-7 && (h[1] + 0.5).abs() < 1e-7, "{h:?}");
        for nu in [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]] {
            assert!(verify_first_order(&patch, &u, &nu, &[0.02, 0.01, 0.005, 0.0025]).unwrap().pass);
        }
        assert!(linearity_error(&patch, &[0.2, -0.1], &[0.02, 0.01, 0.005, 0.0025]).unwrap() < 1e-2);
    }

    #[test]
    fn beyond_focal_radius_is_refused() {
        let patch = SurfacePreset::Sphere { n: 2, radius: 1.0 }.build().unwrap();
        let err = fermi_volume_ratio(&patch, &[0.0, 0.0], &[1.0], 1.5).unwrap_err();
        assert!(matches!(err, Error::BeyondFocalRadius { .. }));
    }

    #[test]
    fn polynomial_parsing() {
        let p: Polynomial = "0.5*x0^2 - 2*x1 + 3 - 1e-1*x0*x1".parse().unwrap();
        assert!((p.eval(&[2.0, 1.0]) - (2.0 - 2.0 + 3.0 - 0.2)).abs() < 1e-15);
        assert!("x0^".parse::<Polynomial>().is_err());
        assert!("".parse::<Polynomial>().is_err());
    }

    #[test]
    fn normal_frame_is_orthonormal_and_normal() {
        let patch = SurfacePreset::Catenoid { scale: 1.0 }.build().unwrap();
        let u = [0.4, 0.3];
        let nf = patch.normal_frame(&u).unwrap();
        let t = patch.tangents(&u);
        assert!((nf.transpose() * &t).amax() < 1e-10);
        assert!((nf.transpose() * &nf - DMatrix::identity(1, 1)).amax() < 1e-12);
    }
}
