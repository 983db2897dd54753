use super::coords::WedgeCoordinates;
use crate::cutoff::{CutoffParams, CutoffProfile};
use crate::error::{Error, Result};
use crate::exterior::basis::{self, binomial};
use crate::exterior::{compound_matrix, AlternatingTensor, FormField};

/// `psi_bar = (1/n) sum_j (-1)^j x_j dx_0 ^ .. ^ dx_j(omitted) ^ .. ^ dx_{n-1}` on the
/// x-block, as a degree `n - 1` tensor on the ambient space.
pub fn psi_bar(coords: &WedgeCoordinates, p: &[f64]) -> Result<AlternatingTensor> {
    let dim = coords.ambient_dim();
    if p.len() != dim {
        return Err(Error::DimensionMismatch { left: dim, right: p.len() });
    }
    let n = coords.n();
    let mut u = vec![0.0; dim];
    coords.adapted(p, &mut u);
    let dx: Vec<AlternatingTensor> = (0..n)
        .map(|i| {
            let col: Vec<f64> = coords.frame().column(i).iter().copied().collect();
            AlternatingTensor::one_form(&col)
        })
        .collect::<Result<_>>()?;
    let mut out = AlternatingTensor::zeros(dim, n - 1)?;
    for j in 0..n {
        let mut term = AlternatingTensor::scalar(dim, 1.0)?;
        for (i, d) in dx.iter().enumerate() {
            if i != j {
                term = term.wedge(d)?;
            }
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        out.add_scaled(sign * u[j] / n as f64, &term)?;
    }
    Ok(out)
}

/// The flat vanishing calibration
///
/// ```text
/// phi = ((gamma - (t/n) gamma') dr + (gamma'/n) dz) ^ (n/r) psi_bar ^ dl_1 ^ .. ^ dl_k
/// ```
///
/// for `t < tan theta`, and zero for `t >= tan theta`.
#[derive(Debug, Clone)]
pub struct VanishingCalibration {
    coords: WedgeCoordinates,
    profile: CutoffProfile,
    // per x-index j: (adapted axis, adapted target rank, sign) for the wedge of dx_axis
    // with dx_0 ^ .. (omit j) .. ^ dx_{n-1} ^ dl
    table: Vec<Vec<(usize, usize, f64)>>,
    compound: Option<Vec<f64>>,
    len: usize,
}

/// Checks admissibility and shapes, then assembles the field.
pub fn build_vanishing_calibration(params: &CutoffParams, coords: &WedgeCoordinates) -> Result<VanishingCalibration> {
    if !params.is_admissible() {
        return Err(Error::Inadmissible(format!(
            "a = {} outside (4n/(n+2), n(n-2)) for n = {}",
            params.a, params.n
        )));
    }
    VanishingCalibration::unchecked(params, coords)
}

impl VanishingCalibration {
    /// Builds the field for any `a > 0`, admissible or not. Used for negative controls.
    pub fn unchecked(params: &CutoffParams, coords: &WedgeCoordinates) -> Result<Self> {
        let (n, m, k) = (coords.n(), coords.m(), coords.k());
        if params.n != n {
            return Err(Error::InvalidArgument(format!(
                "cutoff dimension {} does not match the x-block dimension {n}",
                params.n
            )));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("the y-block must be nonempty".into()));
        }
        let dim = n + m + k;
        let degree = n + k;
        let l_mask: u32 = (n + m..dim).fold(0, |acc, a| acc | (1 << a));
        let x_mask: u32 = (1u32 << n) - 1;
        let table = (0..n)
            .map(|j| {
                let base = (x_mask & !(1 << j)) | l_mask;
                std::iter::once(j)
                    .chain(n..n + m)
                    .map(|axis| {
                        let sign = basis::merge_sign(1 << axis, base);
                        (axis, basis::rank(dim, base | (1 << axis)), sign)
                    })
                    .collect()
            })
            .collect();
        let compound = (!coords.is_standard()).then(|| compound_matrix(coords.frame(), degree));
        Ok(Self {
            coords: coords.clone(),
            profile: CutoffProfile::new(*params),
            table,
            compound,
            len: binomial(dim, degree),
        })
    }

    pub fn coords(&self) -> &WedgeCoordinates {
        &self.coords
    }

    pub fn profile(&self) -> &CutoffProfile {
        &self.profile
    }

    pub fn params(&self) -> &CutoffParams {
        &self.profile.params
    }

    /// `gamma - (t/n) gamma'` (zero outside the wedge).
    pub fn c_coef(&self, t: f64) -> f64 {
        self.profile.c_coef(t)
    }

    /// `gamma'/n` (zero outside the wedge).
    pub fn s_coef(&self, t: f64) -> f64 {
        self.profile.s_coef(t)
    }

    /// `sqrt(c^2 + s^2)`: the comass of the simple form `phi(p)` for `t < tan theta`.
    pub fn closed_form_comass(&self, t: f64) -> f64 {
        if t >= self.params().tan_theta {
            return 0.0;
        }
        self.c_coef(t).hypot(self.s_coef(t))
    }

    /// Upper bound `sqrt(1 - delta t^2)` on the comass inside the wedge.
    pub fn comass_envelope(&self, t: f64) -> f64 {
        (1.0 - self.params().delta * t * t).max(0.0).sqrt()
    }

    /// Distance from `p` to the cone `z = r tan theta` (the map `p -> (r, z)` is 1-Lipschitz).
    pub fn interface_distance(&self, p: &[f64]) -> f64 {
        let (r, z) = self.coords.rz(p);
        let tan = self.params().tan_theta;
        (z - tan * r).abs() / (1.0 + tan * tan).sqrt()
    }

    fn eval_adapted(&self, u: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let (n, m) = (self.coords.n(), self.coords.m());
        let (r, z) = self.coords.rz_adapted(u);
        if r == 0.0 {
            return;
        }
        let t = z / r;
        if t >= self.params().tan_theta {
            return;
        }
        let c_coef = self.c_coef(t);
        // s dz = (gamma'/n) (y . dy) / z = -(2c / (n r)) y . dy
        let y_scale = -2.0 * self.params().c / (n as f64 * r);
        let mut alpha = [0.0f64; 16];
        for i in 0..n {
            alpha[i] = c_coef * u[i] / r;
        }
        for b in n..n + m {
            alpha[b] = y_scale * u[b];
        }
        for (j, entries) in self.table.iter().enumerate() {
            let w = if j % 2 == 0 { u[j] / r } else { -u[j] / r };
            for &(axis, rank, sign) in entries {
                out[rank] += sign * alpha[axis] * w;
            }
        }
    }
}

impl FormField for VanishingCalibration {
    fn ambient_dim(&self) -> usize {
        self.coords.ambient_dim()
    }

    fn degree(&self) -> usize {
        self.coords.n() + self.coords.k()
    }

    fn eval_into(&self, p: &[f64], out: &mut [f64]) {
        let mut u = [0.0f64; 16];
        let u = &mut u[..self.coords.ambient_dim()];
        self.coords.adapted(p, u);
        match &self.compound {
            None => self.eval_adapted(u, out),
            Some(matrix) => {
                let mut adapted = vec![0.0; self.len];
                self.eval_adapted(u, &mut adapted);
                for (a, o) in out.iter_mut().enumerate() {
                    let row = &matrix[a * self.len..(a + 1) * self.len];
                    *o = row.iter().zip(&adapted).map(|(x, y)| x * y).sum();
                }
            }
        }
    }

    /// Singular locus: the l-block `{r = 0, z = 0}` and the interface cone `z = r tan theta`.
    fn near_singular(&self, p: &[f64], margin: f64) -> bool {
        let (r, z) = self.coords.rz(p);
        r.hypot(z) <= margin || self.interface_distance(p) <= margin
    }
}
