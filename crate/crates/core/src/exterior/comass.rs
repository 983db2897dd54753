//! Comass of a k-covector: the maximum of its pairing with unit simple k-vectors.
//!
//! [`comass`] runs projected gradient ascent on orthonormal k-frames from many
//! random starts. [`comass_oracle`] and [`comass_oracle_refined`] are independent
//! sampling-based lower bounds that only ever call [`AlternatingTensor::evaluate_columns`];
//! they exist to cross-check the optimizer.

use nalgebra::DMatrix;
use rand::Rng as _;
use rayon::prelude::*;

use super::tensor::AlternatingTensor;
use crate::error::{Error, Result};
use crate::numeric::{gaussian_matrix, orthonormalize_columns, random_orthonormal_frame, seeded_rng};

#[derive(Debug, Clone, PartialEq)]
pub struct ComassOptions {
    pub multistarts: usize,
    /// Convergence threshold on the Frobenius norm of a frame update.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for ComassOptions {
    fn default() -> Self {
        Self { multistarts: 64, tol: 1e-10, max_iter: 10_000, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct ComassResult {
    pub value: f64,
    /// Orthonormal frame attaining `value`.
    pub frame: DMatrix<f64>,
    /// Iterations summed over all starts.
    pub iterations: usize,
}

/// Per-start seed, so that starts can run in any order.
fn start_seed(seed: u64, start: usize) -> u64 {
    seed ^ (start as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn comass(u: &AlternatingTensor, opts: &ComassOptions) -> Result<ComassResult> {
    let (dim, k) = (u.dim(), u.degree());
    if k == 0 {
        return Ok(ComassResult {
            value: u.coeffs()[0].abs(),
            frame: DMatrix::zeros(dim, 0),
            iterations: 0,
        });
    }
    if u.is_zero() {
        let frame = DMatrix::from_fn(dim, k, |i, j| if i == j { 1.0 } else { 0.0 });
        return Ok(ComassResult { value: 0.0, frame, iterations: 0 });
    }
    let starts = opts.multistarts.max(1);
    let runs: Vec<Result<(f64, DMatrix<f64>, usize)>> = (0..starts)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded_rng(start_seed(opts.seed, s));
            let frame = random_orthonormal_frame(&mut rng, dim, k);
            ascend(u, frame, opts)
        })
        .collect();

    let mut best: Option<ComassResult> = None;
    let mut iterations = 0;
    for run in runs {
        let (value, frame, iters) = run?;
        iterations += iters;
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(ComassResult { value, frame, iterations: 0 });
        }
    }
    let mut best = best.expect("at least one start");
    best.iterations = iterations;
    Ok(best)
}

/// Riemannian gradient ascent with Armijo backtracking and a QR retraction.
fn ascend(
    u: &AlternatingTensor,
    mut frame: DMatrix<f64>,
    opts: &ComassOptions,
) -> Result<(f64, DMatrix<f64>, usize)> {
    let k = u.degree();
    let mut value = u.evaluate_columns(&frame)?;
    if value < 0.0 {
        frame.column_mut(0).neg_mut();
        value = -value;
    }
    let scale = u.norm();
    let max_step = 16.0 / scale;
    let mut step = 1.0 / scale;
    let mut update_norm = f64::INFINITY;

    for iter in 0..opts.max_iter {
        // With A = [grad_1 .. grad_k], A^T V = value * I, so the tangential
        // component of the Euclidean gradient is A - value * V.
        let mut grad = DMatrix::zeros(u.dim(), k);
        for j in 0..k {
            let g = u.partial_gradient(&frame, j)?;
            for (i, gi) in g.into_iter().enumerate() {
                grad[(i, j)] = gi - value * frame[(i, j)];
            }
        }
        let grad_sq = grad.norm_squared();
        if grad_sq.sqrt() < opts.tol {
            return Ok((value, frame, iter));
        }

        let mut accepted = None;
        for _ in 0..80 {
            let trial = orthonormalize_columns(&(&frame + step * &grad), 1e-12);
            if let Some(trial) = trial {
                let trial_value = u.evaluate_columns(&trial)?;
                if trial_value > value && trial_value >= value + 1e-4 * step * grad_sq {
                    accepted = Some((trial, trial_value));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((next, next_value)) = accepted else {
            // no admissible step remains above rounding level
            return Ok((value, frame, iter));
        };
        update_norm = (&next - &frame).norm();
        frame = next;
        value = next_value;
        step = (2.0 * step).min(max_step);
        if update_norm < opts.tol {
            return Ok((value, frame, iter + 1));
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, update_norm })
}

/// Largest |pairing| over `samples` orthonormal frames obtained by
/// orthonormalizing seeded Gaussian matrices. Never exceeds the true comass.
pub fn comass_oracle(u: &AlternatingTensor, samples: usize, seed: u64) -> f64 {
    top_samples(u, samples, seed, 1).first().map_or(0.0, |s| s.0)
}

/// [`comass_oracle`] followed by derivative-free (1+1) evolution-strategy
/// refinement of the best samples. Every reported value is attained by an
/// orthonormal frame, so the result is still a lower bound for the comass.
pub fn comass_oracle_refined(u: &AlternatingTensor, samples: usize, seed: u64) -> f64 {
    const REFINED: usize = 8;
    let k = u.degree();
    if k == 0 {
        return u.coeffs()[0].abs();
    }
    let seeds = top_samples(u, samples, seed, REFINED);
    seeds
        .into_iter()
        .enumerate()
        .map(|(i, (value, frame))| refine(u, frame, value, start_seed(seed.wrapping_add(1), i)))
        .fold(0.0, f64::max)
}

fn top_samples(u: &AlternatingTensor, samples: usize, seed: u64, keep: usize) -> Vec<(f64, DMatrix<f64>)> {
    let (dim, k) = (u.dim(), u.degree());
    if k == 0 {
        return vec![(u.coeffs()[0].abs(), DMatrix::zeros(dim, 0))];
    }
    let mut rng = seeded_rng(seed);
    let mut best: Vec<(f64, DMatrix<f64>)> = Vec::with_capacity(keep + 1);
    for _ in 0..samples.max(1) {
        let frame = random_orthonormal_frame(&mut rng, dim, k);
        let mut value = u.evaluate_columns(&frame).expect("degree matches");
        let mut frame = frame;
        if value < 0.0 {
            value = -value;
            frame.column_mut(0).neg_mut();
        }
        if best.len() < keep || value > best[best.len() - 1].0 {
            let pos = best.partition_point(|b| b.0 >= value);
            best.insert(pos, (value, frame));
            best.truncate(keep);
        }
    }
    best
}

fn refine(u: &AlternatingTensor, mut frame: DMatrix<f64>, mut value: f64, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    let (dim, k) = (u.dim(), u.degree());
    let mut sigma = 0.2;
    let mut evals = 0;
    while sigma > 1e-10 && evals < 200_000 {
        let proposal = &frame + sigma * gaussian_matrix(&mut rng, dim, k);
        evals += 1;
        let Some(proposal) = orthonormalize_columns(&proposal, 1e-12) else {
            continue;
        };
        let v = u.evaluate_columns(&proposal).expect("degree matches");
        if v > value {
            value = v;
            frame = proposal;
            sigma *= 1.5;
        } else {
            sigma *= 0.9;
            // occasional jitter keeps the step from locking into a bad scale
            if rng.random::<f64>() < 0.01 {
                sigma *= 2.0;
            }
        }
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, axes: &[usize]) -> AlternatingTensor {
        AlternatingTensor::basis(dim, axes).unwrap()
    }

    #[test]
    fn simple_unit_form_has_comass_one() {
        let c = comass(&e(4, &[0, 1]), &ComassOptions::default()).unwrap();
        assert!((c.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn one_form_comass_is_euclidean_norm() {
        let u = AlternatingTensor::one_form(&[1.0, 1.0]).unwrap();
        let c = comass(&u, &ComassOptions::default()).unwrap();
        assert!((c.value - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn sum_of_orthogonal_planes_has_comass_one() {
        let u = e(4, &[0, 1]).try_add(&e(4, &[2, 3])).unwrap();
        let c = comass(&u, &ComassOptions::default()).unwrap();
        assert!((c.value - 1.0).abs() < 1e-9, "{}", c.value);
        let oracle = comass_oracle(&u, 1_000_000, 11);
        assert!(oracle <= 1.0 + 1e-12 && oracle >= 1.0 - 1e-3, "{oracle}");
    }

    #[test]
    fn scalar_and_zero_cases() {
        let s = AlternatingTensor::scalar(3, -2.5).unwrap();
        assert_eq!(comass(&s, &ComassOptions::default()).unwrap().value, 2.5);
        let z = AlternatingTensor::zeros(4, 2).unwrap();
        assert_eq!(comass(&z, &ComassOptions::default()).unwrap().value, 0.0);
        assert_eq!(comass_oracle(&z, 100, 1), 0.0);
    }

    #[test]
    fn oracle_on_simple_form_in_r4() {
        // Gr(2,4) is 4-dimensional, so 1e6 plain samples get within about 1e-3 of
        // the maximum; refinement closes the remaining gap.
        let u = e(4, &[0, 1]);
        for seed in 0..4 {
            let plain = comass_oracle(&u, 1_000_000, seed);
            assert!((1.0 - 3e-3..=1.0 + 1e-15).contains(&plain), "{plain}");
        }
        let refined = comass_oracle_refined(&u, 100_000, 0);
        assert!((1.0 - 1e-9..=1.0 + 1e-15).contains(&refined), "{refined}");
    }

    #[test]
    fn oracle_is_deterministic_per_seed() {
        let u = AlternatingTensor::from_coeffs(4, 2, vec![0.3, -1.0, 0.2, 0.7, 0.1, -0.4]).unwrap();
        assert_eq!(comass_oracle(&u, 500, 9), comass_oracle(&u, 500, 9));
        assert_eq!(comass_oracle_refined(&u, 500, 9), comass_oracle_refined(&u, 500, 9));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let u = AlternatingTensor::from_coeffs(4, 2, vec![0.3, -1.0, 0.2, 0.7, 0.1, -0.4]).unwrap();
        let opts = ComassOptions { max_iter: 1, tol: 1e-300, ..Default::default() };
        assert!(matches!(comass(&u, &opts), Err(Error::NonConvergence { .. })));
    }
}
