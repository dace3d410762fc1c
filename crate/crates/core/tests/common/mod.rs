//! Shared generators and reference computations for the integration tests.
#![allow(dead_code)]

pub mod oracles;

use d2d_secrecy::spectral::SubcarrierProblem;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Entries uniform in [0, 1), each zeroed with probability `sparsity`.
pub fn random_nonnegative(rng: &mut impl Rng, n: usize, sparsity: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| if rng.random_bool(sparsity) { 0.0 } else { rng.random_range(0.0..1.0) })
}

/// Largest eigenvalue modulus from nalgebra's Schur decomposition.
pub fn dense_spectral_radius(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

/// Gains in the range a small cell produces: strong direct links, weaker
/// cross links and eavesdropper links, noise near a 200 kHz floor.
pub fn random_problem(rng: &mut impl Rng, j: usize) -> SubcarrierProblem {
    let g = DMatrix::from_fn(j, j, |r, c| if r == c { log_uniform(rng, -10.0, -7.0) } else { log_uniform(rng, -13.0, -10.0) });
    let g_e = DVector::from_fn(j, |_, _| log_uniform(rng, -13.0, -10.0));
    let p_max = DVector::from_fn(j, |_, _| log_uniform(rng, -2.0, 0.5));
    SubcarrierProblem::synthetic(g, g_e, p_max, DVector::zeros(j), 8e-16)
}
