//! Seeded random generation of vectors, matrices and singular test systems.
//!
//! Every generator takes an explicit `ChaCha20Rng`, so a seed fixes the output
//! bit-for-bit across platforms.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::C64;

pub type CMat = DMatrix<C64>;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_normal(rng: &mut ChaCha20Rng) -> C64 {
    C64::new(normal(rng), normal(rng))
}

pub fn complex_normal_vec(rng: &mut ChaCha20Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

pub fn real_normal_matrix(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // Fill column by column so the stream order is explicit.
    let data: Vec<f64> = (0..rows * cols).map(|_| normal(rng)).collect();
    DMatrix::from_column_slice(rows, cols, &data)
}

pub fn complex_normal_matrix(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> CMat {
    let data: Vec<C64> = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    DMatrix::from_column_slice(rows, cols, &data)
}

/// `d × k` matrix with orthonormal columns (Q factor of a Gaussian matrix).
pub fn orthonormal(rng: &mut ChaCha20Rng, d: usize, k: usize, complex: bool) -> CMat {
    let g = if complex {
        complex_normal_matrix(rng, d, k)
    } else {
        real_normal_matrix(rng, d, k).map(|v| C64::new(v, 0.0))
    };
    crate::dense::thin_q(&g)
}

/// Nonzero magnitudes log-uniform in `[lo, hi]`.
pub fn log_uniform(rng: &mut ChaCha20Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|_| (a + (b - a) * rng.gen::<f64>()).exp()).collect()
}

/// Absolute standard normals, redrawn until bounded away from zero.
pub fn abs_normal_weights(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| loop {
            let v = normal(rng).abs();
            if v > 1e-8 {
                break v;
            }
        })
        .collect()
}

/// `U diag(lambda) U^H` with `U` having orthonormal columns.
pub fn from_spectrum(u: &CMat, lambda: &[f64]) -> CMat {
    let mut scaled = u.clone();
    for (j, l) in lambda.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*l);
    }
    &scaled * u.adjoint()
}

/// Random Hermitian matrix of rank `r`: eigenvalue magnitudes in `[0.1, 10]`, random signs.
pub fn hermitian_with_rank(rng: &mut ChaCha20Rng, d: usize, r: usize) -> CMat {
    hermitian_with_magnitudes(rng, d, r, 0.1, 10.0)
}

/// Random Hermitian matrix of rank `r` with eigenvalue magnitudes log-uniform in `[lo, hi]`.
pub fn hermitian_with_magnitudes(rng: &mut ChaCha20Rng, d: usize, r: usize, lo: f64, hi: f64) -> CMat {
    let u = orthonormal(rng, d, r, true);
    let mut lambda = log_uniform(rng, r, lo, hi);
    for l in lambda.iter_mut() {
        if rng.gen::<bool>() {
            *l = -*l;
        }
    }
    from_spectrum(&u, &lambda)
}

/// Random complex-symmetric matrix `U Σ U^T` of rank `r`.
pub fn complex_symmetric_with_rank(rng: &mut ChaCha20Rng, d: usize, r: usize) -> CMat {
    let u = orthonormal(rng, d, r, true);
    let sigma = log_uniform(rng, r, 0.1, 10.0);
    let mut scaled = u.clone();
    for (j, s) in sigma.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*s);
    }
    &scaled * u.transpose()
}

/// Random skew-Hermitian matrix of rank `r` (i times a Hermitian one).
pub fn skew_hermitian_with_rank(rng: &mut ChaCha20Rng, d: usize, r: usize) -> CMat {
    hermitian_with_rank(rng, d, r) * C64::new(0.0, 1.0)
}

/// Random positive definite `G G^H`.
pub fn random_psd(rng: &mut ChaCha20Rng, d: usize) -> CMat {
    let g = complex_normal_matrix(rng, d, d);
    &g * g.adjoint()
}
