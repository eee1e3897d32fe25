//! Seeded random generators for matrices used in property checks and sampling.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::quat::QuatMatrix;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for a (seed, index) pair, used to keep per-point work
/// reproducible regardless of scheduling.
pub fn stream(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn uniform_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

pub fn antisymmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let m = uniform_matrix(rng, n, n);
    (&m - m.transpose()) * 0.5
}

pub fn quat_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> QuatMatrix {
    let a = uniform_matrix(rng, rows, cols);
    let b = uniform_matrix(rng, rows, cols);
    let c = uniform_matrix(rng, rows, cols);
    let d = uniform_matrix(rng, rows, cols);
    QuatMatrix::new(a, b, c, d).expect("shapes agree")
}

/// Random element of 𝔰𝔭(n) as a quaternionic matrix.
pub fn anti_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> QuatMatrix {
    let q = quat_matrix(rng, n, n);
    q.try_add(&q.adjoint().scale(-1.0)).expect("square").scale(0.5)
}
