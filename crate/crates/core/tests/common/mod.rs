#![allow(dead_code)]

use std::sync::Arc;

use hybrid_rom::sparse::CsrMatrix;
use hybrid_rom::system::{DiscreteSystem, ZeroNonlinearity};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

/// Diagonally dominant dense `E`, so every factorization path is well posed.
pub fn random_e(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut e = random_matrix(rng, n, n);
    for i in 0..n {
        e[(i, i)] += n as f64 + 1.0;
    }
    e
}

/// Orthonormal `n × r` basis from the QR factor of a random matrix.
pub fn random_basis(rng: &mut ChaCha8Rng, n: usize, r: usize) -> DMatrix<f64> {
    random_matrix(rng, n, r).qr().q().columns(0, r).into_owned()
}

/// Linear system `E x' = A x + B u` with dense random data, together with the
/// dense matrices used as the oracle.
pub struct LinearCase {
    pub sys: DiscreteSystem,
    pub e: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DVector<f64>,
}

pub fn random_linear(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LinearCase {
    let e = random_e(rng, n);
    let a = random_matrix(rng, n, n);
    let b = random_matrix(rng, n, m);
    let c = random_vector(rng, n);
    let sys = DiscreteSystem::new(
        CsrMatrix::from_dense(&e, 0.0),
        CsrMatrix::from_dense(&a, 0.0),
        b.clone(),
        c.clone(),
        Arc::new(ZeroNonlinearity(n)),
        "0",
    )
    .unwrap();
    LinearCase { sys, e, a, b, c }
}
