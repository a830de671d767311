#![allow(dead_code)]

use nonlocal_core::linalg::{ComplexMatrix, C64};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

pub fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

pub fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let v = random_matrix(rng, dim, 1);
    let n = v.frobenius_norm();
    v.scale_real(1.0 / n)
}

/// Haar-ish unitary from the QR factor of a Ginibre matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, dim).to_nalgebra();
    ComplexMatrix::from_nalgebra(&g.qr().q())
}

/// `⟨ψ|A⊗B|ψ⟩` by forming `A⊗B` entry by entry.
pub fn naive_expectation(a: &ComplexMatrix, b: &ComplexMatrix, psi: &ComplexMatrix) -> C64 {
    let (da, db) = (a.rows(), b.rows());
    let n = da * db;
    let mut total = C64::new(0.0, 0.0);
    for r in 0..n {
        for c in 0..n {
            let k = a[(r / db, c / db)] * b[(r % db, c % db)];
            total += psi[(r, 0)].conj() * k * psi[(c, 0)];
        }
    }
    total
}
