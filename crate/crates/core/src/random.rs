//! Seeded sampling of states and unitaries.
//!
//! Unitaries come from Gram-Schmidt orthonormalization of complex Gaussian
//! matrices with the phase of each diagonal entry of `R` removed. This is
//! reproducible and well spread, but no claim of exact Haar measure is made.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::ComplexMatrix;
use crate::state::{DensityOperator, UnitaryOperator};

/// The crate-wide seeded generator.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent named stream derived from one seed.
pub fn rng_stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let data: Vec<Complex64> = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from(DMatrix::from_column_slice(rows, cols, &data))
}

pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> UnitaryOperator {
    let g = ginibre(dim, dim, rng).into_inner();
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    UnitaryOperator::new_unchecked(ComplexMatrix::from(q))
}

/// Random pure state from a normalized Gaussian vector.
pub fn random_pure_state(dim: usize, rng: &mut impl Rng) -> DensityOperator {
    let v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
    DensityOperator::pure(&v).expect("Gaussian vector is nonzero")
}

/// Random state `G G^dagger / Tr` with `G` a `dim × rank` Ginibre matrix.
pub fn random_density_of_rank(dim: usize, rank: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = ginibre(dim, rank.max(1), rng);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    let mut m = m.scale(1.0 / tr);
    // Remove rounding asymmetry so validation never trips on it.
    let h = &m + &m.adjoint();
    m = h.scale(0.5);
    DensityOperator::new_unchecked(m)
}

/// Full-rank Hilbert-Schmidt random state.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DensityOperator {
    random_density_of_rank(dim, dim, rng)
}

/// Mixed, pure or low-rank with equal odds; the default input sampler.
pub fn random_state(dim: usize, rng: &mut impl Rng) -> DensityOperator {
    match rng.random_range(0..3) {
        0 => random_pure_state(dim, rng),
        1 => random_density(dim, rng),
        _ => {
            let rank = rng.random_range(1..=dim);
            random_density_of_rank(dim, rank, rng)
        }
    }
}

/// Random point of the probability simplex (flat Dirichlet).
pub fn random_probabilities(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>();
            -(1.0 - u).ln()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}
