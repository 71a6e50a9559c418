//! Validated density operators and unitaries, plus von Neumann and relative
//! entropies.
//!
//! All entropies are measured in bits (logarithm base 2).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eigh, tensor, ComplexMatrix, Eigh};

/// Default numerical tolerance for validation and structural predicates.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Positive, unit-trace, Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates `m` against the density-operator invariants.
    pub fn new(m: ComplexMatrix, tolerance: f64) -> Result<Self> {
        validate_density(m, tolerance)
    }

    /// Skips validation; for internal results that are density operators
    /// by construction (partial traces and channel outputs of valid inputs).
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        DensityOperator { matrix }
    }

    /// Complete mixture `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// `|k><k|` in the computational basis.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        DensityOperator { matrix: m }
    }

    /// `|v><v|` for a normalized copy of `v`.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if v.is_empty() || norm == 0.0 {
            return Err(Error::InvalidArgument("pure state from a zero vector".into()));
        }
        let normed: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
        Ok(DensityOperator {
            matrix: ComplexMatrix::projector(&normed),
        })
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[f64], tolerance: f64) -> Result<Self> {
        validate_density(ComplexMatrix::from_diagonal(probs), tolerance)
    }

    /// Qubit state `(I + r·σ)/2` for a Bloch vector with `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!("Bloch vector has norm {norm} > 1")));
        }
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new((1.0 + r[2]) / 2.0, 0.0),
                Complex64::new(r[0] / 2.0, -r[1] / 2.0),
                Complex64::new(r[0] / 2.0, r[1] / 2.0),
                Complex64::new((1.0 - r[2]) / 2.0, 0.0),
            ],
        )?;
        Ok(DensityOperator { matrix: m })
    }

    /// Expectations of `(σx, σy, σz)`; only meaningful for qubits.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let m = &self.matrix;
        [
            2.0 * m[(0, 1)].re,
            -2.0 * m[(0, 1)].im,
            (m[(0, 0)] - m[(1, 1)]).re,
        ]
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: tensor(&self.matrix, &other.matrix),
        }
    }

    pub fn eigh(&self) -> Eigh {
        // Hermitian by invariant; a looser check guards against drift only.
        eigh(&self.matrix, 1e-6).expect("density operator is Hermitian")
    }

    /// Spectrum with eigenvalues in `[-tol, 0)` clamped to zero.
    pub fn spectrum(&self) -> Vec<f64> {
        self.eigh().values.into_iter().map(|x| x.max(0.0)).collect()
    }

    /// Trace distance `||a - b||_1 / 2`.
    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        check_same_dim(self.dim(), other.dim(), "trace_distance")?;
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * crate::matrix::trace_norm_hermitian(&diff, 1e-6)?)
    }
}

impl TryFrom<ComplexMatrix> for DensityOperator {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        validate_density(m, DEFAULT_TOLERANCE)
    }
}

impl From<DensityOperator> for ComplexMatrix {
    fn from(d: DensityOperator) -> Self {
        d.matrix
    }
}

/// Square matrix with `U^dagger U = I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct UnitaryOperator {
    matrix: ComplexMatrix,
}

impl UnitaryOperator {
    pub fn new(m: ComplexMatrix, tolerance: f64) -> Result<Self> {
        validate_unitary(m, tolerance)
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        UnitaryOperator { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryOperator {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> UnitaryOperator {
        UnitaryOperator {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `U ρ U^dagger`.
    pub fn conjugate(&self, rho: &DensityOperator) -> DensityOperator {
        DensityOperator::new_unchecked(self.matrix.conjugate(rho.matrix()))
    }

    pub fn tensor(&self, other: &UnitaryOperator) -> UnitaryOperator {
        UnitaryOperator {
            matrix: tensor(&self.matrix, &other.matrix),
        }
    }
}

impl TryFrom<ComplexMatrix> for UnitaryOperator {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        validate_unitary(m, DEFAULT_TOLERANCE)
    }
}

impl From<UnitaryOperator> for ComplexMatrix {
    fn from(u: UnitaryOperator) -> Self {
        u.matrix
    }
}

/// Checks Hermiticity, unit trace and positivity, in that order.
pub fn validate_density(m: ComplexMatrix, tolerance: f64) -> Result<DensityOperator> {
    m.square_dim()?;
    let residual = m.hermiticity_residual();
    if residual > tolerance {
        return Err(Error::NotHermitian { residual, tolerance });
    }
    let trace = m.trace().re;
    let residual = (trace - 1.0).abs();
    if residual > tolerance {
        return Err(Error::TraceNotOne {
            trace,
            residual,
            tolerance,
        });
    }
    let dec = eigh(&m, tolerance)?;
    let min = dec.values.last().copied().unwrap_or(0.0);
    if min < -tolerance {
        return Err(Error::NegativeEigenvalue {
            eigenvalue: min,
            tolerance,
        });
    }
    Ok(DensityOperator { matrix: m })
}

pub fn validate_unitary(m: ComplexMatrix, tolerance: f64) -> Result<UnitaryOperator> {
    let dim = m.square_dim()?;
    let gram = &m.adjoint() * &m;
    let residual = gram.max_abs_diff(&ComplexMatrix::identity(dim));
    if residual > tolerance {
        return Err(Error::NotUnitary { residual, tolerance });
    }
    Ok(UnitaryOperator { matrix: m })
}

pub(crate) fn check_same_dim(expected: usize, found: usize, context: &'static str) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

/// `-Σ p log2 p` with `0 log 0 = 0`.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy `S(ρ) = -Tr ρ log2 ρ` in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    shannon_entropy(&rho.spectrum())
}

/// Entropy of a joint matrix that is a density operator by construction.
pub(crate) fn entropy_of_matrix(m: &ComplexMatrix) -> f64 {
    let dec = eigh(m, 1e-6).expect("state is Hermitian");
    let clamped: Vec<f64> = dec.values.into_iter().map(|x| x.max(0.0)).collect();
    shannon_entropy(&clamped)
}

/// Quantum relative entropy `S(ρ||ω) = Tr ρ (log2 ρ - log2 ω)` in bits.
///
/// Returns `f64::INFINITY` when the support of `ρ` is not contained in the
/// support of `ω`. Eigenvalues at or below `tolerance` count as outside the
/// support.
pub fn relative_entropy(rho: &DensityOperator, omega: &DensityOperator, tolerance: f64) -> Result<f64> {
    check_same_dim(rho.dim(), omega.dim(), "relative_entropy")?;
    let r = rho.eigh();
    let w = omega.eigh();
    let n = rho.dim();
    // Overlaps |<a_i|b_j>|^2 between the two eigenbases.
    let overlaps = &r.vectors.adjoint() * &w.vectors;
    let neg_entropy: f64 = -shannon_entropy(&rho.spectrum());
    let mut cross = 0.0;
    for j in 0..n {
        let q = w.values[j];
        let weight: f64 = (0..n)
            .map(|i| r.values[i].max(0.0) * overlaps[(i, j)].norm_sqr())
            .sum();
        if q <= tolerance {
            if weight > tolerance {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * q.log2();
    }
    Ok((neg_entropy - cross).max(0.0))
}
