//! Dense complex matrices and the linear-algebra primitives the rest of the
//! crate is built on: Kronecker products, partial traces over a
//! [`ProductSpace`], and Hermitian eigendecomposition.
//!
//! Composite spaces are always ordered memory first, system second.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix, stored column-major internally and exchanged
/// row-major in JSON.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_fn<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        ComplexMatrix(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[Complex64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("{rows}x{cols} has an empty dimension")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(ComplexMatrix(DMatrix::from_row_slice(rows, cols, data)))
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { C_ZERO })
    }

    /// Outer product `|v><w|`.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    /// Projector `|v><v|`.
    pub fn projector(v: &[Complex64]) -> Self {
        Self::outer(v, v)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub(crate) fn square_dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix(self.0.transpose())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexMatrix(self.0.map(|z| z * s))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        ComplexMatrix(self.0.map(|z| z * s))
    }

    /// `self * m * self^dagger`.
    pub fn conjugate(&self, m: &ComplexMatrix) -> Self {
        ComplexMatrix(&self.0 * &m.0 * self.0.adjoint())
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        debug_assert_eq!(self.0.shape(), other.0.shape());
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    /// Largest entrywise modulus of `self - self^dagger`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.rows().min(self.cols());
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                r = r.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        r
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.0.column(j).iter().copied().collect()
    }

    /// Diagonal entries.
    pub fn diagonal(&self) -> Vec<Complex64> {
        self.0.diagonal().iter().copied().collect()
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.0[idx]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl From<DMatrix<Complex64>> for ComplexMatrix {
    fn from(m: DMatrix<Complex64>) -> Self {
        ComplexMatrix(m)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "\n  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
        }
        write!(f, "\n]")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows(),
            cols: self.cols(),
            data: self.row_major().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let data: Vec<Complex64> = raw.data.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        ComplexMatrix::from_row_slice(raw.rows, raw.cols, &data).map_err(serde::de::Error::custom)
    }
}

/// Kronecker product `a ⊗ b`; entry `((i·rb + k), (j·cb + l))` is `a[i,j]·b[k,l]`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Kronecker product of a nonempty list of factors, left to right.
pub fn tensor_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    let mut it = factors.iter();
    let first = it.next().expect("tensor_all needs at least one factor").clone();
    it.fold(first, |acc, f| tensor(&acc, f))
}

/// Ordered tensor-product decomposition of a Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductSpace {
    factor_dims: Vec<usize>,
}

impl ProductSpace {
    /// Index of the memory factor in a bipartite memory ⊗ system space.
    pub const MEMORY: usize = 0;
    /// Index of the system factor in a bipartite memory ⊗ system space.
    pub const SYSTEM: usize = 1;

    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::Shape(format!("invalid factor dimensions {factor_dims:?}")));
        }
        Ok(ProductSpace { factor_dims })
    }

    /// Bipartite memory ⊗ system space.
    pub fn memory_system(dim_m: usize, dim_s: usize) -> Result<Self> {
        Self::new(vec![dim_m, dim_s])
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }
}

/// Reduces `m` onto factor `keep`, tracing out every other factor.
pub fn partial_trace(m: &ComplexMatrix, space: &ProductSpace, keep: usize) -> Result<ComplexMatrix> {
    let dim = m.square_dim()?;
    let total = space.total_dim();
    if dim != total {
        return Err(Error::DimensionMismatch {
            context: "partial_trace",
            expected: total,
            found: dim,
        });
    }
    let dims = space.factor_dims();
    if keep >= dims.len() {
        return Err(Error::InvalidArgument(format!(
            "factor index {keep} out of range for {} factors",
            dims.len()
        )));
    }
    let dk = dims[keep];
    // Strides split the flat index into (outer, kept, inner) digits.
    let inner: usize = dims[keep + 1..].iter().product();
    let outer: usize = dims[..keep].iter().product();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = C_ZERO;
            for o in 0..outer {
                for i in 0..inner {
                    let r = (o * dk + a) * inner + i;
                    let c = (o * dk + b) * inner + i;
                    acc += m.0[(r, c)];
                }
            }
            out.0[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigh {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// `V Λ V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.vectors.conjugate(&ComplexMatrix::from_diagonal(&self.values))
    }

    /// Applies a real function to the spectrum: `V f(Λ) V^dagger`.
    pub fn map_spectrum<F: Fn(f64) -> f64>(&self, f: F) -> ComplexMatrix {
        let mapped: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        self.vectors.conjugate(&ComplexMatrix::from_diagonal(&mapped))
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
pub fn eigh(m: &ComplexMatrix, tolerance: f64) -> Result<Eigh> {
    let n = m.square_dim()?;
    let scale = m.max_abs().max(1.0);
    let residual = m.hermiticity_residual();
    if residual > tolerance * scale {
        return Err(Error::NotHermitian { residual, tolerance });
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    let herm = (&m.0 + m.0.adjoint()) * Complex64::new(0.5, 0.0);
    let dec = nalgebra::linalg::SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[b].total_cmp(&dec.eigenvalues[a]));
    let values = order.iter().map(|&k| dec.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| dec.eigenvectors[(i, order[j])]);
    Ok(Eigh {
        values,
        vectors: ComplexMatrix(vectors),
    })
}

/// Schatten 1-norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(m: &ComplexMatrix, tolerance: f64) -> Result<f64> {
    Ok(eigh(m, tolerance)?.values.iter().map(|x| x.abs()).sum())
}
