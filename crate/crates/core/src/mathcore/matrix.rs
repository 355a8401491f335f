//! Dense complex Hermitian matrices.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest tolerated |A - A^dagger| entry, relative to max(1, |A|_max).
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Hermitian matrix. Carries states, effects and the non-positive
/// iterates produced by affine impositions.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
}

/// Eigenvalues in descending order with eigenvectors as matching columns.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianMatrix {
    /// Validates squareness and Hermiticity.
    pub fn new(data: CMatrix) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::InvalidInput(format!(
                "matrix is {}x{}, expected square",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.nrows() == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        let scale = data.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let n = data.nrows();
        for i in 0..n {
            for j in i..n {
                let dev = (data[(i, j)] - data[(j, i)].conj()).norm();
                if dev > HERMITICITY_TOL * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not Hermitian: entry ({i},{j}) deviates by {dev:e}"
                    )));
                }
            }
        }
        Ok(Self::hermitize(data))
    }

    /// Returns (A + A^dagger)/2 without checking.
    pub fn hermitize(data: CMatrix) -> Self {
        let adj = data.adjoint();
        Self {
            data: (data + adj) * Complex64::new(0.5, 0.0),
        }
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidInput("entry count does not match dimension".into()));
        }
        Self::new(DMatrix::from_row_iterator(
            dim,
            dim,
            entries.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: CMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut data = CMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            data[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { data }
    }

    /// |v><v|
    pub fn projector(v: &CVector) -> Self {
        Self::hermitize(v * v.adjoint())
    }

    /// U diag(values) U^dagger
    pub fn from_spectrum(vectors: &CMatrix, values: &[f64]) -> Self {
        let mut scaled = vectors.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        Self::hermitize(&scaled * vectors.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re).sum()
    }

    /// Tr(A B), real for Hermitian arguments.
    pub fn hs_inner(&self, other: &Self) -> f64 {
        // Tr(A B) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij)
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            data: &self.data * Complex64::new(factor, 0.0),
        }
    }

    /// self + factor * other, in place.
    pub fn axpy(&mut self, factor: f64, other: &Self) {
        let f = Complex64::new(factor, 0.0);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += f * b;
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            data: self.data.kronecker(&other.data),
        }
    }

    /// <v|A|v>
    pub fn expectation(&self, v: &CVector) -> f64 {
        (v.adjoint() * &self.data * v)[(0, 0)].re
    }

    /// U A U^dagger
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::hermitize(u * &self.data * u.adjoint())
    }

    pub fn eigh(&self) -> Eigh {
        let eig = self.data.clone().symmetric_eigen();
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (j, &i) in order.iter().enumerate() {
            vectors.set_column(j, &eig.eigenvectors.column(i));
        }
        Eigh { values, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Matrix square root of the positive part; negative eigenvalues are
    /// clamped to zero.
    pub fn sqrt_psd(&self) -> Self {
        let e = self.eigh();
        let roots: Vec<f64> = e.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
        Self::from_spectrum(&e.vectors, &roots)
    }
}

/// Validating eigendecomposition of a raw matrix.
pub fn eigh(m: &CMatrix) -> Result<Eigh> {
    Ok(HermitianMatrix::new(m.clone())?.eigh())
}

pub fn kron(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    a.kron(b)
}

/// Hilbert-Schmidt distance |A - B|_2.
pub fn hs_distance(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.data
        .iter()
        .zip(b.data.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix {
            data: &self.data - &rhs.data,
        }
    }
}

impl Add for HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        &self + &rhs
    }
}

impl Sub for HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        &self - &rhs
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}
