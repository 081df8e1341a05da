//! Dense complex square matrices and Haar-distributed `U(N)` sampling.

use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Unitarity tolerance for matrices up to `N = 64`.
pub const UNITARITY_TOL: f64 = 1e-10;

/// An `N × N` complex matrix; link variables and group elements.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSquareMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexSquareMatrix {
    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            inner: DMatrix::identity(dim, dim),
        })
    }

    /// Builds a matrix from `f(row, col)`.
    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            inner: DMatrix::from_fn(dim, dim, f),
        })
    }

    /// Row-major interleaved `re, im` pairs, `2 N²` values.
    pub fn from_interleaved(dim: usize, values: &[f64]) -> Result<Self> {
        if values.len() != 2 * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: 2 * dim * dim,
                got: values.len(),
            });
        }
        Self::from_fn(dim, |r, c| {
            let k = 2 * (r * dim + c);
            Complex64::new(values[k], values[k + 1])
        })
    }

    pub fn to_interleaved(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(2 * n * n);
        for r in 0..n {
            for c in 0..n {
                let z = self.inner[(r, c)];
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }

    /// A `1 × 1` matrix `[z]`.
    pub fn scalar(z: Complex64) -> Self {
        Self {
            inner: DMatrix::from_element(1, 1, z),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    /// `Tr(self† · other)` without forming the product.
    pub fn trace_adjoint_mul(&self, other: &Self) -> Complex64 {
        self.inner.dotc(&other.inner)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            inner: &self.inner * z,
        }
    }

    /// `max |(U†U − I)_{ij}|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        let gram = self.inner.adjoint() * &self.inner;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((gram[(r, c)] - target).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_residual() <= UNITARITY_TOL
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for &ComplexSquareMatrix {
    type Output = ComplexSquareMatrix;

    fn mul(self, rhs: &ComplexSquareMatrix) -> ComplexSquareMatrix {
        ComplexSquareMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Mul for ComplexSquareMatrix {
    type Output = ComplexSquareMatrix;

    fn mul(self, rhs: ComplexSquareMatrix) -> ComplexSquareMatrix {
        ComplexSquareMatrix {
            inner: self.inner * rhs.inner,
        }
    }
}

/// Draws `U` from the Haar measure on `U(N)`.
///
/// A Ginibre matrix (i.i.d. standard complex normals) is QR-factorized and
/// the columns of `Q` are rotated by the phases of `diag(R)`, which makes the
/// factorization unique and the result exactly Haar.
pub fn sample_haar_unitary<R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> Result<ComplexSquareMatrix> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if dim == 1 {
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        return Ok(ComplexSquareMatrix::scalar(Complex64::from_polar(
            1.0, theta,
        )));
    }
    let ginibre = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        let d = r[(j, j)];
        let norm = d.norm();
        // A zero pivot has probability zero; leave the column as is.
        if norm > 0.0 {
            col *= d / norm;
        }
    }
    Ok(ComplexSquareMatrix { inner: q })
}
