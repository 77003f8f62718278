use nalgebra::DMatrix;
use num_complex::Complex64;

/// An explicit `m x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum DenseOperator {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl DenseOperator {
    pub fn nrows(&self) -> usize {
        match self {
            Self::Real(a) => a.nrows(),
            Self::Complex(a) => a.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Self::Real(a) => a.ncols(),
            Self::Complex(a) => a.ncols(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::Real(DMatrix::identity(n, n))
    }
}
