use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::banded::SymBand;
use crate::error::{check_len, Error, Result};
use crate::linops::{MeasurementData, MeasurementOperator, Signal};

/// Linear-algebra route used for the normal equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePath {
    /// `Re(A^* A)` is circulant: diagonal solve in the Fourier domain.
    Fourier,
    /// `Re(A^* A)` is banded: banded Cholesky.
    Banded,
    /// Dense Cholesky.
    Dense,
}

enum Normal {
    Fourier {
        symbol: Vec<f64>,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
    Banded(SymBand),
    Dense(DMatrix<f64>),
}

/// Solver for `(Re(A^* A) + c I) v = Re(A^* b) + c w` with varying `c > 0`.
///
/// The operator-dependent part (`Re(A^* A)` or its spectrum, and `Re(A^* b)`)
/// is prepared once; each [`L2Solver::solve`] factorizes anew.
pub struct L2Solver {
    normal: Normal,
    atb: Vec<f64>,
}

impl L2Solver {
    /// Picks the fastest route available for `op`.
    pub fn new(op: &MeasurementOperator, b: &MeasurementData) -> Result<Self> {
        let path = if op.circulant_normal_symbol().is_some() {
            SolvePath::Fourier
        } else if op.band_rows().is_some() {
            SolvePath::Banded
        } else {
            SolvePath::Dense
        };
        Self::with_path(op, b, path)
    }

    /// Forces a route; fails if `op` lacks the required structure.
    pub fn with_path(op: &MeasurementOperator, b: &MeasurementData, path: SolvePath) -> Result<Self> {
        check_len("normal equation data", op.output_len(), b.len())?;
        let n = op.input_len();
        let normal = match path {
            SolvePath::Fourier => {
                let symbol = op.circulant_normal_symbol().ok_or_else(|| {
                    Error::InvalidArgument("operator has no circulant normal matrix".into())
                })?;
                let mut planner = FftPlanner::new();
                Normal::Fourier {
                    symbol,
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                }
            }
            SolvePath::Banded => {
                let rows = op
                    .band_rows()
                    .ok_or_else(|| Error::InvalidArgument("operator is not banded".into()))?;
                Normal::Banded(SymBand::gram_of_rows(&rows, n))
            }
            SolvePath::Dense => Normal::Dense(op.normal_matrix()),
        };
        Ok(Self {
            normal,
            atb: op.adjoint_stacked(&b.stacked()),
        })
    }

    pub fn path(&self) -> SolvePath {
        match self.normal {
            Normal::Fourier { .. } => SolvePath::Fourier,
            Normal::Banded(_) => SolvePath::Banded,
            Normal::Dense(_) => SolvePath::Dense,
        }
    }

    /// Half-bandwidth of the banded normal matrix, if that route is used.
    pub fn bandwidth(&self) -> Option<usize> {
        match &self.normal {
            Normal::Banded(band) => Some(band.bandwidth()),
            _ => None,
        }
    }

    /// `Re(A^* b)`.
    pub fn adjoint_data(&self) -> &[f64] {
        &self.atb
    }

    /// Minimizer of `half_mu ||v - w||^2 + ||A v - b||_2^2`.
    pub fn solve(&self, half_mu: f64, w: &[f64]) -> Result<Signal> {
        if !(half_mu > 0.0) {
            return Err(Error::InvalidArgument(format!("half_mu must be positive, got {half_mu}")));
        }
        check_len("Tikhonov offset", self.atb.len(), w.len())?;
        let rhs: Vec<f64> = self.atb.iter().zip(w).map(|(a, wi)| a + half_mu * wi).collect();
        let v = match &self.normal {
            Normal::Fourier {
                symbol,
                forward,
                inverse,
            } => {
                let n = rhs.len();
                let mut buf: Vec<Complex64> = rhs.iter().map(|&r| Complex64::new(r, 0.0)).collect();
                forward.process(&mut buf);
                for (z, s) in buf.iter_mut().zip(symbol) {
                    *z /= s + half_mu;
                }
                inverse.process(&mut buf);
                buf.iter().map(|z| z.re / n as f64).collect()
            }
            Normal::Banded(band) => band.cholesky_shifted(half_mu)?.solve(&rhs),
            Normal::Dense(normal) => {
                let n = normal.nrows();
                let shifted = normal + DMatrix::identity(n, n) * half_mu;
                let chol = shifted
                    .cholesky()
                    .ok_or_else(|| Error::Factorization("normal matrix not positive definite".into()))?;
                chol.solve(&DVector::from_vec(rhs)).as_slice().to_vec()
            }
        };
        Ok(v.into())
    }
}
