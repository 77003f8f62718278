//! Measurement operators and the discrete difference operator.
//!
//! Every operator maps real signals of length `n` to real or complex data of
//! length `m`. Solvers work on the *stacked* real view, in which complex
//! data `z` is laid out as `[Re z, Im z]`; inner products in that view equal
//! the real part of the complex inner product, so `adjoint_stacked` is the
//! real part of the complex adjoint.

mod convolution;
mod dense;
mod diff;
mod fourier;
mod index_set;
mod norm;
mod vector;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use convolution::{gaussian_kernel, Boundary, PartialConvolution};
pub use dense::DenseOperator;
pub use diff::{diff, diff_adjoint, diff_pinv};
pub use fourier::PartialFourier;
pub use index_set::IndexSet;
pub use norm::operator_norm;
pub(crate) use norm::power_iteration;
pub use vector::{jump_count, support_size, MeasurementData, Signal, Vector};
pub(crate) use vector::{dist2_sq, norm2_sq, stacked_moduli};

use crate::error::{check_len, Result};

/// One row of a banded real operator: `values[t]` sits in column `start + t`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BandRow {
    pub start: usize,
    pub values: Vec<f64>,
}

/// The linear measurement map `A`.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementOperator {
    Dense(DenseOperator),
    PartialConvolution(PartialConvolution),
    PartialFourier(PartialFourier),
    /// `x -> inner(diff(x))`, acting on signals one longer than `inner`.
    DiffCompose(Box<MeasurementOperator>),
}

impl MeasurementOperator {
    pub fn identity(n: usize) -> Self {
        Self::Dense(DenseOperator::identity(n))
    }

    pub fn dense(matrix: DMatrix<f64>) -> Self {
        Self::Dense(DenseOperator::Real(matrix))
    }

    pub fn dense_complex(matrix: DMatrix<Complex64>) -> Self {
        Self::Dense(DenseOperator::Complex(matrix))
    }

    pub fn partial_convolution(
        kernel: Vec<f64>,
        samples: IndexSet,
        boundary: Boundary,
    ) -> Result<Self> {
        PartialConvolution::new(kernel, samples, boundary).map(Self::PartialConvolution)
    }

    pub fn partial_fourier(samples: IndexSet) -> Self {
        Self::PartialFourier(PartialFourier::new(samples))
    }

    pub fn diff_compose(inner: MeasurementOperator) -> Self {
        Self::DiffCompose(Box::new(inner))
    }

    /// Signal length `n`.
    pub fn input_len(&self) -> usize {
        match self {
            Self::Dense(d) => d.ncols(),
            Self::PartialConvolution(c) => c.input_len(),
            Self::PartialFourier(f) => f.input_len(),
            Self::DiffCompose(inner) => inner.input_len() + 1,
        }
    }

    /// Number of measurements `m`.
    pub fn output_len(&self) -> usize {
        match self {
            Self::Dense(d) => d.nrows(),
            Self::PartialConvolution(c) => c.output_len(),
            Self::PartialFourier(f) => f.output_len(),
            Self::DiffCompose(inner) => inner.output_len(),
        }
    }

    pub fn is_complex(&self) -> bool {
        match self {
            Self::Dense(DenseOperator::Real(_)) | Self::PartialConvolution(_) => false,
            Self::Dense(DenseOperator::Complex(_)) | Self::PartialFourier(_) => true,
            Self::DiffCompose(inner) => inner.is_complex(),
        }
    }

    /// Length of the stacked real data view (`m`, or `2m` when complex).
    pub fn stacked_len(&self) -> usize {
        if self.is_complex() {
            2 * self.output_len()
        } else {
            self.output_len()
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<MeasurementData> {
        check_len("operator apply", self.input_len(), x.len())?;
        Ok(self.apply_unchecked(x))
    }

    fn apply_unchecked(&self, x: &[f64]) -> Vector {
        match self {
            Self::Dense(DenseOperator::Real(a)) => {
                Vector::Real((a * DVector::from_column_slice(x)).as_slice().to_vec())
            }
            Self::Dense(DenseOperator::Complex(a)) => {
                let xc = DVector::from_iterator(x.len(), x.iter().map(|&v| Complex64::new(v, 0.0)));
                Vector::Complex((a * xc).as_slice().to_vec())
            }
            Self::PartialConvolution(c) => {
                let mut out = vec![0.0; c.output_len()];
                c.apply_into(x, &mut out);
                Vector::Real(out)
            }
            Self::PartialFourier(f) => {
                let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                Vector::Complex(f.apply_complex(&xc))
            }
            Self::DiffCompose(inner) => {
                let d: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
                inner.apply_unchecked(&d)
            }
        }
    }

    /// The (conjugate-transpose) adjoint `A^* y`. Complex operators, or complex
    /// `y`, give a complex result.
    pub fn adjoint(&self, y: &MeasurementData) -> Result<Vector> {
        check_len("operator adjoint", self.output_len(), y.len())?;
        Ok(self.adjoint_unchecked(y))
    }

    fn adjoint_unchecked(&self, y: &Vector) -> Vector {
        match (self, y) {
            (Self::Dense(DenseOperator::Real(a)), Vector::Real(v)) => {
                Vector::Real((a.transpose() * DVector::from_column_slice(v)).as_slice().to_vec())
            }
            (Self::Dense(DenseOperator::Real(a)), Vector::Complex(v)) => {
                let ac = a.map(|e| Complex64::new(e, 0.0));
                Vector::Complex((ac.transpose() * DVector::from_column_slice(v)).as_slice().to_vec())
            }
            (Self::Dense(DenseOperator::Complex(a)), y) => {
                let yc = DVector::from_vec(y.to_complex());
                Vector::Complex((a.adjoint() * yc).as_slice().to_vec())
            }
            (Self::PartialConvolution(c), Vector::Real(v)) => {
                let mut out = vec![0.0; c.input_len()];
                c.adjoint_into(v, &mut out);
                Vector::Real(out)
            }
            (Self::PartialConvolution(c), Vector::Complex(v)) => {
                let n = c.input_len();
                let re: Vec<f64> = v.iter().map(|z| z.re).collect();
                let im: Vec<f64> = v.iter().map(|z| z.im).collect();
                let (mut out_re, mut out_im) = (vec![0.0; n], vec![0.0; n]);
                c.adjoint_into(&re, &mut out_re);
                c.adjoint_into(&im, &mut out_im);
                Vector::Complex(
                    out_re
                        .into_iter()
                        .zip(out_im)
                        .map(|(r, i)| Complex64::new(r, i))
                        .collect(),
                )
            }
            (Self::PartialFourier(f), y) => Vector::Complex(f.adjoint_complex(&y.to_complex())),
            (Self::DiffCompose(inner), y) => match inner.adjoint_unchecked(y) {
                Vector::Real(z) => Vector::Real(diff_adjoint(&z).into_inner()),
                Vector::Complex(z) => {
                    let re: Vec<f64> = z.iter().map(|c| c.re).collect();
                    let im: Vec<f64> = z.iter().map(|c| c.im).collect();
                    Vector::Complex(
                        diff_adjoint(&re)
                            .iter()
                            .zip(diff_adjoint(&im).iter())
                            .map(|(&r, &i)| Complex64::new(r, i))
                            .collect(),
                    )
                }
            },
        }
    }

    /// `Re(A^* y)`, the gradient direction for real-signal recovery.
    pub fn adjoint_real(&self, y: &MeasurementData) -> Result<Signal> {
        Ok(self.adjoint(y)?.real_part().into())
    }

    /// Apply in the stacked real view. Panics on length mismatch.
    pub fn apply_stacked(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.input_len(), "apply_stacked: signal length");
        match self {
            Self::Dense(DenseOperator::Real(a)) => {
                (a * DVector::from_column_slice(x)).as_slice().to_vec()
            }
            Self::PartialConvolution(c) => {
                let mut out = vec![0.0; c.output_len()];
                c.apply_into(x, &mut out);
                out
            }
            Self::DiffCompose(inner) => {
                let d: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
                inner.apply_stacked(&d)
            }
            _ => self.apply_unchecked(x).stacked(),
        }
    }

    /// `Re(A^* y)` in the stacked real view. Panics on length mismatch.
    pub fn adjoint_stacked(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.stacked_len(), "adjoint_stacked: data length");
        match self {
            Self::Dense(DenseOperator::Real(a)) => {
                (a.tr_mul(&DVector::from_column_slice(y))).as_slice().to_vec()
            }
            Self::PartialConvolution(c) => {
                let mut out = vec![0.0; c.input_len()];
                c.adjoint_into(y, &mut out);
                out
            }
            Self::DiffCompose(inner) => diff_adjoint(&inner.adjoint_stacked(y)).into_inner(),
            _ => self
                .adjoint_unchecked(&Vector::from_stacked(y, self.is_complex()))
                .real_part(),
        }
    }

    /// Dense `stacked_len x n` real matrix of the stacked view.
    pub fn stacked_matrix(&self) -> DMatrix<f64> {
        if let Self::Dense(DenseOperator::Real(a)) = self {
            return a.clone();
        }
        let n = self.input_len();
        let mut out = DMatrix::zeros(self.stacked_len(), n);
        let mut e = vec![0.0; n];
        for k in 0..n {
            e[k] = 1.0;
            out.set_column(k, &DVector::from_vec(self.apply_stacked(&e)));
            e[k] = 0.0;
        }
        out
    }

    /// `Re(A^* A)` as a dense `n x n` matrix.
    pub fn normal_matrix(&self) -> DMatrix<f64> {
        let s = self.stacked_matrix();
        s.tr_mul(&s)
    }

    /// Row structure for banded real operators.
    pub(crate) fn band_rows(&self) -> Option<Vec<BandRow>> {
        match self {
            Self::PartialConvolution(c) => c.band_rows(),
            Self::DiffCompose(inner) => {
                let rows = inner.band_rows()?;
                Some(
                    rows.into_iter()
                        .map(|row| {
                            // (A diff)[j, i] = A[j, i - 1] - A[j, i]
                            let len = row.values.len();
                            let values = (0..=len)
                                .map(|t| {
                                    let prev = if t > 0 { row.values[t - 1] } else { 0.0 };
                                    let cur = if t < len { row.values[t] } else { 0.0 };
                                    prev - cur
                                })
                                .collect();
                            BandRow {
                                start: row.start,
                                values,
                            }
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Fourier-domain eigenvalues of `Re(A^* A)` when that matrix is circulant.
    pub(crate) fn circulant_normal_symbol(&self) -> Option<Vec<f64>> {
        match self {
            Self::PartialConvolution(c) => c.circulant_symbol(),
            Self::PartialFourier(f) => Some(f.real_normal_symbol()),
            _ => None,
        }
    }
}
