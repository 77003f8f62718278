use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::IndexSet;

/// Rows `(1/sqrt n) exp(-2 pi i j k / n)` of the unitary DFT for `j` in the
/// sample set, `k = 0..n`.
#[derive(Clone)]
pub struct PartialFourier {
    samples: IndexSet,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PartialFourier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartialFourier")
            .field("samples", &self.samples)
            .finish()
    }
}

impl PartialEq for PartialFourier {
    fn eq(&self, other: &Self) -> bool {
        self.samples == other.samples
    }
}

impl PartialFourier {
    pub fn new(samples: IndexSet) -> Self {
        let mut planner = FftPlanner::new();
        let n = samples.universe();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            samples,
        }
    }

    pub fn samples(&self) -> &IndexSet {
        &self.samples
    }

    pub fn input_len(&self) -> usize {
        self.samples.universe()
    }

    pub fn output_len(&self) -> usize {
        self.samples.len()
    }

    fn scale(&self) -> f64 {
        1.0 / (self.input_len() as f64).sqrt()
    }

    pub(crate) fn apply_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.forward.process(&mut buf);
        let s = self.scale();
        self.samples.iter().map(|j| buf[j] * s).collect()
    }

    pub(crate) fn adjoint_complex(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.input_len()];
        for (j, &v) in self.samples.iter().zip(y) {
            buf[j] = v;
        }
        self.inverse.process(&mut buf);
        let s = self.scale();
        buf.iter_mut().for_each(|z| *z *= s);
        buf
    }

    /// Eigenvalues of `Re(A^* A)` in the Fourier basis: the real part of the
    /// projection `F^* P F` is circulant with symbol `(P(w) + P(-w)) / 2`.
    pub(crate) fn real_normal_symbol(&self) -> Vec<f64> {
        let n = self.input_len();
        let mut mask = vec![0.0; n];
        for j in self.samples.iter() {
            mask[j] += 0.5;
            mask[(n - j) % n] += 0.5;
        }
        mask
    }
}

/// Unnormalized forward DFT of a real vector.
pub(crate) fn fft_real(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(x.len()).process(&mut buf);
    buf
}
