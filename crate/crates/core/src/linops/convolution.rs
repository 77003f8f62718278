use serde::{Deserialize, Serialize};

use super::{BandRow, IndexSet};
use crate::error::{Error, Result};

/// How taps falling outside `0..n` are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Out-of-range taps are dropped (zero fill).
    Truncate,
    /// Indices wrap modulo `n`.
    Circular,
}

/// Samples of a 1-D convolution at a subset of positions.
///
/// Row `t` measures position `j = samples[t]` with weights
/// `A[j, k] = h[k - j]` for `|k - j| <= r`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialConvolution {
    kernel: Vec<f64>,
    samples: IndexSet,
    boundary: Boundary,
}

/// Centered gaussian kernel of the given radius, normalized to unit sum.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("kernel sigma must be positive, got {sigma}")));
    }
    let raw: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / sum).collect())
}

impl PartialConvolution {
    /// `kernel` holds `h_{-r}, ..., h_0, ..., h_r` and must have odd length.
    pub fn new(kernel: Vec<f64>, samples: IndexSet, boundary: Boundary) -> Result<Self> {
        if kernel.len() % 2 == 0 {
            return Err(Error::InvalidArgument("kernel length must be odd".into()));
        }
        if kernel.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("kernel has non-finite taps".into()));
        }
        let sum: f64 = kernel.iter().sum();
        if sum.abs() <= f64::EPSILON * kernel.iter().map(|v| v.abs()).sum::<f64>() {
            return Err(Error::InvalidArgument("kernel must have non-vanishing mean".into()));
        }
        Ok(Self {
            kernel,
            samples,
            boundary,
        })
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn radius(&self) -> usize {
        self.kernel.len() / 2
    }

    pub fn samples(&self) -> &IndexSet {
        &self.samples
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn input_len(&self) -> usize {
        self.samples.universe()
    }

    pub fn output_len(&self) -> usize {
        self.samples.len()
    }

    /// Calls `f(k, h)` for every non-zero-structured entry of row `j`.
    #[inline]
    fn for_each_tap(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        let n = self.input_len() as isize;
        let r = self.radius() as isize;
        let j = j as isize;
        for (i, &h) in self.kernel.iter().enumerate() {
            let k = j + i as isize - r;
            match self.boundary {
                Boundary::Truncate => {
                    if (0..n).contains(&k) {
                        f(k as usize, h);
                    }
                }
                Boundary::Circular => f(k.rem_euclid(n) as usize, h),
            }
        }
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, j) in out.iter_mut().zip(self.samples.iter()) {
            let mut acc = 0.0;
            self.for_each_tap(j, |k, h| acc += h * x[k]);
            *o = acc;
        }
    }

    pub(crate) fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (&yt, j) in y.iter().zip(self.samples.iter()) {
            self.for_each_tap(j, |k, h| out[k] += h * yt);
        }
    }

    pub(crate) fn band_rows(&self) -> Option<Vec<BandRow>> {
        if self.boundary == Boundary::Circular && self.radius() > 0 {
            return None;
        }
        let n = self.input_len();
        let r = self.radius();
        Some(
            self.samples
                .iter()
                .map(|j| {
                    let start = j.saturating_sub(r);
                    let end = (j + r).min(n - 1);
                    BandRow {
                        start,
                        values: (start..=end).map(|k| self.kernel[k + r - j]).collect(),
                    }
                })
                .collect(),
        )
    }

    /// Eigenvalues `|h^(w)|^2` of `A^T A` when every position is sampled with
    /// circular boundary; `None` otherwise.
    pub(crate) fn circulant_symbol(&self) -> Option<Vec<f64>> {
        if self.boundary != Boundary::Circular || !self.samples.is_full() {
            return None;
        }
        let n = self.input_len();
        let r = self.radius() as isize;
        let mut taps = vec![0.0; n];
        for (i, &h) in self.kernel.iter().enumerate() {
            taps[(i as isize - r).rem_euclid(n as isize) as usize] += h;
        }
        let spectrum = super::fourier::fft_real(&taps);
        Some(spectrum.iter().map(|z| z.norm_sqr()).collect())
    }
}
