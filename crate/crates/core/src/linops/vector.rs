use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real signal of length `n`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signal(Vec<f64>);

impl Signal {
    /// Validating constructor: rejects empty input and non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("signal must have at least one entry".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("signal entry {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Number of indices `i` with `x[i] != x[i + 1]`.
    pub fn jump_count(&self) -> usize {
        jump_count(&self.0)
    }

    /// Number of non-zero entries.
    pub fn support_size(&self) -> usize {
        support_size(&self.0)
    }

    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, v)| (*v != 0.0).then_some(i))
            .collect()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

impl From<Vec<f64>> for Signal {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl Deref for Signal {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Signal {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// A real or complex vector. Measurement data, and the result of applying an
/// adjoint, take this form.
#[derive(Debug, Clone, PartialEq)]
pub enum Vector {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Measured data `b`.
pub type MeasurementData = Vector;

impl Vector {
    pub fn len(&self) -> usize {
        match self {
            Self::Real(v) => v.len(),
            Self::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Self::Complex(_))
    }

    pub fn zeros_like(&self) -> Self {
        match self {
            Self::Real(v) => Self::Real(vec![0.0; v.len()]),
            Self::Complex(v) => Self::Complex(vec![Complex64::new(0.0, 0.0); v.len()]),
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            Self::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Self::Complex(v) => v.clone(),
        }
    }

    pub fn real_part(&self) -> Vec<f64> {
        match self {
            Self::Real(v) => v.clone(),
            Self::Complex(v) => v.iter().map(|z| z.re).collect(),
        }
    }

    /// Real view: real data as is, complex data as `[re_0..re_m, im_0..im_m]`.
    pub fn stacked(&self) -> Vec<f64> {
        match self {
            Self::Real(v) => v.clone(),
            Self::Complex(v) => v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect(),
        }
    }

    /// Inverse of [`Vector::stacked`].
    pub fn from_stacked(values: &[f64], complex: bool) -> Self {
        if complex {
            let m = values.len() / 2;
            Self::Complex(
                (0..m)
                    .map(|i| Complex64::new(values[i], values[i + m]))
                    .collect(),
            )
        } else {
            Self::Real(values.to_vec())
        }
    }

    /// `<self, other> = sum self_i * conj(other_i)`.
    pub fn inner(&self, other: &Vector) -> Complex64 {
        let a = self.to_complex();
        let b = other.to_complex();
        a.iter().zip(&b).map(|(x, y)| x * y.conj()).sum()
    }

    pub fn all_finite(&self) -> bool {
        match self {
            Self::Real(v) => v.iter().all(|x| x.is_finite()),
            Self::Complex(v) => v.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        }
    }

    pub fn norm1(&self) -> f64 {
        match self {
            Self::Real(v) => v.iter().map(|x| x.abs()).sum(),
            Self::Complex(v) => v.iter().map(|z| z.norm()).sum(),
        }
    }
}

/// `||diff x||_0`.
pub fn jump_count(x: &[f64]) -> usize {
    x.windows(2).filter(|w| w[0] != w[1]).count()
}

/// `||x||_0`.
pub fn support_size(x: &[f64]) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

/// Moduli of a stacked residual (`complex` pairs entries `i` and `i + m`).
pub(crate) fn stacked_moduli(values: &[f64], complex: bool) -> Vec<f64> {
    if complex {
        let m = values.len() / 2;
        (0..m).map(|i| values[i].hypot(values[i + m])).collect()
    } else {
        values.iter().map(|v| v.abs()).collect()
    }
}

pub(crate) fn norm2_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

pub(crate) fn dist2_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
