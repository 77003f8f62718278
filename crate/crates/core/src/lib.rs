//! Reconstruction of jump-sparse and sparse 1-D signals from blurred,
//! incomplete and noisy linear measurements.
//!
//! The central solver is an ADMM splitting of the inverse Potts functional
//! `gamma * ||diff x||_0 + ||A x - b||_p^p` ([`admm::run_ipotts_admm`]). Its
//! first subproblem is a classical L2 Potts problem solved exactly by
//! dynamic programming ([`potts`]); the second is a Tikhonov problem
//! ([`tikhonov`]). Sparsity problems `gamma * ||x||_0 + ||A x - b||_p^p` are
//! solved through the same machinery ([`sparse`]). Baseline methods and an
//! experiment harness live in [`baselines`] and [`bench`].

pub mod admm;
pub mod baselines;
pub mod bench;
mod error;
pub mod linops;
pub mod par;
pub mod potts;
pub mod sparse;
pub mod tikhonov;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use linops::{MeasurementData, MeasurementOperator, Signal, Vector};

/// Exponent `p` of the data term `||A x - b||_p^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Fidelity {
    L1,
    L2,
}

impl Fidelity {
    pub fn exponent(self) -> u32 {
        match self {
            Self::L1 => 1,
            Self::L2 => 2,
        }
    }

    /// `sum |r_i|^p` over the moduli of a residual.
    pub fn data_term(self, moduli: impl IntoIterator<Item = f64>) -> f64 {
        match self {
            Self::L1 => moduli.into_iter().sum(),
            Self::L2 => moduli.into_iter().map(|r| r * r).sum(),
        }
    }
}

impl TryFrom<u32> for Fidelity {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        match p {
            1 => Ok(Self::L1),
            2 => Ok(Self::L2),
            other => Err(Error::UnsupportedExponent(other)),
        }
    }
}

impl From<Fidelity> for u32 {
    fn from(f: Fidelity) -> u32 {
        f.exponent()
    }
}

/// `||A x - b||_p^p`, with complex residuals measured by their moduli.
pub fn data_misfit(
    op: &MeasurementOperator,
    b: &MeasurementData,
    fidelity: Fidelity,
    x: &[f64],
) -> Result<f64> {
    error::check_len("data misfit", op.output_len(), b.len())?;
    error::check_len("data misfit", op.input_len(), x.len())?;
    let mut r = op.apply_stacked(x);
    for (ri, bi) in r.iter_mut().zip(b.stacked()) {
        *ri -= bi;
    }
    Ok(fidelity.data_term(linops::stacked_moduli(&r, op.is_complex())))
}
