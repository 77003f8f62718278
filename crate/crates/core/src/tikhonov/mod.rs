//! Second ADMM subproblem: `half_mu ||v - w||^2 + ||A v - b||_p^p` over real
//! `v`, for `p = 2` (a linear system) and `p = 1` (a certified convex solve).

mod banded;
mod l1;
mod l2;

pub use l1::{L1Solution, L1Solver};
pub use l2::{L2Solver, SolvePath};

use crate::error::{check_len, Error, Result};
use crate::linops::{dist2_sq, MeasurementData, MeasurementOperator, Signal};
use crate::{data_misfit, Fidelity};

/// One Tikhonov problem instance.
#[derive(Debug, Clone, Copy)]
pub struct TikhonovProblem<'a> {
    pub op: &'a MeasurementOperator,
    pub b: &'a MeasurementData,
    pub w: &'a [f64],
    pub half_mu: f64,
    pub fidelity: Fidelity,
}

impl TikhonovProblem<'_> {
    fn validate(&self) -> Result<()> {
        check_len("Tikhonov data", self.op.output_len(), self.b.len())?;
        check_len("Tikhonov offset", self.op.input_len(), self.w.len())?;
        if !(self.half_mu > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "half_mu must be positive, got {}",
                self.half_mu
            )));
        }
        Ok(())
    }

    /// `half_mu ||v - w||^2 + ||A v - b||_p^p`.
    pub fn objective(&self, v: &[f64]) -> Result<f64> {
        check_len("Tikhonov objective", self.w.len(), v.len())?;
        Ok(self.half_mu * dist2_sq(v, self.w) + data_misfit(self.op, self.b, self.fidelity, v)?)
    }
}

/// Default duality-gap tolerance for the L1 solve: `1e-8 (1 + ||b||_1)`.
pub fn default_l1_tol(b: &MeasurementData) -> f64 {
    1e-8 * (1.0 + b.norm1())
}

/// Solves the `p = 2` problem.
pub fn solve_l2(prob: &TikhonovProblem<'_>) -> Result<Signal> {
    if prob.fidelity != Fidelity::L2 {
        return Err(Error::InvalidArgument("solve_l2 needs p = 2".into()));
    }
    prob.validate()?;
    L2Solver::new(prob.op, prob.b)?.solve(prob.half_mu, prob.w)
}

/// Solves the `p = 1` problem to duality gap `<= tol`.
pub fn solve_l1(prob: &TikhonovProblem<'_>, tol: f64) -> Result<Signal> {
    if prob.fidelity != Fidelity::L1 {
        return Err(Error::InvalidArgument("solve_l1 needs p = 1".into()));
    }
    prob.validate()?;
    Ok(L1Solver::new(prob.op, prob.b)?.solve(prob.half_mu, prob.w, tol, None)?.v)
}

/// Tikhonov solver prepared for a fixed `(A, b)` and repeated calls with
/// changing `(half_mu, w)`. The L1 variant warm-starts from its last dual.
pub enum Subproblem {
    L2(L2Solver),
    L1 {
        solver: L1Solver,
        tol: f64,
        warm: Option<Vec<f64>>,
    },
}

impl Subproblem {
    /// `l1_tol` defaults to [`default_l1_tol`].
    pub fn new(
        op: &MeasurementOperator,
        b: &MeasurementData,
        fidelity: Fidelity,
        l1_tol: Option<f64>,
    ) -> Result<Self> {
        Ok(match fidelity {
            Fidelity::L2 => Self::L2(L2Solver::new(op, b)?),
            Fidelity::L1 => Self::L1 {
                solver: L1Solver::new(op, b)?,
                tol: l1_tol.unwrap_or_else(|| default_l1_tol(b)),
                warm: None,
            },
        })
    }

    pub fn solve(&mut self, half_mu: f64, w: &[f64]) -> Result<Signal> {
        match self {
            Self::L2(solver) => solver.solve(half_mu, w),
            Self::L1 { solver, tol, warm } => {
                let sol = solver.solve(half_mu, w, *tol, warm.as_deref())?;
                *warm = Some(sol.dual);
                Ok(sol.v)
            }
        }
    }
}
