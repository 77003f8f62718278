use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linops::{
    diff, diff_adjoint, operator_norm, power_iteration, stacked_moduli, MeasurementData, MeasurementOperator, Signal,
};
use crate::{data_misfit, Fidelity};

/// Settings of the first-order primal-dual (Chambolle-Pock) scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimalDualConfig {
    #[serde(default = "defaults::iterations")]
    pub iterations: usize,
    /// Dual and primal step sizes. `None` uses `0.95 / L` for both, with `L`
    /// the norm of the stacked operator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<(f64, f64)>,
    #[serde(default = "defaults::theta")]
    pub theta: f64,
    #[serde(default = "defaults::checkpoint_every")]
    pub checkpoint_every: usize,
}

mod defaults {
    pub fn iterations() -> usize {
        10_000
    }
    pub fn theta() -> f64 {
        1.0
    }
    pub fn checkpoint_every() -> usize {
        100
    }
}

impl Default for PrimalDualConfig {
    fn default() -> Self {
        Self {
            iterations: defaults::iterations(),
            steps: None,
            theta: defaults::theta(),
            checkpoint_every: defaults::checkpoint_every(),
        }
    }
}

/// Result of a primal-dual run.
#[derive(Debug, Clone)]
pub struct PrimalDualOutcome {
    pub solution: Signal,
    /// Objective of the returned candidate (the best iterate seen so far)
    /// every `checkpoint_every` iterations, as `(iteration, objective)`.
    pub checkpoints: Vec<(usize, f64)>,
    /// Objective of the raw iterate at the same checkpoints. The scheme is
    /// not a descent method, so this need not be monotone.
    pub raw_checkpoints: Vec<(usize, f64)>,
    /// Duality gap of the returned iterate against a feasible rescaling of
    /// the final dual.
    pub gap: f64,
    pub sigma: f64,
    pub tau: f64,
    /// Norm estimate of the stacked operator.
    pub operator_norm: f64,
}

/// Regularizer `gamma ||R x||_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Regularizer {
    /// `R = diff`, handled as a block of the linear operator.
    Gradient,
    /// `R = I`, handled through the soft-thresholding prox of the primal.
    Identity,
}

pub(crate) fn objective(
    op: &MeasurementOperator,
    b: &MeasurementData,
    gamma: f64,
    fidelity: Fidelity,
    reg: Regularizer,
    x: &[f64],
) -> Result<f64> {
    let penalty: f64 = match reg {
        Regularizer::Gradient if x.len() > 1 => diff(x)?.iter().map(|d| d.abs()).sum(),
        Regularizer::Gradient => 0.0,
        Regularizer::Identity => x.iter().map(|v| v.abs()).sum(),
    };
    Ok(gamma * penalty + data_misfit(op, b, fidelity, x)?)
}

pub(crate) fn solve(
    op: &MeasurementOperator,
    b: &MeasurementData,
    gamma: f64,
    fidelity: Fidelity,
    reg: Regularizer,
    cfg: &PrimalDualConfig,
) -> Result<PrimalDualOutcome> {
    check_len("primal-dual data", op.output_len(), b.len())?;
    if b.is_complex() != op.is_complex() {
        return Err(Error::InvalidArgument("data and operator disagree on complexity".into()));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be non-negative, got {gamma}")));
    }
    if cfg.checkpoint_every == 0 {
        return Err(Error::InvalidArgument("checkpoint_every must be positive".into()));
    }
    let n = op.input_len();
    let complex = op.is_complex();
    let with_gradient = reg == Regularizer::Gradient && n > 1;
    let norm = if with_gradient {
        power_iteration(n, 1e-8, |x| {
            let mut g = diff_adjoint(&diff(x).expect("n > 1")).into_inner();
            let s = op.adjoint_stacked(&op.apply_stacked(x));
            g.iter_mut().zip(s).for_each(|(a, b)| *a += b);
            g
        })?
    } else {
        operator_norm(op, 1e-8)?
    };
    let (sigma, tau) = cfg.steps.unwrap_or((0.95 / norm, 0.95 / norm));
    if !(sigma > 0.0 && tau > 0.0) {
        return Err(Error::InvalidArgument("step sizes must be positive".into()));
    }
    let bs = b.stacked();
    let mut x = vec![0.0; n];
    let mut x_bar = x.clone();
    let mut y1 = vec![0.0; if with_gradient { n - 1 } else { 0 }];
    let mut y2 = vec![0.0; bs.len()];
    let mut checkpoints = Vec::new();
    let mut raw_checkpoints = Vec::new();
    let mut best = (f64::INFINITY, x.clone());
    for it in 1..=cfg.iterations {
        if with_gradient {
            let g = diff(&x_bar)?;
            for (y, gi) in y1.iter_mut().zip(g.iter()) {
                *y = (*y + sigma * gi).clamp(-gamma, gamma);
            }
        }
        let ax = op.apply_stacked(&x_bar);
        for i in 0..y2.len() {
            y2[i] += sigma * (ax[i] - bs[i]);
        }
        match fidelity {
            Fidelity::L2 => y2.iter_mut().for_each(|y| *y /= 1.0 + sigma / 2.0),
            Fidelity::L1 => project_unit(&mut y2, complex),
        }
        let mut kty = op.adjoint_stacked(&y2);
        if with_gradient {
            for (k, d) in kty.iter_mut().zip(diff_adjoint(&y1).iter()) {
                *k += d;
            }
        }
        let mut x_new: Vec<f64> = x.iter().zip(&kty).map(|(xi, k)| xi - tau * k).collect();
        if reg == Regularizer::Identity {
            let t = tau * gamma;
            x_new.iter_mut().for_each(|v| *v = v.signum() * (v.abs() - t).max(0.0));
        }
        for i in 0..n {
            x_bar[i] = x_new[i] + cfg.theta * (x_new[i] - x[i]);
        }
        x = x_new;
        if it % cfg.checkpoint_every == 0 || it == cfg.iterations {
            let value = objective(op, b, gamma, fidelity, reg, &x)?;
            if value <= best.0 {
                best = (value, x.clone());
            }
            if it % cfg.checkpoint_every == 0 {
                raw_checkpoints.push((it, value));
                checkpoints.push((it, best.0));
            }
        }
    }
    let (primal, x) = if cfg.iterations == 0 {
        (objective(op, b, gamma, fidelity, reg, &x)?, x)
    } else {
        best
    };
    let dual = dual_value(op, &bs, gamma, fidelity, reg, &y2, complex);
    Ok(PrimalDualOutcome {
        solution: x.into(),
        checkpoints,
        raw_checkpoints,
        gap: (primal - dual).max(0.0),
        sigma,
        tau,
        operator_norm: norm,
    })
}

fn project_unit(y: &mut [f64], complex: bool) {
    if complex {
        let m = y.len() / 2;
        for i in 0..m {
            let r = y[i].hypot(y[i + m]);
            if r > 1.0 {
                y[i] /= r;
                y[i + m] /= r;
            }
        }
    } else {
        y.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
    }
}

/// Dual objective after moving the data-block dual `y` to a feasible point.
///
/// The dual is `-F*(y1, y) - G*(-K^T y)`. For the gradient regularizer, `y`
/// is first made orthogonal to the row sums so that `A^T y` sums to zero, then
/// `y1` solves `diff^T y1 = -A^T y`; a common scaling enforces the box
/// constraints. For the identity regularizer only the scaling is needed.
fn dual_value(
    op: &MeasurementOperator,
    bs: &[f64],
    gamma: f64,
    fidelity: Fidelity,
    reg: Regularizer,
    y: &[f64],
    complex: bool,
) -> f64 {
    let n = op.input_len();
    let mut y = y.to_vec();
    let mut scale = 1.0_f64;
    match reg {
        Regularizer::Gradient if n > 1 => {
            let a = op.apply_stacked(&vec![1.0; n]);
            let aa: f64 = a.iter().map(|v| v * v).sum();
            if aa > 0.0 {
                let c = a.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() / aa;
                y.iter_mut().zip(&a).for_each(|(q, p)| *q -= c * p);
            }
            let aty = op.adjoint_stacked(&y);
            // diff^T y1 = -aty: out_i = y1_{i-1} - y1_i, so y1_i = y1_{i-1} + aty_i
            let mut acc = 0.0;
            let mut worst = 0.0_f64;
            for v in aty.iter().take(n - 1) {
                acc += v;
                worst = worst.max(acc.abs());
            }
            if worst > gamma {
                scale = scale.min(if gamma > 0.0 { gamma / worst } else { 0.0 });
            }
        }
        Regularizer::Gradient => {
            // n = 1: G* of the zero regularizer forces A^T y = 0
            let aty = op.adjoint_stacked(&y);
            if aty[0] != 0.0 {
                let a = op.apply_stacked(&[1.0]);
                let aa: f64 = a.iter().map(|v| v * v).sum();
                let c = a.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() / aa;
                y.iter_mut().zip(&a).for_each(|(q, p)| *q -= c * p);
            }
        }
        Regularizer::Identity => {
            let worst = op.adjoint_stacked(&y).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if worst > gamma {
                scale = scale.min(if gamma > 0.0 { gamma / worst } else { 0.0 });
            }
        }
    }
    if fidelity == Fidelity::L1 {
        let worst = stacked_moduli(&y, complex).into_iter().fold(0.0_f64, f64::max);
        if worst > 1.0 {
            scale = scale.min(1.0 / worst);
        }
    }
    y.iter_mut().for_each(|v| *v *= scale);
    let yb: f64 = y.iter().zip(bs).map(|(p, q)| p * q).sum();
    match fidelity {
        Fidelity::L2 => -(yb + y.iter().map(|v| v * v).sum::<f64>() / 4.0),
        Fidelity::L1 => -yb,
    }
}
