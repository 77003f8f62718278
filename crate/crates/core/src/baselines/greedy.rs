use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linops::{norm2_sq, MeasurementData, MeasurementOperator, Signal};
use crate::sparse::hard_threshold;

/// Result of [`solve_omp`].
#[derive(Debug, Clone)]
pub struct OmpOutcome {
    pub solution: Signal,
    /// Selected columns in selection order.
    pub atoms: Vec<usize>,
    /// `||A x - b||_2` after each selection; entry 0 is `||b||_2`.
    pub residual_norms: Vec<f64>,
    /// Refit on the enlarged support was rank deficient; that atom was dropped
    /// and the run stopped.
    pub rank_deficient: bool,
}

impl OmpOutcome {
    /// Iterate with the first `k` atoms. It equals the result of a run
    /// capped at `k` atoms.
    pub fn iterate(&self, op: &MeasurementOperator, b: &MeasurementData, k: usize) -> Result<Signal> {
        let k = k.min(self.atoms.len());
        let a = op.stacked_matrix();
        let (coef, _) = least_squares(&a, &b.stacked(), &self.atoms[..k])
            .ok_or_else(|| Error::Factorization("OMP refit".into()))?;
        let mut x = vec![0.0; op.input_len()];
        for (c, &j) in coef.iter().zip(&self.atoms[..k]) {
            x[j] = *c;
        }
        Ok(x.into())
    }
}

const OMP_RESIDUAL_STOP: f64 = 1e-10;

/// Orthogonal matching pursuit with at most `k_max` atoms.
pub fn solve_omp(op: &MeasurementOperator, b: &MeasurementData, k_max: usize) -> Result<OmpOutcome> {
    check_len("OMP data", op.output_len(), b.len())?;
    let n = op.input_len();
    if k_max > n.min(op.output_len()) {
        return Err(Error::InvalidArgument(format!(
            "k_max = {k_max} exceeds min(m, n) = {}",
            n.min(op.output_len())
        )));
    }
    let a = op.stacked_matrix();
    let bs = b.stacked();
    let mut x = vec![0.0; n];
    let mut atoms: Vec<usize> = Vec::new();
    let mut residual = bs.clone();
    let mut residual_norms = vec![norm2_sq(&bs).sqrt()];
    let mut rank_deficient = false;
    while atoms.len() < k_max && *residual_norms.last().unwrap() >= OMP_RESIDUAL_STOP {
        let corr = a.tr_mul(&DVector::from_column_slice(&residual));
        let mut pick: Option<(usize, f64)> = None;
        for (j, c) in corr.iter().enumerate() {
            if atoms.contains(&j) {
                continue;
            }
            if pick.map_or(true, |(_, best)| c.abs() > best) {
                pick = Some((j, c.abs()));
            }
        }
        let Some((j, c)) = pick else { break };
        if c == 0.0 {
            break;
        }
        atoms.push(j);
        match least_squares(&a, &bs, &atoms) {
            Some((coef, fitted)) => {
                x.iter_mut().for_each(|v| *v = 0.0);
                for (c, &k) in coef.iter().zip(&atoms) {
                    x[k] = *c;
                }
                residual = bs.iter().zip(&fitted).map(|(b, f)| b - f).collect();
                residual_norms.push(norm2_sq(&residual).sqrt());
            }
            None => {
                atoms.pop();
                rank_deficient = true;
                break;
            }
        }
    }
    Ok(OmpOutcome {
        solution: x.into(),
        atoms,
        residual_norms,
        rank_deficient,
    })
}

/// Least squares on the columns `cols`; `None` when they are numerically
/// dependent. Returns coefficients and the fitted vector.
fn least_squares(a: &DMatrix<f64>, b: &[f64], cols: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
    let sub = a.select_columns(cols);
    let qr = sub.clone().qr();
    let r = qr.r();
    let scale = (0..r.ncols()).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..r.ncols()).any(|i| r[(i, i)].abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return None;
    }
    let qtb = qr.q().tr_mul(&DVector::from_column_slice(b));
    let coef = r.solve_upper_triangular(&qtb)?;
    let fitted = &sub * &coef;
    Some((coef.as_slice().to_vec(), fitted.as_slice().to_vec()))
}

/// Thresholding rule of [`solve_iht`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IhtMode {
    /// Keep the `k` largest magnitudes.
    MTerm { k: usize },
    /// Hard threshold at `step * gamma`, a descent method for
    /// `gamma ||x||_0 + ||A x - b||^2`.
    Regularized { gamma: f64 },
}

/// Result of [`solve_iht`].
#[derive(Debug, Clone)]
pub struct IhtOutcome {
    pub solution: Signal,
    /// Objective after each iteration: `||A x - b||^2` for the M-term rule,
    /// `gamma ||x||_0 + ||A x - b||^2` for the regularized rule.
    pub objective: Vec<f64>,
}

/// Iterative hard thresholding `x <- T(x + step A^*(b - A x))` from `x = 0`.
/// `step <= 1 / ||A||^2` makes the objective non-increasing.
pub fn solve_iht(
    op: &MeasurementOperator,
    b: &MeasurementData,
    mode: IhtMode,
    step: f64,
    iters: usize,
) -> Result<IhtOutcome> {
    check_len("IHT data", op.output_len(), b.len())?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let n = op.input_len();
    let bs = b.stacked();
    let mut x = vec![0.0; n];
    let mut objective = Vec::with_capacity(iters);
    for _ in 0..iters {
        let r: Vec<f64> = op.apply_stacked(&x).iter().zip(&bs).map(|(a, b)| b - a).collect();
        let g = op.adjoint_stacked(&r);
        let z: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + step * gi).collect();
        x = match mode {
            IhtMode::MTerm { k } => keep_largest(&z, k),
            IhtMode::Regularized { gamma } => hard_threshold(&z, step * gamma),
        };
        let misfit: f64 = op.apply_stacked(&x).iter().zip(&bs).map(|(a, b)| (a - b) * (a - b)).sum();
        objective.push(match mode {
            IhtMode::MTerm { .. } => misfit,
            IhtMode::Regularized { gamma } => gamma * x.iter().filter(|v| **v != 0.0).count() as f64 + misfit,
        });
    }
    Ok(IhtOutcome {
        solution: x.into(),
        objective,
    })
}

/// Keeps the `k` entries of largest magnitude; ties go to the lower index.
fn keep_largest(z: &[f64], k: usize) -> Vec<f64> {
    if k >= z.len() {
        return z.to_vec();
    }
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&i, &j| z[j].abs().total_cmp(&z[i].abs()).then(i.cmp(&j)));
    let mut out = vec![0.0; z.len()];
    for &i in &order[..k] {
        out[i] = z[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keep_largest_breaks_ties_low() {
        assert_eq!(keep_largest(&[1.0, -2.0, 2.0, 0.5], 2), vec![0.0, -2.0, 2.0, 0.0]);
        assert_eq!(keep_largest(&[1.0, 1.0, 1.0], 1), vec![1.0, 0.0, 0.0]);
        assert_eq!(keep_largest(&[3.0], 4), vec![3.0]);
    }
}
