use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::vector::norm2_sq;
use super::MeasurementOperator;
use crate::error::{Error, Result};

const MAX_POWER_ITERATIONS: usize = 100_000;

/// Largest singular value of `op` acting on real signals, by power iteration
/// on `Re(A^* A)`. Stops once successive estimates agree within `tol`
/// relative.
pub fn operator_norm(op: &MeasurementOperator, tol: f64) -> Result<f64> {
    power_iteration(op.input_len(), tol, |x| {
        let ax = op.apply_stacked(x);
        op.adjoint_stacked(&ax)
    })
}

/// Power iteration for the largest eigenvalue of a symmetric positive
/// semidefinite map; returns its square root.
pub(crate) fn power_iteration(
    n: usize,
    tol: f64,
    mut gram: impl FnMut(&[f64]) -> Vec<f64>,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    normalize(&mut x);
    let mut estimate = 0.0;
    for _ in 0..MAX_POWER_ITERATIONS {
        let mut y = gram(&x);
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let next = rayleigh.max(0.0).sqrt();
        if normalize(&mut y) == 0.0 {
            return Err(Error::InvalidArgument("operator is zero".into()));
        }
        if (next - estimate).abs() <= tol * next {
            return Ok(next);
        }
        estimate = next;
        x = y;
    }
    Err(Error::NotConverged {
        what: "power iteration",
        iterations: MAX_POWER_ITERATIONS,
    })
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = norm2_sq(x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}
