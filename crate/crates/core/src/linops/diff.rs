use super::Signal;
use crate::error::{Error, Result};

/// Forward differences `x[i + 1] - x[i]`; maps length `n + 1` to `n`.
pub fn diff(x: &[f64]) -> Result<Signal> {
    if x.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "difference needs at least two samples, got {}",
            x.len()
        )));
    }
    Ok(x.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>().into())
}

/// Transpose of [`diff`]: maps length `n` to `n + 1`.
pub fn diff_adjoint(z: &[f64]) -> Signal {
    let n = z.len();
    let mut out = vec![0.0; n + 1];
    for i in 0..=n {
        let left = if i > 0 { z[i - 1] } else { 0.0 };
        let right = if i < n { z[i] } else { 0.0 };
        out[i] = left - right;
    }
    out.into()
}

/// Pseudo-inverse of [`diff`]: the unique zero-mean `x` of length
/// `u.len() + 1` with `diff(x) = u`.
pub fn diff_pinv(u: &[f64]) -> Signal {
    let n = u.len() + 1;
    let mut x = Vec::with_capacity(n);
    let mut acc = 0.0;
    x.push(0.0);
    for &d in u {
        acc += d;
        x.push(acc);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    x.into()
}
