use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linops::dist2_sq;

/// Peak signal-to-noise ratio; an exact reconstruction has no finite value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Psnr {
    Db(f64),
    Perfect,
}

impl Psnr {
    /// Value for ranking, with `Perfect` above every finite value.
    pub fn rank_value(self) -> f64 {
        match self {
            Self::Db(v) => v,
            Self::Perfect => f64::INFINITY,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Db(v) => write!(f, "{v}"),
            Self::Perfect => f.write_str("perfect"),
        }
    }
}

/// `10 log10(n ||truth||_inf^2 / ||truth - x||^2)`.
pub fn psnr(x: &[f64], truth: &[f64]) -> Result<Psnr> {
    check_len("PSNR", truth.len(), x.len())?;
    let err = dist2_sq(x, truth);
    if err == 0.0 {
        return Ok(Psnr::Perfect);
    }
    let peak = truth.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::InvalidArgument("PSNR of a zero ground truth is undefined".into()));
    }
    Ok(Psnr::Db(10.0 * (truth.len() as f64 * peak * peak / err).log10()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let Psnr::Db(v) = psnr(&[0.0, 0.0], &[1.0, 0.0]).unwrap() else { panic!() };
        assert!((v - 10.0 * 2f64.log10()).abs() < 1e-12);
        assert_eq!(psnr(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), Psnr::Perfect);
        let truth = [1.0, -0.5, 0.25, 2.0];
        let e = [0.01, -0.02, 0.0, 0.03];
        let near: Vec<f64> = truth.iter().zip(&e).map(|(t, d)| t + d).collect();
        let far: Vec<f64> = truth.iter().zip(&e).map(|(t, d)| t + 10.0 * d).collect();
        let (Psnr::Db(a), Psnr::Db(b)) = (psnr(&near, &truth).unwrap(), psnr(&far, &truth).unwrap()) else {
            panic!()
        };
        assert!((a - b - 20.0).abs() < 1e-10);
        assert!(psnr(&[1.0], &[0.0]).is_err());
        assert!(psnr(&[1.0], &[1.0, 2.0]).is_err());
        assert_eq!(Psnr::Perfect.to_string(), "perfect");
    }
}
