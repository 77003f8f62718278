use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::MeasurementData;

/// Measurement noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    /// i.i.d. `N(0, sigma^2)`; real and imaginary parts independently.
    Gaussian { sigma: f64 },
    /// i.i.d. with density `exp(-sqrt(2) |x| / sigma) / (sigma sqrt(2))`,
    /// whose variance is `sigma^2`; real and imaginary parts independently.
    Laplacian { sigma: f64 },
    /// `round(fraction * m)` distinct entries replaced by uniform draws from
    /// `interval`. Complex entries become real.
    Impulsive { fraction: f64, interval: [f64; 2] },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Gaussian { sigma } | Self::Laplacian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidArgument(format!("noise sigma must be positive, got {sigma}")))
            }
            Self::Impulsive { fraction, interval } => {
                if !(0.0..=1.0).contains(&fraction) {
                    return Err(Error::InvalidArgument(format!("impulse fraction {fraction} outside [0, 1]")));
                }
                if !(interval[0] <= interval[1] && interval.iter().all(|v| v.is_finite())) {
                    return Err(Error::InvalidArgument(format!("bad impulse interval {interval:?}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Laplacian draw by inverse CDF.
fn laplacian<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    let scale = sigma / std::f64::consts::SQRT_2;
    loop {
        let u: f64 = rng.gen_range(-0.5..0.5);
        let tail = 1.0 - 2.0 * u.abs();
        if tail > 0.0 {
            return -scale * u.signum() * tail.ln();
        }
    }
}

pub fn add_noise<R: Rng + ?Sized>(data: &MeasurementData, model: &NoiseModel, rng: &mut R) -> Result<MeasurementData> {
    model.validate()?;
    let draw = |rng: &mut R| -> f64 {
        match *model {
            NoiseModel::Gaussian { sigma } => Normal::new(0.0, sigma).expect("validated").sample(rng),
            NoiseModel::Laplacian { sigma } => laplacian(sigma, rng),
            NoiseModel::Impulsive { .. } => unreachable!(),
        }
    };
    Ok(match (*model, data) {
        (NoiseModel::Impulsive { fraction, interval }, data) => {
            let m = data.len();
            let count = ((fraction * m as f64).round() as usize).min(m);
            let mut out = data.clone();
            for i in sample(rng, m, count) {
                let value = if interval[0] < interval[1] {
                    rng.gen_range(interval[0]..interval[1])
                } else {
                    interval[0]
                };
                match &mut out {
                    MeasurementData::Real(v) => v[i] = value,
                    MeasurementData::Complex(v) => v[i] = Complex64::new(value, 0.0),
                }
            }
            out
        }
        (_, MeasurementData::Real(v)) => MeasurementData::Real(v.iter().map(|x| x + draw(rng)).collect()),
        (_, MeasurementData::Complex(v)) => MeasurementData::Complex(
            v.iter()
                .map(|z| {
                    let re = draw(rng);
                    let im = draw(rng);
                    z + Complex64::new(re, im)
                })
                .collect(),
        ),
    })
}
