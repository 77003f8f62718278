//! Named experiment configurations.

use super::config::{
    AdmmSchedule, ExperimentConfig, GammaGrid, KernelSpec, MethodSpec, OperatorSpec, SampleSpec, CONFIG_VERSION,
};
use super::noise::NoiseModel;
use super::signals::SignalSpec;
use crate::baselines::PrimalDualConfig;
use crate::error::{Error, Result};
use crate::linops::Boundary;
use crate::Fidelity;

pub const PRESET_NAMES: [&str; 7] = [
    "fig1-gauss",
    "fig1-laplace",
    "fig1-impulse",
    "fig2-fourier",
    "fig5-gauss",
    "fig6-curve",
    "fig7-energy",
];

const N: usize = 256;

fn jump_signal() -> SignalSpec {
    SignalSpec::JumpSparse {
        n: N,
        jumps: 6,
        min_plateau: 20,
        range: [0.0, 1.0],
    }
}

fn sparse_signal() -> SignalSpec {
    SignalSpec::Sparse {
        n: N,
        support: 6,
        amplitude: [-5.0, 5.0],
    }
}

/// Truncated Gaussian blur with radius `3 sigma`, then random samples.
fn blur(sigma: f64, count: usize) -> OperatorSpec {
    OperatorSpec::Convolution {
        kernel: KernelSpec {
            sigma,
            radius: (3.0 * sigma).ceil() as usize,
        },
        samples: SampleSpec::Random { count },
        boundary: Boundary::Truncate,
    }
}

fn default_grid() -> GammaGrid {
    GammaGrid::Log {
        start: 1e-3,
        decades: 3,
        per_decade: 25,
    }
}

fn seeds(count: u64) -> Vec<u64> {
    (0..count).collect()
}

fn jump_preset(name: &str, noise: NoiseModel, p: Fidelity) -> ExperimentConfig {
    ExperimentConfig {
        version: CONFIG_VERSION,
        name: name.into(),
        master_seed: 2014,
        seeds: seeds(20),
        p,
        data_file: None,
        signal: jump_signal(),
        operator: blur(6.0, 138),
        noise,
        gammas: default_grid(),
        methods: vec![
            MethodSpec::Ipotts(AdmmSchedule::default()),
            MethodSpec::Tv(PrimalDualConfig::default()),
        ],
    }
}

fn sparse_preset(name: &str, methods: Vec<MethodSpec>, seed_count: u64, gammas: GammaGrid) -> ExperimentConfig {
    ExperimentConfig {
        version: CONFIG_VERSION,
        name: name.into(),
        master_seed: 2014,
        seeds: seeds(seed_count),
        p: Fidelity::L2,
        data_file: None,
        signal: sparse_signal(),
        operator: blur(5.0, N / 2),
        noise: NoiseModel::Gaussian { sigma: 0.05 },
        gammas,
        methods,
    }
}

/// The configuration called `name`, one of [`PRESET_NAMES`].
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let gauss = NoiseModel::Gaussian { sigma: 0.05 };
    Ok(match name {
        "fig1-gauss" => jump_preset(name, gauss, Fidelity::L2),
        "fig1-laplace" => jump_preset(name, NoiseModel::Laplacian { sigma: 0.05 }, Fidelity::L1),
        "fig1-impulse" => jump_preset(
            name,
            NoiseModel::Impulsive {
                fraction: 0.3,
                interval: [0.0, 1.0],
            },
            Fidelity::L1,
        ),
        "fig2-fourier" => ExperimentConfig {
            operator: OperatorSpec::Fourier {
                samples: SampleSpec::EveryKth { step: 2, offset: 0 },
            },
            seeds: seeds(10),
            ..jump_preset(name, gauss, Fidelity::L2)
        },
        "fig5-gauss" => sparse_preset(
            name,
            vec![
                MethodSpec::SparsePotts(AdmmSchedule::default()),
                MethodSpec::Bpdn(PrimalDualConfig::default()),
                MethodSpec::Omp { k_max: 10 },
                MethodSpec::IhtM {
                    ks: vec![6],
                    step: None,
                    iters: 1000,
                },
                MethodSpec::IhtR { step: None, iters: 1000 },
                MethodSpec::SparseDirect(AdmmSchedule::default()),
            ],
            20,
            default_grid(),
        ),
        "fig6-curve" => sparse_preset(
            name,
            vec![
                MethodSpec::SparsePotts(AdmmSchedule::default()),
                MethodSpec::Omp { k_max: 10 },
                MethodSpec::IhtM {
                    ks: (2..=10).collect(),
                    step: None,
                    iters: 1000,
                },
            ],
            20,
            default_grid(),
        ),
        "fig7-energy" => sparse_preset(
            name,
            vec![
                MethodSpec::SparsePotts(AdmmSchedule::default()),
                MethodSpec::SparseDirect(AdmmSchedule::default()),
            ],
            20,
            GammaGrid::List {
                values: (0..12).map(|i| 1e-3 * 10f64.powf(3.0 * f64::from(i) / 11.0)).collect(),
            },
        ),
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?}; valid names: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}
