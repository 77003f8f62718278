//! Signal generators, noise models, metrics and the experiment engine.

pub mod config;
pub mod experiment;
pub mod metrics;
pub mod noise;
pub mod plot;
pub mod presets;
pub mod records;
pub mod rng;
pub mod signals;

pub use config::{ExperimentConfig, GammaGrid, MethodSpec, OperatorSpec, SampleSpec};
pub use experiment::{build_instance, run_experiment, solve_cell, ExperimentOutput, Instance};
pub use metrics::{psnr, Psnr};
pub use noise::{add_noise, NoiseModel};
pub use presets::{preset, PRESET_NAMES};
pub use records::{read_records, write_records, write_timings, ResultRecord, TimingRecord};
pub use signals::{gen_jump_sparse, gen_sparse, SignalSpec};
