use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::noise::NoiseModel;
use super::signals::SignalSpec;
use crate::admm::AdmmConfig;
use crate::baselines::PrimalDualConfig;
use crate::error::{Error, Result};
use crate::linops::{gaussian_kernel, Boundary, IndexSet, MeasurementOperator};
use crate::Fidelity;

/// Current schema version of [`ExperimentConfig`].
pub const CONFIG_VERSION: u32 = 1;

/// One experiment: ground truth, forward model, noise, methods, and the
/// `(seed, gamma)` grid to run them on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub name: String,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub p: Fidelity,
    /// Measured data to use instead of synthesizing it; one value per line,
    /// or `re im` pairs for complex operators. Disables ground-truth metrics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_file: Option<PathBuf>,
    pub signal: SignalSpec,
    pub operator: OperatorSpec,
    pub noise: NoiseModel,
    pub gammas: GammaGrid,
    pub methods: Vec<MethodSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Identity,
    /// Convolution with a sampled Gaussian kernel, then row selection.
    Convolution {
        kernel: KernelSpec,
        samples: SampleSpec,
        boundary: Boundary,
    },
    /// Unitary DFT rows at the sampled frequencies.
    Fourier { samples: SampleSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub sigma: f64,
    pub radius: usize,
}

/// Measured indices (0-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SampleSpec {
    All,
    EveryKth { step: usize, offset: usize },
    /// `count` indices drawn without replacement, per run seed.
    Random { count: usize },
    /// `round(fraction * n)` indices drawn without replacement, per run seed.
    RandomFraction { fraction: f64 },
    List { indices: Vec<usize> },
}

impl SampleSpec {
    /// Resolves the set; random variants draw from `rng`.
    pub fn resolve<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<IndexSet> {
        match self {
            Self::All => Ok(IndexSet::full(n)),
            Self::EveryKth { step, offset } => IndexSet::every_kth(n, *step, *offset),
            Self::Random { count } => IndexSet::random(n, *count, rng),
            Self::RandomFraction { fraction } => {
                if !(0.0..=1.0).contains(fraction) {
                    return Err(Error::Config(format!("sample fraction {fraction} outside [0, 1]")));
                }
                IndexSet::random(n, (fraction * n as f64).round() as usize, rng)
            }
            Self::List { indices } => IndexSet::new(indices.clone(), n),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Self::Random { .. } | Self::RandomFraction { .. })
    }
}

impl OperatorSpec {
    /// Builds the operator for signals of length `n`.
    pub fn build<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<MeasurementOperator> {
        match self {
            Self::Identity => Ok(MeasurementOperator::identity(n)),
            Self::Convolution {
                kernel,
                samples,
                boundary,
            } => MeasurementOperator::partial_convolution(
                gaussian_kernel(kernel.sigma, kernel.radius)?,
                samples.resolve(n, rng)?,
                *boundary,
            ),
            Self::Fourier { samples } => Ok(MeasurementOperator::partial_fourier(samples.resolve(n, rng)?)),
        }
    }
}

/// Regularization parameters to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaGrid {
    List { values: Vec<f64> },
    /// `start * 10^(i / per_decade)` for `i = 0 ..= decades * per_decade`.
    Log { start: f64, decades: u32, per_decade: u32 },
}

impl GammaGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::List { values } => values.clone(),
            Self::Log {
                start,
                decades,
                per_decade,
            } => {
                let steps = decades * per_decade;
                (0..=steps)
                    .map(|i| start * 10f64.powf(f64::from(i) / f64::from((*per_decade).max(1))))
                    .collect()
            }
        }
    }
}

/// Schedule of an ADMM-based method; `gamma` and `p` come from the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmmSchedule {
    #[serde(default = "schedule_defaults::mu0_factor")]
    pub mu0_factor: f64,
    #[serde(default = "schedule_defaults::tau")]
    pub tau: f64,
    #[serde(default = "schedule_defaults::tol")]
    pub tol: f64,
    #[serde(default = "schedule_defaults::max_iter")]
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1_subproblem_tol: Option<f64>,
}

mod schedule_defaults {
    use crate::admm::AdmmConfig;
    use crate::Fidelity;

    fn base() -> AdmmConfig {
        AdmmConfig::new(1.0, Fidelity::L2)
    }
    pub fn mu0_factor() -> f64 {
        base().mu0_factor
    }
    pub fn tau() -> f64 {
        base().tau
    }
    pub fn tol() -> f64 {
        base().tol
    }
    pub fn max_iter() -> usize {
        base().max_iter
    }
}

impl Default for AdmmSchedule {
    fn default() -> Self {
        let base = AdmmConfig::new(1.0, Fidelity::L2);
        Self {
            mu0_factor: base.mu0_factor,
            tau: base.tau,
            tol: base.tol,
            max_iter: base.max_iter,
            l1_subproblem_tol: None,
        }
    }
}

impl AdmmSchedule {
    pub fn with(&self, gamma: f64, fidelity: Fidelity) -> AdmmConfig {
        AdmmConfig {
            gamma,
            fidelity,
            mu0_factor: self.mu0_factor,
            tau: self.tau,
            tol: self.tol,
            max_iter: self.max_iter,
            l1_subproblem_tol: self.l1_subproblem_tol,
        }
    }
}

/// A solver in an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodSpec {
    /// Inverse Potts ADMM.
    Ipotts(AdmmSchedule),
    /// Total variation, primal-dual.
    Tv(PrimalDualConfig),
    /// Sparsity problem through the lifted inverse Potts problem.
    SparsePotts(AdmmSchedule),
    /// Sparsity problem by ADMM with hard thresholding.
    SparseDirect(AdmmSchedule),
    /// Basis pursuit denoising, primal-dual.
    Bpdn(PrimalDualConfig),
    /// Orthogonal matching pursuit; one record per atom count `1..=k_max`.
    Omp { k_max: usize },
    /// M-term iterative hard thresholding; one record per `k`. `step`
    /// defaults to `1 / ||A||^2`.
    IhtM {
        ks: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<f64>,
        iters: usize,
    },
    /// Regularized iterative hard thresholding at threshold `step * gamma`.
    IhtR {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<f64>,
        iters: usize,
    },
}

impl MethodSpec {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Ipotts(_) => "ipotts",
            Self::Tv(_) => "tv",
            Self::SparsePotts(_) => "sparse_potts",
            Self::SparseDirect(_) => "sparse_direct",
            Self::Bpdn(_) => "bpdn",
            Self::Omp { .. } => "omp",
            Self::IhtM { .. } => "iht_m",
            Self::IhtR { .. } => "iht_r",
        }
    }

    /// Whether the method is run once per grid value of `gamma`.
    pub fn uses_gamma(&self) -> bool {
        !matches!(self, Self::Omp { .. } | Self::IhtM { .. })
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.version != CONFIG_VERSION {
            return fail(format!("unsupported version {} (expected {CONFIG_VERSION})", self.version));
        }
        if self.seeds.is_empty() {
            return fail("seeds: at least one seed is required".into());
        }
        if self.methods.is_empty() {
            return fail("methods: at least one method is required".into());
        }
        if self.signal.is_empty() {
            return fail("signal.n must be positive".into());
        }
        if let Some(bad) = self.gammas.values().into_iter().find(|g| !(*g > 0.0 && g.is_finite())) {
            return fail(format!("gammas: value {bad} is not positive"));
        }
        self.noise.validate().map_err(|e| Error::Config(format!("noise: {e}")))?;
        if let OperatorSpec::Convolution { kernel, .. } = &self.operator {
            gaussian_kernel(kernel.sigma, kernel.radius).map_err(|e| Error::Config(format!("operator.kernel: {e}")))?;
        }
        for (i, method) in self.methods.iter().enumerate() {
            let schedule = match method {
                MethodSpec::Ipotts(s) | MethodSpec::SparsePotts(s) | MethodSpec::SparseDirect(s) => Some(s),
                _ => None,
            };
            if let Some(s) = schedule {
                s.with(1.0, self.p)
                    .validate()
                    .map_err(|e| Error::Config(format!("methods[{i}]: {e}")))?;
            }
            if let MethodSpec::IhtM { step: Some(s), .. } | MethodSpec::IhtR { step: Some(s), .. } = method {
                if !(*s > 0.0) {
                    return fail(format!("methods[{i}]: step must be positive"));
                }
            }
        }
        Ok(())
    }
}
