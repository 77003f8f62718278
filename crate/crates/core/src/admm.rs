//! ADMM for the inverse Potts problem `gamma ||diff x||_0 + ||A x - b||_p^p`.
//!
//! The split `u = v` gives the iteration
//!
//! ```text
//! u <- argmin (2 gamma / mu) ||diff u||_0 + ||u - (v - lambda / mu)||^2
//! v <- argmin (mu / 2) ||v - (u + lambda / mu)||^2 + ||A v - b||_p^p
//! lambda <- lambda + mu (u - v),   mu <- tau mu
//! ```
//!
//! started from `v = Re(A^* b)`, `lambda = 0`, `mu = gamma * mu0_factor`.
//! The loop stops when `||u - v||^2 < tol`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linops::{dist2_sq, jump_count, norm2_sq, support_size, MeasurementData, MeasurementOperator, Signal};
use crate::potts::{solve_potts_1d_with, PottsOptions};
use crate::tikhonov::Subproblem;
use crate::{data_misfit, sparse, Fidelity};

/// Parameters of one ADMM run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmmConfig {
    pub gamma: f64,
    #[serde(rename = "p")]
    pub fidelity: Fidelity,
    #[serde(default = "defaults::mu0_factor")]
    pub mu0_factor: f64,
    #[serde(default = "defaults::tau")]
    pub tau: f64,
    #[serde(default = "defaults::tol")]
    pub tol: f64,
    #[serde(default = "defaults::max_iter")]
    pub max_iter: usize,
    /// Duality-gap tolerance of the `p = 1` subproblem; `None` picks
    /// `1e-8 (1 + ||b||_1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1_subproblem_tol: Option<f64>,
}

mod defaults {
    pub fn mu0_factor() -> f64 {
        1e-6
    }
    pub fn tau() -> f64 {
        1.05
    }
    pub fn tol() -> f64 {
        1e-6
    }
    pub fn max_iter() -> usize {
        2000
    }
}

impl AdmmConfig {
    pub fn new(gamma: f64, fidelity: Fidelity) -> Self {
        Self {
            gamma,
            fidelity,
            mu0_factor: defaults::mu0_factor(),
            tau: defaults::tau(),
            tol: defaults::tol(),
            max_iter: defaults::max_iter(),
            l1_subproblem_tol: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, value: f64| Err(Error::InvalidArgument(format!("{what} = {value} is invalid")));
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma", self.gamma);
        }
        if !(self.mu0_factor > 0.0 && self.mu0_factor.is_finite()) {
            return bad("mu0_factor", self.mu0_factor);
        }
        if !(self.tau > 1.0 && self.tau.is_finite()) {
            return bad("tau", self.tau);
        }
        if !(self.tol > 0.0) {
            return bad("tol", self.tol);
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if let Some(t) = self.l1_subproblem_tol {
            if !(t > 0.0) {
                return bad("l1_subproblem_tol", t);
            }
        }
        Ok(())
    }

    pub fn mu0(&self) -> f64 {
        self.gamma * self.mu0_factor
    }
}

/// Iterate of the ADMM loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub u: Signal,
    pub v: Signal,
    pub lambda: Vec<f64>,
    pub mu: f64,
    pub k: usize,
}

/// Diagnostics of one iteration `k` (0-based), taken after the multiplier
/// update and before `mu` grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmmRecord {
    pub k: usize,
    pub mu: f64,
    /// `||u - v||^2`.
    pub gap: f64,
    /// Objective at the new `u`.
    pub energy: f64,
    /// `gamma n / mu`.
    pub bound: f64,
    /// `||u - (v_prev - lambda_prev / mu)||^2`, the distance the first
    /// subproblem moved from its data.
    pub prox_distance: f64,
    /// `||lambda / mu||` after the update.
    pub scaled_multiplier: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdmmTrace {
    pub records: Vec<AdmmRecord>,
}

impl AdmmTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&AdmmRecord> {
        self.records.last()
    }

    /// CSV with columns `k,mu,gap,energy,bound`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["k", "mu", "gap", "energy", "bound"])?;
        for r in &self.records {
            out.write_record([
                r.k.to_string(),
                format!("{:e}", r.mu),
                format!("{:e}", r.gap),
                format!("{:e}", r.energy),
                format!("{:e}", r.bound),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Result of an ADMM run. Hitting `max_iter` is not an error; it is reported
/// through `converged`.
#[derive(Debug, Clone)]
pub struct AdmmOutcome {
    pub solution: Signal,
    pub trace: AdmmTrace,
    pub converged: bool,
    pub state: AdmmState,
}

impl AdmmOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// `gamma ||diff x||_0 + ||A x - b||_p^p`.
pub fn potts_energy(
    op: &MeasurementOperator,
    b: &MeasurementData,
    gamma: f64,
    fidelity: Fidelity,
    x: &[f64],
) -> Result<f64> {
    Ok(gamma * jump_count(x) as f64 + data_misfit(op, b, fidelity, x)?)
}

/// Runs the iPotts ADMM. `init` replaces the starting `v = Re(A^* b)`.
pub fn run_ipotts_admm(
    op: &MeasurementOperator,
    b: &MeasurementData,
    cfg: &AdmmConfig,
    init: Option<&Signal>,
) -> Result<AdmmOutcome> {
    run(op, b, cfg, init, Penalty::Jumps)
}

/// Which `l0` term the first subproblem handles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Penalty {
    /// `||diff u||_0`, solved by the Potts dynamic program.
    Jumps,
    /// `||u||_0`, solved by hard thresholding.
    Support,
}

impl Penalty {
    fn count(self, x: &[f64]) -> usize {
        match self {
            Self::Jumps => jump_count(x),
            Self::Support => support_size(x),
        }
    }

    fn prox(self, d: &[f64], delta: f64) -> Result<Vec<f64>> {
        match self {
            Self::Jumps => Ok(solve_potts_1d_with(d, delta, PottsOptions { prune: true })?
                .into_values()
                .into_inner()),
            Self::Support => Ok(sparse::hard_threshold(d, delta)),
        }
    }
}

pub(crate) fn run(
    op: &MeasurementOperator,
    b: &MeasurementData,
    cfg: &AdmmConfig,
    init: Option<&Signal>,
    penalty: Penalty,
) -> Result<AdmmOutcome> {
    cfg.validate()?;
    check_len("ADMM data", op.output_len(), b.len())?;
    if b.is_complex() != op.is_complex() {
        return Err(Error::InvalidArgument("data and operator disagree on complexity".into()));
    }
    let n = op.input_len();
    let mut v = match init {
        Some(v0) => {
            check_len("ADMM initial iterate", n, v0.len())?;
            v0.as_slice().to_vec()
        }
        None => op.adjoint_stacked(&b.stacked()),
    };
    let mut sub = Subproblem::new(op, b, cfg.fidelity, cfg.l1_subproblem_tol)?;
    let mut lambda = vec![0.0; n];
    let mut mu = cfg.mu0();
    let mut u = vec![0.0; n];
    let mut trace = AdmmTrace::default();
    let mut converged = false;
    let mut d = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..cfg.max_iter {
        for i in 0..n {
            d[i] = v[i] - lambda[i] / mu;
        }
        u = penalty.prox(&d, 2.0 * cfg.gamma / mu)?;
        let prox_distance = dist2_sq(&u, &d);
        for i in 0..n {
            w[i] = u[i] + lambda[i] / mu;
        }
        v = sub.solve(mu / 2.0, &w)?.into_inner();
        for i in 0..n {
            lambda[i] += mu * (u[i] - v[i]);
        }
        let gap = dist2_sq(&u, &v);
        let energy = cfg.gamma * penalty.count(&u) as f64 + data_misfit(op, b, cfg.fidelity, &u)?;
        trace.records.push(AdmmRecord {
            k,
            mu,
            gap,
            energy,
            bound: cfg.gamma * n as f64 / mu,
            prox_distance,
            scaled_multiplier: norm2_sq(&lambda).sqrt() / mu,
        });
        if gap < cfg.tol {
            converged = true;
            break;
        }
        mu *= cfg.tau;
    }
    let state = AdmmState {
        u: u.clone().into(),
        v: v.into(),
        lambda,
        mu,
        k: trace.len(),
    };
    Ok(AdmmOutcome {
        solution: u.into(),
        trace,
        converged,
        state,
    })
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::linops::{gaussian_kernel, Boundary, IndexSet, Vector};

    #[test]
    fn energy_examples() {
        let id2 = MeasurementOperator::identity(2);
        let zero = Vector::Real(vec![0.0; 2]);
        assert_eq!(potts_energy(&id2, &zero, 3.0, Fidelity::L2, &[1.0, 1.0]).unwrap(), 2.0);
        let id3 = MeasurementOperator::identity(3);
        let zero3 = Vector::Real(vec![0.0; 3]);
        assert_eq!(potts_energy(&id3, &zero3, 1.0, Fidelity::L1, &[0.0, 1.0, 1.0]).unwrap(), 3.0);
        let b = Vector::Real(vec![4.0; 3]);
        assert_eq!(potts_energy(&id3, &b, 7.0, Fidelity::L2, &[4.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = AdmmConfig::new(0.5, Fidelity::L2);
        assert_eq!(cfg.mu0(), 0.5e-6);
        assert_eq!((cfg.tau, cfg.tol, cfg.max_iter), (1.05, 1e-6, 2000));
        assert!(cfg.validate().is_ok());
        assert!(AdmmConfig { tau: 1.0, ..cfg }.validate().is_err());
        assert!(AdmmConfig { gamma: 0.0, ..cfg }.validate().is_err());
        assert!(AdmmConfig { max_iter: 0, ..cfg }.validate().is_err());
    }

    #[test]
    fn identity_recovers_noiseless_plateaus() {
        let x: Vec<f64> = (0..20).map(|i| if i < 8 { 1.0 } else { -0.5 }).collect();
        let op = MeasurementOperator::identity(20);
        let b = Vector::Real(x.clone());
        let cfg = AdmmConfig::new(0.01 * 1.5 * 1.5, Fidelity::L2);
        let out = run_ipotts_admm(&op, &b, &cfg, None).unwrap();
        assert!(out.converged);
        // the stopping rule leaves an offset of the order of lambda / mu
        assert_eq!(out.solution.jump_count(), 1);
        assert_eq!(crate::potts::PiecewiseSignal::from_values(out.solution.clone()).jumps(), &[7]);
        for (u, e) in out.solution.iter().zip(&x) {
            assert!((u - e).abs() < 1e-4);
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let op = MeasurementOperator::dense(DMatrix::from_fn(5, 9, |_, _| rng.gen_range(-1.0..1.0)));
        let b = Vector::Real(vec![0.0; 5]);
        for fidelity in [Fidelity::L2, Fidelity::L1] {
            let out = run_ipotts_admm(&op, &b, &AdmmConfig::new(0.3, fidelity), None).unwrap();
            assert!(out.solution.iter().all(|x| *x == 0.0));
            assert!(out.converged);
        }
    }

    #[test]
    fn huge_initial_penalty_stops_at_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let op = MeasurementOperator::identity(30);
        let b = Vector::Real(data.clone());
        let cfg = AdmmConfig {
            mu0_factor: 1e6,
            ..AdmmConfig::new(0.1, Fidelity::L2)
        };
        let out = run_ipotts_admm(&op, &b, &cfg, None).unwrap();
        assert!(out.converged);
        assert!(out.iterations() <= 3);
        let delta = 2.0 * cfg.gamma / cfg.mu0();
        let first = solve_potts_1d_with(&data, delta, PottsOptions::default()).unwrap();
        assert!(dist2_sq(first.values(), &data) <= delta * 29.0);
    }

    fn blurred_instance(seed: u64) -> (MeasurementOperator, MeasurementData) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 64;
        let samples = IndexSet::random(n, 40, &mut rng).unwrap();
        let op = MeasurementOperator::partial_convolution(gaussian_kernel(2.0, 6).unwrap(), samples, Boundary::Truncate)
            .unwrap();
        let x: Vec<f64> = (0..n).map(|i| [0.2, 0.9, 0.4][(i * 3) / n]).collect();
        let mut b = op.apply(&x).unwrap().stacked();
        b.iter_mut().for_each(|y| *y += rng.gen_range(-0.02..0.02));
        (op, Vector::Real(b))
    }

    #[test]
    fn bound_holds_and_run_converges_on_blurred_data() {
        for fidelity in [Fidelity::L2, Fidelity::L1] {
            let (op, b) = blurred_instance(21);
            let cfg = AdmmConfig::new(0.05, fidelity);
            let out = run_ipotts_admm(&op, &b, &cfg, None).unwrap();
            assert!(out.converged, "{fidelity:?}");
            for r in &out.trace.records {
                // the first subproblem's minimality gives 2 gamma (n - 1) / mu
                assert!(r.prox_distance <= 2.0 * cfg.gamma * 63.0 / r.mu);
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let (op, b) = blurred_instance(22);
        let cfg = AdmmConfig::new(0.05, Fidelity::L2);
        let a = run_ipotts_admm(&op, &b, &cfg, None).unwrap();
        let c = run_ipotts_admm(&op, &b, &cfg, None).unwrap();
        assert_eq!(a.trace, c.trace);
        assert_eq!(a.solution, c.solution);
    }

    #[test]
    fn cap_is_reported_not_raised() {
        let (op, b) = blurred_instance(23);
        let cfg = AdmmConfig {
            max_iter: 1,
            ..AdmmConfig::new(0.05, Fidelity::L2)
        };
        let out = run_ipotts_admm(&op, &b, &cfg, None).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations(), 1);
    }

    #[test]
    fn trace_csv_columns() {
        let (op, b) = blurred_instance(24);
        let cfg = AdmmConfig {
            max_iter: 3,
            ..AdmmConfig::new(0.05, Fidelity::L2)
        };
        let out = run_ipotts_admm(&op, &b, &cfg, None).unwrap();
        let mut buf = Vec::new();
        out.trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("k,mu,gap,energy,bound"));
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn config_serde_round_trip() {
        let cfg = AdmmConfig {
            l1_subproblem_tol: Some(1e-9),
            ..AdmmConfig::new(0.02, Fidelity::L1)
        };
        let text = toml::to_string(&cfg).unwrap();
        let back: AdmmConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let minimal: AdmmConfig = toml::from_str("gamma = 0.1\np = 2\n").unwrap();
        assert_eq!(minimal, AdmmConfig::new(0.1, Fidelity::L2));
    }
}
