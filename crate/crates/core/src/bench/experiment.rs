//! Sweep engine: one instance per seed, one cell per `(seed, method, gamma)`.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;

use super::config::{ExperimentConfig, MethodSpec};
use super::metrics::psnr;
use super::records::{ResultRecord, TimingRecord};
use super::rng::{stream, Purpose};
use crate::admm::{potts_energy, run_ipotts_admm, AdmmTrace};
use crate::baselines::{solve_bpdn, solve_iht, solve_omp, solve_tv, IhtMode};
use crate::error::{Error, Result};
use crate::linops::{jump_count, operator_norm, support_size, MeasurementData, MeasurementOperator, Signal};
use crate::par::{self, Parallelism};
use crate::sparse::{solve_sparse_direct_admm, solve_sparse_via_potts, sparsity_energy, SparseProblem};
use crate::{data_misfit, Fidelity};

use super::noise::add_noise;

/// Forward model, data and (for synthetic data) ground truth of one seed.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub truth: Option<Signal>,
    pub op: MeasurementOperator,
    pub data: MeasurementData,
}

/// Builds the instance of `seed`. Signal, sample set and noise come from
/// separate streams, so none of them depends on the grid or the methods.
pub fn build_instance(cfg: &ExperimentConfig, seed: u64) -> Result<Instance> {
    let master = cfg.master_seed;
    let n = cfg.signal.len();
    let op = cfg.operator.build(n, &mut stream(master, seed, Purpose::Samples, 0))?;
    if let Some(path) = &cfg.data_file {
        let data = read_data(path, op.is_complex())?;
        if data.len() != op.output_len() {
            return Err(Error::Config(format!(
                "{}: {} values, operator has {} rows",
                path.display(),
                data.len(),
                op.output_len()
            )));
        }
        return Ok(Instance {
            seed,
            truth: None,
            op,
            data,
        });
    }
    let truth = cfg.signal.generate(&mut stream(master, seed, Purpose::Signal, 0))?;
    let clean = op.apply(truth.as_slice())?;
    let data = add_noise(&clean, &cfg.noise, &mut stream(master, seed, Purpose::Noise, 0))?;
    Ok(Instance {
        seed,
        truth: Some(truth),
        op,
        data,
    })
}

/// Whitespace-separated values, one entry per line; `re im` for complex data.
pub fn read_data(path: &Path, complex: bool) -> Result<MeasurementData> {
    let text = std::fs::read_to_string(path)?;
    let mut real = Vec::new();
    let mut cplx = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::Config(format!("{}:{}: cannot parse {line:?}", path.display(), line_no + 1));
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match (complex, fields.as_slice()) {
            (false, [v]) => real.push(*v),
            (true, [re]) => cplx.push(Complex64::new(*re, 0.0)),
            (true, [re, im]) => cplx.push(Complex64::new(*re, *im)),
            _ => return Err(bad()),
        }
    }
    Ok(if complex {
        MeasurementData::Complex(cplx)
    } else {
        MeasurementData::Real(real)
    })
}

/// Everything one cell produced. Methods parameterized by a count give one
/// entry per count.
#[derive(Debug, Clone)]
pub struct CellOutput {
    pub records: Vec<ResultRecord>,
    pub timings: Vec<TimingRecord>,
    /// Reconstruction belonging to each record; `None` for failed runs.
    pub solutions: Vec<Option<Signal>>,
    /// ADMM trace of ADMM-based methods.
    pub trace: Option<AdmmTrace>,
}

struct Solved {
    param: Option<usize>,
    solution: Signal,
    iterations: Option<usize>,
    converged: Option<bool>,
}

/// Runs `method` on `inst`. `gamma` is ignored by methods that do not use it.
/// Solver errors become a record with the `failure` column set.
pub fn solve_cell(
    cfg: &ExperimentConfig,
    hash: &str,
    inst: &Instance,
    method: &MethodSpec,
    gamma: f64,
) -> CellOutput {
    let start = Instant::now();
    let mut trace = None;
    let result = run_method(cfg.p, inst, method, gamma, &mut trace);
    let seconds = start.elapsed().as_secs_f64();
    let gamma = method.uses_gamma().then_some(gamma);
    let blank = |param: Option<usize>| ResultRecord {
        config_hash: hash.to_string(),
        seed: inst.seed,
        method: method.id().to_string(),
        gamma,
        param,
        psnr: None,
        energy: None,
        count: None,
        truth_count: None,
        exact_structure: None,
        approx_error: None,
        iterations: None,
        converged: None,
        failure: None,
    };
    let mut out = CellOutput {
        records: Vec::new(),
        timings: Vec::new(),
        solutions: Vec::new(),
        trace,
    };
    let timing = |param| TimingRecord {
        seed: inst.seed,
        method: method.id().to_string(),
        gamma,
        param,
        seconds,
    };
    match result {
        Ok(solved) => {
            for s in solved {
                let mut rec = blank(s.param);
                rec.iterations = s.iterations;
                rec.converged = s.converged;
                if let Err(e) = fill_metrics(cfg, inst, gamma, s.solution.as_slice(), &mut rec) {
                    rec.failure = Some(e.to_string());
                }
                out.records.push(rec);
                out.timings.push(timing(s.param));
                out.solutions.push(Some(s.solution));
            }
        }
        Err(e) => {
            let mut rec = blank(None);
            rec.failure = Some(e.to_string());
            if let Error::Uncertified { iterations, .. } = &e {
                rec.iterations = Some(*iterations);
            }
            out.records.push(rec);
            out.timings.push(timing(None));
            out.solutions.push(None);
        }
    }
    out
}

fn run_method(
    p: Fidelity,
    inst: &Instance,
    method: &MethodSpec,
    gamma: f64,
    trace: &mut Option<AdmmTrace>,
) -> Result<Vec<Solved>> {
    let (op, b) = (&inst.op, &inst.data);
    let single = |solution: Signal, iterations, converged| {
        vec![Solved {
            param: None,
            solution,
            iterations,
            converged,
        }]
    };
    let sparse = SparseProblem {
        op,
        b,
        gamma,
        fidelity: p,
    };
    Ok(match method {
        MethodSpec::Ipotts(s) => {
            let out = run_ipotts_admm(op, b, &s.with(gamma, p), None)?;
            let (it, conv) = (out.iterations(), out.converged);
            *trace = Some(out.trace);
            single(out.solution, Some(it), Some(conv))
        }
        MethodSpec::SparsePotts(s) | MethodSpec::SparseDirect(s) => {
            let schedule = s.with(gamma, p);
            let out = if matches!(method, MethodSpec::SparsePotts(_)) {
                solve_sparse_via_potts(&sparse, &schedule)?
            } else {
                solve_sparse_direct_admm(&sparse, &schedule)?
            };
            let (it, conv) = (out.admm.iterations(), out.admm.converged);
            *trace = Some(out.admm.trace);
            single(out.solution, Some(it), Some(conv))
        }
        MethodSpec::Tv(c) => single(solve_tv(op, b, gamma, p, c)?.solution, Some(c.iterations), None),
        MethodSpec::Bpdn(c) => single(solve_bpdn(op, b, gamma, p, c)?.solution, Some(c.iterations), None),
        MethodSpec::Omp { k_max } => {
            let k_max = (*k_max).min(op.input_len().min(op.output_len()));
            let out = solve_omp(op, b, k_max)?;
            (1..=k_max)
                .map(|k| {
                    Ok(Solved {
                        param: Some(k),
                        solution: out.iterate(op, b, k)?,
                        iterations: Some(k.min(out.atoms.len())),
                        converged: None,
                    })
                })
                .collect::<Result<_>>()?
        }
        MethodSpec::IhtM { ks, step, iters } => {
            let step = default_step(op, *step)?;
            ks.iter()
                .map(|&k| {
                    Ok(Solved {
                        param: Some(k),
                        solution: solve_iht(op, b, IhtMode::MTerm { k }, step, *iters)?.solution,
                        iterations: Some(*iters),
                        converged: None,
                    })
                })
                .collect::<Result<_>>()?
        }
        MethodSpec::IhtR { step, iters } => {
            let step = default_step(op, *step)?;
            let out = solve_iht(op, b, IhtMode::Regularized { gamma }, step, *iters)?;
            single(out.solution, Some(*iters), None)
        }
    })
}

fn default_step(op: &MeasurementOperator, step: Option<f64>) -> Result<f64> {
    match step {
        Some(s) => Ok(s),
        None => {
            let norm = operator_norm(op, 1e-10)?;
            Ok(1.0 / (norm * norm))
        }
    }
}

fn fill_metrics(
    cfg: &ExperimentConfig,
    inst: &Instance,
    gamma: Option<f64>,
    x: &[f64],
    rec: &mut ResultRecord,
) -> Result<()> {
    let sparse = cfg.signal.is_sparse();
    let count = |v: &[f64]| if sparse { support_size(v) } else { jump_count(v) };
    rec.count = Some(count(x));
    rec.approx_error = Some(data_misfit(&inst.op, &inst.data, Fidelity::L2, x)?);
    if let Some(g) = gamma {
        rec.energy = Some(if sparse {
            sparsity_energy(&inst.op, &inst.data, g, cfg.p, x)?
        } else {
            potts_energy(&inst.op, &inst.data, g, cfg.p, x)?
        });
    }
    if let Some(truth) = &inst.truth {
        let t = truth.as_slice();
        rec.truth_count = Some(count(t));
        rec.exact_structure = Some(if sparse {
            support_set(x) == support_set(t)
        } else {
            jump_set(x) == jump_set(t)
        });
        rec.psnr = psnr(x, t).ok();
    }
    Ok(())
}

/// Indices `i` with `x[i + 1] != x[i]`.
pub fn jump_set(x: &[f64]) -> Vec<usize> {
    (0..x.len().saturating_sub(1)).filter(|&i| x[i + 1] != x[i]).collect()
}

/// Indices of nonzero entries.
pub fn support_set(x: &[f64]) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i] != 0.0).collect()
}

/// Records of a sweep, in the order seed, method, gamma, count.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub records: Vec<ResultRecord>,
    pub timings: Vec<TimingRecord>,
    /// Instances that could be built, in seed order.
    pub instances: Vec<Instance>,
    /// Largest ADMM bound violation `prox_distance - bound` over all traces
    /// of ADMM-based runs, if any ran.
    pub max_bound_excess: Option<f64>,
}

/// Runs every cell of `cfg`. An empty gamma grid gives no records.
pub fn run_experiment(cfg: &ExperimentConfig, mode: Parallelism) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let hash = cfg.hash()?;
    let gammas = cfg.gammas.values();
    if gammas.is_empty() {
        return Ok(ExperimentOutput::default());
    }
    let built: Vec<(u64, Result<Instance>)> =
        par::map(mode, cfg.seeds.clone(), |seed| (seed, build_instance(cfg, seed)));
    let mut out = ExperimentOutput::default();
    let mut cells = Vec::new();
    for (seed, inst) in built {
        match inst {
            Ok(inst) => out.instances.push(inst),
            Err(e) => out.records.push(ResultRecord {
                config_hash: hash.clone(),
                seed,
                method: String::new(),
                gamma: None,
                param: None,
                psnr: None,
                energy: None,
                count: None,
                truth_count: None,
                exact_structure: None,
                approx_error: None,
                iterations: None,
                converged: None,
                failure: Some(format!("instance: {e}")),
            }),
        }
    }
    for (i, _) in out.instances.iter().enumerate() {
        for method in &cfg.methods {
            if method.uses_gamma() {
                cells.extend(gammas.iter().map(|&g| (i, method, g)));
            } else {
                cells.push((i, method, f64::NAN));
            }
        }
    }
    let instances = &out.instances;
    let results = par::map(mode, cells, |(i, method, g)| {
        let cell = solve_cell(cfg, &hash, &instances[i], method, g);
        let excess = cell.trace.as_ref().and_then(|t| {
            t.records
                .iter()
                .map(|r| r.prox_distance - r.bound)
                .max_by(f64::total_cmp)
        });
        (cell.records, cell.timings, excess)
    });
    for (records, timings, excess) in results {
        out.records.extend(records);
        out.timings.extend(timings);
        if let Some(e) = excess {
            out.max_bound_excess = Some(out.max_bound_excess.map_or(e, |m: f64| m.max(e)));
        }
    }
    Ok(out)
}
