//! `ipotts` command-line front end.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ipotts::admm::AdmmTrace;
use ipotts::bench::plot::{plot_error_vs_count, plot_psnr_vs_gamma, plot_signals, Series};
use ipotts::bench::{
    build_instance, preset, run_experiment, solve_cell, write_records, write_timings, ExperimentConfig,
    ExperimentOutput, ResultRecord, PRESET_NAMES,
};
use ipotts::par::Parallelism;

#[derive(Parser)]
#[command(name = "ipotts", version, about = "Jump-sparse and sparse signal recovery with inverse Potts ADMM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print progress to stderr; repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem: first seed, first method and first gamma unless overridden.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Instance seed to solve instead of the first listed seed.
        #[arg(long)]
        instance: Option<u64>,
        /// Method id to run instead of the first listed method.
        #[arg(long)]
        method: Option<String>,
        /// Regularization weight instead of the first grid value.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Run a built-in preset sweep.
    Experiment {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the full seed x method x gamma sweep of a config file.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep a config file or preset and print the best setting of each method.
    Compare {
        /// Config file path or preset name.
        target: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print a preset config, or list the preset names.
    Presets {
        name: Option<String>,
        /// Write the config to this file instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, env = "IPOTTS_OUT", default_value = "out")]
    out: PathBuf,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, env = "IPOTTS_JOBS")]
    jobs: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,
}

/// Failure with an exit code attached.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn config_error(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 1, error: error.into() }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            config,
            common,
            instance,
            method,
            gamma,
        } => cmd_solve(&config, &common, instance, method.as_deref(), gamma, cli.verbose),
        Command::Experiment { name, common } => preset(&name)
            .map_err(|_| unknown_preset(&name))
            .and_then(|cfg| cmd_sweep(cfg, &common, cli.verbose)),
        Command::Sweep { config, common } => load(&config).and_then(|cfg| cmd_sweep(cfg, &common, cli.verbose)),
        Command::Compare { target, common } => cmd_compare(&target, &common, cli.verbose),
        Command::Presets { name, output } => cmd_presets(name.as_deref(), output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn unknown_preset(name: &str) -> Failure {
    config_error(anyhow::anyhow!(
        "unknown preset '{name}'; valid names: {}",
        PRESET_NAMES.join(", ")
    ))
}

fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::load(path).map_err(config_error)
}

fn apply_seed(cfg: &mut ExperimentConfig, common: &Common) {
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
}

fn io_failure(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 1, error: error.into() }
}

fn create_file(path: &Path) -> Result<fs::File, Failure> {
    fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(io_failure)
}

fn prepare_out(dir: &Path, cfg: &ExperimentConfig) -> CmdResult {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .map_err(io_failure)?;
    let text = cfg.to_toml().map_err(io_failure)?;
    fs::write(dir.join("config.toml"), text).map_err(io_failure)
}

fn write_csvs(dir: &Path, out: &ExperimentOutput) -> CmdResult {
    write_records(&out.records, create_file(&dir.join("results.csv"))?).map_err(io_failure)?;
    write_timings(&out.timings, create_file(&dir.join("timings.csv"))?).map_err(io_failure)
}

fn cmd_solve(
    path: &Path,
    common: &Common,
    instance: Option<u64>,
    method: Option<&str>,
    gamma: Option<f64>,
    verbose: u8,
) -> CmdResult {
    let mut cfg = load(path)?;
    apply_seed(&mut cfg, common);
    let seed = instance.unwrap_or(cfg.seeds[0]);
    let spec = match method {
        Some(id) => cfg
            .methods
            .iter()
            .find(|m| m.id() == id)
            .ok_or_else(|| config_error(anyhow::anyhow!("method '{id}' is not listed in the config")))?,
        None => &cfg.methods[0],
    }
    .clone();
    let gamma = match gamma {
        Some(g) if g > 0.0 && g.is_finite() => g,
        Some(g) => return Err(config_error(anyhow::anyhow!("gamma {g} is not positive"))),
        None if spec.uses_gamma() => *cfg
            .gammas
            .values()
            .first()
            .ok_or_else(|| config_error(anyhow::anyhow!("gammas: the grid is empty")))?,
        None => f64::NAN,
    };
    let hash = cfg.hash().map_err(config_error)?;
    let inst = build_instance(&cfg, seed).map_err(config_error)?;
    if verbose > 0 {
        eprintln!("solving seed {seed} with {} at gamma {gamma}", spec.id());
    }
    let cell = solve_cell(&cfg, &hash, &inst, &spec, gamma);
    prepare_out(&common.out, &cfg)?;
    let dir = &common.out;
    write_records(&cell.records, create_file(&dir.join("results.csv"))?).map_err(io_failure)?;
    write_timings(&cell.timings, create_file(&dir.join("timings.csv"))?).map_err(io_failure)?;

    // count methods give one record per count; the last one is the largest
    let last = cell.records.len() - 1;
    let record = &cell.records[last];
    if let Some(x) = &cell.solutions[last] {
        let mut f = create_file(&dir.join("reconstruction.txt"))?;
        for v in x.iter() {
            writeln!(f, "{v}").map_err(io_failure)?;
        }
        if common.plots {
            let mut series = vec![Series::from_signal(spec.id(), x.as_slice())];
            if let Some(t) = &inst.truth {
                series.insert(0, Series::from_signal("truth", t.as_slice()));
            }
            plot_signals(&dir.join("reconstruction.svg"), &cfg.name, &series).map_err(io_failure)?;
        }
    }
    if let Some(trace) = &cell.trace {
        write_trace(&dir.join("trace.csv"), trace)?;
    }
    let summary = summary_text(record);
    fs::write(dir.join("summary.txt"), &summary).map_err(io_failure)?;
    print!("{summary}");

    if let Some(msg) = &record.failure {
        return Err(Failure {
            code: 2,
            error: anyhow::anyhow!("solver failed: {msg}"),
        });
    }
    if record.converged == Some(false) {
        return Err(Failure {
            code: 2,
            error: anyhow::anyhow!("no convergence within {} iterations", record.iterations.unwrap_or(0)),
        });
    }
    Ok(())
}

fn write_trace(path: &Path, trace: &AdmmTrace) -> CmdResult {
    let mut w = csv::Writer::from_writer(create_file(path)?);
    let io = |e: csv::Error| io_failure(e);
    w.write_record(["k", "mu", "gap", "energy", "bound", "prox_distance", "scaled_multiplier"])
        .map_err(io)?;
    for r in &trace.records {
        w.write_record([
            r.k.to_string(),
            r.mu.to_string(),
            r.gap.to_string(),
            r.energy.to_string(),
            r.bound.to_string(),
            r.prox_distance.to_string(),
            r.scaled_multiplier.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(io_failure)
}

fn summary_text(r: &ResultRecord) -> String {
    fn opt<T: ToString>(v: &Option<T>) -> String {
        v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
    }
    let rows = [
        ("config_hash", r.config_hash.clone()),
        ("seed", r.seed.to_string()),
        ("method", r.method.clone()),
        ("gamma", opt(&r.gamma)),
        ("param", opt(&r.param)),
        ("energy", opt(&r.energy)),
        ("count", opt(&r.count)),
        ("truth_count", opt(&r.truth_count)),
        ("exact_structure", opt(&r.exact_structure)),
        ("psnr", opt(&r.psnr)),
        ("approx_error", opt(&r.approx_error)),
        ("iterations", opt(&r.iterations)),
        ("converged", opt(&r.converged)),
        ("failure", opt(&r.failure)),
    ];
    rows.iter().map(|(k, v)| format!("{k:<16}{v}\n")).collect()
}

fn run_sweep(mut cfg: ExperimentConfig, common: &Common, verbose: u8) -> Result<(ExperimentConfig, ExperimentOutput), Failure> {
    apply_seed(&mut cfg, common);
    cfg.validate().map_err(config_error)?;
    if verbose > 0 {
        let methods: Vec<&str> = cfg.methods.iter().map(|m| m.id()).collect();
        eprintln!(
            "{}: {} seeds, {} gammas, methods {}",
            cfg.name,
            cfg.seeds.len(),
            cfg.gammas.values().len(),
            methods.join(" ")
        );
    }
    let out = run_experiment(&cfg, Parallelism::from_jobs(common.jobs)).map_err(config_error)?;
    prepare_out(&common.out, &cfg)?;
    write_csvs(&common.out, &out)?;
    if common.plots {
        write_plots(&common.out, &cfg, &out)?;
    }
    let failed = out.records.iter().filter(|r| r.failure.is_some()).count();
    if verbose > 0 || failed > 0 {
        eprintln!("{} records, {failed} failed", out.records.len());
    }
    Ok((cfg, out))
}

fn cmd_sweep(cfg: ExperimentConfig, common: &Common, verbose: u8) -> CmdResult {
    let (_, out) = run_sweep(cfg, common, verbose)?;
    println!("wrote {} records to {}", out.records.len(), common.out.join("results.csv").display());
    Ok(())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

fn write_plots(dir: &Path, cfg: &ExperimentConfig, out: &ExperimentOutput) -> CmdResult {
    let mut psnr_series = Vec::new();
    let mut error_series = Vec::new();
    for method in &cfg.methods {
        let records: Vec<&ResultRecord> = out.records.iter().filter(|r| r.method == method.id()).collect();
        if method.uses_gamma() {
            let mut by_gamma: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
            for r in &records {
                if let (Some(g), Some(p)) = (r.gamma, r.psnr) {
                    by_gamma.entry(g.to_bits()).or_insert((g, Vec::new())).1.push(p.rank_value());
                }
            }
            let points: Vec<(f64, f64)> = by_gamma.into_values().map(|(g, v)| (g, median(v))).collect();
            if !points.is_empty() {
                psnr_series.push(Series::new(method.id(), points));
            }
        }
        // mean over seeds of the smallest error reached with at most k nonzeros
        let k_max = records.iter().filter_map(|r| r.count).max().unwrap_or(0).min(cfg.signal.len());
        let mut points = Vec::new();
        for k in 0..=k_max {
            let per_seed: Vec<f64> = cfg
                .seeds
                .iter()
                .filter_map(|&s| {
                    records
                        .iter()
                        .filter(|r| r.seed == s && r.count.is_some_and(|c| c <= k))
                        .filter_map(|r| r.approx_error)
                        .min_by(f64::total_cmp)
                })
                .collect();
            if per_seed.len() == cfg.seeds.len() {
                points.push((k as f64, per_seed.iter().sum::<f64>() / per_seed.len() as f64));
            }
        }
        if !points.is_empty() {
            error_series.push(Series::new(method.id(), points));
        }
    }
    if !psnr_series.is_empty() {
        plot_psnr_vs_gamma(&dir.join("psnr_vs_gamma.svg"), &cfg.name, &psnr_series).map_err(io_failure)?;
    }
    if !error_series.is_empty() {
        plot_error_vs_count(&dir.join("error_vs_count.svg"), &cfg.name, &error_series).map_err(io_failure)?;
    }
    Ok(())
}

fn cmd_compare(target: &str, common: &Common, verbose: u8) -> CmdResult {
    let path = Path::new(target);
    let cfg = if path.exists() {
        load(path)?
    } else {
        preset(target).map_err(|_| unknown_preset(target))?
    };
    let (cfg, out) = run_sweep(cfg, common, verbose)?;
    let mut table = String::from("method,gamma,param,median_psnr,exact_rate,median_count,median_error,failures\n");
    for method in &cfg.methods {
        let mut groups: BTreeMap<(u64, Option<usize>), Vec<&ResultRecord>> = BTreeMap::new();
        for r in out.records.iter().filter(|r| r.method == method.id()) {
            groups.entry((r.gamma.unwrap_or(f64::NAN).to_bits(), r.param)).or_default().push(r);
        }
        // best setting by median PSNR, or by median error without ground truth
        let score = |rs: &[&ResultRecord]| {
            let psnrs: Vec<f64> = rs.iter().filter_map(|r| r.psnr.map(|p| p.rank_value())).collect();
            if psnrs.is_empty() {
                -median(rs.iter().filter_map(|r| r.approx_error).collect())
            } else {
                median(psnrs)
            }
        };
        let best = groups
            .values()
            .filter(|rs| rs.iter().any(|r| r.failure.is_none()))
            .max_by(|a, b| score(a).total_cmp(&score(b)));
        let Some(rs) = best else {
            table.push_str(&format!("{},,,,,,,{}\n", method.id(), groups.values().map(Vec::len).sum::<usize>()));
            continue;
        };
        let fmt = |v: f64| if v.is_nan() { String::new() } else { format!("{v:.4}") };
        let psnr = median(rs.iter().filter_map(|r| r.psnr.map(|p| p.rank_value())).collect());
        let exact: Vec<bool> = rs.iter().filter_map(|r| r.exact_structure).collect();
        let rate = if exact.is_empty() {
            f64::NAN
        } else {
            exact.iter().filter(|&&e| e).count() as f64 / exact.len() as f64
        };
        table.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            method.id(),
            rs[0].gamma.map_or_else(String::new, |g| g.to_string()),
            rs[0].param.map_or_else(String::new, |k| k.to_string()),
            fmt(psnr),
            fmt(rate),
            fmt(median(rs.iter().filter_map(|r| r.count).map(|c| c as f64).collect())),
            fmt(median(rs.iter().filter_map(|r| r.approx_error).collect())),
            rs.iter().filter(|r| r.failure.is_some()).count(),
        ));
    }
    fs::write(common.out.join("compare.csv"), &table).map_err(io_failure)?;
    print!("{table}");
    Ok(())
}

fn cmd_presets(name: Option<&str>, output: Option<&Path>) -> CmdResult {
    let Some(name) = name else {
        for n in PRESET_NAMES {
            println!("{n}");
        }
        return Ok(());
    };
    let cfg = preset(name).map_err(|_| unknown_preset(name))?;
    let text = cfg.to_toml().map_err(io_failure)?;
    match output {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(io_failure),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
