use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ipotts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipotts"))
        .args(args)
        .env_remove("IPOTTS_OUT")
        .env_remove("IPOTTS_JOBS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn preset_file(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}.toml"));
    let o = ipotts(&["presets", name, "-o", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

/// Preset text reduced to one seed and a short gamma list.
fn small_config(dir: &Path, name: &str, gammas: &str) -> PathBuf {
    let text = fs::read_to_string(preset_file(dir, name)).unwrap();
    let mut out = String::new();
    let mut skip = false;
    for line in text.lines() {
        if line.starts_with("seeds = ") {
            out.push_str("seeds = [3]\n");
            continue;
        }
        if line == "[gammas]" {
            out.push_str(&format!("[gammas]\nkind = \"list\"\nvalues = [{gammas}]\n"));
            skip = true;
            continue;
        }
        if skip && (line.starts_with('[') || line.is_empty()) {
            skip = false;
        }
        if !skip {
            out.push_str(line);
            out.push('\n');
        }
    }
    let path = dir.join(format!("{name}-small.toml"));
    fs::write(&path, out).unwrap();
    path
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn presets_lists_names_and_rejects_unknown() {
    let o = ipotts(&["presets"]);
    assert!(o.status.success());
    let names = String::from_utf8(o.stdout).unwrap();
    assert_eq!(names.lines().count(), 7);
    assert!(names.lines().any(|l| l == "fig7-energy"));

    let o = ipotts(&["presets", "fig9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fig1-gauss") && stderr(&o).contains("fig7-energy"));
}

#[test]
fn presets_show_the_stated_parameters() {
    let fig1 = String::from_utf8(ipotts(&["presets", "fig1-gauss"]).stdout).unwrap();
    for needle in ["sigma = 6.0", "count = 138", "[noise]\nkind = \"gaussian\"\nsigma = 0.05"] {
        assert!(fig1.contains(needle), "missing {needle}");
    }
    let fig5 = String::from_utf8(ipotts(&["presets", "fig5-gauss"]).stdout).unwrap();
    for needle in ["sigma = 5.0", "count = 128", "[noise]\nkind = \"gaussian\"\nsigma = 0.05"] {
        assert!(fig5.contains(needle), "missing {needle}");
    }
}

#[test]
fn emitted_config_round_trips_through_solve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "fig2-fourier", "0.02");
    let out = dir.path().join("out");
    let o = ipotts(&["solve", path_str(&cfg), "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(&cfg).unwrap(), fs::read(out.join("config.toml")).unwrap());
}

#[test]
fn fig1_solve_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset_file(dir.path(), "fig1-gauss");
    let out = dir.path().join("out");
    let o = ipotts(&["solve", path_str(&cfg), "--gamma", "0.1", "--out", path_str(&out), "--plots"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let x = fs::read_to_string(out.join("reconstruction.txt")).unwrap();
    assert_eq!(x.lines().count(), 256);
    assert!(x.lines().all(|l| l.parse::<f64>().is_ok()));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("k,mu,gap,energy,bound,prox_distance,scaled_multiplier\n"));
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("converged       true"));
    assert!(summary.lines().any(|l| l.starts_with("energy ")));
    assert!(summary.lines().any(|l| l.starts_with("count ")));
    assert!(out.join("reconstruction.svg").exists());
}

#[test]
fn malformed_config_exits_one_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(preset_file(dir.path(), "fig1-gauss")).unwrap();
    let bad = dir.path().join("bad.toml");

    fs::write(&bad, text.replace("sigma = 6.0", "sigma = \"wide\"")).unwrap();
    let o = ipotts(&["solve", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("\"wide\", expected f64"), "{}", stderr(&o));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));

    fs::write(&bad, text.replace("jumps = 6", "jumps = 6\nwidth = 3")).unwrap();
    let o = ipotts(&["sweep", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("width"), "{}", stderr(&o));
}

#[test]
fn one_iteration_cap_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(small_config(dir.path(), "fig1-gauss", "0.1")).unwrap();
    let capped = dir.path().join("capped.toml");
    fs::write(&capped, text.replacen("max_iter = 2000", "max_iter = 1", 1)).unwrap();
    let out = dir.path().join("out");
    let o = ipotts(&["solve", path_str(&capped), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(fs::read_to_string(out.join("summary.txt")).unwrap().contains("converged       false"));
}

#[test]
fn sweep_without_seeds_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(small_config(dir.path(), "fig1-gauss", "0.1")).unwrap();
    let empty = dir.path().join("empty.toml");
    fs::write(&empty, text.replace("seeds = [3]", "seeds = []")).unwrap();
    let o = ipotts(&["sweep", path_str(&empty)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seeds"));
}

#[test]
fn single_cell_sweep_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(small_config(dir.path(), "fig1-gauss", "0.05")).unwrap();
    // keep only the first method
    let cut = text.find("[[methods]]\nkind = \"tv\"").unwrap();
    let cfg = dir.path().join("cell.toml");
    fs::write(&cfg, &text[..cut]).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(ipotts(&["solve", path_str(&cfg), "--out", path_str(&a)]).status.success());
    assert!(ipotts(&["sweep", path_str(&cfg), "--out", path_str(&b)]).status.success());
    assert_eq!(
        fs::read_to_string(a.join("results.csv")).unwrap(),
        fs::read_to_string(b.join("results.csv")).unwrap()
    );
}

#[test]
fn sweep_honours_env_overrides_and_writes_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "fig6-curve", "0.01, 0.1");
    let out = dir.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_ipotts"))
        .args(["sweep", path_str(&cfg), "--plots"])
        .env("IPOTTS_OUT", &out)
        .env("IPOTTS_JOBS", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    // sparse_potts twice, omp and iht_m once per count
    assert_eq!(csv.lines().count(), 1 + 2 + 10 + 9);
    assert!(out.join("timings.csv").exists());
    assert!(out.join("psnr_vs_gamma.svg").exists());
    assert!(out.join("error_vs_count.svg").exists());
}

#[test]
fn seed_flag_changes_the_instance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "fig1-gauss", "0.05");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(ipotts(&["solve", path_str(&cfg), "--out", path_str(&a)]).status.success());
    assert!(ipotts(&["solve", path_str(&cfg), "--out", path_str(&b), "--seed", "77"]).status.success());
    assert_ne!(
        fs::read_to_string(a.join("reconstruction.txt")).unwrap(),
        fs::read_to_string(b.join("reconstruction.txt")).unwrap()
    );
}

#[test]
fn compare_reports_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "fig1-gauss", "0.05, 0.2");
    let out = dir.path().join("out");
    let o = ipotts(&["compare", path_str(&cfg), "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.starts_with("method,gamma,param,median_psnr"));
    assert!(table.lines().any(|l| l.starts_with("ipotts,")));
    assert!(table.lines().any(|l| l.starts_with("tv,")));
    assert!(out.join("compare.csv").exists());
}
