use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gqnfit"))
}

fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let text = format!(
        "seed = 5\nfamily = \"gaussian\"\n\n[domain]\nkind = \"lattice\"\nrows = 4\ncols = 4\n\n\
         [simulation]\nsteps = 6\nhorizon = 1\n\n[basis]\nr_s = 4\nr_t = 3\nn_mc = 50\n\n\
         [calibration]\nreplicates = 40\n\n[fit]\nn_reps = 60\n{extra}"
    );
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> std::process::Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(out.status.success(), "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(run(&["fit", tmp.path().join("missing.toml").to_str().unwrap(), "--out", "x"]).status.code(), Some(2));

    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "seed = 1\n[domain]\nkind = \"lattice\"\nrows = 2\ncols = 2\n[fit]\nholdout_fraction = 1.0\n").unwrap();
    assert_eq!(run(&["simulate", bad.to_str().unwrap(), "--out", "x"]).status.code(), Some(2));

    let unknown = tmp.path().join("unknown.toml");
    std::fs::write(&unknown, "seed = 1\ncolour = 3\n[domain]\nkind = \"lattice\"\nrows = 2\ncols = 2\n").unwrap();
    assert_eq!(run(&["simulate", unknown.to_str().unwrap(), "--out", "x"]).status.code(), Some(2));

    // Poisson with z = 0 rows and alpha_xi = 0 is a runtime error
    let cfg = small_config(tmp.path(), "[fit.hyperprior]\nalpha_xi = 0.0\n");
    let text = std::fs::read_to_string(&cfg).unwrap();
    std::fs::write(&cfg, text.replace("\"gaussian\"", "\"poisson\"").replace("steps = 6", "steps = 6\nbeta = [-2.0]")).unwrap();
    let out = tmp.path().join("pois");
    let res = run(&["fit", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("alpha_xi"));
}

#[test]
fn simulate_splits_truth_and_optional_fields_are_absent() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "");
    let sim = tmp.path().join("sim");
    ok(&["simulate", cfg.to_str().unwrap(), "--out", sim.to_str().unwrap()]);
    let obs = std::fs::read_to_string(sim.join("observations.csv")).unwrap();
    assert_eq!(obs.lines().count(), 1 + 16 * 6);
    assert!(obs.starts_with("site_id,time,value"));
    let truth = std::fs::read_to_string(sim.join("truth.csv")).unwrap();
    assert_eq!(truth.lines().count(), 1 + 16);
    assert!(json(&sim.join("manifest.json"))["config_sha256"].as_str().unwrap().len() == 64);

    let fit = tmp.path().join("fit");
    let text = std::fs::read_to_string(&cfg).unwrap().replace("horizon = 1", "horizon = 0");
    std::fs::write(&cfg, text).unwrap();
    ok(&["fit", cfg.to_str().unwrap(), "--out", fit.to_str().unwrap()]);
    let report = json(&fit.join("report.json"));
    for absent in ["out_of_sample_mspe", "forecast_error", "auc", "cpu_seconds"] {
        assert!(report.get(absent).is_none(), "{absent} present");
    }
    for present in ["in_sample_mspe", "crps", "waic", "beta_mse"] {
        assert!(report[present].as_f64().unwrap() >= 0.0 || present == "waic");
    }
}

#[test]
fn holdout_and_bernoulli_fields() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "holdout_fraction = 0.25\n");
    let text = std::fs::read_to_string(&cfg).unwrap().replace("\"gaussian\"", "\"bernoulli\"");
    std::fs::write(&cfg, text).unwrap();
    let out = tmp.path().join("fit");
    ok(&["fit", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--timing"]);
    let report = json(&out.join("report.json"));
    let auc = report["auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
    assert!(report["out_of_sample_mspe"].as_f64().unwrap() >= 0.0);
    assert!(report["forecast_error"].as_f64().unwrap() >= 0.0);
    assert!(report["cpu_seconds"].as_f64().unwrap() >= 0.0);
    let residuals = std::fs::read_to_string(out.join("residuals.csv")).unwrap();
    assert!(residuals.starts_with("site_id,time,split,pred,truth,residual"));
    assert!(residuals.contains(",holdout,"));
    assert!(residuals.contains(",forecast,"));
}

#[test]
fn compare_three_horizons() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "");
    let mut dirs = Vec::new();
    for (h, target) in [(1, "gqn"), (2, "var1"), (3, "gqn")] {
        let text = std::fs::read_to_string(&cfg)
            .unwrap()
            .replace("horizon = 1", &format!("horizon = {h}"))
            .replace("replicates = 40", &format!("replicates = 40\ntarget = \"{target}\""));
        let c = tmp.path().join(format!("h{h}.toml"));
        std::fs::write(&c, text).unwrap();
        let out = tmp.path().join(format!("h{h}"));
        ok(&["fit", c.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        dirs.push(out);
    }
    let cmp = tmp.path().join("cmp");
    let mut args: Vec<&str> = vec!["compare"];
    args.extend(dirs.iter().map(|d| d.to_str().unwrap()));
    args.extend(["--out", cmp.to_str().unwrap()]);
    ok(&args);
    let csv = std::fs::read_to_string(cmp.join("compare.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    for col in ["label", "forecast_step_1", "forecast_step_2", "forecast_step_3", "in_sample_mspe"] {
        assert!(header.split(',').any(|c| c == col), "{col} missing from {header}");
    }
    let labels: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["gqn", "var1", "gqn"]);

    // too few runs, and runs on different data
    assert_eq!(run(&["compare", dirs[0].to_str().unwrap(), "--out", cmp.to_str().unwrap()]).status.code(), Some(2));
    let other = tmp.path().join("other");
    ok(&["fit", cfg.to_str().unwrap(), "--seed", "6", "--out", other.to_str().unwrap()]);
    let res = run(&["compare", dirs[0].to_str().unwrap(), other.to_str().unwrap(), "--out", cmp.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn fit_reads_simulated_files() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path(), "");
    let sim = tmp.path().join("sim");
    ok(&["simulate", cfg.to_str().unwrap(), "--out", sim.to_str().unwrap()]);
    let direct = tmp.path().join("direct");
    ok(&["fit", cfg.to_str().unwrap(), "--out", direct.to_str().unwrap()]);

    let text = std::fs::read_to_string(&cfg).unwrap()
        + "\n[data]\nobservations = \"sim/observations.csv\"\nlatent = \"sim/latent.csv\"\ntruth = \"sim/truth.csv\"\nbeta = [1.0]\n";
    std::fs::write(&cfg, text).unwrap();
    let from_files = tmp.path().join("files");
    ok(&["fit", cfg.to_str().unwrap(), "--out", from_files.to_str().unwrap()]);
    let a = json(&direct.join("report.json"));
    let b = json(&from_files.join("report.json"));
    assert_eq!(a["in_sample_mspe"], b["in_sample_mspe"]);
    assert_eq!(a["forecast_error"], b["forecast_error"]);
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["gaussian_study.toml", "bernoulli_study.toml"] {
        let cfg = gqnfit_cli::RunConfig::load(&dir.join(name)).unwrap();
        assert_eq!(cfg.basis.r_s * cfg.basis.r_t.unwrap(), 225);
    }
}
