//! Subcommands: each writes its artifacts plus a `manifest.json` into one directory.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use gqnfit::calibration::{write_calibration, CalibrationManifest};
use gqnfit::epr::DrawsManifest;
use gqnfit::metrics::{write_residuals_csv, ScoreReport};
use gqnfit::table::sha256_hex;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::panel_io::{attach_latent, read_panel, write_latent, write_panel};
use crate::pipeline::{build_basis, build_domain, calibrate, run_fit, simulate_study, FitInputs, Panel, Study, TimeAxis};

/// Enough to re-run a command: the config (with its hash), seed and version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_sha256: Option<String>,
    pub files: Vec<String>,
    pub config: RunConfig,
}

fn manifest(cmd: &str, cfg: &RunConfig, data_sha256: Option<String>, files: &[&str]) -> CliResult<RunManifest> {
    let mut echo = cfg.clone();
    echo.output = None;
    let text = toml::to_string(&echo).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(RunManifest {
        command: cmd.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        config_sha256: sha256_hex(text.as_bytes()),
        data_sha256,
        files: files.iter().map(|s| s.to_string()).collect(),
        config: echo,
    })
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn create(path: PathBuf) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn panel_bytes(panel: &Panel) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write_panel(panel, false, &mut buf)?;
    Ok(buf)
}

/// Writes `latent.csv`, `observations.csv`, `truth.csv` (when `horizon > 0`)
/// and `manifest.json`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    std::fs::create_dir_all(out)?;
    let domain = build_domain(cfg)?;
    let study = simulate_study(cfg, &domain)?;
    let obs = panel_bytes(&study.fit)?;
    std::fs::write(out.join("observations.csv"), &obs)?;
    write_latent(&study.fit, create(out.join("latent.csv"))?)?;
    let mut files = vec!["observations.csv", "latent.csv"];
    if let Some(f) = &study.forecast {
        write_panel(f, true, create(out.join("truth.csv"))?)?;
        files.push("truth.csv");
    }
    files.push("manifest.json");
    write_json(&out.join("manifest.json"), &manifest("simulate", cfg, Some(sha256_hex(&obs)), &files)?)
}

/// Observation and forecast panels: from `[data]` files when given, else the
/// simulated study.
pub fn load_inputs(cfg: &RunConfig, domain: &gqnfit::dynamics::SpatialDomain<f64>) -> CliResult<Study> {
    match &cfg.data.observations {
        None => simulate_study(cfg, domain),
        Some(path) => {
            let mut fit = read_panel(File::open(path)?)?;
            if let Some(l) = &cfg.data.latent {
                attach_latent(&mut fit, File::open(l)?)?;
            }
            let forecast = match &cfg.data.truth {
                Some(t) => Some(read_panel(File::open(t)?)?),
                None => None,
            };
            Ok(Study { fit, forecast, beta: cfg.data.beta.clone().unwrap_or_default() })
        }
    }
}

/// Writes `basis.csv`, `basis.json` and `manifest.json`.
pub fn cmd_basis(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    std::fs::create_dir_all(out)?;
    let domain = build_domain(cfg)?;
    let study = load_inputs(cfg, &domain)?;
    let axis = TimeAxis::from_panels(&study.fit, study.forecast.as_ref())?;
    let basis = build_basis(cfg, &domain, &axis)?;
    basis.write_csv(create(out.join("basis.csv"))?)?;
    basis.write_sidecar(create(out.join("basis.json"))?)?;
    for w in &basis.warnings {
        eprintln!("warning: {w}");
    }
    let data = sha256_hex(&panel_bytes(&study.fit)?);
    write_json(&out.join("manifest.json"), &manifest("basis", cfg, Some(data), &["basis.csv", "basis.json", "manifest.json"])?)
}

/// Writes `K.csv`, `K_sqrt.csv`, `L.csv`, `calibration.json` and `manifest.json`.
pub fn cmd_calibrate(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let domain = build_domain(cfg)?;
    let study = load_inputs(cfg, &domain)?;
    let axis = TimeAxis::from_panels(&study.fit, study.forecast.as_ref())?;
    let basis = build_basis(cfg, &domain, &axis)?;
    let cal = calibrate(cfg, &domain, &axis, &basis)?;
    let prior = cfg.ensemble_prior()?;
    let cm = CalibrationManifest::new(&cal, &prior, cfg.calibration.replicates, cfg.seed)?;
    write_calibration(out, &cal, &cm)?;
    let data = sha256_hex(&panel_bytes(&study.fit)?);
    let files = ["K.csv", "K_sqrt.csv", "L.csv", "calibration.json", "manifest.json"];
    write_json(&out.join("manifest.json"), &manifest("calibrate", cfg, Some(data), &files)?)
}

/// Writes `draws.csv`, `draws.json`, `report.json`, `report.csv`,
/// `residuals.csv` and `manifest.json`.
pub fn cmd_fit(cfg: &RunConfig, out: &Path, timing: bool) -> CliResult<ScoreReport> {
    std::fs::create_dir_all(out)?;
    let domain = build_domain(cfg)?;
    let study = load_inputs(cfg, &domain)?;
    let beta = (!study.beta.is_empty()).then_some(study.beta.as_slice());
    let inputs = FitInputs { domain: &domain, fit: &study.fit, forecast: study.forecast.as_ref(), beta };
    let fit = run_fit(cfg, &inputs, timing)?;

    fit.draws.write_csv(create(out.join("draws.csv"))?)?;
    let dm = DrawsManifest {
        seed: cfg.seed,
        family: cfg.family,
        n: fit.n_train,
        p: fit.p,
        r: fit.r,
        n_reps: fit.draws.n_reps(),
        hyperprior: cfg.fit.hyperprior.clone(),
    };
    write_json(&out.join("draws.json"), &dm)?;
    write_json(&out.join("report.json"), &fit.report)?;
    ScoreReport::write_csv(std::slice::from_ref(&fit.report), create(out.join("report.csv"))?)?;
    write_residuals_csv(&fit.residuals, create(out.join("residuals.csv"))?)?;
    let data = sha256_hex(&panel_bytes(&study.fit)?);
    let files = ["draws.csv", "draws.json", "report.json", "report.csv", "residuals.csv", "manifest.json"];
    write_json(&out.join("manifest.json"), &manifest("fit", cfg, Some(data), &files)?)?;
    Ok(fit.report)
}

/// Merges the reports of fitted runs into `compare.csv` / `compare.json`.
/// Runs must share the same observations.
pub fn cmd_compare(runs: &[PathBuf], out: &Path) -> CliResult<()> {
    if runs.len() < 2 {
        return Err(CliError::Config("compare needs at least two run directories".into()));
    }
    let mut reports = Vec::new();
    let mut data: Option<String> = None;
    for dir in runs {
        let m: RunManifest = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
        if m.command != "fit" {
            return Err(CliError::Runtime(format!("{} is not a fit run", dir.display())));
        }
        match (&data, &m.data_sha256) {
            (None, d) => data = d.clone(),
            (Some(a), Some(b)) if a == b => {}
            _ => return Err(CliError::Runtime(format!("{} was fitted to different data", dir.display()))),
        }
        let mut r: ScoreReport = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json"))?)?;
        r.label.get_or_insert_with(|| m.config.calibration.target.label().into());
        reports.push(r);
    }
    std::fs::create_dir_all(out)?;
    ScoreReport::write_csv(&reports, create(out.join("compare.csv"))?)?;
    write_json(&out.join("compare.json"), &reports)
}
