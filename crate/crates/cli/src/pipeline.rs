//! In-memory pipeline stages shared by the subcommands.

use std::collections::HashMap;
use std::time::Instant;

use gqnfit::basis::{build_basis_matrix, BasisMatrix, KnotGrid, RowLabel};
use gqnfit::calibration::{calibrate_ensemble, ensemble_covariance, CalibratedCovariance};
use gqnfit::dynamics::{simulate_series, SpatialDomain};
use gqnfit::epr::{
    expand_time_varying, latent_predict, posterior_replicates, replicate_mean, Dataset, EprDesign, Family, PosteriorDraws,
    PredictRows,
};
use gqnfit::metrics::{auc, crps_mean, mspe, waic, ResidualRow, ScoreReport};
use gqnfit::rng::{purpose, stream};
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::config::{DomainConfig, RunConfig};
use crate::error::{CliError, CliResult};

/// Rows of observations with covariates and, for simulations, the latent truth
/// `y = Xβ + U` on the linear-predictor scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub rows: Vec<RowLabel>,
    pub z: Vec<f64>,
    pub x: DMatrix<f64>,
    pub covariates: Vec<String>,
    pub latent: Option<Vec<f64>>,
}

impl Panel {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn select(&self, idx: &[usize]) -> Panel {
        Panel {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            z: idx.iter().map(|&i| self.z[i]).collect(),
            x: self.x.select_rows(idx),
            covariates: self.covariates.clone(),
            latent: self.latent.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect()),
        }
    }
}

/// A simulated study: observed times `1..=T` and forecast times after `T`.
#[derive(Debug, Clone)]
pub struct Study {
    pub fit: Panel,
    pub forecast: Option<Panel>,
    pub beta: Vec<f64>,
}

pub fn build_domain(cfg: &RunConfig) -> CliResult<SpatialDomain<f64>> {
    Ok(match &cfg.domain {
        DomainConfig::Lattice { rows, cols, spacing } => SpatialDomain::lattice(*rows, *cols, [*spacing; 2])?,
        DomainConfig::Geojson { path, id_property } => {
            let text = std::fs::read_to_string(path)?;
            let units = gqnfit::basis::read_geojson_units(&text, id_property.as_deref())?;
            SpatialDomain::areal(units)?
        }
    })
}

fn covariate_names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("x{j}")).collect()
}

fn observe<R: Rng + ?Sized>(family: Family, y: f64, sigma2_z: f64, rng: &mut R) -> CliResult<f64> {
    Ok(match family {
        Family::Gaussian => y + sigma2_z.sqrt() * rng.sample::<f64, _>(StandardNormal),
        Family::Poisson => {
            let mean = y.exp();
            if !(mean.is_finite() && mean > 0.0) {
                return Err(CliError::Runtime(format!("poisson mean exp({y}) is not usable")));
            }
            Poisson::new(mean).map_err(|e| CliError::Runtime(e.to_string()))?.sample(rng)
        }
        Family::Bernoulli => f64::from(u8::from(rng.random::<f64>() < gqnfit::epr::logistic(y))),
    })
}

/// Simulates the latent GQN process, covariates and observations for every
/// time `1..=T + horizon`.
pub fn simulate_study(cfg: &RunConfig, domain: &SpatialDomain<f64>) -> CliResult<Study> {
    let sim = &cfg.simulation;
    let scenario = sim.scenario.resolve()?;
    let spec = scenario.build::<f64, _>(domain, &mut stream(cfg.seed, purpose::SCENARIO, 0))?;
    let total = sim.steps + sim.horizon;
    let series = simulate_series(&spec, domain, total, cfg.seed)?;
    let (n, p) = (domain.n(), sim.beta.len());
    let ids = domain.site_ids();

    let mut cov_rng = stream(cfg.seed, purpose::OBSERVE, 1);
    let mut obs_rng = stream(cfg.seed, purpose::OBSERVE, 0);
    let m = n * total;
    let mut x = DMatrix::from_element(m, p, 1.0);
    for row in 0..m {
        for j in 1..p {
            x[(row, j)] = cov_rng.sample(StandardNormal);
        }
    }
    let beta = DVector::from_column_slice(&sim.beta);
    let mut rows = Vec::with_capacity(m);
    let mut latent = Vec::with_capacity(m);
    let mut z = Vec::with_capacity(m);
    for t in 1..=total {
        for i in 0..n {
            let row = (t - 1) * n + i;
            let y = x.row(row).dot(&beta.transpose()) + series.values[(i, t)];
            rows.push(RowLabel { site_id: ids[i].clone(), time: t as i64 });
            latent.push(y);
            z.push(observe(cfg.family, y, sim.sigma2_z, &mut obs_rng)?);
        }
    }
    let all = Panel { rows, z, x, covariates: covariate_names(p), latent: Some(latent) };
    let split = n * sim.steps;
    let fit = all.select(&(0..split).collect::<Vec<_>>());
    let forecast = (sim.horizon > 0).then(|| all.select(&(split..m).collect::<Vec<_>>()));
    Ok(Study { fit, forecast, beta: sim.beta.clone() })
}

/// Times covered by the model, as consecutive integers.
#[derive(Debug, Clone, Copy)]
pub struct TimeAxis {
    pub first: i64,
    pub last_observed: i64,
    pub last: i64,
}

impl TimeAxis {
    pub fn from_panels(fit: &Panel, forecast: Option<&Panel>) -> CliResult<Self> {
        let range = |p: &Panel| {
            let lo = p.rows.iter().map(|r| r.time).min();
            let hi = p.rows.iter().map(|r| r.time).max();
            lo.zip(hi)
        };
        let (first, last_observed) = range(fit).ok_or_else(|| CliError::Runtime("no observations".into()))?;
        let last = match forecast.and_then(range) {
            Some((lo, hi)) => {
                if lo <= last_observed {
                    return Err(CliError::Runtime(format!("forecast time {lo} is not after the last observed time {last_observed}")));
                }
                hi
            }
            None => last_observed,
        };
        Ok(TimeAxis { first, last_observed, last })
    }

    pub fn len(&self) -> usize {
        (self.last - self.first + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, t: i64) -> usize {
        (t - self.first) as usize
    }

    pub fn times(&self) -> Vec<i64> {
        (self.first..=self.last).collect()
    }
}

pub fn build_basis(cfg: &RunConfig, domain: &SpatialDomain<f64>, axis: &TimeAxis) -> CliResult<BasisMatrix<f64>> {
    let b = &cfg.basis;
    let grid = KnotGrid::regular(
        b.r_s,
        b.r_t.unwrap_or(axis.len()),
        domain.bounds(),
        (axis.first as f64, axis.last as f64),
        b.bandwidth,
        b.standardize,
    )?;
    Ok(build_basis_matrix(domain, &axis.times(), &grid, b.n_mc, cfg.seed)?)
}

pub fn calibrate(cfg: &RunConfig, domain: &SpatialDomain<f64>, axis: &TimeAxis, basis: &BasisMatrix<f64>) -> CliResult<CalibratedCovariance<f64>> {
    let prior = cfg.ensemble_prior()?;
    let ens = ensemble_covariance(&prior, domain, axis.len(), cfg.calibration.replicates, cfg.seed)?;
    Ok(calibrate_ensemble(&ens, &basis.g)?)
}

/// Everything `fit` produces.
#[derive(Debug, Clone)]
pub struct FitOutput {
    pub report: ScoreReport,
    pub draws: PosteriorDraws<f64>,
    pub residuals: Vec<ResidualRow>,
    pub n_train: usize,
    pub p: usize,
    pub r: usize,
    pub frobenius_residual: f64,
}

pub struct FitInputs<'a> {
    pub domain: &'a SpatialDomain<f64>,
    pub fit: &'a Panel,
    pub forecast: Option<&'a Panel>,
    pub beta: Option<&'a [f64]>,
}

/// Seeded per-time holdout: `round(fraction · count)` rows of each time,
/// drawn without replacement from that time's own stream.
pub fn holdout_rows(panel: &Panel, fraction: f64, seed: u64, axis: &TimeAxis) -> Vec<bool> {
    let mut mask = vec![false; panel.len()];
    if fraction <= 0.0 {
        return mask;
    }
    let mut by_time: Vec<(i64, Vec<usize>)> = Vec::new();
    for (i, r) in panel.rows.iter().enumerate() {
        match by_time.iter_mut().find(|(t, _)| *t == r.time) {
            Some((_, v)) => v.push(i),
            None => by_time.push((r.time, vec![i])),
        }
    }
    for (t, idx) in by_time {
        let k = ((fraction * idx.len() as f64).round() as usize).min(idx.len().saturating_sub(1));
        let mut rng = stream(seed, purpose::HOLDOUT, axis.index(t) as u64);
        for j in sample(&mut rng, idx.len(), k).into_iter() {
            mask[idx[j]] = true;
        }
    }
    mask
}

/// Maps latent draws to the scoring scale.
fn to_scale(family: Family, log_scale: bool, v: f64) -> f64 {
    match family {
        Family::Gaussian => v,
        Family::Poisson if log_scale => v,
        Family::Poisson => v.exp(),
        Family::Bernoulli => gqnfit::epr::logistic(v),
    }
}

fn scale_name(family: Family, log_scale: bool) -> &'static str {
    match family {
        Family::Gaussian => "identity",
        Family::Poisson if log_scale => "log",
        Family::Poisson => "count",
        Family::Bernoulli => "probability",
    }
}

struct Scored {
    mean: DVector<f64>,
    truth: DVector<f64>,
    draws: DMatrix<f64>,
}

fn score_rows(family: Family, log_scale: bool, latent_draws: &DMatrix<f64>, panel: &Panel, idx: &[usize]) -> Scored {
    let draws = latent_draws.map(|v| to_scale(family, log_scale, v));
    let mean = replicate_mean(&draws);
    let truth = match &panel.latent {
        Some(l) => DVector::from_iterator(idx.len(), idx.iter().map(|&i| to_scale(family, log_scale, l[i]))),
        None => DVector::from_iterator(
            idx.len(),
            idx.iter().map(|&i| match family {
                Family::Poisson if log_scale => panel.z[i].max(0.5).ln(),
                _ => panel.z[i],
            }),
        ),
    };
    Scored { mean, truth, draws }
}

fn row_index(domain: &SpatialDomain<f64>, axis: &TimeAxis, panel: &Panel) -> CliResult<Vec<usize>> {
    let n = domain.n();
    let sites: HashMap<String, usize> = domain.site_ids().into_iter().enumerate().map(|(i, s)| (s, i)).collect();
    panel
        .rows
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let i = sites.get(&r.site_id).ok_or_else(|| CliError::Runtime(format!("row {k}: unknown site_id {:?}", r.site_id)))?;
            if r.time < axis.first || r.time > axis.last {
                return Err(CliError::Runtime(format!("row {k}: time {} outside the modelled range", r.time)));
            }
            Ok(axis.index(r.time) * n + i)
        })
        .collect()
}

fn design_x(panel: &Panel, idx: &[usize], time_varying: bool, axis: &TimeAxis, clamp_to_observed: bool) -> CliResult<DMatrix<f64>> {
    let x = panel.x.select_rows(idx);
    if !time_varying {
        return Ok(x);
    }
    let n_blocks = axis.index(axis.last_observed) + 1;
    let blocks: Vec<usize> = idx
        .iter()
        .map(|&i| {
            let t = panel.rows[i].time;
            let t = if clamp_to_observed { t.min(axis.last_observed) } else { t };
            axis.index(t)
        })
        .collect();
    Ok(expand_time_varying(&x, &blocks, n_blocks)?)
}

/// Calibrates, fits EPR on the non-held-out rows and scores the result.
pub fn run_fit(cfg: &RunConfig, inputs: &FitInputs<'_>, timing: bool) -> CliResult<FitOutput> {
    let family = cfg.family;
    let fc = &cfg.fit;
    let axis = TimeAxis::from_panels(inputs.fit, inputs.forecast)?;
    if let Some(f) = inputs.forecast {
        if f.x.ncols() != inputs.fit.x.ncols() {
            return Err(CliError::Runtime(format!(
                "forecast rows carry {} covariates, observations {}; forecast covariates are required",
                f.x.ncols(),
                inputs.fit.x.ncols()
            )));
        }
    }
    let basis = build_basis(cfg, inputs.domain, &axis)?;
    let cal = calibrate(cfg, inputs.domain, &axis, &basis)?;

    let panel = inputs.fit;
    let g_rows = row_index(inputs.domain, &axis, panel)?;
    let held = holdout_rows(panel, fc.holdout_fraction, cfg.seed, &axis);
    let train: Vec<usize> = (0..panel.len()).filter(|&i| !held[i]).collect();
    let test: Vec<usize> = (0..panel.len()).filter(|&i| held[i]).collect();

    let x_train = design_x(panel, &train, fc.time_varying, &axis, false)?;
    let l_train = cal.l.select_rows(&train.iter().map(|&i| g_rows[i]).collect::<Vec<_>>());
    let z_train = DVector::from_iterator(train.len(), train.iter().map(|&i| panel.z[i]));
    let mut data = Dataset::new(z_train, x_train.clone(), family, train.iter().map(|&i| panel.rows[i].clone()).collect())?;
    if family == Family::Gaussian && fc.known_sigma2 {
        data = data.with_sigma2(DVector::from_element(train.len(), cfg.simulation.sigma2_z))?;
    }

    let clock = Instant::now();
    let design = EprDesign::new(&x_train, &l_train)?;
    let draws = posterior_replicates(&data, &design, fc.n_reps, &fc.hyperprior, cfg.seed)?;
    let elapsed = clock.elapsed().as_secs_f64();

    let mut report = ScoreReport {
        label: Some(cfg.calibration.target.label().into()),
        mspe_target: Some(if panel.latent.is_some() { "latent" } else { "observed" }.into()),
        scale: Some(scale_name(family, fc.log_scale).into()),
        cpu_seconds: timing.then_some(elapsed),
        ..Default::default()
    };
    let mut residuals = Vec::new();
    let mut push_residuals = |split: &str, p: &Panel, idx: &[usize], s: &Scored| {
        for (k, &i) in idx.iter().enumerate() {
            residuals.push(ResidualRow::new(&p.rows[i], split, s.mean[k], s.truth[k]));
        }
    };

    let fitted = latent_predict(&draws, PredictRows::InSample { design: &design, include_xi: fc.include_xi })?;
    let s = score_rows(family, fc.log_scale, &fitted, panel, &train);
    report.in_sample_mspe = Some(mspe(s.mean.as_slice(), s.truth.as_slice())?);
    report.crps = Some(crps_mean(&s.draws, &s.truth)?);
    push_residuals("fit", panel, &train, &s);
    if family == Family::Bernoulli {
        let labels: Vec<bool> = train.iter().map(|&i| panel.z[i] == 1.0).collect();
        if labels.iter().any(|&b| b) && labels.iter().any(|&b| !b) {
            report.auc = Some(auc(s.mean.as_slice(), &labels)?);
        }
    }
    let loglik = DMatrix::from_fn(train.len(), draws.n_reps(), |k, r| {
        let s2 = match (&data.sigma2, draws.theta[r].sigma2_z) {
            (Some(v), _) => v[k],
            (None, Some(v)) => v,
            (None, None) => 1.0,
        };
        family.log_likelihood(data.z[k], fitted[(k, r)], s2)
    });
    report.waic = waic(&loglik).ok();

    if !test.is_empty() {
        let x = design_x(panel, &test, fc.time_varying, &axis, false)?;
        let l = cal.l.select_rows(&test.iter().map(|&i| g_rows[i]).collect::<Vec<_>>());
        let pred = latent_predict(&draws, PredictRows::OutOfSample { x: &x, l: &l })?;
        let s = score_rows(family, fc.log_scale, &pred, panel, &test);
        report.out_of_sample_mspe = Some(mspe(s.mean.as_slice(), s.truth.as_slice())?);
        push_residuals("holdout", panel, &test, &s);
    }

    if let Some(fp) = inputs.forecast.filter(|p| !p.is_empty()) {
        let all: Vec<usize> = (0..fp.len()).collect();
        let f_rows = row_index(inputs.domain, &axis, fp)?;
        let x = design_x(fp, &all, fc.time_varying, &axis, true)?;
        let l = cal.l.select_rows(&f_rows);
        let pred = latent_predict(&draws, PredictRows::OutOfSample { x: &x, l: &l })?;
        let s = score_rows(family, fc.log_scale, &pred, fp, &all);
        report.forecast_error = Some(mspe(s.mean.as_slice(), s.truth.as_slice())?);
        for t in axis.last_observed + 1..=axis.last {
            let k: Vec<usize> = all.iter().copied().filter(|&i| fp.rows[i].time == t).collect();
            if k.is_empty() {
                continue;
            }
            let m: Vec<f64> = k.iter().map(|&i| s.mean[i]).collect();
            let tr: Vec<f64> = k.iter().map(|&i| s.truth[i]).collect();
            report.forecast_by_step.push(mspe(&m, &tr)?);
        }
        push_residuals("forecast", fp, &all, &s);
    }

    if let Some(beta) = inputs.beta {
        let post = replicate_mean(&draws.beta);
        let blocks = post.len() / beta.len().max(1);
        if beta.len() * blocks == post.len() && blocks > 0 {
            let truth: Vec<f64> = (0..post.len()).map(|j| beta[j % beta.len()]).collect();
            report.beta_mse = Some(mspe(post.as_slice(), &truth)?);
        }
    }

    Ok(FitOutput {
        report,
        n_train: train.len(),
        p: draws.beta.nrows(),
        r: draws.eta.nrows(),
        draws,
        residuals,
        frobenius_residual: cal.frobenius_residual,
    })
}

/// Simulates the configured study and fits it.
pub fn simulate_and_fit(cfg: &RunConfig, timing: bool) -> CliResult<FitOutput> {
    let domain = build_domain(cfg)?;
    let study = simulate_study(cfg, &domain)?;
    let inputs = FitInputs { domain: &domain, fit: &study.fit, forecast: study.forecast.as_ref(), beta: Some(&study.beta) };
    run_fit(cfg, &inputs, timing)
}
