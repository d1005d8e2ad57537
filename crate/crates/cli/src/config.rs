//! TOML run configuration.

use std::path::{Path, PathBuf};

use gqnfit::calibration::GqnPrior;
use gqnfit::dynamics::NeighbourhoodScenario;
use gqnfit::epr::{Family, Hyperprior};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Output directory; `--out` overrides it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub family: Family,
    pub domain: DomainConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub data: DataConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Lattice {
        rows: usize,
        cols: usize,
        #[serde(default = "one")]
        spacing: f64,
    },
    Geojson {
        path: PathBuf,
        #[serde(default)]
        id_property: Option<String>,
    },
}

fn one() -> f64 {
    1.0
}

/// A preset name (`gaussian_study`, `poisson_study`, `bernoulli_study`,
/// `adjacent_study`) or an explicit parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioConfig {
    Preset(String),
    Custom(NeighbourhoodScenario),
}

impl ScenarioConfig {
    pub fn resolve(&self) -> CliResult<NeighbourhoodScenario> {
        let s = match self {
            ScenarioConfig::Custom(s) => *s,
            ScenarioConfig::Preset(name) => match name.as_str() {
                "gaussian_study" => NeighbourhoodScenario::gaussian_study(),
                "poisson_study" => NeighbourhoodScenario::poisson_study(),
                "bernoulli_study" => NeighbourhoodScenario::bernoulli_study(),
                "adjacent_study" => NeighbourhoodScenario::adjacent_study(),
                other => return Err(CliError::Config(format!("unknown scenario preset {other:?}"))),
            },
        };
        s.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub scenario: ScenarioConfig,
    /// Number of observed time points `T`.
    pub steps: usize,
    /// Forecast time points after `T`, written to the truth file.
    pub horizon: usize,
    /// True coefficients; covariates are an intercept followed by
    /// standard-normal columns.
    pub beta: Vec<f64>,
    /// Gaussian observation variance.
    pub sigma2_z: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            scenario: ScenarioConfig::Preset("gaussian_study".into()),
            steps: 14,
            horizon: 1,
            beta: vec![1.0],
            sigma2_z: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisConfig {
    pub r_s: usize,
    /// Defaults to the number of modelled times (`T + horizon`).
    pub r_t: Option<usize>,
    /// In standardized units when `standardize` is set.
    pub bandwidth: Option<f64>,
    pub standardize: bool,
    pub n_mc: usize,
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig { r_s: 15, r_t: None, bandwidth: None, standardize: true, n_mc: gqnfit::basis::DEFAULT_N_MC }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationTarget {
    #[default]
    Gqn,
    Var1,
}

impl CalibrationTarget {
    pub fn label(self) -> &'static str {
        match self {
            CalibrationTarget::Gqn => "gqn",
            CalibrationTarget::Var1 => "var1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub replicates: usize,
    pub target: CalibrationTarget,
    /// Explicit ensemble prior. When absent, each scenario parameter is
    /// uniform on `value * (1 ± prior_rel)`.
    pub prior: Option<GqnPrior>,
    pub prior_rel: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig { replicates: 500, target: CalibrationTarget::Gqn, prior: None, prior_rel: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub n_reps: usize,
    pub hyperprior: Hyperprior,
    /// Treat the Gaussian observation variance as known (`simulation.sigma2_z`)
    /// instead of sampling it from the hyperprior.
    pub known_sigma2: bool,
    /// In-sample predictions use `Xβ + Lη + ξ − τ_y` when set, `Xβ + Lη` otherwise.
    pub include_xi: bool,
    /// Fraction of sites held out at each time, in `[0, 1)`.
    pub holdout_fraction: f64,
    /// One coefficient block per time point.
    pub time_varying: bool,
    /// Score Poisson fits on the log scale.
    pub log_scale: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            n_reps: 1000,
            hyperprior: Hyperprior::default(),
            known_sigma2: false,
            include_xi: false,
            holdout_fraction: 0.0,
            time_varying: false,
            log_scale: true,
        }
    }
}

/// External inputs for `fit`. Without `observations`, `fit` regenerates the
/// simulated study from `[simulation]` and the seed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub observations: Option<PathBuf>,
    /// Latent truth for the observed rows (enables latent-target scoring).
    pub latent: Option<PathBuf>,
    /// Forecast rows with their truth.
    pub truth: Option<PathBuf>,
    /// True coefficients, for `beta_mse`.
    pub beta: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Reads and validates; relative paths resolve against the config's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let DomainConfig::Geojson { path, .. } = &mut self.domain {
            fix(path);
        }
        for p in [&mut self.data.observations, &mut self.data.latent, &mut self.data.truth].into_iter().flatten() {
            fix(p);
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if let DomainConfig::Lattice { rows, cols, spacing } = self.domain {
            if rows == 0 || cols == 0 || !(spacing > 0.0) {
                return bad("lattice needs rows, cols >= 1 and spacing > 0".into());
            }
        }
        let paths = [
            match &self.domain {
                DomainConfig::Geojson { path, .. } => Some(path),
                _ => None,
            },
            self.data.observations.as_ref(),
            self.data.latent.as_ref(),
            self.data.truth.as_ref(),
        ];
        for p in paths.into_iter().flatten() {
            if !p.exists() {
                return bad(format!("path does not exist: {}", p.display()));
            }
        }
        self.simulation.scenario.resolve()?;
        let s = &self.simulation;
        if s.steps == 0 {
            return bad("simulation.steps must be >= 1".into());
        }
        if s.beta.is_empty() {
            return bad("simulation.beta needs at least one coefficient".into());
        }
        if !(s.sigma2_z > 0.0) {
            return bad("simulation.sigma2_z must be > 0".into());
        }
        if self.basis.r_s == 0 || self.basis.r_t == Some(0) || self.basis.n_mc == 0 {
            return bad("basis.r_s, basis.r_t and basis.n_mc must be >= 1".into());
        }
        if self.calibration.replicates < 2 {
            return bad("calibration.replicates must be >= 2".into());
        }
        if !(self.calibration.prior_rel >= 0.0 && self.calibration.prior_rel < 1.0) {
            return bad("calibration.prior_rel must be in [0, 1)".into());
        }
        if let Some(p) = &self.calibration.prior {
            p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        let f = &self.fit;
        if f.n_reps < 2 {
            return bad("fit.n_reps must be >= 2".into());
        }
        if !(0.0..1.0).contains(&f.holdout_fraction) {
            return bad("fit.holdout_fraction must be in [0, 1)".into());
        }
        f.hyperprior.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    /// Ensemble prior for the selected calibration target.
    pub fn ensemble_prior(&self) -> CliResult<GqnPrior> {
        let prior = match &self.calibration.prior {
            Some(p) => p.clone(),
            None => GqnPrior::around(&self.simulation.scenario.resolve()?, self.calibration.prior_rel),
        };
        Ok(match self.calibration.target {
            CalibrationTarget::Gqn => prior,
            CalibrationTarget::Var1 => prior.linear(),
        })
    }
}
