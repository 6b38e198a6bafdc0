//! Experiment configuration: a single TOML tree with one defaults block for
//! all physical parameters. Schema violations are reported with the path of
//! the offending field.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

use oddnls_core::evolve::{EvolveConfig, SpongeConfig};
use oddnls_core::grid::Grid;
use oddnls_core::soliton::GroundStateParams;

use crate::threshold::KSignTarget;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid value at `{path}`: {message}")]
    Invalid { path: String, message: String },
    #[error("io error reading config: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Dichotomy,
    MinimizingSequence,
    OverlapAsymptotics,
    Coercivity,
    ModulationAudit,
    VirialAudit,
    BlowupInequality,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Dichotomy => "dichotomy",
            ExperimentKind::MinimizingSequence => "min-seq",
            ExperimentKind::OverlapAsymptotics => "overlap-asymptotics",
            ExperimentKind::Coercivity => "coercivity",
            ExperimentKind::ModulationAudit => "modulation-audit",
            ExperimentKind::VirialAudit => "virial-audit",
            ExperimentKind::BlowupInequality => "blowup-ineq",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamsConfig {
    pub p: f64,
    pub omega: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self { p: 7.0, omega: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub n_points: usize,
    pub half_length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_points: 8192, half_length: 60.0 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    pub y: f64,
    pub lambda0: f64,
    pub nu0: f64,
    pub k_sign_target: KSignTarget,
    pub newton_tol: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            y: 8.0,
            lambda0: 1.0,
            nu0: 0.95,
            k_sign_target: KSignTarget::Positive,
            newton_tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ModulationConfig {
    /// Cutoff radius of the glued direction.
    pub r: f64,
    /// Proximity threshold as a fraction of `||dQ/dx||^2`.
    pub mu0_factor: f64,
    /// Snapshot spacing for derivative audits.
    pub snapshot_spacing: f64,
}

impl Default for ModulationConfig {
    fn default() -> Self {
        Self { r: 5.0, mu0_factor: 0.1, snapshot_spacing: 0.01 }
    }
}

/// Scattering-verdict thresholds. The true criterion (finite global
/// space-time norm) is asymptotic and not decidable at finite time; these
/// empirically calibrated defaults are recorded in the manifest of each run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyConfig {
    /// Fitted `L^{p+1}` decay exponent must fall below this (negative) bound.
    pub decay_exponent_max: f64,
    /// Consecutive dyadic Strichartz-window increments must shrink by this
    /// factor.
    pub window_shrink_max: f64,
    /// Relative tolerance on the threshold product.
    pub threshold_tol: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { decay_exponent_max: -0.05, window_shrink_max: 0.5, threshold_tol: 1e-6 }
    }
}

fn default_seed() -> u64 {
    42
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_evolve() -> EvolveConfig {
    EvolveConfig {
        dt_init: 1e-3,
        dt_min: 1e-9,
        t_max: 40.0,
        cfl_safety: 0.25,
        blowup_factor: 20.0,
        conservation_tol: 1e-5,
        odd_project_every: 1,
        record_every: 0.1,
        snapshot_every: None,
        sponge: Some(SpongeConfig { width: 10.0, strength: 3.0 }),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub evolve: EvolveConfig,
    pub data: DataConfig,
    pub modulation: ModulationConfig,
    pub classify: ClassifyConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Dump the final field of trajectory runs in the flat binary format.
    pub dump_fields: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::Dichotomy,
            params: ParamsConfig::default(),
            grid: GridConfig::default(),
            evolve: default_evolve(),
            data: DataConfig::default(),
            modulation: ModulationConfig::default(),
            classify: ClassifyConfig::default(),
            seed: default_seed(),
            output_dir: default_output_dir(),
            dump_fields: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        GroundStateParams::new(self.params.p, self.params.omega)
            .map_err(|e| invalid("params", e.to_string()))?;
        Grid::new(self.grid.n_points, self.grid.half_length)
            .map_err(|e| invalid("grid", e.to_string()))?;
        if let Err(e) = self.evolve.validate() {
            let msg = e.to_string();
            // name the offending field path in the message
            let field = [
                "t_max",
                "dt_init",
                "dt_min",
                "cfl_safety",
                "blowup_factor",
                "record_every",
                "sponge",
            ]
            .iter()
            .find(|f| msg.contains(*f))
            .copied()
            .unwrap_or("evolve");
            return Err(invalid(&format!("evolve.{field}"), msg));
        }
        if !(self.data.y > 0.0) {
            return Err(invalid("data.y", format!("separation must be positive, got {}", self.data.y)));
        }
        if !(self.data.lambda0 > 0.0 && self.data.nu0 > 0.0) {
            return Err(invalid(
                "data.lambda0/nu0",
                "initial amplitude and dilation guesses must be positive",
            ));
        }
        if !(self.data.newton_tol > 0.0) {
            return Err(invalid("data.newton_tol", "tolerance must be positive"));
        }
        if !(self.modulation.r > 0.0) {
            return Err(invalid("modulation.r", "cutoff radius must be positive"));
        }
        if !(self.modulation.mu0_factor > 0.0) {
            return Err(invalid("modulation.mu0_factor", "must be positive"));
        }
        if !(self.modulation.snapshot_spacing > 0.0) {
            return Err(invalid("modulation.snapshot_spacing", "must be positive"));
        }
        if !(self.classify.decay_exponent_max < 0.0) {
            return Err(invalid(
                "classify.decay_exponent_max",
                "decay evidence requires a negative exponent bound",
            ));
        }
        if !(self.classify.window_shrink_max > 0.0 && self.classify.window_shrink_max < 1.0) {
            return Err(invalid("classify.window_shrink_max", "must lie in (0, 1)"));
        }
        if !(self.classify.threshold_tol > 0.0) {
            return Err(invalid("classify.threshold_tol", "must be positive"));
        }
        Ok(())
    }

    pub fn ground_state_params(&self) -> GroundStateParams {
        GroundStateParams::new(self.params.p, self.params.omega).expect("validated")
    }

    pub fn make_grid(&self) -> Grid {
        Grid::new(self.grid.n_points, self.grid.half_length).expect("validated")
    }
}

/// Thread count for experiment batches: the `ODDNLS_THREADS` environment
/// variable, defaulting to available parallelism.
pub fn configured_threads() -> usize {
    std::env::var("ODDNLS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
}

/// Install the global worker pool once, sized by [`configured_threads`].
pub fn init_thread_pool() {
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(configured_threads())
        .build_global();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn malformed_t_max_names_the_field() {
        let text = r#"
            experiment = "dichotomy"
            [evolve]
            t_max = -1.0
        "#;
        let err = ExperimentConfig::from_toml_str(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("evolve.t_max"), "message was: {msg}");
    }

    #[test]
    fn roundtrip_through_toml() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back.seed, cfg.seed);
        assert_eq!(back.grid.n_points, cfg.grid.n_points);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg = ExperimentConfig::from_toml_str("experiment = \"coercivity\"").unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Coercivity);
        assert_eq!(cfg.grid.n_points, 8192);
        assert_eq!(cfg.params.p, 7.0);
    }
}
