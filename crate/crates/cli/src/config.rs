use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sto_lab::coupling::KernelTerm;
use sto_lab::{CircleDensity, CouplingModel, ExpandingMapSpec, Solver, StoModel};

/// Schema or semantic problem in a config file; reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(key: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{key}: {msg}"))
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigConfig {
    #[serde(default)]
    pub constant: f64,
    /// Coefficients of `cos(2 pi m x)` for `m = 1, 2, ...`.
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigConfig {
    fn to_density(&self) -> CircleDensity {
        let modes = self.cos.len().max(self.sin.len()).max(1);
        CircleDensity::from_trig(modes, self.constant, &self.cos, &self.sin)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub degree: u32,
    #[serde(default)]
    pub epsilon: f64,
    /// Defaults to `sin(2 pi x)`.
    #[serde(default)]
    pub perturbation: Option<TrigConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CouplingConfig {
    Translation { delta: f64, h: TrigConfig },
    GeneralKernel { delta: f64, terms: Vec<KernelTerm> },
    Stochastic { sigma: f64, delta: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub map: MapConfig,
    pub coupling: CouplingConfig,
    pub truncation: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub counts: Vec<usize>,
    pub seeds: usize,
}

fn default_starts() -> usize {
    1
}
fn default_fd_steps() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}
fn default_n_max() -> usize {
    8
}
fn default_ly_steps() -> usize {
    20
}
fn default_validation() -> usize {
    32
}
fn default_ensemble() -> usize {
    32
}
fn default_n_steps() -> usize {
    20
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentConfig {
    FixedPoint {
        /// More than one start runs the multi-start uniqueness check.
        #[serde(default = "default_starts")]
        starts: usize,
    },
    Differential {
        #[serde(default = "default_fd_steps")]
        fd_steps: Vec<f64>,
        #[serde(default = "default_n_max")]
        n_max: usize,
        #[serde(default = "default_ensemble")]
        ensemble: usize,
        #[serde(default = "default_ly_steps")]
        ly_steps: usize,
        #[serde(default = "default_validation")]
        validation: usize,
    },
    Losc {
        epsilon: f64,
        #[serde(default = "default_ensemble")]
        ensemble: usize,
        #[serde(default = "default_n_steps")]
        n_steps: usize,
    },
    Sweep {
        deltas: Vec<f64>,
        #[serde(default = "default_n_max")]
        n: usize,
    },
    Memory {
        epsilon: f64,
        #[serde(default = "default_n_steps")]
        n_steps: usize,
        #[serde(default = "default_ensemble")]
        ensemble: usize,
    },
    Audit {
        samples: usize,
    },
    Ensemble {
        particles: usize,
        steps: usize,
        #[serde(default)]
        scaling: Option<ScalingConfig>,
    },
    StrongRegime {
        sigmas: Vec<f64>,
        deltas: Vec<f64>,
        epsilon: f64,
        #[serde(default = "default_ensemble")]
        ensemble: usize,
        #[serde(default = "default_n_steps")]
        n_steps: usize,
        #[serde(default = "default_n_max")]
        n_max: usize,
    },
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::FixedPoint { .. } => "fixed-point",
            ExperimentConfig::Differential { .. } => "differential",
            ExperimentConfig::Losc { .. } => "losc",
            ExperimentConfig::Sweep { .. } => "sweep",
            ExperimentConfig::Memory { .. } => "memory",
            ExperimentConfig::Audit { .. } => "audit",
            ExperimentConfig::Ensemble { .. } => "ensemble",
            ExperimentConfig::StrongRegime { .. } => "strong-regime",
        }
    }
}

fn default_solver() -> Solver {
    Solver::Newton
}
fn default_tolerance() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    500
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub model: ModelConfig,
    pub experiment: ExperimentConfig,
    #[serde(default = "default_solver")]
    pub solver: Solver,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn nonnegative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            key,
            format!("must be nonnegative and finite, got {v}"),
        ))
    }
}

fn at_least(key: &str, v: usize, min: usize) -> Result<(), ConfigError> {
    if v >= min {
        Ok(())
    } else {
        Err(invalid(key, format!("must be at least {min}, got {v}")))
    }
}

fn nonempty<T>(key: &str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        Err(invalid(key, "must not be empty"))
    } else {
        Ok(())
    }
}

impl Config {
    /// Parses and validates; every error names the offending key.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let cfg: Config =
            serde_json::from_str(text).map_err(|e| ConfigError(format!("schema: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.id.is_empty()
            || !self
                .id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(invalid(
                "id",
                "must be a nonempty name of letters, digits, '_' or '-'",
            ));
        }
        at_least("model.truncation", self.model.truncation, 1)?;
        at_least("model.map.degree", self.model.map.degree as usize, 2)?;
        positive("tolerance", self.tolerance)?;
        at_least("max_iter", self.max_iter, 1)?;
        match &self.model.coupling {
            CouplingConfig::Translation { delta, .. }
            | CouplingConfig::GeneralKernel { delta, .. } => {
                nonnegative("model.coupling.delta", *delta)?
            }
            CouplingConfig::Stochastic { sigma, delta } => {
                positive("model.coupling.sigma", *sigma)?;
                nonnegative("model.coupling.delta", *delta)?;
            }
        }
        match &self.experiment {
            ExperimentConfig::FixedPoint { starts } => at_least("experiment.starts", *starts, 1)?,
            ExperimentConfig::Differential {
                fd_steps,
                n_max,
                ly_steps,
                validation,
                ..
            } => {
                nonempty("experiment.fd_steps", fd_steps)?;
                if fd_steps.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
                    return Err(invalid("experiment.fd_steps", "steps must lie in (0, 1]"));
                }
                at_least("experiment.n_max", *n_max, 1)?;
                at_least("experiment.ly_steps", *ly_steps, 1)?;
                at_least("experiment.validation", *validation, 1)?;
            }
            ExperimentConfig::Losc {
                epsilon, n_steps, ..
            } => {
                nonnegative("experiment.epsilon", *epsilon)?;
                at_least("experiment.n_steps", *n_steps, 1)?;
            }
            ExperimentConfig::Sweep { deltas, n } => {
                nonempty("experiment.deltas", deltas)?;
                if deltas.windows(2).any(|w| w[1] < w[0]) {
                    return Err(invalid("experiment.deltas", "must be sorted ascending"));
                }
                at_least("experiment.n", *n, 1)?;
            }
            ExperimentConfig::Memory {
                epsilon,
                n_steps,
                ensemble,
            } => {
                nonnegative("experiment.epsilon", *epsilon)?;
                at_least("experiment.n_steps", *n_steps, 1)?;
                at_least("experiment.ensemble", *ensemble, 1)?;
            }
            ExperimentConfig::Audit { samples } => at_least("experiment.samples", *samples, 2)?,
            ExperimentConfig::Ensemble {
                particles, scaling, ..
            } => {
                at_least("experiment.particles", *particles, 1)?;
                if let Some(s) = scaling {
                    nonempty("experiment.scaling.counts", &s.counts)?;
                    at_least("experiment.scaling.seeds", s.seeds, 1)?;
                }
            }
            ExperimentConfig::StrongRegime {
                sigmas,
                deltas,
                epsilon,
                n_max,
                ..
            } => {
                nonempty("experiment.sigmas", sigmas)?;
                nonempty("experiment.deltas", deltas)?;
                positive("experiment.epsilon", *epsilon)?;
                at_least("experiment.n_max", *n_max, 1)?;
                if !matches!(self.model.coupling, CouplingConfig::Stochastic { .. }) {
                    return Err(invalid(
                        "model.coupling.kind",
                        "strong-regime needs the stochastic coupling",
                    ));
                }
            }
        }
        self.build_model()?;
        Ok(())
    }

    pub fn build_map(&self) -> Result<ExpandingMapSpec, ConfigError> {
        let m = &self.model.map;
        let p = m
            .perturbation
            .as_ref()
            .map(TrigConfig::to_density)
            .unwrap_or_else(|| CircleDensity::from_trig(1, 0.0, &[], &[1.0]));
        ExpandingMapSpec::new(m.degree, p, m.epsilon).map_err(|e| invalid("model.map", e))
    }

    pub fn build_model(&self) -> Result<StoModel, ConfigError> {
        let coupling = match &self.model.coupling {
            CouplingConfig::Translation { delta, h } => {
                CouplingModel::translation(h.to_density(), *delta)
            }
            CouplingConfig::GeneralKernel { delta, terms } => {
                CouplingModel::general_kernel(terms.clone(), *delta)
            }
            CouplingConfig::Stochastic { sigma, delta } => {
                CouplingModel::stochastic(*sigma, *delta)
            }
        }
        .map_err(|e| invalid("model.coupling", e))?;
        StoModel::new(self.build_map()?, coupling, self.model.truncation)
            .map_err(|e| invalid("model", e))
    }
}
