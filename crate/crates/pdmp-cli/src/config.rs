//! Experiment configuration: a TOML file with strictly-checked keys.
//! Unknown keys are hard errors — a silent typo in a benchmark config
//! corrupts the comparison it was meant to define.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment name; also the output subdirectory.
    pub name: String,
    pub replicates: usize,
    /// Number of discretized draws per replicate used for ESS and KS.
    #[serde(default = "default_discretization")]
    pub discretization: usize,
    /// Base seed; replicate streams derive from it. `--seed` overrides.
    pub seed: u64,
    /// Output directory; `--out` overrides.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub budget: BudgetConfig,
    pub target: TargetConfig,
    #[serde(rename = "samplers")]
    pub samplers: Vec<SamplerConfig>,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

fn default_discretization() -> usize {
    1000
}

/// Exactly one stopping rule.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub rate_evals: Option<u64>,
    #[serde(default)]
    pub events: Option<u64>,
    /// Machine-relative stopping rule; outputs are labeled accordingly.
    #[serde(default)]
    pub wall_seconds: Option<f64>,
}

/// A scalar or a sweep list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Sweep<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Copy> Sweep<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            Sweep::One(v) => vec![*v],
            Sweep::Many(vs) => vs.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    /// One of `banana`, `mvn1`, `mvn2`, `mvn-identity`, `logistic`, `lgcp`.
    pub kind: String,
    /// Dimension; sweepable for the Gaussian families.
    #[serde(default)]
    pub dim: Option<Sweep<usize>>,
    /// Banana curvature; sweepable.
    #[serde(default)]
    pub kappa: Option<Sweep<f64>>,
    /// Dataset CSV to load (logistic, lgcp).
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    /// Seed for simulating the dataset when no path is given.
    #[serde(default)]
    pub dataset_seed: Option<u64>,
    /// Observation count for simulated logistic data.
    #[serde(default)]
    pub observations: Option<usize>,
    /// Grid side for the log-Gaussian Cox target.
    #[serde(default)]
    pub grid_side: Option<usize>,
    #[serde(default)]
    pub sigma2: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    /// One of `cs`, `zigzag`, `bps`.
    pub kind: String,
    #[serde(default)]
    pub lambda_ref: f64,
    /// BPS refresh law: `sphere` (default) or `gaussian`.
    #[serde(default)]
    pub velocity_law: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    /// `zeros` (default) or `map` (gradient descent from zero).
    #[serde(default)]
    pub position: Option<String>,
    #[serde(default)]
    pub map_steps: Option<usize>,
    #[serde(default)]
    pub map_step_size: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    /// Evaluate the drift witness V along trajectories (needs a positive
    /// refresh rate).
    #[serde(default)]
    pub lyapunov: bool,
    /// KS mode: `marginal` (known Gaussian marginals), `reference`
    /// (two-sample against a long reference run), or `none`.
    /// Default: `marginal` for Gaussian targets, otherwise `none`.
    #[serde(default)]
    pub ks: Option<String>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let config: ExperimentConfig = toml::from_str(&text).map_err(|e| {
            // toml errors carry line/column context.
            CliError::Config(format!("{}: {e}", path.display()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.name.is_empty() {
            return bad("name: must be nonempty".into());
        }
        if self.replicates == 0 {
            return bad("replicates: must be at least 1".into());
        }
        if self.discretization == 0 {
            return bad("discretization: must be at least 1".into());
        }
        let budgets = [
            self.budget.horizon.is_some(),
            self.budget.rate_evals.is_some(),
            self.budget.events.is_some(),
            self.budget.wall_seconds.is_some(),
        ];
        if budgets.iter().filter(|b| **b).count() != 1 {
            return bad(
                "budget: exactly one of horizon, rate_evals, events, wall_seconds must be set"
                    .into(),
            );
        }
        if let Some(t) = self.budget.horizon {
            if !(t > 0.0) {
                return bad("budget.horizon: must be positive".into());
            }
        }
        if self.samplers.is_empty() {
            return bad("samplers: at least one sampler required".into());
        }
        for s in &self.samplers {
            match s.kind.as_str() {
                "cs" | "zigzag" | "bps" => {}
                other => return bad(format!("samplers.kind: unknown sampler {other:?}")),
            }
            if s.lambda_ref < 0.0 {
                return bad("samplers.lambda_ref: must be nonnegative".into());
            }
            if let Some(law) = &s.velocity_law {
                if s.kind != "bps" {
                    return bad("samplers.velocity_law: only valid for bps".into());
                }
                if law != "sphere" && law != "gaussian" {
                    return bad(format!("samplers.velocity_law: unknown law {law:?}"));
                }
            }
        }
        match self.target.kind.as_str() {
            "banana" => {
                if self.target.dim.is_some() {
                    return bad("target.dim: banana is always 2-dimensional".into());
                }
            }
            "mvn1" | "mvn2" | "mvn-identity" => {
                if self.target.dim.is_none() {
                    return bad(format!("target.dim: required for {}", self.target.kind));
                }
                if self.target.kappa.is_some() {
                    return bad("target.kappa: only valid for banana".into());
                }
            }
            "logistic" => {
                if self.target.dataset.is_none()
                    && (self.target.dataset_seed.is_none()
                        || self.target.observations.is_none()
                        || self.target.dim.is_none())
                {
                    return bad(
                        "target: logistic needs either dataset, or dataset_seed + observations + dim"
                            .into(),
                    );
                }
            }
            "lgcp" => {
                if self.target.dataset.is_none()
                    && (self.target.dataset_seed.is_none() || self.target.grid_side.is_none())
                {
                    return bad(
                        "target: lgcp needs either dataset, or dataset_seed + grid_side".into(),
                    );
                }
            }
            other => return bad(format!("target.kind: unknown target {other:?}")),
        }
        if let Some(path) = &self.target.dataset {
            if !path.exists() {
                return bad(format!("target.dataset: {} does not exist", path.display()));
            }
        }
        if let Some(position) = &self.init.position {
            if position != "zeros" && position != "map" {
                return bad(format!("init.position: unknown mode {position:?}"));
            }
        }
        if let Some(ks) = &self.report.ks {
            match ks.as_str() {
                "marginal" | "reference" | "none" => {}
                other => return bad(format!("report.ks: unknown mode {other:?}")),
            }
        }
        Ok(())
    }

    pub fn budget_value(&self) -> pdmp::samplers::Budget {
        if let Some(t) = self.budget.horizon {
            pdmp::samplers::Budget::Horizon(t)
        } else if let Some(n) = self.budget.rate_evals {
            pdmp::samplers::Budget::RateEvals(n)
        } else if let Some(n) = self.budget.events {
            pdmp::samplers::Budget::Events(n)
        } else {
            pdmp::samplers::Budget::WallSeconds(self.budget.wall_seconds.expect("validated"))
        }
    }

    /// Budget description for reports; flags the machine-relative mode.
    pub fn budget_label(&self) -> String {
        if let Some(t) = self.budget.horizon {
            format!("horizon {t}")
        } else if let Some(n) = self.budget.rate_evals {
            format!("{n} rate evaluations")
        } else if let Some(n) = self.budget.events {
            format!("{n} events")
        } else {
            format!(
                "{} wall seconds (machine-relative; not reproducible across hosts)",
                self.budget.wall_seconds.expect("validated")
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> String {
        r#"
name = "test"
replicates = 2
seed = 1

[budget]
horizon = 10.0

[target]
kind = "mvn1"
dim = 4

[[samplers]]
kind = "cs"
lambda_ref = 0.1
"#
        .to_string()
    }

    #[test]
    fn minimal_config_parses() {
        let config: ExperimentConfig = toml::from_str(&minimal()).unwrap();
        config.validate().unwrap();
        assert_eq!(config.discretization, 1000);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = minimal().replace("replicates = 2", "replicates = 2\nrepliactes = 3");
        let err = toml::from_str::<ExperimentConfig>(&text).unwrap_err();
        assert!(err.to_string().contains("repliactes"), "{err}");
    }

    #[test]
    fn zero_replicates_rejected() {
        let text = minimal().replace("replicates = 2", "replicates = 0");
        let config: ExperimentConfig = toml::from_str(&text).unwrap();
        assert!(config.validate().is_err());
    }

    #[test]
    fn two_budgets_rejected() {
        let text = minimal().replace("horizon = 10.0", "horizon = 10.0\nevents = 5");
        let config: ExperimentConfig = toml::from_str(&text).unwrap();
        assert!(config.validate().is_err());
    }

    #[test]
    fn sweep_values_parse() {
        let text = minimal().replace("dim = 4", "dim = [10, 20]");
        let config: ExperimentConfig = toml::from_str(&text).unwrap();
        config.validate().unwrap();
        assert_eq!(config.target.dim.unwrap().values(), vec![10, 20]);
    }
}
