//! `simulate-data`: generate benchmark datasets as CSV, byte-stable given
//! the seed.

use std::path::Path;

use pdmp::rng::RandomSource;
use pdmp::targets::{simulate_lgcp_data, simulate_logistic_data};
use serde::Deserialize;

use crate::experiment::lgcp_defaults;
use crate::CliError;

/// Dataset config: the target description alone, no experiment keys.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetConfig {
    /// `logistic` or `lgcp`.
    kind: String,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    observations: Option<usize>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    grid_side: Option<usize>,
    #[serde(default)]
    sigma2: Option<f64>,
    #[serde(default)]
    mu: Option<f64>,
    #[serde(default)]
    beta: Option<f64>,
}

pub fn run(config_path: &Path, seed_override: Option<u64>, out: Option<&Path>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", config_path.display())))?;
    let config: DatasetConfig = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", config_path.display())))?;
    let out = out.ok_or_else(|| CliError::Config("simulate-data requires --out <dir>".into()))?;
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out.display())))?;

    let seed = seed_override
        .or(config.seed)
        .ok_or_else(|| CliError::Config("seed: set it in the config or pass --seed".into()))?;
    let mut rng = RandomSource::new(seed);

    let path = match config.kind.as_str() {
        "logistic" => {
            let n = config
                .observations
                .ok_or_else(|| CliError::Config("observations: required for logistic".into()))?;
            let d = config
                .dim
                .ok_or_else(|| CliError::Config("dim: required for logistic".into()))?;
            if n == 0 || d == 0 {
                return Err(CliError::Config("observations and dim must be positive".into()));
            }
            let data = simulate_logistic_data(n, d, &mut rng);
            let path = out.join(format!("logistic-n{n}-d{d}-seed{seed}.csv"));
            data.save_csv(&path)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            path
        }
        "lgcp" => {
            let side = config
                .grid_side
                .ok_or_else(|| CliError::Config("grid_side: required for lgcp".into()))?;
            if side < 2 {
                return Err(CliError::Config("grid_side: must be at least 2".into()));
            }
            let defaults = lgcp_defaults();
            let sigma2 = config.sigma2.unwrap_or(defaults.0);
            let mu = config.mu.unwrap_or(126.0f64.ln() - sigma2 / 2.0);
            let beta = config.beta.unwrap_or(defaults.2);
            let data = simulate_lgcp_data(side, sigma2, mu, beta, &mut rng)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let path = out.join(format!("lgcp-side{side}-seed{seed}.csv"));
            data.save_csv(&path)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            path
        }
        other => {
            return Err(CliError::Config(format!(
                "kind: unknown dataset kind {other:?} (logistic or lgcp)"
            )))
        }
    };
    println!("wrote {}", path.display());
    Ok(())
}
