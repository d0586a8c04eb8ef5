//! Experiment execution: build targets and samplers from config, run
//! replicates in parallel on independent random streams, and collect
//! per-replicate diagnostics.

use pdmp::diagnostics::{ess, ks_one_sample, ks_two_sample, lyapunov, standard_normal_cdf};
use pdmp::rng::RandomSource;
use pdmp::samplers::{
    run_with, Budget, DoublingGridSampler, MomentAccumulator, Observers, RunObserver, SamplerSpec,
    UniformGridSampler, VelocityLaw,
};
use pdmp::state::{EventRecord, PhaseState};
use pdmp::targets::{
    mvn1_covariance, mvn2_covariance, simulate_lgcp_data, simulate_logistic_data, Banana, Lgcp,
    Logistic, LogisticData, Mvn, Target,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SamplerConfig, TargetConfig};
use crate::CliError;

/// Default hyperparameters for simulated log-Gaussian Cox data, matching
/// the benchmark setting: sigma^2 = 1.91, mu = log(126) - sigma^2/2,
/// beta = 1/6.
pub fn lgcp_defaults() -> (f64, f64, f64) {
    let sigma2 = 1.91;
    (sigma2, 126.0f64.ln() - sigma2 / 2.0, 1.0 / 6.0)
}

/// A target instantiated for one sweep value.
pub struct BuiltTarget {
    pub target: Box<dyn Target>,
    /// Known Gaussian marginal standard deviations, when the target has
    /// them (exact KS mode).
    pub marginal_sds: Option<Vec<f64>>,
    /// Sweep label, e.g. `d20` or `kappa0.25`; empty when nothing sweeps.
    pub param: String,
}

/// Instantiate every sweep value of the configured target.
pub fn build_targets(config: &TargetConfig, base_seed: u64) -> Result<Vec<BuiltTarget>, CliError> {
    let runtime = |e: pdmp::Error| CliError::Runtime(e.to_string());
    match config.kind.as_str() {
        "banana" => {
            let kappas = config
                .kappa
                .as_ref()
                .map_or(vec![1.0], |sweep| sweep.values());
            let sweep = kappas.len() > 1;
            Ok(kappas
                .into_iter()
                .map(|kappa| BuiltTarget {
                    target: Box::new(Banana::new(kappa)),
                    marginal_sds: None,
                    param: if sweep {
                        format!("kappa{kappa}")
                    } else {
                        String::new()
                    },
                })
                .collect())
        }
        kind @ ("mvn1" | "mvn2" | "mvn-identity") => {
            let dims = config.dim.as_ref().expect("validated").values();
            let sweep = dims.len() > 1;
            dims.into_iter()
                .map(|dim| {
                    let covariance = match kind {
                        "mvn1" => mvn1_covariance(dim),
                        "mvn2" => mvn2_covariance(dim),
                        _ => nalgebra::DMatrix::identity(dim, dim),
                    };
                    let target = Mvn::with_name(covariance, kind).map_err(runtime)?;
                    let sds = (0..dim).map(|i| target.marginal_sd(i)).collect();
                    Ok(BuiltTarget {
                        target: Box::new(target),
                        marginal_sds: Some(sds),
                        param: if sweep { format!("d{dim}") } else { String::new() },
                    })
                })
                .collect()
        }
        "logistic" => {
            let data = if let Some(path) = &config.dataset {
                LogisticData::load_csv(path).map_err(runtime)?
            } else {
                let mut rng = RandomSource::with_stream(
                    config.dataset_seed.unwrap_or(base_seed),
                    u64::MAX,
                );
                simulate_logistic_data(
                    config.observations.expect("validated"),
                    match config.dim.as_ref().expect("validated").values()[..] {
                        [d] => d,
                        _ => return Err(CliError::Config("target.dim: no sweeps for logistic".into())),
                    },
                    &mut rng,
                )
            };
            Ok(vec![BuiltTarget {
                target: Box::new(Logistic::new(data)),
                marginal_sds: None,
                param: String::new(),
            }])
        }
        "lgcp" => {
            let defaults = lgcp_defaults();
            let sigma2 = config.sigma2.unwrap_or(defaults.0);
            let mu = config.mu.unwrap_or(126.0f64.ln() - sigma2 / 2.0);
            let beta = config.beta.unwrap_or(defaults.2);
            let data = if let Some(path) = &config.dataset {
                pdmp::targets::LgcpData::load_csv(path, sigma2, mu, beta).map_err(runtime)?
            } else {
                let mut rng = RandomSource::with_stream(
                    config.dataset_seed.unwrap_or(base_seed),
                    u64::MAX,
                );
                simulate_lgcp_data(config.grid_side.expect("validated"), sigma2, mu, beta, &mut rng)
                    .map_err(runtime)?
            };
            Ok(vec![BuiltTarget {
                target: Box::new(Lgcp::new(data).map_err(runtime)?),
                marginal_sds: None,
                param: String::new(),
            }])
        }
        other => Err(CliError::Config(format!("unknown target kind {other:?}"))),
    }
}

pub fn build_sampler(config: &SamplerConfig, dim: usize) -> SamplerSpec {
    match config.kind.as_str() {
        "cs" => SamplerSpec::coordinate(config.lambda_ref),
        "zigzag" => SamplerSpec::zigzag(dim, config.lambda_ref),
        "bps" => {
            let law = match config.velocity_law.as_deref() {
                Some("gaussian") => VelocityLaw::Gaussian,
                _ => VelocityLaw::Sphere,
            };
            SamplerSpec::bouncy(config.lambda_ref, law)
        }
        other => unreachable!("validated sampler kind {other}"),
    }
}

/// Initial position: zeros, or a few gradient-descent steps from zero when
/// `init.position = "map"`.
pub fn initial_position(config: &ExperimentConfig, target: &dyn Target) -> Vec<f64> {
    let dim = target.dim();
    let mut x = vec![0.0; dim];
    if config.init.position.as_deref() == Some("map") {
        let steps = config.init.map_steps.unwrap_or(100);
        let step = config.init.map_step_size.unwrap_or(0.05);
        for _ in 0..steps {
            let g = target.gradient(&x);
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi -= step * gi;
            }
        }
    }
    x
}

/// Per-coordinate diagnostics of one replicate.
#[derive(Debug, Clone)]
pub struct CoordinateStats {
    pub ess: f64,
    pub ks: Option<f64>,
    pub path_mean: f64,
    pub path_square_mean: f64,
}

/// Everything measured on one replicate run.
#[derive(Debug, Clone)]
pub struct ReplicateOutcome {
    pub sampler: String,
    pub param: String,
    pub replicate: usize,
    pub events: u64,
    pub rate_evals: u64,
    pub thinning_rejections: u64,
    pub total_time: f64,
    pub wall_seconds: f64,
    pub canonical: bool,
    pub coords: Vec<CoordinateStats>,
    pub lyapunov_min: Option<f64>,
    pub lyapunov_mean: Option<f64>,
}

/// Streaming grid for either budget mode.
enum Grid {
    Uniform(UniformGridSampler),
    Doubling(DoublingGridSampler),
}

impl Grid {
    fn new(budget: Budget, n_draws: usize) -> Self {
        match budget {
            Budget::Horizon(t) => Grid::Uniform(UniformGridSampler::new(t, n_draws)),
            _ => Grid::Doubling(DoublingGridSampler::new(1e-4, (2 * n_draws).max(4))),
        }
    }

    fn rows(self) -> Vec<Vec<f64>> {
        match self {
            Grid::Uniform(g) => g.rows(),
            Grid::Doubling(g) => g.rows(),
        }
    }
}

impl RunObserver for Grid {
    fn on_start(&mut self, state: &PhaseState) {
        match self {
            Grid::Uniform(g) => g.on_start(state),
            Grid::Doubling(g) => g.on_start(state),
        }
    }

    fn on_event(&mut self, record: EventRecord, state: &PhaseState) {
        match self {
            Grid::Uniform(g) => g.on_event(record, state),
            Grid::Doubling(g) => g.on_event(record, state),
        }
    }

    fn on_finish(&mut self, state: &PhaseState, horizon: f64) {
        match self {
            Grid::Uniform(g) => g.on_finish(state, horizon),
            Grid::Doubling(g) => g.on_finish(state, horizon),
        }
    }
}

/// Tracks the drift witness V at event states.
struct LyapunovProbe<'a> {
    target: &'a dyn Target,
    lambda_ref: f64,
    min: f64,
    sum: f64,
    count: u64,
}

impl RunObserver for LyapunovProbe<'_> {
    fn on_event(&mut self, _record: EventRecord, state: &PhaseState) {
        if let Ok(v) = lyapunov(self.target, &state.x, &state.v, self.lambda_ref) {
            self.min = self.min.min(v);
            self.sum += v;
            self.count += 1;
        }
    }
}

/// KS evaluation mode resolved from config and target.
#[derive(Clone)]
pub enum KsMode {
    None,
    /// Exact marginal CDFs (Gaussian targets).
    Marginal(Vec<f64>),
    /// Two-sample KS against columns of a long reference run.
    Reference(std::sync::Arc<Vec<Vec<f64>>>),
}

#[allow(clippy::too_many_arguments)]
pub fn run_replicate(
    spec: &SamplerSpec,
    sampler_label: &str,
    built: &BuiltTarget,
    budget: Budget,
    n_draws: usize,
    init_x: &[f64],
    seed: u64,
    stream: u64,
    replicate: usize,
    ks_mode: &KsMode,
    want_lyapunov: bool,
) -> Result<ReplicateOutcome, CliError> {
    let target = built.target.as_ref();
    let dim = target.dim();
    let mut rng = RandomSource::with_stream(seed, stream);
    let v0 = spec.initial_velocity(dim, &mut rng);
    let z0 = PhaseState::new(init_x.to_vec(), v0);

    let mut grid = Grid::new(budget, n_draws);
    let mut moments = match budget {
        Budget::Horizon(t) => MomentAccumulator::with_cap(dim, t),
        _ => MomentAccumulator::new(dim),
    };
    let lambda_ref_scalar = match spec {
        SamplerSpec::Coordinate { lambda_ref } => *lambda_ref,
        SamplerSpec::Bouncy { lambda_ref, .. } => *lambda_ref,
        SamplerSpec::Zigzag { .. } => 0.0,
    };
    let mut probe = LyapunovProbe {
        target,
        lambda_ref: lambda_ref_scalar,
        min: f64::INFINITY,
        sum: 0.0,
        count: 0,
    };
    let use_probe = want_lyapunov && lambda_ref_scalar > 0.0;

    let stats = {
        let mut observers: Vec<&mut dyn RunObserver> = vec![&mut grid, &mut moments];
        if use_probe {
            observers.push(&mut probe);
        }
        let mut fan = Observers(observers);
        run_with(spec, target, z0, budget, &mut rng, &mut fan)
            .map_err(|e| CliError::Runtime(format!("{sampler_label} replicate {replicate}: {e}")))?
    };

    let rows = grid.rows();
    if rows.len() < 100 {
        return Err(CliError::Runtime(format!(
            "{sampler_label} replicate {replicate}: only {} draws; increase the budget or lower discretization",
            rows.len()
        )));
    }
    let (path_means, path_squares) = moments.averages();

    let mut coords = Vec::with_capacity(dim);
    for j in 0..dim {
        let series: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let e = ess(&series).map_err(|e| {
            CliError::Runtime(format!("{sampler_label} replicate {replicate} coord {j}: {e}"))
        })?;
        let ks = match ks_mode {
            KsMode::None => None,
            KsMode::Marginal(sds) => {
                let sd = sds[j];
                Some(ks_one_sample(&series, |x| standard_normal_cdf(x / sd)))
            }
            KsMode::Reference(reference) => {
                let ref_col: Vec<f64> = reference.iter().map(|r| r[j]).collect();
                Some(ks_two_sample(&series, &ref_col))
            }
        };
        coords.push(CoordinateStats {
            ess: e,
            ks,
            path_mean: path_means[j],
            path_square_mean: path_squares[j],
        });
    }

    Ok(ReplicateOutcome {
        sampler: sampler_label.to_string(),
        param: built.param.clone(),
        replicate,
        events: stats.events,
        rate_evals: stats.rate_evals,
        thinning_rejections: stats.thinning_rejections,
        total_time: stats.total_time,
        wall_seconds: stats.wall_seconds,
        canonical: stats.canonical,
        coords,
        lyapunov_min: (use_probe && probe.count > 0).then_some(probe.min),
        lyapunov_mean: (use_probe && probe.count > 0)
            .then_some(probe.sum / probe.count.max(1) as f64),
    })
}

/// Run all samplers over all sweep values of one experiment.
pub fn run_experiment(
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<ReplicateOutcome>, CliError> {
    let targets = build_targets(&config.target, seed)?;
    let budget = config.budget_value();
    let mut outcomes = Vec::new();

    for (target_index, built) in targets.iter().enumerate() {
        let dim = built.target.dim();
        let init_x = initial_position(config, built.target.as_ref());
        for (sampler_index, sampler_config) in config.samplers.iter().enumerate() {
            let spec = build_sampler(sampler_config, dim);
            let label = sampler_label(sampler_config, sampler_index, &config.samplers);
            let ks_mode = resolve_ks_mode(config, built)?;
            let batch: Result<Vec<ReplicateOutcome>, CliError> = (0..config.replicates)
                .into_par_iter()
                .map(|replicate| {
                    let stream = replicate_stream(target_index, replicate);
                    run_replicate(
                        &spec,
                        &label,
                        built,
                        budget,
                        config.discretization,
                        &init_x,
                        seed,
                        stream,
                        replicate,
                        &ks_mode,
                        config.report.lyapunov,
                    )
                })
                .collect();
            outcomes.extend(batch?);
        }
    }
    Ok(outcomes)
}

/// Distinct label per configured sampler; duplicates get an index suffix.
pub fn sampler_label(config: &SamplerConfig, index: usize, all: &[SamplerConfig]) -> String {
    let duplicates = all.iter().filter(|s| s.kind == config.kind).count();
    if duplicates > 1 {
        format!("{}{}", config.kind, index)
    } else {
        config.kind.clone()
    }
}

/// Stream id for a replicate. Samplers share streams (common random
/// numbers): paired comparisons have lower variance and identical sampler
/// configs reproduce identical runs.
fn replicate_stream(target_index: usize, replicate: usize) -> u64 {
    (target_index as u64) * 1_000_000 + replicate as u64
}

/// Reference-run stream ids start here, clear of replicate streams.
pub const REFERENCE_STREAM: u64 = u64::MAX - 1000;

pub fn resolve_ks_mode(
    config: &ExperimentConfig,
    built: &BuiltTarget,
) -> Result<KsMode, CliError> {
    match config.report.ks.as_deref() {
        None => Ok(built
            .marginal_sds
            .clone()
            .map_or(KsMode::None, KsMode::Marginal)),
        Some("none") => Ok(KsMode::None),
        Some("marginal") => built.marginal_sds.clone().map(KsMode::Marginal).ok_or_else(|| {
            CliError::Config(format!(
                "report.ks = \"marginal\" needs known Gaussian marginals, but target {} has none; use report.ks = \"reference\" for two-sample KS against a long reference run",
                built.target.name()
            ))
        }),
        Some("reference") => {
            let reference = reference_rows(config, built)?;
            Ok(KsMode::Reference(std::sync::Arc::new(reference)))
        }
        Some(other) => Err(CliError::Config(format!("report.ks: unknown mode {other:?}"))),
    }
}

/// A single long run of the first configured sampler (10x budget) whose
/// draws serve as the empirical reference distribution.
fn reference_rows(
    config: &ExperimentConfig,
    built: &BuiltTarget,
) -> Result<Vec<Vec<f64>>, CliError> {
    let dim = built.target.dim();
    let spec = build_sampler(&config.samplers[0], dim);
    let budget = match config.budget_value() {
        Budget::Horizon(t) => Budget::Horizon(10.0 * t),
        Budget::RateEvals(n) => Budget::RateEvals(10 * n),
        Budget::Events(n) => Budget::Events(10 * n),
        Budget::WallSeconds(s) => Budget::WallSeconds(10.0 * s),
    };
    let init_x = initial_position(config, built.target.as_ref());
    let mut rng = RandomSource::with_stream(config.seed, REFERENCE_STREAM);
    let v0 = spec.initial_velocity(dim, &mut rng);
    let z0 = PhaseState::new(init_x, v0);
    let mut grid = Grid::new(budget, 4 * config.discretization);
    run_with(&spec, built.target.as_ref(), z0, budget, &mut rng, &mut grid)
        .map_err(|e| CliError::Runtime(format!("reference run: {e}")))?;
    Ok(grid.rows())
}
