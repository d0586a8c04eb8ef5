//! Report assembly: per-replicate CSVs (deterministic), a timing CSV
//! (machine-relative), `aggregate.csv`, and a human-readable `report.txt`.
//!
//! Wall-clock columns live only in `timings.csv` and the aggregate so that
//! identical config + seed reproduces the replicate CSVs byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pdmp::targets::float17;

use crate::experiment::ReplicateOutcome;
use crate::CliError;

/// Header of every per-replicate CSV.
pub const REPLICATE_HEADER: &str = "sampler,param,replicate,events,rate_evals,thinning_rejections,total_time,coordinate,ess,ks,path_mean,path_square_mean,lyapunov_min,lyapunov_mean";

pub fn replicate_csv(outcome: &ReplicateOutcome) -> String {
    let mut out = String::from(REPLICATE_HEADER);
    out.push('\n');
    for (j, c) in outcome.coords.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            outcome.sampler,
            outcome.param,
            outcome.replicate,
            outcome.events,
            outcome.rate_evals,
            outcome.thinning_rejections,
            float17(outcome.total_time),
            j,
            float17(c.ess),
            c.ks.map(float17).unwrap_or_default(),
            float17(c.path_mean),
            float17(c.path_square_mean),
            outcome.lyapunov_min.map(float17).unwrap_or_default(),
            outcome.lyapunov_mean.map(float17).unwrap_or_default(),
        );
    }
    out
}

fn quantile_summary(values: &mut Vec<f64>) -> (f64, f64, f64, f64) {
    values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    let min = values[0];
    let max = values[n - 1];
    let mean = values.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    (min, mean, median, max)
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregate of one (sampler, param) group across replicates.
#[derive(Debug, Clone)]
pub struct GroupAggregate {
    pub sampler: String,
    pub param: String,
    pub replicates: usize,
    pub events_mean: f64,
    pub rate_evals_mean: f64,
    pub thinning_rejections_mean: f64,
    pub total_time_mean: f64,
    pub wall_seconds_mean: f64,
    /// Across-coordinate ESS summaries (min/mean/median/max), each averaged
    /// over replicates with its standard error.
    pub ess: [(f64, f64); 4],
    pub ks: Option<[(f64, f64); 4]>,
    pub ess_per_rate_eval: f64,
    pub ess_per_second: f64,
    pub canonical: bool,
    pub lyapunov_min: Option<f64>,
}

pub fn aggregate(outcomes: &[ReplicateOutcome]) -> Vec<GroupAggregate> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for o in outcomes {
        let key = (o.sampler.clone(), o.param.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.iter()
        .map(|(sampler, param)| {
            let group: Vec<&ReplicateOutcome> = outcomes
                .iter()
                .filter(|o| &o.sampler == sampler && &o.param == param)
                .collect();
            let collect_mean = |f: &dyn Fn(&ReplicateOutcome) -> f64| -> f64 {
                group.iter().map(|o| f(o)).sum::<f64>() / group.len() as f64
            };
            // Per replicate: min/mean/median/max of per-coordinate values,
            // then mean +- se across replicates per summary slot.
            let summaries = |pick: &dyn Fn(&ReplicateOutcome) -> Option<Vec<f64>>| {
                let per_rep: Vec<(f64, f64, f64, f64)> = group
                    .iter()
                    .filter_map(|o| pick(o).map(|mut v| quantile_summary(&mut v)))
                    .collect();
                if per_rep.len() != group.len() {
                    return None;
                }
                let slot = |idx: usize| -> (f64, f64) {
                    let vals: Vec<f64> = per_rep
                        .iter()
                        .map(|s| match idx {
                            0 => s.0,
                            1 => s.1,
                            2 => s.2,
                            _ => s.3,
                        })
                        .collect();
                    mean_and_se(&vals)
                };
                Some([slot(0), slot(1), slot(2), slot(3)])
            };
            let ess = summaries(&|o| Some(o.coords.iter().map(|c| c.ess).collect()))
                .expect("ess always present");
            let ks = summaries(&|o| o.coords.iter().map(|c| c.ks).collect::<Option<Vec<f64>>>());
            let mean_ess_per_rep: Vec<f64> = group
                .iter()
                .map(|o| {
                    o.coords.iter().map(|c| c.ess).sum::<f64>() / o.coords.len() as f64
                })
                .collect();
            let eval_eff: Vec<f64> = group
                .iter()
                .zip(&mean_ess_per_rep)
                .map(|(o, e)| e / o.rate_evals as f64)
                .collect();
            let sec_eff: Vec<f64> = group
                .iter()
                .zip(&mean_ess_per_rep)
                .map(|(o, e)| e / o.wall_seconds.max(1e-12))
                .collect();
            GroupAggregate {
                sampler: sampler.clone(),
                param: param.clone(),
                replicates: group.len(),
                events_mean: collect_mean(&|o| o.events as f64),
                rate_evals_mean: collect_mean(&|o| o.rate_evals as f64),
                thinning_rejections_mean: collect_mean(&|o| o.thinning_rejections as f64),
                total_time_mean: collect_mean(&|o| o.total_time),
                wall_seconds_mean: collect_mean(&|o| o.wall_seconds),
                ess,
                ks,
                ess_per_rate_eval: eval_eff.iter().sum::<f64>() / eval_eff.len() as f64,
                ess_per_second: sec_eff.iter().sum::<f64>() / sec_eff.len() as f64,
                canonical: group.iter().all(|o| o.canonical),
                lyapunov_min: group
                    .iter()
                    .map(|o| o.lyapunov_min)
                    .collect::<Option<Vec<f64>>>()
                    .map(|v| v.into_iter().fold(f64::INFINITY, f64::min)),
            }
        })
        .collect()
}

pub const AGGREGATE_HEADER: &str = "sampler,param,replicates,events_mean,rate_evals_mean,thinning_rejections_mean,total_time_mean,wall_seconds_mean,ess_min,ess_min_se,ess_mean,ess_mean_se,ess_median,ess_median_se,ess_max,ess_max_se,ks_min,ks_min_se,ks_mean,ks_mean_se,ks_median,ks_median_se,ks_max,ks_max_se,ess_per_rate_eval,ess_per_second,ess_per_rate_eval_ratio,ess_per_second_ratio,canonical,lyapunov_min";

/// The ratio columns divide the first configured sampler's efficiency by
/// each row's (the benchmark's reported "efficiency ratio" orientation).
pub fn aggregate_csv(groups: &[GroupAggregate]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for g in groups {
        let first = groups
            .iter()
            .find(|f| f.param == g.param)
            .expect("group exists");
        let opt = |v: Option<f64>| v.map(float17).unwrap_or_default();
        let ks_cells = match &g.ks {
            Some(ks) => ks
                .iter()
                .flat_map(|(m, se)| [float17(*m), float17(*se)])
                .collect::<Vec<_>>()
                .join(","),
            None => ",,,,,,,".to_string(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            g.sampler,
            g.param,
            g.replicates,
            float17(g.events_mean),
            float17(g.rate_evals_mean),
            float17(g.thinning_rejections_mean),
            float17(g.total_time_mean),
            float17(g.wall_seconds_mean),
            g.ess
                .iter()
                .flat_map(|(m, se)| [float17(*m), float17(*se)])
                .collect::<Vec<_>>()
                .join(","),
            ks_cells,
            float17(g.ess_per_rate_eval),
            float17(g.ess_per_second),
            float17(first.ess_per_rate_eval / g.ess_per_rate_eval),
            float17(first.ess_per_second / g.ess_per_second),
            g.canonical,
            opt(g.lyapunov_min),
        );
    }
    out
}

pub fn timings_csv(outcomes: &[ReplicateOutcome]) -> String {
    let mut out = String::from("sampler,param,replicate,wall_seconds\n");
    for o in outcomes {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            o.sampler,
            o.param,
            o.replicate,
            float17(o.wall_seconds)
        );
    }
    out
}

pub fn report_text(name: &str, budget_label: &str, groups: &[GroupAggregate]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment: {name}");
    let _ = writeln!(out, "budget: {budget_label}");
    let _ = writeln!(
        out,
        "note: wall-clock figures are machine-relative; rate-evaluation counts are not.\n"
    );
    for g in groups {
        let _ = writeln!(
            out,
            "sampler {}{}{}",
            g.sampler,
            if g.param.is_empty() { String::new() } else { format!(" [{}]", g.param) },
            if g.canonical {
                "  (canonical: zero refresh rate; invariance holds but the uniqueness guarantee needs lambda_ref > 0)"
            } else {
                ""
            }
        );
        let _ = writeln!(
            out,
            "  replicates {} | events {:.0} | rate evals {:.0} | rejections {:.0} | T {:.1} | wall {:.2}s",
            g.replicates,
            g.events_mean,
            g.rate_evals_mean,
            g.thinning_rejections_mean,
            g.total_time_mean,
            g.wall_seconds_mean
        );
        let _ = writeln!(
            out,
            "  ESS across coordinates: min {:.1} | mean {:.1} | median {:.1} | max {:.1}",
            g.ess[0].0, g.ess[1].0, g.ess[2].0, g.ess[3].0
        );
        if let Some(ks) = &g.ks {
            let _ = writeln!(
                out,
                "  KS across coordinates:  min {:.5} | mean {:.5} | median {:.5} | max {:.5}",
                ks[0].0, ks[1].0, ks[2].0, ks[3].0
            );
        }
        let _ = writeln!(
            out,
            "  efficiency: {:.3e} ESS/rate-eval, {:.3e} ESS/second",
            g.ess_per_rate_eval, g.ess_per_second
        );
        if let Some(lv) = g.lyapunov_min {
            let _ = writeln!(out, "  drift witness: min V over events {lv:.3e}");
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(
        out,
        "refresh-rate guidance: the geometric-ergodicity conditions bound lambda_ref by\n\
         sqrt(8 a1) from below (tails between exponential and Gaussian) or by a2/(14 d)\n\
         from above (exponential tails), with a1, a2 the Hessian/gradient limits of the\n\
         target; the benchmarks themselves do not enforce either bound."
    );
    out
}

/// Write everything for one experiment under `dir`.
pub fn write_outputs(
    dir: &Path,
    name: &str,
    budget_label: &str,
    outcomes: &[ReplicateOutcome],
    groups: &[GroupAggregate],
) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Runtime(format!("writing outputs: {e}"));
    let replicate_dir = dir.join("replicates");
    fs::create_dir_all(&replicate_dir).map_err(io)?;
    for o in outcomes {
        let suffix = if o.param.is_empty() {
            format!("{}-r{:03}.csv", o.sampler, o.replicate)
        } else {
            format!("{}-{}-r{:03}.csv", o.sampler, o.param, o.replicate)
        };
        fs::write(replicate_dir.join(suffix), replicate_csv(o)).map_err(io)?;
    }
    fs::write(dir.join("aggregate.csv"), aggregate_csv(groups)).map_err(io)?;
    fs::write(dir.join("timings.csv"), timings_csv(outcomes)).map_err(io)?;
    fs::write(dir.join("report.txt"), report_text(name, budget_label, groups)).map_err(io)?;
    Ok(())
}
