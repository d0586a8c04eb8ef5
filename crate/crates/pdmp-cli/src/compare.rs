//! `compare`: run two or more samplers under one budget and emit a
//! side-by-side table of KS and ESS summaries plus pairwise efficiency
//! ratios.

use std::fmt::Write as _;
use std::path::Path;

use pdmp::targets::float17;

use crate::config::ExperimentConfig;
use crate::experiment::run_experiment;
use crate::report::{self, GroupAggregate};
use crate::CliError;

pub fn run(config: &ExperimentConfig, seed: u64, out_dir: &Path) -> Result<(), CliError> {
    if config.samplers.len() < 2 {
        return Err(CliError::Config(
            "compare needs at least two samplers".into(),
        ));
    }
    // Equal budgets across samplers are what make the comparison meaningful;
    // the machine-independent control is the rate-evaluation budget.
    if config.budget.rate_evals.is_none() {
        eprintln!(
            "note: compare without budget.rate_evals controls by {}, which is machine-relative",
            if config.budget.horizon.is_some() {
                "horizon"
            } else {
                "event count"
            }
        );
    }

    let outcomes = run_experiment(config, seed)?;
    let groups = report::aggregate(&outcomes);
    report::write_outputs(out_dir, &config.name, &config.budget_label(), &outcomes, &groups)?;
    std::fs::write(out_dir.join("comparison.csv"), comparison_csv(&groups))
        .map_err(|e| CliError::Runtime(format!("writing comparison: {e}")))?;
    std::fs::write(out_dir.join("pairwise.csv"), pairwise_csv(&groups))
        .map_err(|e| CliError::Runtime(format!("writing pairwise: {e}")))?;
    println!("wrote {}", out_dir.display());
    Ok(())
}

/// One row per sampler (and sweep value): the four KS summaries and the
/// four ESS summaries.
fn comparison_csv(groups: &[GroupAggregate]) -> String {
    let mut out = String::from(
        "sampler,param,ks_min,ks_mean,ks_median,ks_max,ess_min,ess_mean,ess_median,ess_max,ess_per_rate_eval,ess_per_second\n",
    );
    for g in groups {
        let ks = match &g.ks {
            Some(ks) => ks
                .iter()
                .map(|(m, _)| float17(*m))
                .collect::<Vec<_>>()
                .join(","),
            None => ",,,".into(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            g.sampler,
            g.param,
            ks,
            g.ess
                .iter()
                .map(|(m, _)| float17(*m))
                .collect::<Vec<_>>()
                .join(","),
            float17(g.ess_per_rate_eval),
            float17(g.ess_per_second),
        );
    }
    out
}

/// Pairwise efficiency ratios, row sampler over column sampler.
fn pairwise_csv(groups: &[GroupAggregate]) -> String {
    let mut out =
        String::from("sampler_a,sampler_b,param,ess_per_rate_eval_ratio,ess_per_second_ratio\n");
    for a in groups {
        for b in groups {
            if a.param != b.param || std::ptr::eq(a, b) {
                continue;
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                a.sampler,
                b.sampler,
                a.param,
                float17(a.ess_per_rate_eval / b.ess_per_rate_eval),
                float17(a.ess_per_second / b.ess_per_second),
            );
        }
    }
    out
}
