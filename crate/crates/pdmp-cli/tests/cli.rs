//! End-to-end CLI checks: exit codes, dataset generation, report
//! consistency, and the comparison guards.

use std::path::Path;
use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pdmp-bench"))
}

fn run_ok(args: &[&str]) {
    let out = bench().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn exit_code(args: &[&str]) -> i32 {
    bench().args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn config_errors_exit_2_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "name = \"x\"\nreplicates = 1\nseed = 1\nbuget = 3\n\n[budget]\nhorizon = 1.0\n\n[target]\nkind = \"mvn1\"\ndim = 2\n\n[[samplers]]\nkind = \"cs\"\n",
    )
    .unwrap();
    let out = bench()
        .args(["run", "--config", bad.to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    // TOML errors carry line context for the offending key.
    assert!(stderr.contains("buget"), "stderr: {stderr}");
}

#[test]
fn missing_dataset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "name = \"x\"\nreplicates = 1\nseed = 1\n\n[budget]\nhorizon = 1.0\n\n[target]\nkind = \"logistic\"\ndataset = \"missing.csv\"\n\n[[samplers]]\nkind = \"cs\"\nlambda_ref = 1.0\n",
    )
    .unwrap();
    assert_eq!(
        exit_code(&["run", "--config", config.to_str().unwrap(), "--out", "."]),
        2
    );
}

#[test]
fn simulate_data_is_byte_stable_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("data.toml");
    std::fs::write(
        &config,
        "kind = \"logistic\"\nobservations = 40\ndim = 10\nseed = 7\n",
    )
    .unwrap();
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        run_ok(&[
            "simulate-data",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let name = "logistic-n40-d10-seed7.csv";
    let a = std::fs::read(out1.join(name)).unwrap();
    let b = std::fs::read(out2.join(name)).unwrap();
    assert_eq!(a, b);
    let data = pdmp::targets::LogisticData::load_csv(&out1.join(name)).unwrap();
    assert_eq!(data.n(), 40);
    assert_eq!(data.dim(), 10);

    // Small LGCP grid for fast tests: 16 rows + header.
    let lgcp_config = dir.path().join("lgcp.toml");
    std::fs::write(&lgcp_config, "kind = \"lgcp\"\ngrid_side = 4\nseed = 3\n").unwrap();
    run_ok(&[
        "simulate-data",
        "--config",
        lgcp_config.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(out1.join("lgcp-side4-seed3.csv")).unwrap();
    assert_eq!(text.lines().count(), 17);
    assert!(text.starts_with("i,j,y,x\n"));
}

#[test]
fn run_on_simulated_logistic_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let data_config = dir.path().join("data.toml");
    std::fs::write(
        &data_config,
        "kind = \"logistic\"\nobservations = 20\ndim = 4\nseed = 11\n",
    )
    .unwrap();
    run_ok(&[
        "simulate-data",
        "--config",
        data_config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let dataset = dir.path().join("logistic-n20-d4-seed11.csv");
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        format!(
            r#"
name = "logistic-map"
replicates = 2
discretization = 150
seed = 5

[budget]
events = 3000

[target]
kind = "logistic"
dataset = "{}"

[init]
position = "map"
map_steps = 25
map_step_size = 0.05

[[samplers]]
kind = "cs"
lambda_ref = 1.0

[[samplers]]
kind = "zigzag"
lambda_ref = 1.0

[report]
lyapunov = true
"#,
            dataset.display()
        ),
    )
    .unwrap();
    run_ok(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--threads",
        "2",
    ]);
    let report =
        std::fs::read_to_string(dir.path().join("logistic-map/report.txt")).unwrap();
    assert!(report.contains("drift witness"), "report: {report}");
    // Thinned targets should report rejection work.
    let aggregate =
        std::fs::read_to_string(dir.path().join("logistic-map/aggregate.csv")).unwrap();
    assert!(aggregate.lines().count() == 3);
}

#[test]
fn banana_sweep_emits_one_aggregate_row_per_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
name = "banana-sweep"
replicates = 2
discretization = 120
seed = 8

[budget]
events = 2000

[target]
kind = "banana"
kappa = [0.25, 1.0, 4.0]

[[samplers]]
kind = "cs"
lambda_ref = 0.1

[[samplers]]
kind = "zigzag"
lambda_ref = 0.1
"#,
    )
    .unwrap();
    run_ok(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--threads",
        "2",
    ]);
    let aggregate =
        std::fs::read_to_string(dir.path().join("banana-sweep/aggregate.csv")).unwrap();
    let rows: Vec<&str> = aggregate.lines().skip(1).collect();
    assert_eq!(rows.len(), 6, "2 samplers x 3 kappas");
    for kappa in ["kappa0.25", "kappa1", "kappa4"] {
        assert_eq!(
            rows.iter().filter(|r| r.contains(kappa)).count(),
            2,
            "{kappa} rows"
        );
    }
}

#[test]
fn aggregate_is_recomputable_from_replicate_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
name = "roundtrip"
replicates = 3
discretization = 200
seed = 31

[budget]
horizon = 150.0

[target]
kind = "mvn1"
dim = 3

[[samplers]]
kind = "cs"
lambda_ref = 0.2
"#,
    )
    .unwrap();
    run_ok(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let base = dir.path().join("roundtrip");

    // Recompute the across-coordinate mean ESS per replicate from the
    // replicate CSVs and compare with the aggregate's ess_mean column.
    let mut per_replicate_means = Vec::new();
    for r in 0..3 {
        let text =
            std::fs::read_to_string(base.join(format!("replicates/cs-r{r:03}.csv"))).unwrap();
        let esses: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|line| line.split(',').nth(8).unwrap().parse::<f64>().unwrap())
            .collect();
        assert_eq!(esses.len(), 3);
        per_replicate_means.push(esses.iter().sum::<f64>() / esses.len() as f64);
    }
    let expected = per_replicate_means.iter().sum::<f64>() / per_replicate_means.len() as f64;

    let aggregate = std::fs::read_to_string(base.join("aggregate.csv")).unwrap();
    let header: Vec<&str> = aggregate.lines().next().unwrap().split(',').collect();
    let column = header.iter().position(|h| *h == "ess_mean").unwrap();
    let got: f64 = aggregate
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(column)
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        (got - expected).abs() <= 1e-12 * expected.abs(),
        "aggregate {got} vs recomputed {expected}"
    );
}

#[test]
fn compare_self_comparison_ratio_is_exactly_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
name = "self"
replicates = 2
discretization = 150
seed = 13

[budget]
rate_evals = 20000

[target]
kind = "mvn2"
dim = 2

[[samplers]]
kind = "cs"
lambda_ref = 0.1

[[samplers]]
kind = "cs"
lambda_ref = 0.1
"#,
    )
    .unwrap();
    run_ok(&[
        "compare",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let pairwise = std::fs::read_to_string(dir.path().join("self/pairwise.csv")).unwrap();
    for line in pairwise.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        // Identical configs share random streams, so the deterministic
        // efficiency ratio is exactly 1; the wall-clock one is only close.
        assert_eq!(cells[3].parse::<f64>().unwrap(), 1.0, "{line}");
        let per_second = cells[4].parse::<f64>().unwrap();
        assert!((0.2..5.0).contains(&per_second), "{line}");
    }
}

#[test]
fn compare_requires_two_samplers() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
name = "single"
replicates = 1
seed = 1

[budget]
horizon = 5.0

[target]
kind = "mvn1"
dim = 2

[[samplers]]
kind = "cs"
lambda_ref = 0.5
"#,
    )
    .unwrap();
    assert_eq!(
        exit_code(&[
            "compare",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap()
        ]),
        2
    );
}

#[test]
fn marginal_ks_on_non_gaussian_target_directs_to_reference_mode() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
name = "bananaks"
replicates = 1
seed = 1

[budget]
events = 500

[target]
kind = "banana"
kappa = 1.0

[[samplers]]
kind = "cs"
lambda_ref = 0.5

[[samplers]]
kind = "zigzag"
lambda_ref = 0.5

[report]
ks = "marginal"
"#,
    )
    .unwrap();
    let out = bench()
        .args(["compare", "--config", config.to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("reference"), "stderr: {stderr}");
}

#[test]
fn reference_ks_mode_runs_on_banana() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
name = "banana-ref"
replicates = 2
discretization = 150
seed = 17

[budget]
events = 2000

[target]
kind = "banana"
kappa = 1.0

[[samplers]]
kind = "cs"
lambda_ref = 0.5

[[samplers]]
kind = "zigzag"
lambda_ref = 0.5

[report]
ks = "reference"
"#,
    )
    .unwrap();
    run_ok(&[
        "compare",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--threads",
        "2",
    ]);
    let comparison =
        std::fs::read_to_string(dir.path().join("banana-ref/comparison.csv")).unwrap();
    // KS columns populated via the reference run.
    let first_row: Vec<&str> = comparison.lines().nth(1).unwrap().split(',').collect();
    assert!(first_row[2].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn lgcp_run_at_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        r#"
name = "lgcp-small"
replicates = 1
discretization = 120
seed = 23

[budget]
events = 1500

[target]
kind = "lgcp"
grid_side = 4
dataset_seed = 5

[[samplers]]
kind = "cs"
lambda_ref = 0.1

[[samplers]]
kind = "zigzag"
lambda_ref = 0.1
"#,
    )
    .unwrap();
    run_ok(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--threads",
        "2",
    ]);
    let aggregate =
        std::fs::read_to_string(dir.path().join("lgcp-small/aggregate.csv")).unwrap();
    // Thinning targets must report their rejection work.
    let header: Vec<&str> = aggregate.lines().next().unwrap().split(',').collect();
    let column = header
        .iter()
        .position(|h| *h == "thinning_rejections_mean")
        .unwrap();
    let cs_rejections: f64 = aggregate
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(column)
        .unwrap()
        .parse()
        .unwrap();
    assert!(cs_rejections > 0.0, "expected thinning rejections on lgcp");
}
