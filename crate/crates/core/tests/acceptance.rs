//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test --release --test acceptance` (the workspace test profile is
//! already optimised, so plain `cargo test` works too).

use std::process::{Command, ExitCode};
use std::time::Instant;

use ctstokes::estimators::{ErrorEvaluator, ErrorOptions};
use ctstokes::experiment::{
    build_system, experiment_case, parse_config, run_experiment_on, RunSummary,
};
use ctstokes::manufactured::interpolated_snapshot;
use ctstokes::scheme::{Snapshot, TimeGrid};
use ctstokes::verify::run_selftest;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn sweep(overrides: &[(&str, &str)]) -> Vec<RunSummary> {
    let config = parse_config("", overrides).expect("valid acceptance config");
    let system = build_system(&config).expect("mesh and assembly");
    run_experiment_on(&config, &system, |_| {}).expect("sweep runs")
}

fn oracle_suite() -> Outcome {
    let start = Instant::now();
    let checks = run_selftest();
    let secs = start.elapsed().as_secs_f64();
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({})", c.name, c.detail))
        .collect();
    outcome(
        failed.is_empty() && secs < 30.0,
        format!(
            "{}/{} checks in {secs:.1}s{}",
            checks.len() - failed.len(),
            checks.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", failed.join(", "))
            }
        ),
    )
}

/// `∫₀ᵀ μ‖∇(u − u^{Δt})‖²` for the exact solution sampled at the nodes.
fn spatial_floor(overrides: &[(&str, &str)], dt: f64) -> f64 {
    let config = parse_config("", overrides).expect("valid config");
    let system = build_system(&config).expect("assembly");
    let case = experiment_case(&config);
    let ev = ErrorEvaluator::new(&system, case, ErrorOptions::default()).expect("evaluator");
    let grid = TimeGrid::uniform(config.horizon, dt).expect("grid");
    let snaps: Vec<Snapshot> = (0..=grid.num_steps())
        .map(|n| interpolated_snapshot(&system, &case, &grid, n, 0.0))
        .collect();
    snaps
        .windows(2)
        .map(|w| ev.error_terms(&w[0], &w[1]).expect("error terms").0)
        .sum()
}

fn rate_criterion() -> Outcome {
    let start = Instant::now();
    let base = [("lambda", "1"), ("T", "1"), ("nx", "48"), ("ny", "48")];
    let mut overrides = base.to_vec();
    overrides.push(("dt", "0.1,0.05,0.025,0.0125"));
    let runs = sweep(&overrides);
    let floor = spatial_floor(&base, 0.00625).sqrt();
    let errs: Vec<f64> = runs
        .iter()
        .map(|r| r.final_row.error_grad_sq.sqrt())
        .collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let mut orders = Vec::new();
    let mut in_range = true;
    for (k, w) in errs.windows(2).enumerate() {
        if w[1] > 3.0 * floor {
            let order = (w[0] / w[1]).ln() / (runs[k].dt / runs[k + 1].dt).ln();
            in_range &= (0.4..=1.6).contains(&order);
            orders.push(format!("{order:.3}"));
        } else {
            orders.push("below floor".into());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        decreasing && in_range && secs < 300.0,
        format!(
            "errors {:?}, floor {floor:.3e}, orders [{}], {secs:.1}s",
            errs.iter().map(|e| format!("{e:.4e}")).collect::<Vec<_>>(),
            orders.join(", ")
        ),
    )
}

fn robustness_criterion(runs: &[RunSummary], secs: f64) -> Outcome {
    let eff2: Vec<f64> = runs.iter().map(|r| r.final_row.eff2).collect();
    let spread = eff2.iter().cloned().fold(f64::MIN, f64::max)
        / eff2.iter().cloned().fold(f64::MAX, f64::min);
    let ratios: Vec<f64> = runs
        .iter()
        .map(|r| r.final_row.est1 / r.final_row.est2)
        .collect();
    let monotone = ratios.windows(2).all(|w| w[1] > w[0]);
    let last = *ratios.last().expect("non-empty sweep");
    outcome(
        spread < 10.0 && monotone && last > 3.0 && secs < 900.0,
        format!(
            "eff2 spread {spread:.3}, est1/est2 [{}] (final {last:.3}, needs > 3), {secs:.1}s",
            ratios
                .iter()
                .map(|r| format!("{r:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn underestimation_criterion(runs: &[RunSummary]) -> Outcome {
    let n = runs.len();
    let est_ok = runs[n - 2..]
        .iter()
        .all(|r| r.final_row.est3 <= r.final_row.est2);
    let eff3: Vec<f64> = runs.iter().map(|r| r.final_row.eff3).collect();
    let eff2: Vec<f64> = runs.iter().map(|r| r.final_row.eff2).collect();
    let eff3_decreasing = eff3.windows(2).all(|w| w[1] < w[0]);
    let mut worst_drop: f64 = 1.0;
    for i in 0..n {
        for j in i + 1..n {
            worst_drop = worst_drop.max(eff2[i] / eff2[j]);
        }
    }
    outcome(
        est_ok && eff3_decreasing && worst_drop <= 3.0,
        format!(
            "est3 <= est2 at two smallest dt: {est_ok}; eff3 [{}] decreasing: {eff3_decreasing}; largest eff2 drop {worst_drop:.3}",
            eff3.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn proof_chain_criterion(runs: &[RunSummary]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in runs {
        let (lhs, rhs) = r.proof_chain;
        ok &= lhs <= rhs * (1.0 + 1e-10);
        parts.push(format!("{:.3e} <= {:.3e}", lhs, rhs));
    }
    outcome(ok, parts.join("; "))
}

fn degeneracy_criterion() -> Outcome {
    let start = Instant::now();
    let runs = sweep(&[
        ("lambda", "1"),
        ("T", "10"),
        ("nx", "48"),
        ("ny", "48"),
        ("dt", "0.1,0.05,0.025"),
    ]);
    let ratios: Vec<f64> = runs
        .iter()
        .map(|r| r.final_row.linf_term / r.final_row.est2)
        .collect();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ratios.iter().all(|r| *r < 0.05) && secs < 600.0,
        format!(
            "linf/est2 [{}] (needs < 0.05), {secs:.1}s",
            ratios
                .iter()
                .map(|r| format!("{r:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn zero_data_criterion() -> Outcome {
    let runs = sweep(&[
        ("zero_data", "true"),
        ("T", "1"),
        ("nx", "16"),
        ("ny", "16"),
        ("dt", "0.1,0.05"),
    ]);
    let ok = runs.iter().all(|r| {
        let f = &r.final_row;
        [f.est1, f.est2, f.est3, f.error_total]
            .iter()
            .all(|v| v.to_bits() == 0)
            && f.eff2.is_nan()
    });
    outcome(
        ok,
        "est1, est2, est3 and error are +0.0 with effectivity flagged".into(),
    )
}

fn determinism_criterion() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let config = dir.path().join("run.conf");
    std::fs::write(&config, "lambda = 10\nT = 3\ndt = 0.1\nnx = 48\nny = 48\n")
        .expect("write config");
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_ctstokes"))
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .env("RUST_LOG", "warn")
            .status()
            .expect("spawn ctstokes");
        if !status.success() {
            return outcome(false, format!("run {k} exited with {status}"));
        }
        outputs.push(std::fs::read(&out).expect("read csv"));
    }
    let rows = outputs[0].iter().filter(|b| **b == b'\n').count() - 1;
    outcome(
        outputs[0] == outputs[1],
        format!("two CLI runs, {rows} rows, {} bytes each", outputs[0].len()),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, o: Outcome| {
        println!(
            "{} {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((name, o));
    };

    report("1 oracle suite", oracle_suite());
    report("2 velocity error rate", rate_criterion());

    let start = Instant::now();
    let sweep10 = sweep(&[("lambda", "10"), ("T", "3"), ("nx", "48"), ("ny", "48")]);
    let secs = start.elapsed().as_secs_f64();
    report(
        "3 estimator2 robustness",
        robustness_criterion(&sweep10, secs),
    );
    report(
        "4 estimator3 under-estimation",
        underestimation_criterion(&sweep10),
    );
    report("5 proof-chain inequality", proof_chain_criterion(&sweep10));
    report("6 lambda=1 degeneracy", degeneracy_criterion());
    report("7 zero-data exactness", zero_data_criterion());
    report("8 determinism", determinism_criterion());

    let failed = results.iter().filter(|(_, o)| !o.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
