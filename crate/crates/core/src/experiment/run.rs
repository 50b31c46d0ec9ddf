use std::time::Instant;

use log::info;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::estimators::{ErrorEvaluator, ErrorOptions, EstimatorLedger, LedgerRow};
use crate::fem::{assemble_system, FemSystem};
use crate::manufactured::AnalyticStokes;
use crate::mesh::build_structured_mesh;
use crate::scheme::{run_scheme_with, SchemeOptions, TimeGrid};

/// One CSV line: the cumulative state of one run at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub lambda: f64,
    pub dt: f64,
    pub t_checkpoint: f64,
    pub est1: f64,
    pub est2: f64,
    pub est3: f64,
    pub linf_term: f64,
    pub error_grad_sq: f64,
    pub error_dual_sq: f64,
    pub error_total: f64,
    pub data_osc: f64,
    pub eff1: f64,
    pub eff2: f64,
    pub eff3: f64,
    pub wallclock_seconds: f64,
}

impl ResultRow {
    fn from_ledger(lambda: f64, dt: f64, row: &LedgerRow, wallclock: f64) -> Self {
        ResultRow {
            lambda,
            dt,
            t_checkpoint: row.time,
            est1: row.est1,
            est2: row.est2,
            est3: row.est3,
            linf_term: row.linf_term,
            error_grad_sq: row.err_grad,
            error_dual_sq: row.err_dual,
            error_total: row.error,
            data_osc: row.data_osc,
            eff1: row.eff1,
            eff2: row.eff2,
            eff3: row.eff3,
            wallclock_seconds: wallclock,
        }
    }
}

/// End-of-run diagnostics for one time step size.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub dt: f64,
    pub num_steps: usize,
    pub final_row: ResultRow,
    /// `(Σ ‖div(b − a)‖)²` and `Σ (12N/Δtⁿ) ∫ ‖div u^{Δt}‖²`.
    pub proof_chain: (f64, f64),
    pub max_pressure_ratio: f64,
    pub max_projection_defect: f64,
    pub max_compatibility: f64,
}

/// The analytic case a config describes.
pub fn experiment_case(config: &ExperimentConfig) -> AnalyticStokes {
    let lambda = if config.zero_data { 0.0 } else { config.lambda };
    AnalyticStokes::new(lambda, config.mu)
}

pub fn build_system(config: &ExperimentConfig) -> Result<FemSystem> {
    let mesh = build_structured_mesh(config.rect, config.nx, config.ny)?;
    assemble_system(&mesh, config.mu)
}

/// Runs the sweep on an already assembled system, handing each checkpoint
/// row to `on_row` as soon as it exists. Rows emitted before a failure
/// have been delivered when the error is returned.
pub fn run_experiment_on<F>(
    config: &ExperimentConfig,
    system: &FemSystem,
    mut on_row: F,
) -> Result<Vec<RunSummary>>
where
    F: FnMut(&ResultRow),
{
    let case = experiment_case(config);
    let evaluator = ErrorEvaluator::new(
        system,
        case,
        ErrorOptions {
            time_points: config.time_gauss_points,
            data_time_points: config.data_gauss_points,
            space_degree: config.quadrature_degree,
            solver: config.solver,
            tol: config.tol,
            max_iterations: config.max_iterations,
        },
    )?;
    let options = SchemeOptions {
        solver: config.solver,
        tol: config.tol,
        max_iterations: config.max_iterations,
    };
    // u(0) = 0 for every λ.
    let u0 = vec![0.0; system.num_velocity_dofs()];

    let mut summaries = Vec::with_capacity(config.dt_list.len());
    for &dt in &config.dt_list {
        let n_steps = config.steps_for(dt)?;
        let grid = TimeGrid::uniform(config.horizon, dt)?;
        let start = Instant::now();
        let mut ledger = EstimatorLedger::new(config.mu, config.include_linf);
        let mut max_defect: f64 = 0.0;
        let mut max_compat: f64 = 0.0;
        let mut last = None;
        info!("dt = {dt}: {n_steps} steps");

        run_scheme_with(
            system,
            &grid,
            options,
            |n| evaluator.loads().averaged_load(&grid, n),
            &u0,
            |a, b, report| {
                max_defect = max_defect.max(report.projection_defect);
                max_compat = max_compat.max(report.compatibility);
                let terms = evaluator.interval_terms(a, b)?;
                let row = ledger.accumulate(a.index, b.time, a.dt, &terms)?;
                let k = a.index + 1;
                if k % config.checkpoint_stride == 0 || k == n_steps {
                    let wall = if config.record_wallclock {
                        start.elapsed().as_secs_f64()
                    } else {
                        0.0
                    };
                    let out = ResultRow::from_ledger(config.lambda, dt, &row, wall);
                    on_row(&out);
                    last = Some(out);
                }
                Ok(())
            },
        )?;

        let final_row = last.ok_or_else(|| Error::InvalidTimeGrid("no steps taken".into()))?;
        info!(
            "dt = {dt}: est2 = {:.4e}, error = {:.4e}, eff2 = {:.4}",
            final_row.est2, final_row.error_total, final_row.eff2
        );
        summaries.push(RunSummary {
            dt,
            num_steps: n_steps,
            final_row,
            proof_chain: ledger.proof_chain(n_steps),
            max_pressure_ratio: ledger.max_pressure_ratio(),
            max_projection_defect: max_defect,
            max_compatibility: max_compat,
        });
    }
    Ok(summaries)
}

/// Assembles the system and runs the sweep, streaming rows to `on_row`.
pub fn run_experiment_with<F>(config: &ExperimentConfig, on_row: F) -> Result<Vec<RunSummary>>
where
    F: FnMut(&ResultRow),
{
    config.validate()?;
    let system = build_system(config)?;
    run_experiment_on(config, &system, on_row)
}

/// All checkpoint rows of the sweep, in sweep order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    run_experiment_with(config, |r| rows.push(*r))?;
    Ok(rows)
}
