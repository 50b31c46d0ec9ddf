//! Configuration, sweep driver and result files for effectivity experiments.

mod config;
mod output;
mod run;

pub use config::{load_config, parse_config, ExperimentConfig, KEYS};
pub use output::{
    companion_path, csv_string, format_row, gnuplot_string, parse_csv, write_csv, write_gnuplot,
    CSV_HEADER,
};
pub use run::{
    build_system, experiment_case, run_experiment, run_experiment_on, run_experiment_with,
    ResultRow, RunSummary,
};
