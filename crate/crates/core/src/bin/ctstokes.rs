use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use ctstokes::experiment::{
    companion_path, load_config, run_experiment_with, write_csv, write_gnuplot,
};
use ctstokes::mesh::{build_structured_mesh, Rect};
use ctstokes::verify::run_selftest;
use ctstokes::Error;

#[derive(Parser)]
#[command(
    name = "ctstokes",
    version,
    about = "Projection-scheme time-error estimator experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an effectivity sweep and write the CSV plus a gnuplot companion.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long = "T")]
        horizon: Option<String>,
        /// Comma-separated step sizes.
        #[arg(long)]
        dt: Option<String>,
        /// Sets both nx and ny.
        #[arg(long)]
        nx: Option<String>,
        #[arg(long)]
        include_linf: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Print counts and areas of a structured mesh of (-1, 1)².
    MeshInfo {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
    },
    /// Run the oracle suite.
    Selftest,
}

fn exit_for(e: &Error) -> ExitCode {
    error!("{e}");
    eprintln!("error: {e}");
    if e.is_config() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match cli.command {
        Command::Run {
            config,
            lambda,
            horizon,
            dt,
            nx,
            include_linf,
            out,
        } => {
            let mut overrides = Vec::new();
            let mut push = |key: &'static str, v: &Option<String>| {
                if let Some(v) = v {
                    overrides.push((key, v.clone()));
                }
            };
            push("lambda", &lambda);
            push("T", &horizon);
            push("dt", &dt);
            push("nx", &nx);
            push("ny", &nx);
            push("include_linf", &include_linf);
            push("output", &out);
            let pairs: Vec<(&str, &str)> =
                overrides.iter().map(|(k, v)| (*k, v.as_str())).collect();
            let config = match load_config(&config, &pairs) {
                Ok(c) => c,
                Err(e) => return exit_for(&e),
            };

            let mut rows = Vec::new();
            let outcome = run_experiment_with(&config, |r| rows.push(*r));
            // Whatever was computed is written even if the sweep failed.
            let written = write_csv(&rows, &config.output)
                .and_then(|_| write_gnuplot(&rows, &companion_path(&config.output)));
            if let Err(e) = outcome {
                return exit_for(&e);
            }
            if let Err(e) = written {
                return exit_for(&e);
            }
            println!("wrote {} rows to {}", rows.len(), config.output.display());
            ExitCode::SUCCESS
        }
        Command::MeshInfo { nx, ny } => match build_structured_mesh(Rect::symmetric_unit(), nx, ny)
        {
            Ok(mesh) => {
                let s = mesh.statistics();
                println!("vertices {}", mesh.num_vertices());
                println!("edges {}", mesh.num_edges());
                println!("triangles {}", mesh.num_triangles());
                println!(
                    "boundary_vertices {}",
                    mesh.boundary_vertex.iter().filter(|b| **b).count()
                );
                println!(
                    "velocity_dofs {}",
                    2 * (mesh.num_vertices() + mesh.num_edges())
                );
                println!("pressure_dofs {}", mesh.num_vertices());
                println!("min_area {}", s.min_area);
                println!("max_area {}", s.max_area);
                println!("total_area {}", s.total_area);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Selftest => {
            let checks = run_selftest();
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag} {:<36} {:>7.2}s  {}", c.name, c.seconds, c.detail);
            }
            println!("{} passed, {failed} failed", checks.len() - failed);
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
