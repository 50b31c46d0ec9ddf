//! Config text in, CSV and gnuplot companion out.
//!
//! ```text
//! cargo run --release --example experiment_csv -- /tmp/out.csv
//! ```

use std::path::PathBuf;

use ctstokes::experiment::{
    companion_path, parse_config, run_experiment, write_csv, write_gnuplot,
};

const CONFIG: &str = "
# A short λ = 10 run on a coarse mesh.
lambda = 10
T = 1
dt = 0.1, 0.05, 0.025
nx = 12
ny = 12
checkpoint_stride = 2
";

fn main() -> ctstokes::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ctstokes_example.csv"));
    let config = parse_config(CONFIG, &[("output", out.to_str().expect("utf-8 path"))])?;
    let rows = run_experiment(&config)?;
    write_csv(&rows, &config.output)?;
    write_gnuplot(&rows, &companion_path(&config.output))?;
    println!("{} rows -> {}", rows.len(), config.output.display());
    println!(
        "gnuplot: plot '{}' index 0 with lines",
        companion_path(&config.output).display()
    );
    Ok(())
}
