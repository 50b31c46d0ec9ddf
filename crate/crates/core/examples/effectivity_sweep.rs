//! Effectivity of the three time estimators over a step-size sweep.
//!
//! ```text
//! cargo run --release --example effectivity_sweep -- [nx] [lambda] [T] [dt,dt,...]
//! ```

use ctstokes::experiment::{parse_config, run_experiment_with};

fn main() -> ctstokes::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let nx = args.first().map_or("12", String::as_str);
    let lambda = args.get(1).map_or("10", String::as_str);
    let horizon = args.get(2).map_or("1", String::as_str);
    let dts = args.get(3).map_or("0.1,0.05,0.025", String::as_str);
    let config = parse_config(
        "",
        &[
            ("nx", nx),
            ("ny", nx),
            ("lambda", lambda),
            ("T", horizon),
            ("dt", dts),
        ],
    )?;

    let summaries = run_experiment_with(&config, |_| {})?;
    println!(
        "{:>9} {:>11} {:>11} {:>11} {:>11} {:>11} {:>8} {:>8} {:>8}",
        "dt", "est1", "est2", "est3", "linf", "error", "eff1", "eff2", "eff3"
    );
    for s in &summaries {
        let r = &s.final_row;
        println!(
            "{:>9} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>8.3} {:>8.3} {:>8.3}",
            s.dt, r.est1, r.est2, r.est3, r.linf_term, r.error_total, r.eff1, r.eff2, r.eff3
        );
    }
    Ok(())
}
