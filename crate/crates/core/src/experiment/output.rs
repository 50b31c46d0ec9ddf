use std::fmt::Write as _;
use std::path::Path;

use super::run::ResultRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "lambda,dt,T_checkpoint,est1,est2,est3,linf_term,error_grad_sq,error_dual_sq,\
error_total,data_osc,eff1,eff2,eff3,wallclock_seconds";

impl ResultRow {
    pub fn values(&self) -> [f64; 15] {
        [
            self.lambda,
            self.dt,
            self.t_checkpoint,
            self.est1,
            self.est2,
            self.est3,
            self.linf_term,
            self.error_grad_sq,
            self.error_dual_sq,
            self.error_total,
            self.data_osc,
            self.eff1,
            self.eff2,
            self.eff3,
            self.wallclock_seconds,
        ]
    }

    pub fn from_values(v: [f64; 15]) -> Self {
        ResultRow {
            lambda: v[0],
            dt: v[1],
            t_checkpoint: v[2],
            est1: v[3],
            est2: v[4],
            est3: v[5],
            linf_term: v[6],
            error_grad_sq: v[7],
            error_dual_sq: v[8],
            error_total: v[9],
            data_osc: v[10],
            eff1: v[11],
            eff2: v[12],
            eff3: v[13],
            wallclock_seconds: v[14],
        }
    }
}

/// 17 significant digits, enough to round-trip any f64.
fn fmt_value(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push_str("NaN");
    } else {
        let _ = write!(out, "{v:.16e}");
    }
}

pub fn format_row(out: &mut String, row: &ResultRow) {
    for (i, v) in row.values().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        fmt_value(out, *v);
    }
    out.push('\n');
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 360);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        format_row(&mut out, row);
    }
    out
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(rows))?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let bad = |line: usize, msg: String| Error::config(format!("csv line {line}"), msg);
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(bad(1, format!("unexpected header {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| bad(i + 2, format!("`{f}`: {e}")))
                })
                .collect::<Result<_>>()?;
            let values: [f64; 15] = fields.try_into().map_err(|f: Vec<f64>| {
                bad(i + 2, format!("expected 15 fields, got {}", f.len()))
            })?;
            Ok(ResultRow::from_values(values))
        })
        .collect()
}

/// `T eff2` pairs, one block per time step size, blocks separated by two
/// blank lines so gnuplot can address them with `index`.
pub fn gnuplot_string(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    let mut current: Option<f64> = None;
    for row in rows {
        if current != Some(row.dt) {
            if current.is_some() {
                out.push_str("\n\n");
            }
            let _ = writeln!(out, "# dt = {}", row.dt);
            current = Some(row.dt);
        }
        fmt_value(&mut out, row.t_checkpoint);
        out.push(' ');
        fmt_value(&mut out, row.eff2);
        out.push('\n');
    }
    out
}

pub fn write_gnuplot(rows: &[ResultRow], path: &Path) -> Result<()> {
    std::fs::write(path, gnuplot_string(rows))?;
    Ok(())
}

/// Companion path next to a CSV: `results.csv` becomes `results.eff2.dat`.
pub fn companion_path(csv: &Path) -> std::path::PathBuf {
    csv.with_extension("eff2.dat")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(dt: f64, t: f64) -> ResultRow {
        let mut v = [0.0; 15];
        for (i, x) in v.iter_mut().enumerate() {
            *x = (i as f64 + 1.0) / 3.0 + t;
        }
        v[1] = dt;
        v[2] = t;
        ResultRow::from_values(v)
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(csv_string(&[]), format!("{CSV_HEADER}\n"));
        assert_eq!(CSV_HEADER.split(',').count(), 15);
    }

    #[test]
    fn values_survive_round_trip() {
        let mut rows = vec![row(0.1, 0.1), row(0.1, 0.2), row(0.05, 0.05)];
        rows[1].eff2 = f64::NAN;
        rows[2].est1 = 1e-300;
        let back = parse_csv(&csv_string(&rows)).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in rows.iter().zip(&back) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
    }

    #[test]
    fn gnuplot_blocks_have_two_columns() {
        let rows = [row(0.1, 0.1), row(0.1, 0.2), row(0.05, 0.05)];
        let text = gnuplot_string(&rows);
        let blocks: Vec<&str> = text.split("\n\n\n").collect();
        assert_eq!(blocks.len(), 2);
        for block in blocks {
            for line in block
                .lines()
                .filter(|l| !l.starts_with('#') && !l.is_empty())
            {
                assert_eq!(line.split_whitespace().count(), 2);
            }
        }
    }

    #[test]
    fn companion_name() {
        assert_eq!(
            companion_path(Path::new("out/r.csv")),
            Path::new("out/r.eff2.dat")
        );
    }
}
