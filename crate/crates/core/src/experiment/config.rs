use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::SolverKind;
use crate::mesh::Rect;

/// Everything one sweep needs. Built by [`parse_config`]; the defaults are
/// the λ = 10, T = 3 sweep on a 48 × 48 mesh of (-1, 1)².
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
    pub mu: f64,
    pub lambda: f64,
    pub horizon: f64,
    pub dt_list: Vec<f64>,
    pub include_linf: bool,
    /// Replace the manufactured data by zero forcing and zero initial data.
    pub zero_data: bool,
    /// Space quadrature degree for loads and errors (2, 4 or 6).
    pub quadrature_degree: usize,
    pub time_gauss_points: usize,
    pub data_gauss_points: usize,
    pub solver: SolverKind,
    pub tol: f64,
    pub max_iterations: usize,
    pub output: PathBuf,
    pub checkpoint_stride: usize,
    /// Off by default so repeated runs are byte-identical.
    pub record_wallclock: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rect: Rect::symmetric_unit(),
            nx: 48,
            ny: 48,
            mu: 1.0,
            lambda: 10.0,
            horizon: 3.0,
            dt_list: vec![0.1, 0.05, 0.025, 0.0125, 0.00625],
            include_linf: true,
            zero_data: false,
            quadrature_degree: 6,
            time_gauss_points: 3,
            data_gauss_points: 5,
            solver: SolverKind::Cholesky,
            tol: 1e-10,
            max_iterations: 10_000,
            output: PathBuf::from("results.csv"),
            checkpoint_stride: 1,
            record_wallclock: false,
        }
    }
}

pub const KEYS: &[&str] = &[
    "lambda",
    "mu",
    "T",
    "dt",
    "nx",
    "ny",
    "xmin",
    "xmax",
    "ymin",
    "ymax",
    "include_linf",
    "zero_data",
    "quadrature_degree",
    "time_gauss_points",
    "data_gauss_points",
    "solver",
    "tol",
    "maxit",
    "output",
    "checkpoint_stride",
    "record_wallclock",
];

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| Error::config(key, format!("`{value}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::config(key, "must be finite"));
    }
    Ok(v)
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("`{value}` is not a non-negative integer")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::config(key, format!("`{value}` is not a boolean"))),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let list: Vec<f64> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(key, s))
        .collect::<Result<_>>()?;
    if list.is_empty() {
        return Err(Error::config(key, "empty list"));
    }
    Ok(list)
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "lambda" => self.lambda = parse_f64(key, value)?,
            "mu" => self.mu = parse_f64(key, value)?,
            "T" => self.horizon = parse_f64(key, value)?,
            "dt" => self.dt_list = parse_list(key, value)?,
            "nx" => self.nx = parse_usize(key, value)?,
            "ny" => self.ny = parse_usize(key, value)?,
            "xmin" => self.rect.xmin = parse_f64(key, value)?,
            "xmax" => self.rect.xmax = parse_f64(key, value)?,
            "ymin" => self.rect.ymin = parse_f64(key, value)?,
            "ymax" => self.rect.ymax = parse_f64(key, value)?,
            "include_linf" => self.include_linf = parse_bool(key, value)?,
            "zero_data" => self.zero_data = parse_bool(key, value)?,
            "quadrature_degree" => self.quadrature_degree = parse_usize(key, value)?,
            "time_gauss_points" => self.time_gauss_points = parse_usize(key, value)?,
            "data_gauss_points" => self.data_gauss_points = parse_usize(key, value)?,
            "solver" => {
                self.solver = value.parse().map_err(|_| {
                    Error::config(key, format!("unknown solver `{value}` (cholesky or cg)"))
                })?
            }
            "tol" => self.tol = parse_f64(key, value)?,
            "maxit" => self.max_iterations = parse_usize(key, value)?,
            "output" => {
                if value.is_empty() {
                    return Err(Error::config(key, "empty path"));
                }
                self.output = PathBuf::from(value)
            }
            "checkpoint_stride" => self.checkpoint_stride = parse_usize(key, value)?,
            "record_wallclock" => self.record_wallclock = parse_bool(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Number of steps for `dt`, or an error if `T` is not a whole multiple.
    pub fn steps_for(&self, dt: f64) -> Result<usize> {
        let n = (self.horizon / dt).round();
        if n < 1.0 || (n * dt - self.horizon).abs() > 1e-9 * self.horizon {
            return Err(Error::config(
                "dt",
                format!(
                    "T = {} is not a positive multiple of dt = {dt}",
                    self.horizon
                ),
            ));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.rect
            .validate()
            .map_err(|e| Error::config("xmin/xmax/ymin/ymax", e.to_string()))?;
        if self.nx == 0 {
            return Err(Error::config("nx", "must be at least 1"));
        }
        if self.ny == 0 {
            return Err(Error::config("ny", "must be at least 1"));
        }
        if self.mu <= 0.0 {
            return Err(Error::config("mu", "must be positive"));
        }
        if self.horizon <= 0.0 {
            return Err(Error::config("T", "must be positive"));
        }
        for &dt in &self.dt_list {
            if dt <= 0.0 {
                return Err(Error::config("dt", format!("{dt} is not positive")));
            }
            self.steps_for(dt)?;
        }
        if ![2, 4, 6].contains(&self.quadrature_degree) {
            return Err(Error::config("quadrature_degree", "must be 2, 4 or 6"));
        }
        if !(1..=32).contains(&self.time_gauss_points) {
            return Err(Error::config(
                "time_gauss_points",
                "must be between 1 and 32",
            ));
        }
        if !(1..=32).contains(&self.data_gauss_points) {
            return Err(Error::config(
                "data_gauss_points",
                "must be between 1 and 32",
            ));
        }
        if self.tol <= 0.0 {
            return Err(Error::config("tol", "must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("maxit", "must be at least 1"));
        }
        if self.checkpoint_stride == 0 {
            return Err(Error::config("checkpoint_stride", "must be at least 1"));
        }
        Ok(())
    }

    /// Canonical `key = value` text that parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let dts: Vec<String> = self.dt_list.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(s, "lambda = {}", self.lambda);
        let _ = writeln!(s, "mu = {}", self.mu);
        let _ = writeln!(s, "T = {}", self.horizon);
        let _ = writeln!(s, "dt = {}", dts.join(","));
        let _ = writeln!(s, "nx = {}\nny = {}", self.nx, self.ny);
        let r = &self.rect;
        let _ = writeln!(
            s,
            "xmin = {}\nxmax = {}\nymin = {}\nymax = {}",
            r.xmin, r.xmax, r.ymin, r.ymax
        );
        let _ = writeln!(s, "include_linf = {}", self.include_linf);
        let _ = writeln!(s, "zero_data = {}", self.zero_data);
        let _ = writeln!(s, "quadrature_degree = {}", self.quadrature_degree);
        let _ = writeln!(s, "time_gauss_points = {}", self.time_gauss_points);
        let _ = writeln!(s, "data_gauss_points = {}", self.data_gauss_points);
        let solver = match self.solver {
            SolverKind::Cholesky => "cholesky",
            SolverKind::Cg => "cg",
        };
        let _ = writeln!(s, "solver = {solver}");
        let _ = writeln!(s, "tol = {}", self.tol);
        let _ = writeln!(s, "maxit = {}", self.max_iterations);
        let _ = writeln!(s, "output = {}", self.output.display());
        let _ = writeln!(s, "checkpoint_stride = {}", self.checkpoint_stride);
        let _ = writeln!(s, "record_wallclock = {}", self.record_wallclock);
        s
    }
}

/// Parses flat `key = value` text (`#` starts a comment), then applies
/// `overrides` in order, then validates.
pub fn parse_config(source: &str, overrides: &[(&str, &str)]) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    for (lineno, raw) in source.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, got `{line}`"),
            )
        })?;
        config.set(key.trim(), value)?;
    }
    for (key, value) in overrides {
        config.set(key, value)?;
    }
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path, overrides: &[(&str, &str)]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn empty_source_gives_defaults() {
        let c = parse_config("", &[]).unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!((c.lambda, c.horizon), (10.0, 3.0));
        assert_eq!(c.dt_list, vec![0.1, 0.05, 0.025, 0.0125, 0.00625]);
        assert!(c.include_linf);
    }

    #[test]
    fn overrides_win() {
        let c = parse_config(
            "lambda = 10\n# comment\nT = 3 # trailing\n",
            &[("lambda", "1"), ("T", "10")],
        )
        .unwrap();
        assert_eq!((c.lambda, c.horizon), (1.0, 10.0));
    }

    #[test]
    fn invalid_values_name_their_key() {
        assert_eq!(key_of(parse_config("dt = -0.1", &[]).unwrap_err()), "dt");
        assert_eq!(
            key_of(parse_config("T = 1\ndt = 0.3", &[]).unwrap_err()),
            "dt"
        );
        assert_eq!(key_of(parse_config("nx = 0", &[]).unwrap_err()), "nx");
        assert_eq!(
            key_of(parse_config("colour = red", &[]).unwrap_err()),
            "colour"
        );
        assert_eq!(key_of(parse_config("tol = 0", &[]).unwrap_err()), "tol");
        assert_eq!(
            key_of(parse_config("include_linf = maybe", &[]).unwrap_err()),
            "include_linf"
        );
        assert!(parse_config("just words", &[]).unwrap_err().is_config());
    }

    #[test]
    fn text_round_trip() {
        let c = parse_config("lambda=1\nT=10\ndt=0.1,0.05\nsolver=cg\nnx=7", &[]).unwrap();
        assert_eq!(parse_config(&c.to_text(), &[]).unwrap(), c);
    }

    #[test]
    fn steps_for_small_dt() {
        let c = ExperimentConfig::default();
        assert_eq!(c.steps_for(0.00625).unwrap(), 480);
        assert_eq!(c.steps_for(0.1).unwrap(), 30);
    }
}
