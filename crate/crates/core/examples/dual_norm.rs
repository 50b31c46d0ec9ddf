//! Discrete H⁻¹ norms through the Riesz map, under mesh refinement.
//!
//! For `g = (sin πx sin πy, 0)` on (-1, 1)² the dual norm against the full
//! H¹ norm is `‖g‖² / (1 + 2π²)`, since `g` is an eigenfunction of `-Δ`.

use std::f64::consts::PI;

use ctstokes::estimators::{analytic_load, RieszSolver};
use ctstokes::fem::assemble_system;
use ctstokes::linalg::SolverKind;
use ctstokes::mesh::{build_structured_mesh, Rect};

fn main() -> ctstokes::Result<()> {
    let exact = 1.0 / (1.0 + 2.0 * PI * PI);
    for n in [4, 8, 16, 32] {
        let mesh = build_structured_mesh(Rect::symmetric_unit(), n, n)?;
        let system = assemble_system(&mesh, 1.0)?;
        let load = analytic_load(&system, |x| [(PI * x[0]).sin() * (PI * x[1]).sin(), 0.0]);
        let riesz = RieszSolver::new(&system, SolverKind::Cholesky, 1e-12, 10_000)?;
        let value = riesz.dual_norm_sq(&load)?;
        println!(
            "n = {n:>2}: |g|²_dual = {value:.10}  (exact {exact:.10}, rel. error {:.2e})",
            (value - exact).abs() / exact
        );
    }
    Ok(())
}
