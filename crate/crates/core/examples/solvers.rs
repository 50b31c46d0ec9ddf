//! Jacobi-CG against the envelope Cholesky on the velocity system, and
//! deflated CG on the singular pressure Laplacian.

use std::time::Instant;

use ctstokes::fem::assemble_system;
use ctstokes::linalg::{cg_solve, CgOptions, EnvelopeCholesky, Nullspace, SparseMatrix};
use ctstokes::mesh::{build_structured_mesh, Rect};

fn main() -> ctstokes::Result<()> {
    let mesh = build_structured_mesh(Rect::symmetric_unit(), 32, 32)?;
    let s = assemble_system(&mesh, 1.0)?;
    let dt = 0.01;
    let a = s.constrain(&SparseMatrix::linear_combination(&[
        (1.0 / dt, &s.mass),
        (s.mu, &s.stiffness),
    ])?);
    let mut b: Vec<f64> = (0..a.nrows())
        .map(|i| ((i * 7919) % 13) as f64 - 6.0)
        .collect();
    s.zero_dirichlet(&mut b);

    let start = Instant::now();
    let (x_cg, report) = cg_solve(&a, &b, &CgOptions::default())?;
    println!(
        "Jacobi-CG: {} iterations, residual {:.1e}, {:?}",
        report.iterations,
        report.final_residual,
        start.elapsed()
    );

    let start = Instant::now();
    let chol = EnvelopeCholesky::factor(&a)?;
    let factored = start.elapsed();
    let start = Instant::now();
    let x_ch = chol.solve(&b)?;
    println!(
        "Cholesky: envelope {} entries, factor {factored:?}, solve {:?}",
        chol.envelope_size(),
        start.elapsed()
    );
    let diff = x_cg
        .iter()
        .zip(&x_ch)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0f64, f64::max);
    println!("max |x_cg - x_chol| = {diff:.2e}");

    // Pressure Laplacian: singular, so the right-hand side must be orthogonal to constants.
    let mut rhs: Vec<f64> = (0..s.num_pressure_dofs())
        .map(|i| (i as f64 * 0.37).sin())
        .collect();
    let mean = rhs.iter().sum::<f64>() / rhs.len() as f64;
    rhs.iter_mut().for_each(|v| *v -= mean);
    let opts = CgOptions {
        nullspace: Nullspace::Constants(&s.pressure.lumped_weights),
        ..Default::default()
    };
    let (p, report) = cg_solve(&s.pressure_stiffness, &rhs, &opts)?;
    println!(
        "pressure CG: {} iterations, residual {:.1e}, weighted mean {:.1e}",
        report.iterations,
        report.final_residual,
        s.pressure.weighted_mean(&p)
    );
    Ok(())
}
