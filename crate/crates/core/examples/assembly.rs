//! Taylor-Hood P2/P1 operators and the identities they satisfy.

use ctstokes::fem::assemble_system;
use ctstokes::mesh::{build_structured_mesh, Rect};

fn main() -> ctstokes::Result<()> {
    let mesh = build_structured_mesh(Rect::symmetric_unit(), 8, 8)?;
    let s = assemble_system(&mesh, 1.0)?;
    println!(
        "velocity dofs {}, pressure dofs {}",
        s.num_velocity_dofs(),
        s.num_pressure_dofs()
    );
    for (name, m) in [
        ("mass", &s.mass),
        ("stiffness", &s.stiffness),
        ("pressure stiffness", &s.pressure_stiffness),
        ("divergence", &s.divergence),
        ("gradient", &s.gradient),
    ] {
        println!(
            "  {name:<19} {:>6} x {:<6} nnz {}",
            m.nrows(),
            m.ncols(),
            m.nnz()
        );
    }

    // Mass rows of one velocity component sum to the domain area.
    let ones: Vec<f64> = (0..s.num_velocity_dofs())
        .map(|i| (i % 2 == 0) as u8 as f64)
        .collect();
    println!("1ᵀ M 1 (x-component) = {}", s.mass.quadratic_form(&ones));

    // Constants lie in the kernel of the pressure stiffness.
    let c = vec![1.0; s.num_pressure_dofs()];
    println!(
        "|K_p 1|_inf = {:.2e}",
        s.pressure_stiffness
            .spmv(&c)?
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    );

    // (∇p, v) = −(p, div v) for v vanishing on the boundary.
    let dt = s.divergence.transpose();
    let mut worst = 0.0f64;
    for i in (0..s.num_velocity_dofs()).filter(|&i| !s.dirichlet_mask()[i]) {
        for j in 0..s.num_pressure_dofs() {
            worst = worst.max((s.gradient.get(i, j) + dt.get(i, j)).abs());
        }
    }
    println!("max |G + Dᵀ| on free rows = {worst:.2e}");

    let u = s.velocity.interpolate(|x| [x[0], -x[1]]);
    println!("|∇(x, -y)|² = {} (exact 8)", s.grad_norm_sq(&u));
    println!("|div (x, -y)|² = {:.2e}", s.div_inner(&u, &u));
    Ok(())
}
