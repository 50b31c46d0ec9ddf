//! Global operators for P2 velocity / P1 pressure.

use super::element::{p2_nodes, p2_values, ElementGeometry};
use super::quadrature::{make_quadrature, QuadratureRule};
use super::space::{PressureSpace, VelocitySpace};
use crate::error::{Error, Result};
use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::mesh::{Mesh, Point};

/// Quadrature degree used for all matrix assembly. The P2 mass integrand
/// has degree 4, everything else less.
pub const ASSEMBLY_DEGREE: usize = 4;

#[derive(Debug, Clone)]
pub struct FemSystem {
    pub mesh: Mesh,
    pub velocity: VelocitySpace,
    pub pressure: PressureSpace,
    pub mu: f64,
    /// `(φᵢ, φⱼ)` on the vector P2 space, unconstrained.
    pub mass: SparseMatrix,
    /// `(∇φᵢ, ∇φⱼ)` on the vector P2 space, unconstrained.
    pub stiffness: SparseMatrix,
    /// `(∇qᵢ, ∇qⱼ)` on P1 (Neumann; kernel = constants).
    pub pressure_stiffness: SparseMatrix,
    /// `(qᵢ, div φⱼ)`: pressure rows, velocity columns.
    pub divergence: SparseMatrix,
    /// `(φᵢ, ∇qⱼ)`: velocity rows, pressure columns.
    pub gradient: SparseMatrix,
    /// `(div φᵢ, div φⱼ)`, used for the divergence norms of the estimators.
    pub div_div: SparseMatrix,
}

#[allow(clippy::needless_range_loop)]
pub fn assemble_system(mesh: &Mesh, mu: f64) -> Result<FemSystem> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::config(
            "mu",
            format!("viscosity must be positive, got {mu}"),
        ));
    }
    let rule = make_quadrature(ASSEMBLY_DEGREE)?;
    let velocity = VelocitySpace::new(mesh);
    let pressure = PressureSpace::new(mesh);
    let nu = velocity.num_dofs();
    let np = pressure.num_dofs();
    let nt = mesh.num_triangles();

    let mut mass = TripletBuilder::with_capacity(nu, nu, 72 * nt);
    let mut stiffness = TripletBuilder::with_capacity(nu, nu, 72 * nt);
    let mut div_div = TripletBuilder::with_capacity(nu, nu, 144 * nt);
    let mut kp = TripletBuilder::with_capacity(np, np, 9 * nt);
    let mut divergence = TripletBuilder::with_capacity(np, nu, 36 * nt);
    let mut gradient = TripletBuilder::with_capacity(nu, np, 36 * nt);

    for t in 0..nt {
        let geo = ElementGeometry::new(mesh, t);
        let nodes = p2_nodes(mesh, t);
        let verts = mesh.triangles[t];
        let jac = geo.jacobian();

        let mut m = [[0.0; 6]; 6];
        let mut k = [[0.0; 6]; 6];
        // dd[i][c][j][d] = ∫ ∂_c φ_i ∂_d φ_j
        let mut dd = [[[[0.0; 2]; 6]; 2]; 6];
        // dv[a][j][c] = ∫ L_a ∂_c φ_j ; gr[i][b][c] = ∫ φ_i ∂_c L_b
        let mut dv = [[[0.0; 2]; 6]; 3];
        let mut gr = [[[0.0; 2]; 3]; 6];

        for (bary, &w) in rule.points.iter().zip(&rule.weights) {
            let w = w * jac;
            let phi = p2_values(bary);
            let dphi = geo.p2_gradients(bary);
            for i in 0..6 {
                for j in 0..6 {
                    m[i][j] += w * phi[i] * phi[j];
                    k[i][j] += w * (dphi[i][0] * dphi[j][0] + dphi[i][1] * dphi[j][1]);
                    for c in 0..2 {
                        for d in 0..2 {
                            dd[i][c][j][d] += w * dphi[i][c] * dphi[j][d];
                        }
                    }
                }
                for a in 0..3 {
                    for c in 0..2 {
                        dv[a][i][c] += w * bary[a] * dphi[i][c];
                        gr[i][a][c] += w * phi[i] * geo.grad_bary[a][c];
                    }
                }
            }
        }

        for i in 0..6 {
            for j in 0..6 {
                for c in 0..2 {
                    mass.add(2 * nodes[i] + c, 2 * nodes[j] + c, m[i][j]);
                    stiffness.add(2 * nodes[i] + c, 2 * nodes[j] + c, k[i][j]);
                    for d in 0..2 {
                        div_div.add(2 * nodes[i] + c, 2 * nodes[j] + d, dd[i][c][j][d]);
                    }
                }
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                let ga = geo.grad_bary[a];
                let gb = geo.grad_bary[b];
                kp.add(
                    verts[a],
                    verts[b],
                    geo.area * (ga[0] * gb[0] + ga[1] * gb[1]),
                );
            }
            for j in 0..6 {
                for c in 0..2 {
                    divergence.add(verts[a], 2 * nodes[j] + c, dv[a][j][c]);
                    gradient.add(2 * nodes[j] + c, verts[a], gr[j][a][c]);
                }
            }
        }
    }

    Ok(FemSystem {
        mesh: mesh.clone(),
        velocity,
        pressure,
        mu,
        mass: mass.build(),
        stiffness: stiffness.build(),
        pressure_stiffness: kp.build(),
        divergence: divergence.build(),
        gradient: gradient.build(),
        div_div: div_div.build(),
    })
}

impl FemSystem {
    pub fn num_velocity_dofs(&self) -> usize {
        self.velocity.num_dofs()
    }

    pub fn num_pressure_dofs(&self) -> usize {
        self.pressure.num_dofs()
    }

    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.velocity.dirichlet
    }

    /// Velocity operator with Dirichlet rows and columns eliminated.
    pub fn constrain(&self, a: &SparseMatrix) -> SparseMatrix {
        a.eliminate_dofs(&self.velocity.dirichlet)
    }

    /// Homogeneous Dirichlet values in a right-hand side or coefficient vector.
    pub fn zero_dirichlet(&self, v: &mut [f64]) {
        for (x, &fixed) in v.iter_mut().zip(&self.velocity.dirichlet) {
            if fixed {
                *x = 0.0;
            }
        }
    }

    /// `(f, φᵢ)` for a vector field `f`, unconstrained.
    pub fn velocity_load(&self, rule: &QuadratureRule, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        let mut load = vec![0.0; self.num_velocity_dofs()];
        for t in 0..self.mesh.num_triangles() {
            let geo = ElementGeometry::new(&self.mesh, t);
            let nodes = p2_nodes(&self.mesh, t);
            let mut local = [[0.0; 2]; 6];
            for (bary, &w) in rule.points.iter().zip(&rule.weights) {
                let fx = f(geo.map(bary));
                let phi = p2_values(bary);
                for i in 0..6 {
                    local[i][0] += w * fx[0] * phi[i];
                    local[i][1] += w * fx[1] * phi[i];
                }
            }
            let jac = geo.jacobian();
            for i in 0..6 {
                load[2 * nodes[i]] += jac * local[i][0];
                load[2 * nodes[i] + 1] += jac * local[i][1];
            }
        }
        load
    }

    /// `‖∇u‖²`
    pub fn grad_norm_sq(&self, u: &[f64]) -> f64 {
        self.stiffness.quadratic_form(u)
    }

    /// `(div u, div v)`
    pub fn div_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.div_div.bilinear(u, v)
    }

    /// `‖∇p‖²` for a P1 field.
    pub fn pressure_grad_norm_sq(&self, p: &[f64]) -> f64 {
        self.pressure_stiffness.quadratic_form(p)
    }
}

/// Symmetric elimination for inhomogeneous Dirichlet data: returns the
/// right-hand side matching `a.eliminate_dofs(mask)` whose solution takes
/// `values` on the masked dofs.
pub fn fold_dirichlet(a: &SparseMatrix, mask: &[bool], values: &[f64], rhs: &[f64]) -> Vec<f64> {
    let mut out = rhs.to_vec();
    for i in 0..a.nrows() {
        if mask[i] {
            out[i] = values[i];
            continue;
        }
        let (cols, vals) = a.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            if mask[c] {
                out[i] -= v * values[c];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::EnvelopeCholesky;
    use crate::mesh::{build_structured_mesh, Rect};

    fn system(n: usize) -> FemSystem {
        let mesh = build_structured_mesh(Rect::symmetric_unit(), n, n).unwrap();
        assemble_system(&mesh, 1.0).unwrap()
    }

    #[test]
    fn mass_row_sums_give_area_per_component() {
        let s = system(3);
        let ones = vec![1.0; s.num_velocity_dofs()];
        let rows = s.mass.spmv(&ones).unwrap();
        let x: f64 = rows.iter().step_by(2).sum();
        let y: f64 = rows.iter().skip(1).step_by(2).sum();
        assert!((x - 4.0).abs() < 1e-13 && (y - 4.0).abs() < 1e-13);
    }

    #[test]
    fn operators_are_symmetric() {
        let s = system(4);
        for m in [&s.mass, &s.stiffness, &s.pressure_stiffness, &s.div_div] {
            assert!(m.max_asymmetry() <= 1e-13 * m.max_abs());
        }
    }

    #[test]
    fn neumann_kernel() {
        let s = system(4);
        let r = s
            .pressure_stiffness
            .spmv(&vec![1.0; s.num_pressure_dofs()])
            .unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn gradient_is_minus_divergence_transpose_on_interior_rows() {
        let s = system(4);
        let dt = s.divergence.transpose();
        for i in 0..s.num_velocity_dofs() {
            if s.velocity.dirichlet[i] {
                continue;
            }
            for j in 0..s.num_pressure_dofs() {
                assert!((s.gradient.get(i, j) + dt.get(i, j)).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn stiffness_times_linear_field_is_a_boundary_flux() {
        // For u linear, (∇u, ∇φᵢ) vanishes for every interior test function.
        let s = system(3);
        let u = s
            .velocity
            .interpolate(|x| [2.0 * x[0] - x[1] + 0.5, x[0] + 3.0 * x[1]]);
        let ku = s.stiffness.spmv(&u).unwrap();
        for (i, v) in ku.iter().enumerate() {
            if !s.velocity.dirichlet[i] {
                assert!(v.abs() < 1e-13, "dof {i}: {v}");
            }
        }
    }

    #[test]
    fn fold_dirichlet_reproduces_boundary_values() {
        // -Δu = 0 with u = x on the boundary has solution u = x.
        let s = system(3);
        let target = s.velocity.interpolate(|x| [x[0], x[1] * x[0]]);
        let values: Vec<f64> = target
            .iter()
            .zip(&s.velocity.dirichlet)
            .map(|(v, &m)| if m { *v } else { 0.0 })
            .collect();
        let a = s.constrain(&s.stiffness);
        let rhs = fold_dirichlet(
            &s.stiffness,
            s.dirichlet_mask(),
            &values,
            &vec![0.0; target.len()],
        );
        let u = EnvelopeCholesky::factor(&a).unwrap().solve(&rhs).unwrap();
        for (i, (&got, &want)) in u.iter().zip(&target).enumerate() {
            // Both components are harmonic (x and xy), so P2 reproduces them.
            assert!((got - want).abs() < 1e-12, "dof {i}");
        }
        assert_eq!(a.max_asymmetry(), 0.0);
    }

    #[test]
    fn load_of_constant_field() {
        let s = system(2);
        let rule = make_quadrature(4).unwrap();
        let load = s.velocity_load(&rule, |_| [1.0, -2.0]);
        let x: f64 = load.iter().step_by(2).sum();
        let y: f64 = load.iter().skip(1).step_by(2).sum();
        assert!((x - 4.0).abs() < 1e-13 && (y + 8.0).abs() < 1e-13);
    }
}
