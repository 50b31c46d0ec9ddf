//! Independent oracle checks on small meshes: dense LU and pseudo-inverse
//! solves, finite differences, Gauss time quadrature and closed-form
//! integrals. `ctstokes selftest` runs all of them.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::{
    estimator_terms, ErrorEvaluator, ErrorOptions, EstimatorLedger, RieszSolver,
};
use crate::experiment::{csv_string, parse_config, run_experiment};
use crate::fem::{
    assemble_system, gauss_legendre_unit, integrate_field, make_quadrature, squared,
    squared_matrix, FemSystem,
};
use crate::linalg::{cg_solve, CgOptions, Nullspace, SolverKind, SparseMatrix};
use crate::manufactured::{interpolated_snapshot, AnalyticStokes, ManufacturedLoads};
use crate::mesh::{build_structured_mesh, Rect};
use crate::scheme::{
    interpolate_velocity, pressure_step, run_scheme, ProjectionScheme, SchemeOptions, Snapshot,
    TimeGrid,
};

/// Outcome of one oracle comparison.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type CheckFn = fn() -> Result<(bool, String)>;

pub const CHECKS: &[(&str, CheckFn)] = &[
    ("mesh_euler_relation", mesh_euler_relation),
    ("mesh_uniform_areas", mesh_uniform_areas),
    ("spmv_vs_dense", spmv_vs_dense),
    ("cg_two_by_two", cg_two_by_two),
    ("cg_neumann_vs_pseudo_inverse", cg_neumann_vs_pseudo_inverse),
    ("quadrature_monomials", quadrature_monomials),
    ("adjoint_identity", adjoint_identity),
    ("p2_reproduces_quadratics", p2_reproduces_quadratics),
    ("stiffness_per_element_flux", stiffness_per_element_flux),
    (
        "gradient_norm_of_linear_field",
        gradient_norm_of_linear_field,
    ),
    ("velocity_step_vs_dense_lu", velocity_step_vs_dense_lu),
    (
        "constant_pressure_is_annihilated",
        constant_pressure_is_annihilated,
    ),
    (
        "pressure_step_vs_pseudo_inverse",
        pressure_step_vs_pseudo_inverse,
    ),
    ("riesz_vs_dense_lu", riesz_vs_dense_lu),
    ("fd_velocity_gradient", fd_velocity_gradient),
    ("fd_pressure_gradient", fd_pressure_gradient),
    ("fd_velocity_laplacian", fd_velocity_laplacian),
    (
        "fd_time_derivative_and_divergence",
        fd_time_derivative_and_divergence,
    ),
    ("forcing_balances_momentum", forcing_balances_momentum),
    (
        "averaged_coefficients_small_step",
        averaged_coefficients_small_step,
    ),
    (
        "averaged_load_vs_time_quadrature",
        averaged_load_vs_time_quadrature,
    ),
    (
        "interval_terms_vs_time_quadrature",
        interval_terms_vs_time_quadrature,
    ),
    (
        "estimator_difference_recomputed",
        estimator_difference_recomputed,
    ),
    ("self_convergence", self_convergence),
    ("injected_exact_beats_scheme", injected_exact_beats_scheme),
    ("time_gauss_refinement", time_gauss_refinement),
    ("zero_data_is_exactly_zero", zero_data_is_exactly_zero),
    ("csv_is_deterministic", csv_is_deterministic),
];

/// Runs every check, catching errors as failures.
pub fn run_selftest() -> Vec<Check> {
    CHECKS.iter().map(|(name, f)| run_check(name, *f)).collect()
}

pub fn run_check(name: &'static str, f: CheckFn) -> Check {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Check {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed)
}

fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    let rows = a.to_dense();
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| rows[i][j])
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn system(n: usize) -> Result<FemSystem> {
    let mesh = build_structured_mesh(Rect::symmetric_unit(), n, n)?;
    assemble_system(&mesh, 1.0)
}

fn random_velocity(system: &FemSystem, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut u: Vec<f64> = (0..system.num_velocity_dofs())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    system.zero_dirichlet(&mut u);
    u
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Dense copy of `a` with Dirichlet rows and columns replaced by identity.
fn dense_constrained(system: &FemSystem, a: &SparseMatrix) -> DMatrix<f64> {
    let mut d = dense(a);
    for (i, &fixed) in system.dirichlet_mask().iter().enumerate() {
        if fixed {
            d.row_mut(i).fill(0.0);
            d.column_mut(i).fill(0.0);
            d[(i, i)] = 1.0;
        }
    }
    d
}

fn sample_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<(f64, [f64; 2])> {
    (0..n)
        .map(|_| {
            let t = rng.gen_range(0.0..3.0);
            (t, [rng.gen_range(-0.99..0.99), rng.gen_range(-0.99..0.99)])
        })
        .collect()
}

fn mesh_euler_relation() -> Result<(bool, String)> {
    let mesh = build_structured_mesh(Rect::symmetric_unit(), 2, 2)?;
    let mut ok = (mesh.num_vertices(), mesh.num_triangles(), mesh.num_edges()) == (9, 8, 16);
    ok &= mesh.boundary_vertex.iter().filter(|b| **b).count() == 8;
    for nx in 1..=8 {
        for ny in 1..=8 {
            let m = build_structured_mesh(Rect::symmetric_unit(), nx, ny)?;
            ok &= m.num_edges() == m.num_vertices() + m.num_triangles() - 1;
            ok &= m.boundary_vertex.iter().filter(|b| **b).count() == 2 * (nx + ny);
        }
    }
    Ok((
        ok,
        "E = V + F - 1 and 2(nx + ny) boundary vertices for nx, ny <= 8".into(),
    ))
}

fn mesh_uniform_areas() -> Result<(bool, String)> {
    let s = build_structured_mesh(Rect::symmetric_unit(), 2, 2)?.statistics();
    Ok((
        s.min_area == 0.5 && s.max_area == 0.5,
        format!("min {} max {}", s.min_area, s.max_area),
    ))
}

fn spmv_vs_dense() -> Result<(bool, String)> {
    let mut r = rng();
    let b = DMatrix::from_fn(10, 10, |_, _| r.gen_range(-1.0..1.0));
    let spd = &b * b.transpose() + DMatrix::identity(10, 10) * 10.0;
    let rows: Vec<Vec<f64>> = (0..10)
        .map(|i| spd.row(i).iter().copied().collect())
        .collect();
    let a = SparseMatrix::from_dense(&rows);
    let x = random_vec(10, &mut r);
    let y = a.spmv(&x)?;
    let oracle = &spd * DVector::from_column_slice(&x);
    let err = y
        .iter()
        .zip(oracle.iter())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    Ok((err <= 1e-13, format!("max abs difference {err:.2e}")))
}

fn cg_two_by_two() -> Result<(bool, String)> {
    let a = SparseMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
    let (x, rep) = cg_solve(&a, &[1.0, 2.0], &CgOptions::default())?;
    let err = (x[0] - 1.0 / 11.0).abs().max((x[1] - 7.0 / 11.0).abs());
    Ok((
        err < 1e-12 && rep.converged,
        format!("error {err:.2e} in {} iterations", rep.iterations),
    ))
}

fn cg_neumann_vs_pseudo_inverse() -> Result<(bool, String)> {
    let rows = vec![
        vec![1.0, -1.0, 0.0],
        vec![-1.0, 2.0, -1.0],
        vec![0.0, -1.0, 1.0],
    ];
    let a = SparseMatrix::from_dense(&rows);
    let b = [1.0, 0.0, -1.0];
    let weights = [1.0; 3];
    let opts = CgOptions {
        nullspace: Nullspace::Constants(&weights),
        ..Default::default()
    };
    let (x, _) = cg_solve(&a, &b, &opts)?;
    let pinv = dense(&a)
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::InvalidMesh(e.to_string()))?;
    let oracle = pinv * DVector::from_column_slice(&b);
    let err = rel_diff(&x, oracle.as_slice());
    Ok((err < 1e-10, format!("relative difference {err:.2e}")))
}

fn quadrature_monomials() -> Result<(bool, String)> {
    let q4 = make_quadrature(4)?.integrate_reference(|x, y| x * x * y * y);
    let q6 = make_quadrature(6)?.integrate_reference(|x, y| x.powi(3) * y.powi(3));
    // a! b! / (a + b + 2)!
    let (e4, e6) = (1.0 / 180.0, 36.0 / 40320.0);
    let err = (q4 - e4).abs().max((q6 - e6).abs());
    Ok((err <= 1e-15, format!("max error {err:.2e}")))
}

fn adjoint_identity() -> Result<(bool, String)> {
    let s = system(8)?;
    let dt = s.divergence.transpose();
    let mut worst: f64 = 0.0;
    for i in 0..s.num_velocity_dofs() {
        if s.dirichlet_mask()[i] {
            continue;
        }
        for j in 0..s.num_pressure_dofs() {
            worst = worst.max((s.gradient.get(i, j) + dt.get(i, j)).abs());
        }
    }
    Ok((worst <= 1e-13, format!("max |G + D^T| {worst:.2e}")))
}

fn p2_reproduces_quadratics() -> Result<(bool, String)> {
    let s = system(4)?;
    let u = s
        .velocity
        .interpolate(|x| [x[0] * x[0], x[0] * x[1] - x[1] * x[1]]);
    let mut r = rng();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let v = s.velocity.evaluate(&s.mesh, &u, x).expect("inside");
        worst = worst.max((v[0] - x[0] * x[0]).abs());
        worst = worst.max((v[1] - x[0] * x[1] + x[1] * x[1]).abs());
    }
    Ok((worst <= 1e-14, format!("max error {worst:.2e}")))
}

/// For a linear field, `K u` on each element equals the boundary flux of
/// its constant gradient tested against the P2 basis.
fn stiffness_per_element_flux() -> Result<(bool, String)> {
    let s = system(3)?;
    let grad = [[1.5, -0.5], [2.0, 0.25]];
    let u = s.velocity.interpolate(|x| {
        [
            grad[0][0] * x[0] + grad[0][1] * x[1],
            grad[1][0] * x[0] + grad[1][1] * x[1],
        ]
    });
    let ku = s.stiffness.spmv(&u)?;
    // Interior dofs see no flux at all: Δu = 0.
    let interior = ku
        .iter()
        .zip(s.dirichlet_mask())
        .filter(|(_, m)| !**m)
        .map(|(v, _)| v.abs())
        .fold(0.0, f64::max);
    // Boundary dofs: Σ over boundary edges of ∫ (∇u n) φᵢ, computed from
    // the 1D Simpson rule which is exact for quadratics.
    let mut flux = vec![0.0; s.num_velocity_dofs()];
    let mesh = &s.mesh;
    let nv = mesh.num_vertices();
    for (e, edge) in mesh.edges.iter().enumerate() {
        if !mesh.boundary_edge[e] {
            continue;
        }
        let (p, q) = (mesh.vertices[edge[0]], mesh.vertices[edge[1]]);
        let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
        let mid = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
        let n = if mid[0].abs() > 1.0 - 1e-12 {
            [mid[0].signum(), 0.0]
        } else {
            [0.0, mid[1].signum()]
        };
        // Quadratic Lagrange basis on the edge: endpoint weight 1/6, midpoint 2/3.
        for (node, w) in [
            (edge[0], 1.0 / 6.0),
            (edge[1], 1.0 / 6.0),
            (nv + e, 2.0 / 3.0),
        ] {
            for c in 0..2 {
                flux[2 * node + c] += len * w * (grad[c][0] * n[0] + grad[c][1] * n[1]);
            }
        }
    }
    let boundary = ku
        .iter()
        .zip(&flux)
        .zip(s.dirichlet_mask())
        .filter(|(_, m)| **m)
        .map(|((k, f), _)| (k - f).abs())
        .fold(0.0, f64::max);
    let err = interior.max(boundary);
    Ok((err < 1e-12, format!("max |K u - flux| {err:.2e}")))
}

fn gradient_norm_of_linear_field() -> Result<(bool, String)> {
    let s = system(4)?;
    let u = s.velocity.interpolate(|x| [x[0], -x[1]]);
    let v = s.grad_norm_sq(&u);
    Ok(((v - 8.0).abs() < 1e-12, format!("{v}")))
}

fn velocity_step_vs_dense_lu() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in [2, 4] {
        let s = system(n)?;
        let mut r = rng();
        let dt = 0.05;
        let u_prev = random_velocity(&s, &mut r);
        let p = random_vec(s.num_pressure_dofs(), &mut r);
        let load = random_vec(s.num_velocity_dofs(), &mut r);
        let mut scheme = ProjectionScheme::new(&s, SchemeOptions::default());
        let (u, _) = scheme.velocity_step(&u_prev, &p, dt, &load)?;

        let a = dense_constrained(
            &s,
            &(SparseMatrix::linear_combination(&[(1.0 / dt, &s.mass), (s.mu, &s.stiffness)])?),
        );
        let mut rhs = DVector::from_column_slice(&load)
            + dense(&s.mass) * DVector::from_column_slice(&u_prev) / dt
            - dense(&s.gradient) * DVector::from_column_slice(&p);
        for (i, &fixed) in s.dirichlet_mask().iter().enumerate() {
            if fixed {
                rhs[i] = 0.0;
            }
        }
        let oracle = a
            .lu()
            .solve(&rhs)
            .ok_or(Error::NotPositiveDefinite { row: 0, pivot: 0.0 })?;
        worst = worst.max(rel_diff(&u, oracle.as_slice()));
    }
    Ok((worst <= 1e-9, format!("relative difference {worst:.2e}")))
}

fn constant_pressure_is_annihilated() -> Result<(bool, String)> {
    let s = system(4)?;
    let mut r = rng();
    let u_prev = random_velocity(&s, &mut r);
    let load = random_vec(s.num_velocity_dofs(), &mut r);
    let mut scheme = ProjectionScheme::new(&s, SchemeOptions::default());
    let (u0, _) = scheme.velocity_step(&u_prev, &vec![0.0; s.num_pressure_dofs()], 0.1, &load)?;
    let (u1, _) = scheme.velocity_step(&u_prev, &vec![2.5; s.num_pressure_dofs()], 0.1, &load)?;
    let err = rel_diff(&u1, &u0);
    Ok((err < 1e-13, format!("relative difference {err:.2e}")))
}

fn pressure_step_vs_pseudo_inverse() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in [2, 4] {
        let s = system(n)?;
        let mut r = rng();
        let u = random_velocity(&s, &mut r);
        let dt = 0.1;
        let (p, _) = pressure_step(&s, &u, dt, &SchemeOptions::default())?;
        let rhs = -(dense(&s.divergence) * DVector::from_column_slice(&u)) / dt;
        let pinv = dense(&s.pressure_stiffness)
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::InvalidMesh(e.to_string()))?;
        let mut oracle: Vec<f64> = (pinv * rhs).as_slice().to_vec();
        let mean = s.pressure.weighted_mean(&oracle);
        oracle.iter_mut().for_each(|v| *v -= mean);
        worst = worst.max(rel_diff(&p, &oracle));
    }
    Ok((worst <= 1e-9, format!("relative difference {worst:.2e}")))
}

fn riesz_vs_dense_lu() -> Result<(bool, String)> {
    let s = system(4)?;
    let rule = make_quadrature(6)?;
    let load = s.velocity_load(&rule, |x| {
        let (sx, sy) = (
            (std::f64::consts::PI * x[0]).sin(),
            (std::f64::consts::PI * x[1]).sin(),
        );
        [sx * sy, x[0] * sy]
    });
    let riesz = RieszSolver::new(&s, SolverKind::Cholesky, 1e-12, 10_000)?;
    let value = riesz.dual_norm_sq(&load)?;
    let h1 = SparseMatrix::linear_combination(&[(1.0, &s.stiffness), (1.0, &s.mass)])?;
    let mut rhs = DVector::from_column_slice(&load);
    for (i, &fixed) in s.dirichlet_mask().iter().enumerate() {
        if fixed {
            rhs[i] = 0.0;
        }
    }
    let w = dense_constrained(&s, &h1)
        .lu()
        .solve(&rhs)
        .ok_or(Error::NotPositiveDefinite { row: 0, pivot: 0.0 })?;
    let oracle = rhs.dot(&w);
    let err = rel(value, oracle);
    Ok((err <= 1e-9, format!("relative difference {err:.2e}")))
}

fn fd_velocity_gradient() -> Result<(bool, String)> {
    let case = AnalyticStokes::new(10.0, 1.0);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for (t, x) in sample_points(&mut rng(), 25) {
        let g = case.velocity_gradient(t, x);
        for j in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[j] += h;
            xm[j] -= h;
            let (up, um) = (case.velocity(t, xp), case.velocity(t, xm));
            for i in 0..2 {
                worst = worst.max((g[i][j] - (up[i] - um[i]) / (2.0 * h)).abs());
            }
        }
    }
    Ok((worst <= 1e-7, format!("max abs difference {worst:.2e}")))
}

fn fd_pressure_gradient() -> Result<(bool, String)> {
    let case = AnalyticStokes::new(10.0, 1.0);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for (t, x) in sample_points(&mut rng(), 25) {
        let g = case.pressure_gradient(t, x);
        for j in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[j] += h;
            xm[j] -= h;
            let fd = (case.pressure(t, xp) - case.pressure(t, xm)) / (2.0 * h);
            worst = worst.max((g[j] - fd).abs());
        }
    }
    Ok((worst <= 1e-7, format!("max abs difference {worst:.2e}")))
}

fn fd_velocity_laplacian() -> Result<(bool, String)> {
    let case = AnalyticStokes::new(10.0, 1.0);
    // Fourth-order five-point stencil per direction.
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for (t, x) in sample_points(&mut rng(), 25) {
        let lap = case.velocity_laplacian(t, x);
        let mut fd = [0.0; 2];
        for j in 0..2 {
            let at = |k: f64| {
                let mut y = x;
                y[j] += k * h;
                case.velocity(t, y)
            };
            let (m2, m1, c, p1, p2) = (at(-2.0), at(-1.0), at(0.0), at(1.0), at(2.0));
            for i in 0..2 {
                fd[i] +=
                    (-m2[i] + 16.0 * m1[i] - 30.0 * c[i] + 16.0 * p1[i] - p2[i]) / (12.0 * h * h);
            }
        }
        worst = worst
            .max((lap[0] - fd[0]).abs())
            .max((lap[1] - fd[1]).abs());
    }
    Ok((worst <= 1e-5, format!("max abs difference {worst:.2e}")))
}

fn fd_time_derivative_and_divergence() -> Result<(bool, String)> {
    let case = AnalyticStokes::new(10.0, 1.0);
    let h = 1e-6;
    let (mut dt_err, mut div_err): (f64, f64) = (0.0, 0.0);
    for (t, x) in sample_points(&mut rng(), 25) {
        let d = case.velocity_time_derivative(t, x);
        let (up, um) = (case.velocity(t + h, x), case.velocity(t - h, x));
        for i in 0..2 {
            dt_err = dt_err.max((d[i] - (up[i] - um[i]) / (2.0 * h)).abs());
        }
        let g = case.velocity_gradient(t, x);
        div_err = div_err
            .max((g[0][0] + g[1][1]).abs())
            .max(case.divergence(t, x).abs());
    }
    Ok((
        dt_err <= 1e-7 && div_err <= 1e-12,
        format!("time derivative {dt_err:.2e}, divergence {div_err:.2e}"),
    ))
}

fn forcing_balances_momentum() -> Result<(bool, String)> {
    let case = AnalyticStokes::new(10.0, 1.0);
    let mut worst: f64 = 0.0;
    for (t, x) in sample_points(&mut rng(), 25) {
        let f = case.forcing(t, x);
        let (ut, lap, gp) = (
            case.velocity_time_derivative(t, x),
            case.velocity_laplacian(t, x),
            case.pressure_gradient(t, x),
        );
        for i in 0..2 {
            let r = ut[i] - case.mu * lap[i] + gp[i];
            worst = worst.max((f[i] - r).abs() / r.abs().max(1.0));
        }
    }
    Ok((worst <= 1e-12, format!("max relative residual {worst:.2e}")))
}

fn averaged_coefficients_small_step() -> Result<(bool, String)> {
    let case = AnalyticStokes::new(10.0, 1.0);
    let dt = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let t0 = 0.137 * k as f64;
        let (c, s) = case.averaged_coefficients(t0, t0 + dt);
        let tm = t0 + dt / 2.0;
        worst = worst
            .max((c - (case.lambda * tm).cos()).abs())
            .max((s - (case.lambda * tm).sin()).abs());
    }
    Ok((worst <= 1e-8, format!("max difference {worst:.2e}")))
}

fn averaged_load_vs_time_quadrature() -> Result<(bool, String)> {
    let s = system(4)?;
    let loads = ManufacturedLoads::new(&s, AnalyticStokes::new(10.0, 1.0));
    let grid = TimeGrid::uniform(0.5, 0.05)?;
    let gauss = gauss_legendre_unit(10);
    let mut worst: f64 = 0.0;
    for n in [0, 3, 9] {
        let (t0, t1) = (grid.time(n), grid.time(n + 1));
        let mut oracle = vec![0.0; s.num_velocity_dofs()];
        for &(x, w) in &gauss {
            let l = loads.load_at(t0 + x * (t1 - t0));
            oracle.iter_mut().zip(&l).for_each(|(o, v)| *o += w * v);
        }
        worst = worst.max(rel_diff(&loads.averaged_load(&grid, n), &oracle));
    }
    Ok((worst <= 1e-12, format!("relative difference {worst:.2e}")))
}

fn random_pair(s: &FemSystem, r: &mut ChaCha8Rng, dt_a: f64, dt_b: f64) -> (Snapshot, Snapshot) {
    let a = Snapshot {
        index: 4,
        time: 0.4,
        dt: dt_a,
        velocity: random_velocity(s, r),
        pressure: random_vec(s.num_pressure_dofs(), r),
    };
    let b = Snapshot {
        index: 5,
        time: 0.4 + dt_a,
        dt: dt_b,
        velocity: random_velocity(s, r),
        pressure: random_vec(s.num_pressure_dofs(), r),
    };
    (a, b)
}

/// Interval terms recomputed from space quadrature and 5-point Gauss in time.
fn quadrature_terms(s: &FemSystem, a: &Snapshot, b: &Snapshot) -> Result<[f64; 6]> {
    let rule = make_quadrature(4)?;
    let (t0, t1) = (a.time, b.time);
    let delta = t1 - t0;
    let rate: Vec<f64> = b
        .velocity
        .iter()
        .zip(&a.velocity)
        .map(|(x, y)| (x - y) / delta)
        .collect();
    let mut out = [0.0; 6];
    for (x, w) in gauss_legendre_unit(5) {
        let t = t0 + x * delta;
        let u = interpolate_velocity(&a.velocity, &b.velocity, t0, t1, t);
        let gap: Vec<f64> = b.velocity.iter().zip(&u).map(|(p, q)| p - q).collect();
        out[0] += w
            * delta
            * s.mu
            * integrate_field(&s.mesh, &rule, |c| {
                squared_matrix(c.velocity_gradient(&gap))
            });
        out[1] += w * delta * s.mu * integrate_field(&s.mesh, &rule, |c| c.divergence(&u).powi(2));
        let rate_sq = integrate_field(&s.mesh, &rule, |c| c.divergence(&rate).powi(2));
        out[2] += w * delta * rate_sq.sqrt();
        out[3] += w * delta * rate_sq;
    }
    out[4] = integrate_field(&s.mesh, &rule, |c| {
        let (gn1, gn) = (
            c.pressure_gradient(&b.pressure),
            c.pressure_gradient(&a.pressure),
        );
        squared([b.dt * gn1[0] - a.dt * gn[0], b.dt * gn1[1] - a.dt * gn[1]])
    });
    let div_a = integrate_field(&s.mesh, &rule, |c| c.divergence(&a.velocity).powi(2));
    let div_b = integrate_field(&s.mesh, &rule, |c| c.divergence(&b.velocity).powi(2));
    out[5] = div_a.max(div_b);
    Ok(out)
}

fn interval_terms_vs_time_quadrature() -> Result<(bool, String)> {
    let s = system(4)?;
    let (a, b) = random_pair(&s, &mut rng(), 0.1, 0.05);
    let t = estimator_terms(&s, &a, &b);
    let q = quadrature_terms(&s, &a, &b)?;
    let closed = [
        t.grad_increment,
        t.div_l2,
        t.div_rate_l1,
        t.div_rate_l2,
        t.pressure_increment,
        t.div_endpoint_sq_max,
    ];
    let worst = closed
        .iter()
        .zip(&q)
        .map(|(c, o)| rel(*c, *o))
        .fold(0.0, f64::max);
    Ok((
        worst <= 1e-12,
        format!("max relative difference {worst:.2e}"),
    ))
}

fn estimator_difference_recomputed() -> Result<(bool, String)> {
    let s = system(4)?;
    let (a, b) = random_pair(&s, &mut rng(), 0.1, 0.1);
    let mut ledger = EstimatorLedger::new(s.mu, false);
    let row = ledger.accumulate(0, b.time, a.dt, &estimator_terms(&s, &a, &b))?;
    let q = quadrature_terms(&s, &a, &b)?;
    let oracle = q[1] + q[3] - q[4];
    let err = rel(row.est2 - row.est3, oracle);
    Ok((err <= 1e-11, format!("relative difference {err:.2e}")))
}

fn final_velocity(s: &FemSystem, case: AnalyticStokes, horizon: f64, dt: f64) -> Result<Vec<f64>> {
    let grid = TimeGrid::uniform(horizon, dt)?;
    let loads = ManufacturedLoads::new(s, case);
    let traj = run_scheme(
        s,
        &grid,
        SchemeOptions::default(),
        |n| loads.averaged_load(&grid, n),
        &vec![0.0; s.num_velocity_dofs()],
    )?;
    Ok(traj
        .snapshots
        .last()
        .expect("at least one step")
        .velocity
        .clone())
}

fn self_convergence() -> Result<(bool, String)> {
    let s = system(8)?;
    let case = AnalyticStokes::new(1.0, 1.0);
    let reference = final_velocity(&s, case, 1.0, 0.05 / 8.0)?;
    let err = |dt: f64| -> Result<f64> {
        let u = final_velocity(&s, case, 1.0, dt)?;
        let d: Vec<f64> = u.iter().zip(&reference).map(|(x, y)| x - y).collect();
        Ok(s.grad_norm_sq(&d).sqrt())
    };
    let (e1, e2) = (err(0.1)?, err(0.05)?);
    Ok((
        e2 < e1,
        format!("|grad e|(0.1) = {e1:.4e}, |grad e|(0.05) = {e2:.4e}"),
    ))
}

fn err_grad_total(ev: &ErrorEvaluator, snaps: &[Snapshot]) -> Result<f64> {
    let mut sum = 0.0;
    for w in snaps.windows(2) {
        sum += ev.error_terms(&w[0], &w[1])?.0;
    }
    Ok(sum)
}

fn injected_exact_beats_scheme() -> Result<(bool, String)> {
    let s = system(8)?;
    let case = AnalyticStokes::new(1.0, 1.0);
    let grid = TimeGrid::uniform(1.0, 0.1)?;
    let ev = ErrorEvaluator::new(&s, case, ErrorOptions::default())?;
    let traj = run_scheme(
        &s,
        &grid,
        SchemeOptions::default(),
        |n| ev.loads().averaged_load(&grid, n),
        &vec![0.0; s.num_velocity_dofs()],
    )?;
    let injected: Vec<Snapshot> = (0..=grid.num_steps())
        .map(|n| interpolated_snapshot(&s, &case, &grid, n, 0.5))
        .collect();
    let (scheme_err, exact_err) = (
        err_grad_total(&ev, &traj.snapshots)?,
        err_grad_total(&ev, &injected)?,
    );
    Ok((
        exact_err < scheme_err,
        format!("injected {exact_err:.4e}, scheme {scheme_err:.4e}; injected must be smaller"),
    ))
}

fn time_gauss_refinement() -> Result<(bool, String)> {
    let s = system(8)?;
    let case = AnalyticStokes::new(10.0, 1.0);
    let grid = TimeGrid::uniform(0.5, 0.025)?;
    let three = ErrorEvaluator::new(&s, case, ErrorOptions::default())?;
    let five = ErrorEvaluator::new(
        &s,
        case,
        ErrorOptions {
            time_points: 5,
            ..Default::default()
        },
    )?;
    let traj = run_scheme(
        &s,
        &grid,
        SchemeOptions::default(),
        |n| three.loads().averaged_load(&grid, n),
        &vec![0.0; s.num_velocity_dofs()],
    )?;
    let (e3, e5) = (
        err_grad_total(&three, &traj.snapshots)?,
        err_grad_total(&five, &traj.snapshots)?,
    );
    let diff = rel(e3, e5);
    Ok((diff < 0.01, format!("relative difference {diff:.2e}")))
}

fn small_config(extra: &[(&str, &str)]) -> Result<crate::experiment::ExperimentConfig> {
    let mut overrides = vec![("nx", "4"), ("ny", "4"), ("T", "0.2"), ("dt", "0.1,0.05")];
    overrides.extend_from_slice(extra);
    parse_config("", &overrides)
}

fn zero_data_is_exactly_zero() -> Result<(bool, String)> {
    let rows = run_experiment(&small_config(&[("zero_data", "true")])?)?;
    let ok = rows.iter().all(|r| {
        [
            r.est1,
            r.est2,
            r.est3,
            r.error_total,
            r.linf_term,
            r.data_osc,
        ]
        .iter()
        .all(|v| v.to_bits() == 0)
            && r.eff1.is_nan()
            && r.eff2.is_nan()
            && r.eff3.is_nan()
    });
    Ok((ok, format!("{} rows, all accumulators +0.0", rows.len())))
}

fn csv_is_deterministic() -> Result<(bool, String)> {
    let config = small_config(&[])?;
    let a = csv_string(&run_experiment(&config)?);
    let b = csv_string(&run_experiment(&config)?);
    Ok((a == b, format!("{} bytes", a.len())))
}
