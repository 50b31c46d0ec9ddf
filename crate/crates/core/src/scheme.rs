//! Chorin-Temam pressure-correction stepping.
//!
//! Starting from `u^{-1/2} = u₀`, `p⁰ = 0`, each step `n = 0..N-1` solves
//!
//! ```text
//! (M/Δtⁿ + μK) u^{n+1/2} = (f^{n+1}, φ) + (M/Δtⁿ) u^{n-1/2} − G pⁿ      (Dirichlet rows eliminated)
//! K_p p^{n+1}            = −(1/Δt^{n+1}) D u^{n+1/2}                      (zero mean)
//! ```
//!
//! where `f^{n+1}` is the time average of the forcing over `(tₙ, tₙ₊₁]`. The
//! pressure system uses the next step size; after the last step `Δt^N` is
//! taken equal to `Δt^{N-1}`.

use std::collections::HashMap;

use log::debug;

use crate::error::{Error, Result};
use crate::fem::FemSystem;
use crate::linalg::{
    cg_solve, norm2, CgOptions, Nullspace, SolveReport, SolverKind, SparseMatrix, SpdSolver,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    steps: Vec<f64>,
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(steps: Vec<f64>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidTimeGrid("no time steps".into()));
        }
        if let Some(bad) = steps.iter().find(|&&dt| !(dt > 0.0 && dt.is_finite())) {
            return Err(Error::InvalidTimeGrid(format!("non-positive step {bad}")));
        }
        let mut times = Vec::with_capacity(steps.len() + 1);
        times.push(0.0);
        let mut t = 0.0;
        for dt in &steps {
            t += dt;
            times.push(t);
        }
        Ok(TimeGrid { steps, times })
    }

    /// `N = T/Δt` equal steps; `T` must be an integer multiple of `Δt`.
    pub fn uniform(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && horizon > 0.0) {
            return Err(Error::InvalidTimeGrid(format!("T = {horizon}, dt = {dt}")));
        }
        let n = (horizon / dt).round();
        if n < 1.0 || (n * dt - horizon).abs() > 1e-9 * horizon {
            return Err(Error::InvalidTimeGrid(format!(
                "T = {horizon} is not a multiple of dt = {dt}"
            )));
        }
        let n = n as usize;
        let mut grid = TimeGrid::new(vec![horizon / n as f64; n])?;
        // Uniform grids get exact node times instead of accumulated sums.
        for (k, t) in grid.times.iter_mut().enumerate() {
            *t = horizon * k as f64 / n as f64;
        }
        Ok(grid)
    }

    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    /// `Δtⁿ` for `n ≤ N`; `Δt^N` repeats the last step.
    pub fn step(&self, n: usize) -> f64 {
        self.steps[n.min(self.steps.len() - 1)]
    }

    pub fn time(&self, n: usize) -> f64 {
        self.times[n]
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn min_step(&self) -> f64 {
        self.steps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index `n` with `t ∈ (tₙ, tₙ₊₁]`.
    pub fn interval_of(&self, t: f64) -> Result<usize> {
        let horizon = self.horizon();
        if !(t > 0.0 && t <= horizon) {
            return Err(Error::TimeOutOfRange { t, horizon });
        }
        // First node ≥ t, minus one.
        let k = self.times.partition_point(|&s| s < t);
        Ok(k.saturating_sub(1).min(self.num_steps() - 1))
    }
}

/// State at time `tₙ`: `u^{n-1/2}` and `pⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub index: usize,
    pub time: f64,
    pub dt: f64,
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub velocity: SolveReport,
    pub pressure: SolveReport,
    /// `‖div u^{n+1/2}‖`
    pub divergence_norm: f64,
    /// `|Σ (D u)ᵢ| / ‖D u‖` before the pressure solve.
    pub compatibility: f64,
    /// `‖D u^{n+1/2} + Δt^{n+1} K_p p^{n+1}‖ / ‖D u^{n+1/2}‖`
    pub projection_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOptions {
    pub solver: SolverKind,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        SchemeOptions {
            solver: SolverKind::Cholesky,
            tol: 1e-10,
            max_iterations: 10_000,
        }
    }
}

/// Relative size of the constant component above which a pressure
/// right-hand side is treated as inconsistent.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

/// Prepared operators for stepping on one [`FemSystem`].
#[derive(Debug)]
pub struct ProjectionScheme<'a> {
    system: &'a FemSystem,
    options: SchemeOptions,
    velocity_solvers: HashMap<u64, SpdSolver>,
}

impl<'a> ProjectionScheme<'a> {
    pub fn new(system: &'a FemSystem, options: SchemeOptions) -> Self {
        ProjectionScheme {
            system,
            options,
            velocity_solvers: HashMap::new(),
        }
    }

    pub fn system(&self) -> &FemSystem {
        self.system
    }

    fn velocity_solver(&mut self, dt: f64) -> Result<&SpdSolver> {
        let key = dt.to_bits();
        if !self.velocity_solvers.contains_key(&key) {
            let s = self.system;
            let a = SparseMatrix::linear_combination(&[(1.0 / dt, &s.mass), (s.mu, &s.stiffness)])?;
            let solver = SpdSolver::new(
                s.constrain(&a),
                self.options.solver,
                self.options.tol,
                self.options.max_iterations,
            )?;
            self.velocity_solvers.insert(key, solver);
        }
        Ok(&self.velocity_solvers[&key])
    }

    /// Momentum step: returns `u^{n+1/2}`.
    pub fn velocity_step(
        &mut self,
        u_prev: &[f64],
        p_curr: &[f64],
        dt: f64,
        load: &[f64],
    ) -> Result<(Vec<f64>, SolveReport)> {
        if !(dt > 0.0) {
            return Err(Error::InvalidTimeGrid(format!("non-positive step {dt}")));
        }
        let s = self.system;
        let n = s.num_velocity_dofs();
        for (len, expected) in [
            (u_prev.len(), n),
            (load.len(), n),
            (p_curr.len(), s.num_pressure_dofs()),
        ] {
            if len != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    actual: len,
                });
            }
        }
        let mu_prev = s.mass.spmv(u_prev)?;
        let gp = s.gradient.spmv(p_curr)?;
        let mut rhs: Vec<f64> = (0..n).map(|i| load[i] + mu_prev[i] / dt - gp[i]).collect();
        s.zero_dirichlet(&mut rhs);
        let (mut u, report) = self.velocity_solver(dt)?.solve(&rhs)?;
        s.zero_dirichlet(&mut u);
        Ok((u, report))
    }

    /// Pressure projection: returns zero-mean `p^{n+1}`.
    pub fn pressure_step(&self, u_half: &[f64], dt_next: f64) -> Result<(Vec<f64>, StepPressure)> {
        pressure_step(self.system, u_half, dt_next, &self.options)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPressure {
    pub report: SolveReport,
    pub compatibility: f64,
    pub projection_defect: f64,
}

/// Solves `K_p p = −(1/Δt) D u` for the zero-mean `p`.
pub fn pressure_step(
    system: &FemSystem,
    u_half: &[f64],
    dt_next: f64,
    options: &SchemeOptions,
) -> Result<(Vec<f64>, StepPressure)> {
    if !(dt_next > 0.0) {
        return Err(Error::InvalidTimeGrid(format!(
            "non-positive step {dt_next}"
        )));
    }
    let du = system.divergence.spmv(u_half)?;
    let du_norm = norm2(&du);
    let compatibility = if du_norm > 0.0 {
        du.iter().sum::<f64>().abs() / du_norm
    } else {
        0.0
    };
    if compatibility > COMPATIBILITY_TOL {
        return Err(Error::InconsistentSingular {
            ratio: compatibility,
        });
    }
    let rhs: Vec<f64> = du.iter().map(|v| -v / dt_next).collect();
    let opts = CgOptions {
        tol: options.tol,
        max_iterations: options.max_iterations,
        nullspace: Nullspace::Constants(&system.pressure.lumped_weights),
        ..Default::default()
    };
    let (p, report) = cg_solve(&system.pressure_stiffness, &rhs, &opts)?;
    if !report.converged {
        return Err(Error::NotConverged {
            iterations: report.iterations,
            residual: report.final_residual,
        });
    }
    let projection_defect = if du_norm > 0.0 {
        let kp = system.pressure_stiffness.spmv(&p)?;
        let defect: Vec<f64> = du.iter().zip(&kp).map(|(d, k)| d + dt_next * k).collect();
        norm2(&defect) / du_norm
    } else {
        0.0
    };
    Ok((
        p,
        StepPressure {
            report,
            compatibility,
            projection_defect,
        },
    ))
}

/// Marches the scheme, handing each consecutive snapshot pair
/// `(n, n + 1)` to `visit` as soon as it is available.
pub fn run_scheme_with<L, V>(
    system: &FemSystem,
    grid: &TimeGrid,
    options: SchemeOptions,
    mut load: L,
    u0: &[f64],
    mut visit: V,
) -> Result<()>
where
    L: FnMut(usize) -> Vec<f64>,
    V: FnMut(&Snapshot, &Snapshot, &StepReport) -> Result<()>,
{
    if u0.len() != system.num_velocity_dofs() {
        return Err(Error::DimensionMismatch {
            expected: system.num_velocity_dofs(),
            actual: u0.len(),
        });
    }
    let mut scheme = ProjectionScheme::new(system, options);
    let mut u_initial = u0.to_vec();
    system.zero_dirichlet(&mut u_initial);
    let mut current = Snapshot {
        index: 0,
        time: grid.time(0),
        dt: grid.step(0),
        velocity: u_initial,
        pressure: vec![0.0; system.num_pressure_dofs()],
    };

    for n in 0..grid.num_steps() {
        let wrap = |e: Error| Error::Step {
            step: n,
            source: Box::new(e),
        };
        let dt = grid.step(n);
        let dt_next = grid.step(n + 1);
        let f = load(n);
        let (u_half, vel_report) = scheme
            .velocity_step(&current.velocity, &current.pressure, dt, &f)
            .map_err(wrap)?;
        let (p_next, pres) = scheme.pressure_step(&u_half, dt_next).map_err(wrap)?;
        let report = StepReport {
            step: n,
            velocity: vel_report,
            pressure: pres.report,
            divergence_norm: system.div_inner(&u_half, &u_half).max(0.0).sqrt(),
            compatibility: pres.compatibility,
            projection_defect: pres.projection_defect,
        };
        debug!(
            "step {n} t={:.6} vel_it={} p_it={} |div u|={:.3e}",
            grid.time(n + 1),
            report.velocity.iterations,
            report.pressure.iterations,
            report.divergence_norm
        );
        let next = Snapshot {
            index: n + 1,
            time: grid.time(n + 1),
            dt: dt_next,
            velocity: u_half,
            pressure: p_next,
        };
        visit(&current, &next, &report)?;
        current = next;
    }
    Ok(())
}

/// Complete in-memory record of a run.
#[derive(Debug, Clone)]
pub struct SchemeTrajectory {
    pub grid: TimeGrid,
    /// Snapshots `0..=N`.
    pub snapshots: Vec<Snapshot>,
    pub reports: Vec<StepReport>,
}

pub fn run_scheme<L>(
    system: &FemSystem,
    grid: &TimeGrid,
    options: SchemeOptions,
    load: L,
    u0: &[f64],
) -> Result<SchemeTrajectory>
where
    L: FnMut(usize) -> Vec<f64>,
{
    let mut snapshots = Vec::with_capacity(grid.num_steps() + 1);
    let mut reports = Vec::with_capacity(grid.num_steps());
    run_scheme_with(system, grid, options, load, u0, |prev, next, report| {
        if snapshots.is_empty() {
            snapshots.push(prev.clone());
        }
        snapshots.push(next.clone());
        reports.push(*report);
        Ok(())
    })?;
    Ok(SchemeTrajectory {
        grid: grid.clone(),
        snapshots,
        reports,
    })
}

/// Values of the time reconstructions at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub interval: usize,
    /// Piecewise-linear velocity `u^{Δt}(t)`.
    pub velocity: Vec<f64>,
    /// Piecewise-constant pressure `p^{Δt}(t) = pⁿ`.
    pub pressure: Vec<f64>,
    /// Forward velocity `u^{Δt,+}(t) = u^{n+1/2}`.
    pub velocity_plus: Vec<f64>,
}

/// `u^{Δt}(t)` on `(tₙ, tₙ₊₁]` from its endpoint values.
pub fn interpolate_velocity(a: &[f64], b: &[f64], t0: f64, t1: f64, t: f64) -> Vec<f64> {
    let dt = t1 - t0;
    let wb = (t - t0) / dt;
    let wa = -(t - t1) / dt;
    a.iter().zip(b).map(|(x, y)| wb * y + wa * x).collect()
}

impl SchemeTrajectory {
    pub fn reconstruct(&self, t: f64) -> Result<Reconstruction> {
        let n = self.grid.interval_of(t)?;
        let (a, b) = (&self.snapshots[n], &self.snapshots[n + 1]);
        let velocity = if t == b.time {
            b.velocity.clone()
        } else {
            interpolate_velocity(&a.velocity, &b.velocity, a.time, b.time, t)
        };
        Ok(Reconstruction {
            interval: n,
            velocity,
            pressure: a.pressure.clone(),
            velocity_plus: b.velocity.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assemble_system;
    use crate::mesh::{build_structured_mesh, Rect};

    fn system(n: usize) -> FemSystem {
        let mesh = build_structured_mesh(Rect::symmetric_unit(), n, n).unwrap();
        assemble_system(&mesh, 1.0).unwrap()
    }

    #[test]
    fn uniform_grid() {
        let g = TimeGrid::uniform(3.0, 0.1).unwrap();
        assert_eq!(g.num_steps(), 30);
        assert_eq!(g.horizon(), 3.0);
        assert_eq!(g.step(30), g.step(29));
        assert!(TimeGrid::uniform(1.0, 0.3).is_err());
        assert!(TimeGrid::uniform(1.0, -0.1).is_err());
        assert!(TimeGrid::new(vec![0.1, 0.0]).is_err());
    }

    #[test]
    fn non_uniform_grid_sums() {
        let g = TimeGrid::new(vec![0.1, 0.2, 0.05]).unwrap();
        assert!((g.horizon() - 0.35).abs() < 1e-12);
        assert_eq!(g.interval_of(0.1).unwrap(), 0);
        assert_eq!(g.interval_of(0.1000001).unwrap(), 1);
        assert_eq!(g.interval_of(0.35).unwrap(), 2);
        assert!(g.interval_of(0.0).is_err());
        assert!(g.interval_of(0.36).is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let s = system(3);
        let grid = TimeGrid::uniform(0.3, 0.1).unwrap();
        let zero = vec![0.0; s.num_velocity_dofs()];
        let traj =
            run_scheme(&s, &grid, SchemeOptions::default(), |_| zero.clone(), &zero).unwrap();
        assert_eq!(traj.snapshots.len(), 4);
        for snap in &traj.snapshots {
            assert!(snap.velocity.iter().all(|v| *v == 0.0));
            assert!(snap.pressure.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn constant_pressure_does_not_drive_velocity() {
        let s = system(3);
        let mut scheme = ProjectionScheme::new(&s, SchemeOptions::default());
        let u_prev = s.velocity.interpolate(|x| {
            let b = (1.0 - x[0] * x[0]) * (1.0 - x[1] * x[1]);
            [b, -0.5 * b]
        });
        let load = vec![0.1; s.num_velocity_dofs()];
        let zero_p = vec![0.0; s.num_pressure_dofs()];
        let const_p = vec![2.5; s.num_pressure_dofs()];
        let (u0, _) = scheme.velocity_step(&u_prev, &zero_p, 0.05, &load).unwrap();
        let (u1, _) = scheme
            .velocity_step(&u_prev, &const_p, 0.05, &load)
            .unwrap();
        for (a, b) in u0.iter().zip(&u1) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn step_invariants() {
        let s = system(4);
        let grid = TimeGrid::uniform(0.2, 0.05).unwrap();
        let load = s.velocity_load(&crate::fem::make_quadrature(4).unwrap(), |x| {
            [x[1], -x[0] * x[0]]
        });
        let zero = vec![0.0; s.num_velocity_dofs()];
        let traj =
            run_scheme(&s, &grid, SchemeOptions::default(), |_| load.clone(), &zero).unwrap();
        for snap in &traj.snapshots {
            assert!(s.pressure.weighted_mean(&snap.pressure).abs() <= 1e-12);
            for (v, &m) in snap.velocity.iter().zip(s.dirichlet_mask()) {
                if m {
                    assert_eq!(*v, 0.0);
                }
            }
        }
        for r in &traj.reports {
            assert!(r.velocity.final_residual <= 1e-9);
            assert!(r.compatibility <= COMPATIBILITY_TOL);
            assert!(r.projection_defect <= 1e-9);
        }
    }

    #[test]
    fn reconstruction_endpoints_and_midpoint() {
        let s = system(2);
        let grid = TimeGrid::uniform(0.3, 0.1).unwrap();
        let load = vec![1.0; s.num_velocity_dofs()];
        let zero = vec![0.0; s.num_velocity_dofs()];
        let traj =
            run_scheme(&s, &grid, SchemeOptions::default(), |_| load.clone(), &zero).unwrap();
        let (a, b) = (&traj.snapshots[1], &traj.snapshots[2]);
        let r = traj.reconstruct(grid.time(2)).unwrap();
        assert_eq!(r.interval, 1);
        assert_eq!(r.velocity, b.velocity);
        let mid = traj
            .reconstruct(0.5 * (grid.time(1) + grid.time(2)))
            .unwrap();
        for ((m, x), y) in mid.velocity.iter().zip(&a.velocity).zip(&b.velocity) {
            assert!((m - 0.5 * (x + y)).abs() < 1e-15);
        }
        for t in [0.1 + 1e-9, 0.137, 0.19999] {
            let r = traj.reconstruct(t).unwrap();
            assert_eq!(r.pressure, a.pressure);
            assert_eq!(r.velocity_plus, b.velocity);
        }
        assert!(traj.reconstruct(0.0).is_err());
        assert!(traj.reconstruct(0.31).is_err());
    }
}
