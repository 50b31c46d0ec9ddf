//! A posteriori time-error estimators and the true error they are compared
//! against.
//!
//! On each interval `(tₙ, tₙ₊₁]` with `a = u^{n-1/2}`, `b = u^{n+1/2}` and
//! `δ = Δtⁿ` the reconstruction-based terms have closed forms:
//!
//! ```text
//! grad_increment = μ δ/3 ‖∇(b − a)‖²
//! div_l2         = μ δ/3 (‖div a‖² + (div a, div b) + ‖div b‖²)
//! div_rate_l1    = ‖div(b − a)‖
//! div_rate_l2    = ‖div(b − a)‖² / δ
//! ```
//!
//! The three estimators accumulate them as
//!
//! ```text
//! est1(T) = Σ grad_increment + Σ div_l2 + (Σ div_rate_l1)²
//! est2(T) = Σ grad_increment + Σ div_l2 + Σ div_rate_l2
//! est3(T) = Σ grad_increment + Σ ‖Δt^{n+1}∇p^{n+1} − Δtⁿ∇pⁿ‖²
//! ```
//!
//! and the error is `μ‖∇(u − u^{Δt})‖²_{L²(0,T;L²)} + ‖∂ₜe_u + ∇e_p‖²_{L²(0,T;U')}`,
//! with the dual norm taken over the discrete velocity space and the full
//! H¹ inner product.

use crate::error::{Error, Result};
use crate::fem::{
    gauss_legendre_unit, make_quadrature, p2_gradients_at, p2_nodes, ElementGeometry, FemSystem,
    QuadratureRule,
};
use crate::linalg::{dot, SolveReport, SolverKind, SparseMatrix, SpdSolver};
use crate::manufactured::{AnalyticStokes, ManufacturedLoads, ERROR_DEGREE};
use crate::scheme::{interpolate_velocity, Snapshot};

/// Per-interval ingredients. All are squared-norm quantities except
/// `div_rate_l1`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntervalTerms {
    pub grad_increment: f64,
    pub div_l2: f64,
    pub div_rate_l1: f64,
    pub div_rate_l2: f64,
    pub pressure_increment: f64,
    pub div_endpoint_sq_max: f64,
    pub data_osc: f64,
    pub err_grad: f64,
    pub err_dual: f64,
}

/// Reconstruction-based terms of one interval (no exact solution needed).
pub fn estimator_terms(system: &FemSystem, a: &Snapshot, b: &Snapshot) -> IntervalTerms {
    let delta = a.dt;
    let mu = system.mu;
    let diff: Vec<f64> = b
        .velocity
        .iter()
        .zip(&a.velocity)
        .map(|(x, y)| x - y)
        .collect();
    let div_aa = system.div_inner(&a.velocity, &a.velocity).max(0.0);
    let div_bb = system.div_inner(&b.velocity, &b.velocity).max(0.0);
    let div_ab = system.div_inner(&a.velocity, &b.velocity);
    let div_diff = system.div_inner(&diff, &diff).max(0.0);
    let pressure_jump: Vec<f64> = b
        .pressure
        .iter()
        .zip(&a.pressure)
        .map(|(pn1, pn)| b.dt * pn1 - a.dt * pn)
        .collect();

    IntervalTerms {
        grad_increment: mu * delta / 3.0 * system.grad_norm_sq(&diff).max(0.0),
        div_l2: (mu * delta / 3.0 * (div_aa + div_ab + div_bb)).max(0.0),
        div_rate_l1: div_diff.sqrt(),
        div_rate_l2: div_diff / delta,
        pressure_increment: system.pressure_grad_norm_sq(&pressure_jump).max(0.0),
        div_endpoint_sq_max: div_aa.max(div_bb),
        ..Default::default()
    }
}

/// Discrete Riesz map for `(∇w, ∇v) + (w, v) = ℓ(v)` on the Dirichlet
/// velocity space.
#[derive(Debug, Clone)]
pub struct RieszSolver {
    solver: SpdSolver,
    mask: Vec<bool>,
}

impl RieszSolver {
    pub fn new(
        system: &FemSystem,
        kind: SolverKind,
        tol: f64,
        max_iterations: usize,
    ) -> Result<Self> {
        let h1 =
            SparseMatrix::linear_combination(&[(1.0, &system.stiffness), (1.0, &system.mass)])?;
        Ok(RieszSolver {
            solver: SpdSolver::new(system.constrain(&h1), kind, tol, max_iterations)?,
            mask: system.dirichlet_mask().to_vec(),
        })
    }

    /// Riesz representative of the functional with load vector `load`.
    pub fn represent(&self, load: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        let mut rhs = load.to_vec();
        for (v, &m) in rhs.iter_mut().zip(&self.mask) {
            if m {
                *v = 0.0;
            }
        }
        if rhs.iter().all(|v| *v == 0.0) {
            return Ok((rhs, SolveReport::trivial()));
        }
        self.solver.solve(&rhs)
    }

    /// `‖ℓ‖²_{U'_h} = ℓ(w)` with `w` the Riesz representative.
    pub fn dual_norm_sq(&self, load: &[f64]) -> Result<f64> {
        let (w, _) = self.represent(load)?;
        let mut interior = load.to_vec();
        for (v, &m) in interior.iter_mut().zip(&self.mask) {
            if m {
                *v = 0.0;
            }
        }
        Ok(dot(&interior, &w).max(0.0))
    }
}

/// Exact-solution gradient samples at the error quadrature points.
#[derive(Debug, Clone)]
struct GradientCache {
    /// Per element: jacobian, geometry and P2 nodes.
    elements: Vec<(f64, ElementGeometry, [usize; 6])>,
    points: Vec<([f64; 3], f64)>,
    profile_gradients: Vec<[[f64; 2]; 2]>,
}

impl GradientCache {
    fn new(system: &FemSystem, rule: &QuadratureRule) -> Self {
        let mesh = &system.mesh;
        let points: Vec<_> = rule
            .points
            .iter()
            .copied()
            .zip(rule.weights.iter().copied())
            .collect();
        let mut elements = Vec::with_capacity(mesh.num_triangles());
        let mut profile_gradients = Vec::with_capacity(mesh.num_triangles() * points.len());
        for t in 0..mesh.num_triangles() {
            let geo = ElementGeometry::new(mesh, t);
            for (bary, _) in &points {
                profile_gradients.push(AnalyticStokes::velocity_profile_gradient(geo.map(bary)));
            }
            elements.push((geo.jacobian(), geo, p2_nodes(mesh, t)));
        }
        GradientCache {
            elements,
            points,
            profile_gradients,
        }
    }

    /// `∫ |amplitude ∇Φ − ∇u_h|²`
    fn error_sq(&self, amplitude: f64, u: &[f64]) -> f64 {
        let np = self.points.len();
        let mut total = 0.0;
        for (e, (jac, geo, nodes)) in self.elements.iter().enumerate() {
            let mut local = 0.0;
            for (q, (bary, w)) in self.points.iter().enumerate() {
                let gh = p2_gradients_at(geo, nodes, bary, u);
                let ge = &self.profile_gradients[e * np + q];
                let mut s = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        let d = amplitude * ge[i][j] - gh[i][j];
                        s += d * d;
                    }
                }
                local += w * s;
            }
            total += jac * local;
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorOptions {
    /// Gauss points per interval for the gradient and dual-norm errors.
    pub time_points: usize,
    /// Gauss points per interval for the data oscillation.
    pub data_time_points: usize,
    /// Space quadrature degree for integrals involving the exact solution.
    pub space_degree: usize,
    pub solver: SolverKind,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for ErrorOptions {
    fn default() -> Self {
        ErrorOptions {
            time_points: 3,
            data_time_points: 5,
            space_degree: ERROR_DEGREE,
            solver: SolverKind::Cholesky,
            tol: 1e-10,
            max_iterations: 10_000,
        }
    }
}

/// True errors against the manufactured solution, interval by interval.
#[derive(Debug, Clone)]
pub struct ErrorEvaluator<'a> {
    system: &'a FemSystem,
    loads: ManufacturedLoads,
    riesz: RieszSolver,
    cache: GradientCache,
    time_rule: Vec<(f64, f64)>,
    data_rule: Vec<(f64, f64)>,
}

impl<'a> ErrorEvaluator<'a> {
    pub fn new(system: &'a FemSystem, case: AnalyticStokes, opts: ErrorOptions) -> Result<Self> {
        if opts.time_points < 1 || opts.data_time_points < 1 {
            return Err(Error::config("time_gauss_points", "must be at least 1"));
        }
        let rule = make_quadrature(opts.space_degree)?;
        Ok(ErrorEvaluator {
            system,
            loads: ManufacturedLoads::with_rule(system, case, &rule),
            riesz: RieszSolver::new(system, opts.solver, opts.tol, opts.max_iterations)?,
            cache: GradientCache::new(system, &rule),
            time_rule: gauss_legendre_unit(opts.time_points),
            data_rule: gauss_legendre_unit(opts.data_time_points),
        })
    }

    pub fn case(&self) -> AnalyticStokes {
        self.loads.case
    }

    pub fn loads(&self) -> &ManufacturedLoads {
        &self.loads
    }

    pub fn riesz(&self) -> &RieszSolver {
        &self.riesz
    }

    /// `(err_grad, err_dual, data_osc)` on the interval between `a` and `b`.
    pub fn error_terms(&self, a: &Snapshot, b: &Snapshot) -> Result<(f64, f64, f64)> {
        let (t0, t1) = (a.time, b.time);
        let delta = t1 - t0;
        let case = self.loads.case;
        let s = self.system;

        let diff: Vec<f64> = b
            .velocity
            .iter()
            .zip(&a.velocity)
            .map(|(x, y)| (x - y) / delta)
            .collect();
        let rate_load = s.mass.spmv(&diff)?;
        let grad_p = s.gradient.spmv(&a.pressure)?;

        let mut err_grad = 0.0;
        let mut err_dual = 0.0;
        for &(x, w) in &self.time_rule {
            let t = t0 + x * delta;
            let u = interpolate_velocity(&a.velocity, &b.velocity, t0, t1, t);
            let amp = (case.lambda * t).sin();
            err_grad += w * delta * s.mu * self.cache.error_sq(amp, &u);

            let exact = self.loads.momentum_load(t);
            let g: Vec<f64> = exact
                .iter()
                .zip(&rate_load)
                .zip(&grad_p)
                .map(|((e, r), gp)| e - r - gp)
                .collect();
            err_dual += w * delta * self.riesz.dual_norm_sq(&g)?;
        }

        let mean = case.averaged_coefficients(t0, t1);
        let data_osc = self
            .data_rule
            .iter()
            .map(|&(x, w)| w * delta * self.loads.forcing_deviation_sq(t0 + x * delta, mean))
            .sum();
        Ok((err_grad, err_dual, data_osc))
    }

    /// All estimator and error ingredients of one interval.
    pub fn interval_terms(&self, a: &Snapshot, b: &Snapshot) -> Result<IntervalTerms> {
        let mut terms = estimator_terms(self.system, a, b);
        let (err_grad, err_dual, data_osc) = self.error_terms(a, b)?;
        terms.err_grad = err_grad;
        terms.err_dual = err_dual;
        terms.data_osc = data_osc;
        Ok(terms)
    }
}

/// Load vector `(g, φᵢ)` of an analytic vector field, integrated with the
/// error quadrature.
pub fn analytic_load(system: &FemSystem, g: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    let rule = make_quadrature(ERROR_DEGREE).expect("supported degree");
    system.velocity_load(&rule, g)
}

/// Cumulative estimator state after interval `interval` (ending at `time`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub interval: usize,
    pub time: f64,
    pub est1: f64,
    pub est2: f64,
    pub est3: f64,
    pub linf_term: f64,
    pub err_grad: f64,
    pub err_dual: f64,
    pub error: f64,
    pub data_osc: f64,
    pub eff1: f64,
    pub eff2: f64,
    pub eff3: f64,
}

impl LedgerRow {
    /// True when the error vanished and effectivities are undefined.
    pub fn effectivity_flagged(&self) -> bool {
        self.error == 0.0
    }
}

/// Running sums over intervals, in order.
#[derive(Debug, Clone, Default)]
pub struct EstimatorLedger {
    pub include_linf: bool,
    pub mu: f64,
    next: usize,
    sums: IntervalTerms,
    linf: f64,
    /// `Σ (12/Δtⁿ) ∫ ‖div u^{Δt}‖²`, to be multiplied by `N`.
    proof_chain: f64,
    /// `max pressure_increment / ‖div(b − a)‖²`
    max_pressure_ratio: f64,
    rows: Vec<LedgerRow>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::NAN
    } else {
        num / den
    }
}

impl EstimatorLedger {
    pub fn new(mu: f64, include_linf: bool) -> Self {
        EstimatorLedger {
            include_linf,
            mu,
            ..Default::default()
        }
    }

    pub fn accumulate(
        &mut self,
        interval: usize,
        time: f64,
        dt: f64,
        terms: &IntervalTerms,
    ) -> Result<LedgerRow> {
        if interval != self.next {
            return Err(Error::OutOfOrder {
                expected: self.next,
                got: interval,
            });
        }
        self.next += 1;
        let s = &mut self.sums;
        s.grad_increment += terms.grad_increment;
        s.div_l2 += terms.div_l2;
        s.div_rate_l1 += terms.div_rate_l1;
        s.div_rate_l2 += terms.div_rate_l2;
        s.pressure_increment += terms.pressure_increment;
        s.data_osc += terms.data_osc;
        s.err_grad += terms.err_grad;
        s.err_dual += terms.err_dual;
        self.linf = self.linf.max(terms.div_endpoint_sq_max);
        self.proof_chain += 12.0 / dt * terms.div_l2 / self.mu;
        let jump = terms.div_rate_l1 * terms.div_rate_l1;
        if jump > 0.0 {
            self.max_pressure_ratio = self.max_pressure_ratio.max(terms.pressure_increment / jump);
        }

        let est1 = s.grad_increment + s.div_l2 + s.div_rate_l1 * s.div_rate_l1;
        let est2 = s.grad_increment + s.div_l2 + s.div_rate_l2;
        let est3 = s.grad_increment + s.pressure_increment;
        let error = s.err_grad + s.err_dual;
        let extra = if self.include_linf { self.linf } else { 0.0 };
        let row = LedgerRow {
            interval,
            time,
            est1,
            est2,
            est3,
            linf_term: self.linf,
            err_grad: s.err_grad,
            err_dual: s.err_dual,
            error,
            data_osc: s.data_osc,
            eff1: ratio(est1 + extra, error),
            eff2: ratio(est2 + extra, error),
            eff3: ratio(est3 + extra, error),
        };
        self.rows.push(row);
        Ok(row)
    }

    pub fn rows(&self) -> &[LedgerRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&LedgerRow> {
        self.rows.last()
    }

    pub fn sums(&self) -> &IntervalTerms {
        &self.sums
    }

    /// Both sides of `(Σ ‖div(b − a)‖)² ≤ Σ (12N/Δtⁿ) ∫ ‖div u^{Δt}‖²`.
    pub fn proof_chain(&self, num_steps: usize) -> (f64, f64) {
        let lhs = self.sums.div_rate_l1 * self.sums.div_rate_l1;
        (lhs, num_steps as f64 * self.proof_chain)
    }

    /// Largest `‖Δt^{n+1}∇p^{n+1} − Δtⁿ∇pⁿ‖² / ‖div(u^{n+1/2} − u^{n-1/2})‖²` seen.
    pub fn max_pressure_ratio(&self) -> f64 {
        self.max_pressure_ratio
    }
}
