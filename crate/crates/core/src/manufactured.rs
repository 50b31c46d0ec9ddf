//! Analytic unsteady Stokes solution on (-1, 1)² used to measure true errors.
//!
//! ```text
//! u(t, x) = sin(λt) Φ(x),   Φ = π (sin(2πy) sin²(πx), −sin(2πx) sin²(πy))
//! p(t, x) = sin(λt) P(x),   P = cos(πx) sin(πy)
//! f       = ∂ₜu − μΔu + ∇p = cos(λt) A(x) + sin(λt) B(x)
//!           with A = λΦ and B = −μΔΦ + ∇P.
//! ```
//!
//! The solution is divergence free, vanishes on the boundary of (-1, 1)² and
//! at `t = 0`, and `P` has zero mean. With `λ = 0` all data vanish
//! identically.

use std::f64::consts::PI;

use crate::fem::{make_quadrature, FemSystem, QuadratureRule};
use crate::mesh::Point;
use crate::scheme::{Snapshot, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticStokes {
    pub lambda: f64,
    pub mu: f64,
}

/// `sin(x)/x`, continuous at 0.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

impl AnalyticStokes {
    pub fn new(lambda: f64, mu: f64) -> Self {
        AnalyticStokes { lambda, mu }
    }

    /// Spatial velocity profile Φ.
    pub fn velocity_profile(x: Point) -> [f64; 2] {
        let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
        [
            PI * (2.0 * PI * x[1]).sin() * sx * sx,
            -PI * (2.0 * PI * x[0]).sin() * sy * sy,
        ]
    }

    /// `∇Φ`, with `g[i][j] = ∂ⱼ Φᵢ`.
    pub fn velocity_profile_gradient(x: Point) -> [[f64; 2]; 2] {
        let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
        let (s2x, s2y) = ((2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).sin());
        let (c2x, c2y) = ((2.0 * PI * x[0]).cos(), (2.0 * PI * x[1]).cos());
        let pi2 = PI * PI;
        [
            [pi2 * s2x * s2y, 2.0 * pi2 * c2y * sx * sx],
            [-2.0 * pi2 * c2x * sy * sy, -pi2 * s2x * s2y],
        ]
    }

    /// `ΔΦ`
    pub fn velocity_profile_laplacian(x: Point) -> [f64; 2] {
        let pi3 = PI * PI * PI;
        let (s2x, s2y) = ((2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).sin());
        let (c2x, c2y) = ((2.0 * PI * x[0]).cos(), (2.0 * PI * x[1]).cos());
        [
            2.0 * pi3 * s2y * (2.0 * c2x - 1.0),
            -2.0 * pi3 * s2x * (2.0 * c2y - 1.0),
        ]
    }

    pub fn pressure_profile(x: Point) -> f64 {
        (PI * x[0]).cos() * (PI * x[1]).sin()
    }

    pub fn pressure_profile_gradient(x: Point) -> [f64; 2] {
        [
            -PI * (PI * x[0]).sin() * (PI * x[1]).sin(),
            PI * (PI * x[0]).cos() * (PI * x[1]).cos(),
        ]
    }

    fn amplitude(&self, t: f64) -> f64 {
        (self.lambda * t).sin()
    }

    fn amplitude_rate(&self, t: f64) -> f64 {
        self.lambda * (self.lambda * t).cos()
    }

    pub fn velocity(&self, t: f64, x: Point) -> [f64; 2] {
        let s = self.amplitude(t);
        Self::velocity_profile(x).map(|v| s * v)
    }

    pub fn velocity_gradient(&self, t: f64, x: Point) -> [[f64; 2]; 2] {
        let s = self.amplitude(t);
        Self::velocity_profile_gradient(x).map(|row| row.map(|v| s * v))
    }

    pub fn velocity_time_derivative(&self, t: f64, x: Point) -> [f64; 2] {
        let s = self.amplitude_rate(t);
        Self::velocity_profile(x).map(|v| s * v)
    }

    pub fn velocity_laplacian(&self, t: f64, x: Point) -> [f64; 2] {
        let s = self.amplitude(t);
        Self::velocity_profile_laplacian(x).map(|v| s * v)
    }

    pub fn divergence(&self, t: f64, x: Point) -> f64 {
        let g = self.velocity_gradient(t, x);
        g[0][0] + g[1][1]
    }

    pub fn pressure(&self, t: f64, x: Point) -> f64 {
        self.amplitude(t) * Self::pressure_profile(x)
    }

    pub fn pressure_gradient(&self, t: f64, x: Point) -> [f64; 2] {
        let s = self.amplitude(t);
        Self::pressure_profile_gradient(x).map(|v| s * v)
    }

    /// Spatial factor multiplying `cos(λt)` in the forcing.
    pub fn forcing_cos_part(&self, x: Point) -> [f64; 2] {
        Self::velocity_profile(x).map(|v| self.lambda * v)
    }

    /// Spatial factor multiplying `sin(λt)` in the forcing.
    pub fn forcing_sin_part(&self, x: Point) -> [f64; 2] {
        let lap = Self::velocity_profile_laplacian(x);
        let gp = Self::pressure_profile_gradient(x);
        [-self.mu * lap[0] + gp[0], -self.mu * lap[1] + gp[1]]
    }

    pub fn forcing(&self, t: f64, x: Point) -> [f64; 2] {
        let (c, s) = ((self.lambda * t).cos(), (self.lambda * t).sin());
        let a = self.forcing_cos_part(x);
        let b = self.forcing_sin_part(x);
        [c * a[0] + s * b[0], c * a[1] + s * b[1]]
    }

    /// Exact averages of `(cos(λt), sin(λt))` over `[t0, t1]`.
    pub fn averaged_coefficients(&self, t0: f64, t1: f64) -> (f64, f64) {
        let mid = 0.5 * (t0 + t1);
        let damp = sinc(0.5 * self.lambda * (t1 - t0));
        (
            (self.lambda * mid).cos() * damp,
            (self.lambda * mid).sin() * damp,
        )
    }
}

/// Spatial loads of the manufactured case, assembled once per mesh and
/// combined with time coefficients on demand.
#[derive(Debug, Clone)]
pub struct ManufacturedLoads {
    pub case: AnalyticStokes,
    /// `(A, φᵢ)`
    pub forcing_cos: Vec<f64>,
    /// `(B, φᵢ)`
    pub forcing_sin: Vec<f64>,
    /// `(Φ, φᵢ)`
    pub profile: Vec<f64>,
    /// `(∇P, φᵢ)`
    pub pressure_gradient: Vec<f64>,
    /// `[(A, A), (A, B), (B, B)]`
    pub forcing_gram: [f64; 3],
}

/// Quadrature degree for everything integrated against the analytic solution.
pub const ERROR_DEGREE: usize = 6;

impl ManufacturedLoads {
    pub fn new(system: &FemSystem, case: AnalyticStokes) -> Self {
        let rule = make_quadrature(ERROR_DEGREE).expect("degree 6 is supported");
        Self::with_rule(system, case, &rule)
    }

    pub fn with_rule(system: &FemSystem, case: AnalyticStokes, rule: &QuadratureRule) -> Self {
        let forcing_cos = system.velocity_load(rule, |x| case.forcing_cos_part(x));
        let forcing_sin = system.velocity_load(rule, |x| case.forcing_sin_part(x));
        let profile = system.velocity_load(rule, AnalyticStokes::velocity_profile);
        let pressure_gradient =
            system.velocity_load(rule, AnalyticStokes::pressure_profile_gradient);
        let mut gram = [0.0; 3];
        gram[0] = crate::fem::integrate_field(&system.mesh, rule, |c| {
            let a = case.forcing_cos_part(c.x);
            a[0] * a[0] + a[1] * a[1]
        });
        gram[1] = crate::fem::integrate_field(&system.mesh, rule, |c| {
            let (a, b) = (case.forcing_cos_part(c.x), case.forcing_sin_part(c.x));
            a[0] * b[0] + a[1] * b[1]
        });
        gram[2] = crate::fem::integrate_field(&system.mesh, rule, |c| {
            let b = case.forcing_sin_part(c.x);
            b[0] * b[0] + b[1] * b[1]
        });
        ManufacturedLoads {
            case,
            forcing_cos,
            forcing_sin,
            profile,
            pressure_gradient,
            forcing_gram: gram,
        }
    }

    /// Load vector of the forcing averaged over interval `n` of `grid`.
    pub fn averaged_load(&self, grid: &TimeGrid, n: usize) -> Vec<f64> {
        let (c, s) = self
            .case
            .averaged_coefficients(grid.time(n), grid.time(n + 1));
        self.combine_forcing(c, s)
    }

    /// Load vector of the forcing at time `t`.
    pub fn load_at(&self, t: f64) -> Vec<f64> {
        let l = self.case.lambda;
        self.combine_forcing((l * t).cos(), (l * t).sin())
    }

    fn combine_forcing(&self, c: f64, s: f64) -> Vec<f64> {
        self.forcing_cos
            .iter()
            .zip(&self.forcing_sin)
            .map(|(a, b)| c * a + s * b)
            .collect()
    }

    /// Load of `∂ₜu(t) + ∇p(t)` (exact solution).
    pub fn momentum_load(&self, t: f64) -> Vec<f64> {
        let l = self.case.lambda;
        let (rate, amp) = (l * (l * t).cos(), (l * t).sin());
        self.profile
            .iter()
            .zip(&self.pressure_gradient)
            .map(|(a, b)| rate * a + amp * b)
            .collect()
    }

    /// `‖f(t) − f̄‖²` where `f̄` has time coefficients `(c̄, s̄)`.
    pub fn forcing_deviation_sq(&self, t: f64, mean: (f64, f64)) -> f64 {
        let l = self.case.lambda;
        let a = (l * t).cos() - mean.0;
        let b = (l * t).sin() - mean.1;
        let [aa, ab, bb] = self.forcing_gram;
        (a * a * aa + 2.0 * a * b * ab + b * b * bb).max(0.0)
    }
}

/// Snapshot `n` of a trajectory built from the exact solution: velocity
/// interpolated at `tₙ − shift·Δtⁿ`, pressure interpolated at `tₙ`.
///
/// `shift = 0.5` mimics the half-step labelling of the scheme's velocity;
/// `shift = 0` leaves only space interpolation and linear-in-time error.
pub fn interpolated_snapshot(
    system: &FemSystem,
    case: &AnalyticStokes,
    grid: &TimeGrid,
    n: usize,
    shift: f64,
) -> Snapshot {
    let t = grid.time(n);
    let dt = grid.step(n);
    let tv = t - shift * dt;
    Snapshot {
        index: n,
        time: t,
        dt,
        velocity: system.velocity.interpolate(|x| case.velocity(tv, x)),
        pressure: system.pressure.interpolate(|x| case.pressure(t, x)),
    }
}
