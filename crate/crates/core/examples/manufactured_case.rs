//! The analytic solution and its forcing, sampled at a few points.

use ctstokes::manufactured::AnalyticStokes;

fn main() {
    let case = AnalyticStokes::new(10.0, 1.0);
    let t = 0.37;
    for x in [[0.0, 0.0], [0.25, -0.5], [-0.8, 0.6]] {
        let u = case.velocity(t, x);
        let f = case.forcing(t, x);
        let lap = case.velocity_laplacian(t, x);
        let ut = case.velocity_time_derivative(t, x);
        let gp = case.pressure_gradient(t, x);
        let residual = [ut[0] - lap[0] + gp[0] - f[0], ut[1] - lap[1] + gp[1] - f[1]];
        println!(
            "x = {x:?}: u = ({:+.5}, {:+.5}), p = {:+.5}, div u = {:+.1e}, momentum residual = {:.1e}",
            u[0],
            u[1],
            case.pressure(t, x),
            case.divergence(t, x),
            residual[0].abs().max(residual[1].abs())
        );
    }

    // Interval averages of (cos λt, sin λt) shrink by sinc(λΔt/2) relative
    // to the midpoint values.
    for dt in [0.1, 0.01, 1e-4] {
        let (c, s) = case.averaged_coefficients(t, t + dt);
        let tm = t + dt / 2.0;
        println!(
            "dt = {dt:<6}: averaged ({c:+.8}, {s:+.8}) midpoint ({:+.8}, {:+.8})",
            (10.0 * tm).cos(),
            (10.0 * tm).sin()
        );
    }
}
