use super::element::{p2_gradients_at, p2_nodes, p2_values, ElementGeometry};
use super::quadrature::QuadratureRule;
use crate::mesh::{Mesh, Point};

/// A quadrature point, with enough element data to evaluate P1 and P2
/// fields there.
#[derive(Debug)]
pub struct PointContext<'a> {
    pub triangle: usize,
    pub x: Point,
    pub bary: [f64; 3],
    pub geometry: &'a ElementGeometry,
    pub p2_nodes: [usize; 6],
    pub vertices: [usize; 3],
    phi: [f64; 6],
}

impl PointContext<'_> {
    pub fn velocity(&self, coeffs: &[f64]) -> [f64; 2] {
        let mut u = [0.0; 2];
        for (n, p) in self.p2_nodes.iter().zip(&self.phi) {
            u[0] += p * coeffs[2 * n];
            u[1] += p * coeffs[2 * n + 1];
        }
        u
    }

    /// `g[i][j] = ∂ⱼ uᵢ`
    pub fn velocity_gradient(&self, coeffs: &[f64]) -> [[f64; 2]; 2] {
        p2_gradients_at(self.geometry, &self.p2_nodes, &self.bary, coeffs)
    }

    pub fn divergence(&self, coeffs: &[f64]) -> f64 {
        let g = self.velocity_gradient(coeffs);
        g[0][0] + g[1][1]
    }

    pub fn pressure(&self, coeffs: &[f64]) -> f64 {
        (0..3)
            .map(|k| self.bary[k] * coeffs[self.vertices[k]])
            .sum()
    }

    pub fn pressure_gradient(&self, coeffs: &[f64]) -> [f64; 2] {
        let g = &self.geometry.grad_bary;
        let mut out = [0.0; 2];
        for k in 0..3 {
            let p = coeffs[self.vertices[k]];
            out[0] += p * g[k][0];
            out[1] += p * g[k][1];
        }
        out
    }
}

/// Quadrature approximation of `∫_D integrand`.
pub fn integrate_field(
    mesh: &Mesh,
    rule: &QuadratureRule,
    mut integrand: impl FnMut(&PointContext) -> f64,
) -> f64 {
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let geometry = ElementGeometry::new(mesh, t);
        let nodes = p2_nodes(mesh, t);
        let mut local = 0.0;
        for (bary, w) in rule.points.iter().zip(&rule.weights) {
            let ctx = PointContext {
                triangle: t,
                x: geometry.map(bary),
                bary: *bary,
                geometry: &geometry,
                p2_nodes: nodes,
                vertices: mesh.triangles[t],
                phi: p2_values(bary),
            };
            local += w * integrand(&ctx);
        }
        total += geometry.jacobian() * local;
    }
    total
}

/// Euclidean norm squared of a 2-vector.
pub fn squared(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

/// Frobenius norm squared.
pub fn squared_matrix(m: [[f64; 2]; 2]) -> f64 {
    m.iter().flatten().map(|v| v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::quadrature::make_quadrature;
    use crate::fem::space::VelocitySpace;
    use crate::mesh::{build_structured_mesh, Rect};

    #[test]
    fn constant_integrates_to_area() {
        let mesh = build_structured_mesh(Rect::symmetric_unit(), 4, 4).unwrap();
        let q = make_quadrature(2).unwrap();
        assert!((integrate_field(&mesh, &q, |_| 1.0) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn divergence_free_linear_field() {
        let mesh = build_structured_mesh(Rect::symmetric_unit(), 3, 3).unwrap();
        let space = VelocitySpace::new(&mesh);
        let u = space.interpolate(|x| [x[0] + 2.0 * x[1], 3.0 * x[0] - x[1]]);
        let q = make_quadrature(4).unwrap();
        let div_sq = integrate_field(&mesh, &q, |c| c.divergence(&u).powi(2));
        assert!(div_sq < 1e-26);
    }

    #[test]
    fn gradient_norm_of_strain_field() {
        let mesh = build_structured_mesh(Rect::symmetric_unit(), 5, 3).unwrap();
        let space = VelocitySpace::new(&mesh);
        let u = space.interpolate(|x| [x[0], -x[1]]);
        let q = make_quadrature(4).unwrap();
        let v = integrate_field(&mesh, &q, |c| squared_matrix(c.velocity_gradient(&u)));
        assert!((v - 8.0).abs() < 1e-12);
    }
}
