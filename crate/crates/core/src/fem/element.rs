//! P1 and P2 Lagrange bases on affine triangles, written in barycentric
//! coordinates.
//!
//! Local P2 ordering: the three vertex functions `Lᵢ(2Lᵢ − 1)` followed by
//! the three edge functions `4 L_{k+1} L_{k+2}`, edge `k` being opposite
//! vertex `k`.

use crate::mesh::{Mesh, Point};

#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub vertices: [Point; 3],
    pub area: f64,
    /// Physical gradients of the barycentric coordinates (constant).
    pub grad_bary: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(mesh: &Mesh, t: usize) -> Self {
        let vertices = mesh.triangle_points(t);
        let [p0, p1, p2] = vertices;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let mut grad_bary = [[0.0; 2]; 3];
        for (i, g) in grad_bary.iter_mut().enumerate() {
            let a = vertices[(i + 1) % 3];
            let b = vertices[(i + 2) % 3];
            *g = [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
        }
        ElementGeometry {
            vertices,
            area: 0.5 * det,
            grad_bary,
        }
    }

    pub fn map(&self, bary: &[f64; 3]) -> Point {
        let mut x = [0.0; 2];
        for (l, p) in bary.iter().zip(&self.vertices) {
            x[0] += l * p[0];
            x[1] += l * p[1];
        }
        x
    }

    /// Quadrature weight scale: physical integral = `jacobian · Σ w f`.
    pub fn jacobian(&self) -> f64 {
        2.0 * self.area
    }

    pub fn p2_gradients(&self, bary: &[f64; 3]) -> [[f64; 2]; 6] {
        let g = &self.grad_bary;
        let mut out = [[0.0; 2]; 6];
        for i in 0..3 {
            let s = 4.0 * bary[i] - 1.0;
            out[i] = [s * g[i][0], s * g[i][1]];
        }
        for k in 0..3 {
            let (a, b) = ((k + 1) % 3, (k + 2) % 3);
            out[3 + k] = [
                4.0 * (bary[a] * g[b][0] + bary[b] * g[a][0]),
                4.0 * (bary[a] * g[b][1] + bary[b] * g[a][1]),
            ];
        }
        out
    }
}

pub fn p2_values(bary: &[f64; 3]) -> [f64; 6] {
    let l = bary;
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
        4.0 * l[0] * l[1],
    ]
}

/// Gradient `g[i][j] = ∂ⱼ uᵢ` of the P2 vector field `coeffs` at `bary`.
pub fn p2_gradients_at(
    geo: &ElementGeometry,
    nodes: &[usize; 6],
    bary: &[f64; 3],
    coeffs: &[f64],
) -> [[f64; 2]; 2] {
    let grads = geo.p2_gradients(bary);
    let mut g = [[0.0; 2]; 2];
    for (n, dphi) in nodes.iter().zip(&grads) {
        for (c, row) in g.iter_mut().enumerate() {
            let u = coeffs[2 * n + c];
            row[0] += u * dphi[0];
            row[1] += u * dphi[1];
        }
    }
    g
}

/// Global P2 node indices of a triangle: vertices, then `V + edge`.
pub fn p2_nodes(mesh: &Mesh, t: usize) -> [usize; 6] {
    let v = mesh.triangles[t];
    let e = mesh.triangle_edges[t];
    let nv = mesh.num_vertices();
    [v[0], v[1], v[2], nv + e[0], nv + e[1], nv + e[2]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_mesh, Rect};

    #[test]
    fn p2_is_nodal() {
        let nodes: [[f64; 3]; 6] = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
            [0.5, 0.5, 0.0],
        ];
        for (j, node) in nodes.iter().enumerate() {
            let v = p2_values(node);
            for (i, vi) in v.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((vi - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn partition_of_unity_and_zero_gradient_sum() {
        let mesh = build_structured_mesh(Rect::symmetric_unit(), 2, 3).unwrap();
        let geo = ElementGeometry::new(&mesh, 3);
        let bary = [0.2, 0.5, 0.3];
        assert!((p2_values(&bary).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let grads = geo.p2_gradients(&bary);
        let sx: f64 = grads.iter().map(|g| g[0]).sum();
        let sy: f64 = grads.iter().map(|g| g[1]).sum();
        assert!(sx.abs() < 1e-13 && sy.abs() < 1e-13);
    }

    #[test]
    fn barycentric_gradients_reproduce_coordinates() {
        let mesh = build_structured_mesh(Rect::new(0.0, 2.0, 1.0, 2.0).unwrap(), 3, 2).unwrap();
        for t in 0..mesh.num_triangles() {
            let geo = ElementGeometry::new(&mesh, t);
            // ∇x = Σ xᵢ ∇Lᵢ = (1, 0)
            let gx: [f64; 2] = [
                (0..3)
                    .map(|i| geo.vertices[i][0] * geo.grad_bary[i][0])
                    .sum(),
                (0..3)
                    .map(|i| geo.vertices[i][0] * geo.grad_bary[i][1])
                    .sum(),
            ];
            assert!((gx[0] - 1.0).abs() < 1e-13 && gx[1].abs() < 1e-13);
            assert!((geo.area - mesh.signed_area(t)).abs() < 1e-15);
        }
    }
}
