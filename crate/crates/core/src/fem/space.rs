use super::element::{p2_gradients_at, p2_nodes, p2_values, ElementGeometry};
use crate::mesh::{Mesh, Point};

/// Continuous P2 vector fields vanishing on the boundary.
///
/// Nodes are the mesh vertices followed by the edge midpoints; the two
/// components of node `k` are dofs `2k` and `2k + 1`.
#[derive(Debug, Clone)]
pub struct VelocitySpace {
    pub node_points: Vec<Point>,
    /// One flag per dof (both components of every boundary node).
    pub dirichlet: Vec<bool>,
}

/// Continuous P1 scalar fields, one dof per vertex.
#[derive(Debug, Clone)]
pub struct PressureSpace {
    pub node_points: Vec<Point>,
    /// Lumped mass `Σ_{T ∋ i} |T| / 3`; sums to the domain area.
    pub lumped_weights: Vec<f64>,
}

impl VelocitySpace {
    pub fn new(mesh: &Mesh) -> Self {
        let mut node_points = mesh.vertices.clone();
        node_points.extend((0..mesh.num_edges()).map(|e| mesh.edge_midpoint(e)));
        let node_on_boundary = mesh
            .boundary_vertex
            .iter()
            .chain(&mesh.boundary_edge)
            .copied();
        let dirichlet = node_on_boundary.flat_map(|b| [b, b]).collect();
        VelocitySpace {
            node_points,
            dirichlet,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.node_points.len()
    }

    pub fn num_dofs(&self) -> usize {
        2 * self.node_points.len()
    }

    /// Nodal interpolation of a vector field.
    pub fn interpolate(&self, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        self.node_points.iter().flat_map(|&x| f(x)).collect()
    }

    pub fn evaluate(&self, mesh: &Mesh, coeffs: &[f64], x: Point) -> Option<[f64; 2]> {
        let (t, bary) = mesh.locate(x)?;
        let nodes = p2_nodes(mesh, t);
        let phi = p2_values(&bary);
        let mut u = [0.0; 2];
        for (n, p) in nodes.iter().zip(phi) {
            u[0] += p * coeffs[2 * n];
            u[1] += p * coeffs[2 * n + 1];
        }
        Some(u)
    }

    pub fn evaluate_gradient(
        &self,
        mesh: &Mesh,
        coeffs: &[f64],
        x: Point,
    ) -> Option<[[f64; 2]; 2]> {
        let (t, bary) = mesh.locate(x)?;
        let geo = ElementGeometry::new(mesh, t);
        Some(p2_gradients_at(&geo, &p2_nodes(mesh, t), &bary, coeffs))
    }
}

impl PressureSpace {
    pub fn new(mesh: &Mesh) -> Self {
        let mut lumped_weights = vec![0.0; mesh.num_vertices()];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let third = mesh.signed_area(t) / 3.0;
            for &v in tri {
                lumped_weights[v] += third;
            }
        }
        PressureSpace {
            node_points: mesh.vertices.clone(),
            lumped_weights,
        }
    }

    pub fn num_dofs(&self) -> usize {
        self.node_points.len()
    }

    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.node_points.iter().map(|&x| f(x)).collect()
    }

    /// Lumped-mass approximation of the mean value.
    pub fn weighted_mean(&self, p: &[f64]) -> f64 {
        let total: f64 = self.lumped_weights.iter().sum();
        p.iter()
            .zip(&self.lumped_weights)
            .map(|(a, w)| a * w)
            .sum::<f64>()
            / total
    }

    pub fn evaluate(&self, mesh: &Mesh, coeffs: &[f64], x: Point) -> Option<f64> {
        let (t, bary) = mesh.locate(x)?;
        let tri = mesh.triangles[t];
        Some((0..3).map(|k| bary[k] * coeffs[tri[k]]).sum())
    }
}
