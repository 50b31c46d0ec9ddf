//! Structured simplicial meshes of a rectangle.
//!
//! Every cell of an `nx × ny` grid is split into two counterclockwise
//! triangles along the diagonal running from its lower-left to its
//! upper-right corner. Edges are deduplicated and stored with the lower
//! vertex index first, numbered in order of first appearance, so that
//! downstream dof numbering is reproducible.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let rect = Rect {
            xmin,
            xmax,
            ymin,
            ymax,
        };
        rect.validate()?;
        Ok(rect)
    }

    /// The square (-1, 1)².
    pub fn symmetric_unit() -> Self {
        Rect {
            xmin: -1.0,
            xmax: 1.0,
            ymin: -1.0,
            ymax: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.xmin, self.xmax, self.ymin, self.ymax]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.xmin < self.xmax) || !(self.ymin < self.ymax) {
            return Err(Error::InvalidMesh(format!("degenerate rectangle {self:?}")));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        (self.xmax - self.xmin) * (self.ymax - self.ymin)
    }
}

impl Default for Rect {
    fn default() -> Self {
        Rect::symmetric_unit()
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Vertex pairs, lower index first.
    pub edges: Vec<[usize; 2]>,
    /// Local edge `k` of a triangle is the one opposite local vertex `k`.
    pub triangle_edges: Vec<[usize; 3]>,
    pub boundary_vertex: Vec<bool>,
    pub boundary_edge: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStatistics {
    pub min_area: f64,
    pub max_area: f64,
    pub total_area: f64,
}

pub fn build_structured_mesh(rect: Rect, nx: usize, ny: usize) -> Result<Mesh> {
    rect.validate()?;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidMesh(format!(
            "cell counts must be positive (nx = {nx}, ny = {ny})"
        )));
    }

    let hx = (rect.xmax - rect.xmin) / nx as f64;
    let hy = (rect.ymax - rect.ymin) / ny as f64;
    let index = |i: usize, j: usize| j * (nx + 1) + i;

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut boundary_vertex = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        // Pin the last coordinate so the boundary lies exactly on the rectangle.
        let y = if j == ny {
            rect.ymax
        } else {
            rect.ymin + j as f64 * hy
        };
        for i in 0..=nx {
            let x = if i == nx {
                rect.xmax
            } else {
                rect.xmin + i as f64 * hx
            };
            vertices.push([x, y]);
            boundary_vertex.push(i == 0 || i == nx || j == 0 || j == ny);
        }
    }

    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let v00 = index(i, j);
            let v10 = index(i + 1, j);
            let v01 = index(i, j + 1);
            let v11 = index(i + 1, j + 1);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    let mut edge_ids: HashMap<[usize; 2], usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut edge_use = Vec::new();
    let mut triangle_edges = Vec::with_capacity(triangles.len());
    for tri in &triangles {
        let mut local = [0; 3];
        for (k, slot) in local.iter_mut().enumerate() {
            let a = tri[(k + 1) % 3];
            let b = tri[(k + 2) % 3];
            let key = [a.min(b), a.max(b)];
            let id = *edge_ids.entry(key).or_insert_with(|| {
                edges.push(key);
                edge_use.push(0usize);
                edges.len() - 1
            });
            edge_use[id] += 1;
            *slot = id;
        }
        triangle_edges.push(local);
    }
    let boundary_edge = edge_use.iter().map(|&c| c == 1).collect();

    Ok(Mesh {
        rect,
        nx,
        ny,
        vertices,
        triangles,
        edges,
        triangle_edges,
        boundary_vertex,
        boundary_edge,
    })
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area, positive for counterclockwise triangles.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_points(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    pub fn statistics(&self) -> MeshStatistics {
        let mut stats = MeshStatistics {
            min_area: f64::INFINITY,
            max_area: f64::NEG_INFINITY,
            total_area: 0.0,
        };
        for t in 0..self.num_triangles() {
            let a = self.signed_area(t);
            stats.min_area = stats.min_area.min(a);
            stats.max_area = stats.max_area.max(a);
            stats.total_area += a;
        }
        stats
    }

    /// Finds a triangle containing `x` and the barycentric coordinates of `x`
    /// in it. Linear scan; intended for diagnostics and tests.
    pub fn locate(&self, x: Point) -> Option<(usize, [f64; 3])> {
        const SLACK: f64 = 1e-12;
        (0..self.num_triangles()).find_map(|t| {
            let [p0, p1, p2] = self.triangle_points(t);
            let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            let l1 = ((x[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (x[1] - p0[1])) / det;
            let l2 = ((p1[0] - p0[0]) * (x[1] - p0[1]) - (x[0] - p0[0]) * (p1[1] - p0[1])) / det;
            let l0 = 1.0 - l1 - l2;
            (l0 >= -SLACK && l1 >= -SLACK && l2 >= -SLACK).then_some((t, [l0, l1, l2]))
        })
    }

    /// Plain-text dump: vertex count, coordinates, triangle count, triangles.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.num_vertices());
        for v in &self.vertices {
            let _ = writeln!(out, "{:.17e} {:.17e}", v[0], v[1]);
        }
        let _ = writeln!(out, "{}", self.num_triangles());
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Rect {
        Rect::new(0.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn single_cell() {
        let m = build_structured_mesh(Rect::symmetric_unit(), 1, 1).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_triangles(), 2);
        assert_eq!(m.num_edges(), 5);
        assert_eq!(m.statistics().total_area, 4.0);
    }

    #[test]
    fn two_by_two_counts() {
        let m = build_structured_mesh(Rect::symmetric_unit(), 2, 2).unwrap();
        let (v, f) = (m.num_vertices(), m.num_triangles());
        assert_eq!((v, f), (9, 8));
        // Euler: E = V + F - 1
        assert_eq!(m.num_edges(), v + f - 1);
        assert_eq!(m.num_edges(), 16);
        assert_eq!(m.boundary_vertex.iter().filter(|&&b| b).count(), 8);
        let s = m.statistics();
        assert_eq!(s.min_area, 0.5);
        assert_eq!(s.max_area, 0.5);
    }

    #[test]
    fn anisotropic_total_area() {
        let m = build_structured_mesh(unit(), 4, 2).unwrap();
        assert!((m.statistics().total_area - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_structured_mesh(unit(), 0, 3).is_err());
        assert!(build_structured_mesh(unit(), 3, 0).is_err());
        assert!(Rect::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(Rect::new(0.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn structural_invariants_up_to_16() {
        for nx in 1..=16 {
            for ny in 1..=16 {
                let rect = Rect::new(-0.5, 1.25, 0.0, 3.0).unwrap();
                let m = build_structured_mesh(rect, nx, ny).unwrap();
                let (v, e, f) = (m.num_vertices(), m.num_edges(), m.num_triangles());
                assert_eq!(v, (nx + 1) * (ny + 1));
                assert_eq!(f, 2 * nx * ny);
                assert_eq!(v as i64 - e as i64 + f as i64, 1);

                let mut uses = vec![0; e];
                for te in &m.triangle_edges {
                    for &id in te {
                        uses[id] += 1;
                    }
                }
                assert!(uses.iter().all(|&u| u == 1 || u == 2));
                for (id, &u) in uses.iter().enumerate() {
                    assert_eq!(m.boundary_edge[id], u == 1);
                }
                let nb = m.boundary_edge.iter().filter(|&&b| b).count();
                assert_eq!(nb, 2 * (nx + ny));

                for t in 0..f {
                    assert!(m.signed_area(t) > 0.0);
                }
                let total = m.statistics().total_area;
                assert!((total - rect.area()).abs() <= 1e-12 * rect.area());
                assert!(m.edges.iter().all(|e| e[0] < e[1]));
            }
        }
    }

    #[test]
    fn triangle_edges_are_opposite_vertices() {
        let m = build_structured_mesh(unit(), 3, 2).unwrap();
        for (tri, te) in m.triangles.iter().zip(&m.triangle_edges) {
            for k in 0..3 {
                let e = m.edges[te[k]];
                assert!(!e.contains(&tri[k]));
            }
        }
    }

    #[test]
    fn locate_finds_containing_triangle() {
        let m = build_structured_mesh(unit(), 3, 3).unwrap();
        let (t, bary) = m.locate([0.7, 0.2]).unwrap();
        let pts = m.triangle_points(t);
        let x = (0..3).map(|k| bary[k] * pts[k][0]).sum::<f64>();
        let y = (0..3).map(|k| bary[k] * pts[k][1]).sum::<f64>();
        assert!((x - 0.7).abs() < 1e-14 && (y - 0.2).abs() < 1e-14);
        assert!(m.locate([2.0, 0.5]).is_none());
    }

    #[test]
    fn text_export_lists_counts() {
        let m = build_structured_mesh(unit(), 1, 1).unwrap();
        let text = m.to_text();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "4");
        assert_eq!(lines[5], "2");
        assert_eq!(lines.len(), 1 + 4 + 1 + 2);
    }
}
