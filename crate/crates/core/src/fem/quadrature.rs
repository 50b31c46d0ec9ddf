//! Symmetric quadrature rules on the reference triangle
//! `{(ξ, η) : ξ, η ≥ 0, ξ + η ≤ 1}`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Barycentric coordinates `(1 − ξ − η, ξ, η)`.
    pub points: Vec<[f64; 3]>,
    /// Weights summing to the reference area 1/2.
    pub weights: Vec<f64>,
    pub degree: usize,
}

fn orbit_s21(a: f64, w: f64, points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    for p in [[a, a, b], [a, b, a], [b, a, a]] {
        points.push(p);
        weights.push(w);
    }
}

fn orbit_s111(a: f64, b: f64, w: f64, points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>) {
    let c = 1.0 - a - b;
    for p in [
        [a, b, c],
        [a, c, b],
        [b, a, c],
        [b, c, a],
        [c, a, b],
        [c, b, a],
    ] {
        points.push(p);
        weights.push(w);
    }
}

#[allow(clippy::excessive_precision)]
pub fn make_quadrature(degree: usize) -> Result<QuadratureRule> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match degree {
        2 => orbit_s21(1.0 / 6.0, 1.0 / 6.0, &mut points, &mut weights),
        // Strang-Fix / Dunavant 6-point rule.
        4 => {
            orbit_s21(
                0.445_948_490_915_964_89,
                0.111_690_794_839_005_73,
                &mut points,
                &mut weights,
            );
            orbit_s21(
                0.091_576_213_509_770_743,
                0.054_975_871_827_660_934,
                &mut points,
                &mut weights,
            );
        }
        // Dunavant 12-point rule.
        6 => {
            orbit_s21(
                0.249_286_745_170_910_42,
                0.058_393_137_863_189_683,
                &mut points,
                &mut weights,
            );
            orbit_s21(
                0.063_089_014_491_502_228,
                0.025_422_453_185_103_408,
                &mut points,
                &mut weights,
            );
            orbit_s111(
                0.053_145_049_844_816_947,
                0.310_352_451_033_784_41,
                0.041_425_537_809_186_788,
                &mut points,
                &mut weights,
            );
        }
        other => return Err(Error::UnsupportedDegree(other)),
    }
    Ok(QuadratureRule {
        points,
        weights,
        degree,
    })
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f(ξ, η)` over the reference triangle.
    pub fn integrate_reference(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[1], p[2]))
            .sum()
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(points: usize) -> Vec<(f64, f64)> {
    let (nodes, weights): (&[f64], &[f64]) = match points {
        1 => (&[0.0], &[2.0]),
        2 => (
            &[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8],
            &[1.0, 1.0],
        ),
        3 => (
            &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
            &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
        ),
        4 => (
            &[
                -0.861_136_311_594_052_6,
                -0.339_981_043_584_856_3,
                0.339_981_043_584_856_3,
                0.861_136_311_594_052_6,
            ],
            &[
                0.347_854_845_137_453_85,
                0.652_145_154_862_546_2,
                0.652_145_154_862_546_2,
                0.347_854_845_137_453_85,
            ],
        ),
        5 => (
            &[
                -0.906_179_845_938_664,
                -0.538_469_310_105_683,
                0.0,
                0.538_469_310_105_683,
                0.906_179_845_938_664,
            ],
            &[
                0.236_926_885_056_189_08,
                0.478_628_670_499_366_47,
                0.568_888_888_888_888_9,
                0.478_628_670_499_366_47,
                0.236_926_885_056_189_08,
            ],
        ),
        _ => return legendre_newton(points),
    };
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// Newton iteration on the Legendre polynomial for rules beyond the
/// tabulated ones.
fn legendre_newton(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out.reverse();
    out
}
