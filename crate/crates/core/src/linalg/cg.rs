//! Preconditioned conjugate gradients for symmetric positive (semi-)definite
//! systems, with optional deflation of the constant vector.

use super::csr::{axpy, dot, norm2, SparseMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
}

/// Kernel handling for singular systems.
#[derive(Debug, Clone, Copy)]
pub enum Nullspace<'a> {
    None,
    /// Kernel spanned by the constant vector. The solution is shifted to
    /// zero weighted mean `Σ wᵢ xᵢ = 0` with the supplied weights.
    Constants(&'a [f64]),
}

#[derive(Debug, Clone, Copy)]
pub struct CgOptions<'a> {
    pub tol: f64,
    pub max_iterations: usize,
    pub preconditioner: Preconditioner,
    pub nullspace: Nullspace<'a>,
    /// Largest admissible `|Σ bᵢ| / (√n ‖b‖)` for singular systems.
    pub consistency_tol: f64,
}

impl Default for CgOptions<'_> {
    fn default() -> Self {
        CgOptions {
            tol: 1e-10,
            max_iterations: 10_000,
            preconditioner: Preconditioner::Jacobi,
            nullspace: Nullspace::None,
            consistency_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖`, recomputed from the returned solution.
    pub final_residual: f64,
    pub converged: bool,
}

impl SolveReport {
    pub fn trivial() -> Self {
        SolveReport {
            iterations: 0,
            final_residual: 0.0,
            converged: true,
        }
    }
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Shifts `x` by a constant so that `Σ wᵢ xᵢ = 0`.
pub fn remove_weighted_mean(x: &mut [f64], weights: &[f64]) {
    let mean = dot(x, weights) / weights.iter().sum::<f64>();
    x.iter_mut().for_each(|v| *v -= mean);
}

pub(crate) fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return norm2(x);
    }
    let mut r = vec![0.0; b.len()];
    a.mul_into(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    norm2(&r) / bnorm
}

/// Solves `A x = b`. Non-convergence is reported in the [`SolveReport`]
/// rather than as an error; the caller decides what to do with it.
pub fn cg_solve(a: &SparseMatrix, b: &[f64], opts: &CgOptions) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.ncols(),
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }

    let deflate = match opts.nullspace {
        Nullspace::None => None,
        Nullspace::Constants(w) => {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: w.len(),
                });
            }
            Some(w)
        }
    };

    let mut rhs = b.to_vec();
    if deflate.is_some() {
        let bnorm = norm2(b);
        if bnorm > 0.0 {
            let ratio = b.iter().sum::<f64>().abs() / ((n as f64).sqrt() * bnorm);
            if ratio > opts.consistency_tol {
                return Err(Error::InconsistentSingular { ratio });
            }
        }
        remove_mean(&mut rhs);
    }

    let bnorm = norm2(&rhs);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], SolveReport::trivial()));
    }

    let inv_diag: Option<Vec<f64>> = match opts.preconditioner {
        Preconditioner::None => None,
        Preconditioner::Jacobi => Some(
            a.diagonal()
                .iter()
                .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        ),
    };
    let precondition = |r: &[f64], z: &mut [f64]| {
        match &inv_diag {
            Some(inv) => z
                .iter_mut()
                .zip(r.iter().zip(inv))
                .for_each(|(zi, (ri, di))| *zi = ri * di),
            None => z.copy_from_slice(r),
        }
        if deflate.is_some() {
            remove_mean(z);
        }
    };

    let mut x = vec![0.0; n];
    let mut r = rhs.clone();
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        a.mul_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        iterations += 1;
        if norm2(&r) <= opts.tol * bnorm {
            converged = true;
            break;
        }
        precondition(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        p.iter_mut()
            .zip(&z)
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }

    if let Some(w) = deflate {
        remove_weighted_mean(&mut x, w);
    }
    let final_residual = relative_residual(a, &x, &rhs);
    Ok((
        x,
        SolveReport {
            iterations,
            final_residual,
            converged: converged && final_residual <= opts.tol * 10.0,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_in_one_iteration() {
        let b = vec![3.0, -1.0, 0.5, 2.0];
        let (x, rep) = cg_solve(&SparseMatrix::identity(4), &b, &CgOptions::default()).unwrap();
        assert_eq!(x, b);
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
    }

    #[test]
    fn two_by_two() {
        let a = SparseMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let opts = CgOptions {
            preconditioner: Preconditioner::None,
            ..Default::default()
        };
        let (x, rep) = cg_solve(&a, &[1.0, 2.0], &opts).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-14);
        assert!(rep.converged && rep.iterations <= 2);
    }

    fn neumann_1d() -> SparseMatrix {
        SparseMatrix::from_dense(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 1.0],
        ])
    }

    #[test]
    fn neumann_laplacian_zero_mean() {
        // (1, 0, -1) solves the system and already has zero mean.
        let w = [1.0, 1.0, 1.0];
        let opts = CgOptions {
            nullspace: Nullspace::Constants(&w),
            ..Default::default()
        };
        let (x, rep) = cg_solve(&neumann_1d(), &[1.0, 0.0, -1.0], &opts).unwrap();
        assert!(rep.converged);
        let expected = [1.0, 0.0, -1.0];
        for (xi, ei) in x.iter().zip(expected) {
            assert!((xi - ei).abs() < 1e-12, "{x:?}");
        }
        assert!(x.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn weighted_mean_is_removed() {
        let w = [0.5, 1.0, 0.5];
        let opts = CgOptions {
            nullspace: Nullspace::Constants(&w),
            ..Default::default()
        };
        let (x, _) = cg_solve(&neumann_1d(), &[2.0, -1.0, -1.0], &opts).unwrap();
        assert!(dot(&x, &w).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_singular_system_is_rejected() {
        let w = [1.0; 3];
        let opts = CgOptions {
            nullspace: Nullspace::Constants(&w),
            ..Default::default()
        };
        assert!(matches!(
            cg_solve(&neumann_1d(), &[1.0, 1.0, 1.0], &opts),
            Err(Error::InconsistentSingular { .. })
        ));
    }

    #[test]
    fn non_convergence_is_flagged() {
        let n = 50;
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            rows[i][i] = 2.0;
            if i > 0 {
                rows[i][i - 1] = -1.0;
                rows[i - 1][i] = -1.0;
            }
        }
        let a = SparseMatrix::from_dense(&rows);
        let opts = CgOptions {
            max_iterations: 3,
            ..Default::default()
        };
        let (_, rep) = cg_solve(&a, &vec![1.0; n], &opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 3);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let (x, rep) = cg_solve(&neumann_1d(), &[0.0; 3], &CgOptions::default()).unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(rep.iterations, 0);
    }
}
