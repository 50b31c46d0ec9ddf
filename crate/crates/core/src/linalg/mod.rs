//! Sparse storage and solvers for the symmetric systems of the scheme.

mod cg;
mod cholesky;
mod csr;

pub use cg::{cg_solve, remove_weighted_mean, CgOptions, Nullspace, Preconditioner, SolveReport};
pub use cholesky::{reverse_cuthill_mckee, EnvelopeCholesky};
pub use csr::{axpy, dot, norm2, SparseMatrix, TripletBuilder};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Factor once, then direct solves.
    #[default]
    Cholesky,
    /// Jacobi-preconditioned conjugate gradients.
    Cg,
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "cholesky" => Ok(SolverKind::Cholesky),
            "cg" => Ok(SolverKind::Cg),
            other => Err(format!(
                "unknown solver `{other}` (expected cholesky or cg)"
            )),
        }
    }
}

/// A symmetric positive definite operator prepared for repeated solves.
#[derive(Debug, Clone)]
pub struct SpdSolver {
    matrix: SparseMatrix,
    factor: Option<EnvelopeCholesky>,
    tol: f64,
    max_iterations: usize,
}

impl SpdSolver {
    pub fn new(
        matrix: SparseMatrix,
        kind: SolverKind,
        tol: f64,
        max_iterations: usize,
    ) -> Result<Self> {
        let factor = match kind {
            SolverKind::Cholesky => Some(EnvelopeCholesky::factor(&matrix)?),
            SolverKind::Cg => None,
        };
        Ok(SpdSolver {
            matrix,
            factor,
            tol,
            max_iterations,
        })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Solves and checks the relative residual against the tolerance.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        let (x, report) = match &self.factor {
            Some(f) => {
                let x = f.solve(b)?;
                let final_residual = cg::relative_residual(&self.matrix, &x, b);
                let report = SolveReport {
                    iterations: 1,
                    final_residual,
                    converged: final_residual <= self.tol,
                };
                (x, report)
            }
            None => {
                let opts = CgOptions {
                    tol: self.tol,
                    max_iterations: self.max_iterations,
                    ..Default::default()
                };
                cg_solve(&self.matrix, b, &opts)?
            }
        };
        if !report.converged {
            return Err(Error::NotConverged {
                iterations: report.iterations,
                residual: report.final_residual,
            });
        }
        Ok((x, report))
    }
}
