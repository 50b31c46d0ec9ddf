//! Chorin-Temam projection for unsteady Stokes flow on Taylor-Hood P2/P1
//! elements, with three a posteriori estimators of the time error and the
//! machinery to measure their effectivity against a manufactured solution.
//!
//! ```
//! use ctstokes::experiment::{parse_config, run_experiment};
//!
//! let config = parse_config("lambda = 1\nT = 0.2\ndt = 0.1\nnx = 4\nny = 4", &[]).unwrap();
//! let rows = run_experiment(&config).unwrap();
//! assert_eq!(rows.len(), 2);
//! let last = rows.last().unwrap();
//! assert_eq!(last.error_total, last.error_grad_sq + last.error_dual_sq);
//! assert!(last.est2 > 0.0 && last.eff2.is_finite());
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod experiment;
pub mod fem;
pub mod linalg;
pub mod manufactured;
pub mod mesh;
pub mod scheme;
pub mod verify;

pub use error::{Error, Result};
