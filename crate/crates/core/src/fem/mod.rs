//! Taylor-Hood (P2 velocity / P1 pressure) discretization.

mod assembly;
mod element;
mod integrate;
mod quadrature;
mod space;

pub use assembly::{assemble_system, fold_dirichlet, FemSystem, ASSEMBLY_DEGREE};
pub use element::{p2_gradients_at, p2_nodes, p2_values, ElementGeometry};
pub use integrate::{integrate_field, squared, squared_matrix, PointContext};
pub use quadrature::{gauss_legendre_unit, make_quadrature, QuadratureRule};
pub use space::{PressureSpace, VelocitySpace};
