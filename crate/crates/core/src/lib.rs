//! Geometry of the `(t, x)`-conformal deformation of the Berwald-Moór metric
//! on the 1-jet space `J¹(ℝ, Mⁿ)`.
//!
//! Closed-form evaluation of the metric, spray, nonlinear and Cartan
//! connections, torsions, curvatures, Einstein-like equations and the
//! stress-energy d-tensor, together with a finite-difference oracle that
//! recomputes each object from its definition, a geodesic integrator and a
//! command-line driver.

pub mod cli;
pub mod connection;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod geodesic;
pub mod geometry;
pub mod oracle;

pub use error::{GeometryError, Result};
pub use geometry::{GeometryConfig, JetPoint};
