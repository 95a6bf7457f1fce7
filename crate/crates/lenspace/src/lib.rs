//! Length distances on planar domains, the functionals attached to them, and
//! experiment harnesses for sequential convergence checks.
//!
//! The crate is organised around one abstraction: a [`oracle::DistanceOracle`]
//! answers metric queries `d(x, y)` on a planar domain. Computable instances
//! are the Euclidean baseline, scaled Euclidean metrics, and grid shortest-path
//! solvers for distances induced by a conformal weight `phi(x) |v|` on an open
//! rectangle ([`solver::DistanceSolver`]). On top of the oracle interface sit
//!
//! * [`length`]: partition-supremum curve length, constant-speed
//!   reparameterization, geodesic-defect measurement;
//! * [`functionals`]: the energy `J_d`, the Lipschitz indicator `F_d`,
//!   inf-convolution and the McShane representation gap;
//! * [`gamma`]: sequential convergence certificates for the three
//!   functionals along metric families, with the constructive recovery
//!   devices (piecewise-geodesic interpolation, localized Dirac measures);
//! * [`counterexample`]: a weight family with a collapsing cheap strip whose
//!   induced distances converge to a limit that is not a length distance.
//!
//! Weight fields are selected at runtime through the name-keyed
//! [`fields::WeightRegistry`], so experiment configs can swap metric families
//! without code changes.

pub mod config;
pub mod counterexample;
pub mod error;
pub mod experiment;
pub mod fields;
pub mod functionals;
pub mod gamma;
pub mod geom;
pub mod length;
pub mod oracle;
mod parallel;
pub mod report;
pub mod sampling;
pub mod solver;
pub mod tolerances;

pub use error::{Error, Result};
pub use geom::{Curve, Point, Rect};
pub use oracle::DistanceOracle;
