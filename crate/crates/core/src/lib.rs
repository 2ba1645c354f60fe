//! Numerical laboratory for nonlocal operators with nonsymmetric jumping
//! kernels.
//!
//! The operator is `-L u(x) = 2 PV int (u(x) - u(y)) K(x, y) dy` with the
//! associated form `E(u, v) = 2 int int (u(x) - u(y)) v(x) K(x, y) dy dx`,
//! split as `E = E^{K_s} + E^{K_a}` along `K = K_s + K_a`.

pub mod algebra;
pub mod assumptions;
pub mod discretize;
pub mod estimates;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod mosco;
pub mod quadrature;
pub mod random;
pub mod scenario;
pub mod solve;

pub use geometry::Point;
pub use kernels::{c_alpha_norm, Kernel, KernelError, KernelSpec, TimeKernel};
pub use quadrature::{PolarRule, QuadratureError};
pub use discretize::{AssemblyOptions, DiscreteForm, Grid};
pub use scenario::{Scenario, ScenarioError, Summary};

/// Crate version, written into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
