//! Ultraspherical expansions, the Gamma-ratio fractional operator and
//! numerical verifiers for the associated Hardy-type inequalities.

pub mod error;
pub mod fracop;
pub mod lab;
pub mod quadrature;
pub mod specfun;
pub mod sphere;
pub mod transform;

pub use error::{Error, Result};
pub use fracop::{FracParams, Kernel, Regime};
pub use lab::HardyReport;
pub use specfun::BasisParams;
pub use sphere::SphereField;
pub use transform::CoefficientVector;
