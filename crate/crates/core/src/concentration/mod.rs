//! Sub-Weibull calculus, martingale deviation levels and their Monte Carlo checks.

pub mod calculus;
pub mod martingale;
pub mod suite;
pub mod thresholds;
pub mod validate;

pub use martingale::{IncrementClass, MartingaleGen};
pub use suite::{run_validation_suite, Prop, ValidationRow};
pub use validate::{McConfig, MeanEstimate, ViolationEstimate};
