//! Stochastic mirror descent under heavy-tailed gradient noise.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod concentration;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod noise;
pub mod problem;
pub mod rng;
pub mod schedule;
pub mod smd;

pub use error::{Error, Result};
pub use geometry::{bregman, mirror_step, Domain, DualNorm, MirrorSetup, Point, PrimalNorm, Regularizer};
pub use noise::{NoiseClass, NoiseSpec, TailParams};
pub use problem::{Objective, OracleProblem};
pub use schedule::{ScheduleKind, StepSchedule};
pub use smd::{average_iterate, run_smd, run_smd_streaming, RunConfig, RunTrace};
