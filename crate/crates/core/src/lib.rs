//! Exact-arithmetic constructions of area-preserving torus maps obtained as limits of
//! conjugated rotations, with certificate-producing checks of their dynamical properties.

pub mod analysis;
pub mod certificate;
pub mod dd;
pub mod ergodic;
pub mod error;
pub mod rational;
pub mod scenarios;
pub mod schedule;
pub mod torusmaps;
pub mod special;
mod par;

pub use certificate::{all_pass, Certificate, Quantity, Rigor};
pub use error::{Error, Result};
pub use rational::{Interval, Rational};
pub use schedule::{alpha_of, build_schedule, build_stage, validate_schedule, GrowthPolicy, Schedule, StageParams, Variant};
pub use scenarios::{RunConfig, RunReport};
