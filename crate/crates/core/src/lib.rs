// Negated float comparisons like `!(t > 0.0)` are deliberate: NaN
// parameters must fail validation, which `t <= 0.0` would not catch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Simulation and verification engine for dynamical simple random walks
//! on Z^2.
//!
//! A dynamical walk re-randomizes each step at the arrival times of an
//! independent rate-one Poisson clock, so at every fixed time it looks
//! like plain simple random walk. This crate samples that process,
//! scans time intervals exactly and event-by-event for times at which
//! the walk never returns to the origin, and estimates the return and
//! decorrelation probabilities that control when such exceptional times
//! exist, together with an exact lattice Dirichlet oracle grounding the
//! Monte Carlo estimates.

pub mod analysis;
pub mod container;
pub mod dirichlet;
pub mod error;
pub mod estimators;
pub mod events;
pub mod indicator;
pub mod point;
pub mod prefix;
pub mod process;
pub mod rng;
pub mod schedule;

pub use error::{Error, Result};
pub use indicator::PiecewiseIndicator;
pub use point::{Direction, LatticePoint, ORIGIN};
pub use prefix::PrefixState;
pub use process::{sample_realization, DynamicalWalkRealization, RefreshEvent, RefreshTimeline};
pub use schedule::{Annulus, Schedule};
