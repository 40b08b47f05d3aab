//! Perceived-welfare-optimal allocation of a fixed expected harm or benefit
//! when individuals distort probabilities through a Prelec weighting curve.
//!
//! Harm is minimized by concentrating risk on a pool at equal probability,
//! with at most one individual at a small residual level. Benefit is
//! maximized by certainty for a few, at most one individual in between, and
//! an even spread of small chances for everyone else.
//!
//! ```
//! use perceived_welfare::{AllocationProblem, Sense, WeightingParams};
//! use perceived_welfare::harm::solve_harm_homogeneous;
//!
//! let w = WeightingParams::new(0.5, 1.0)?;
//! let problem = AllocationProblem::new(10, 1.0, Sense::Harm, w)?;
//! let best = solve_harm_homogeneous(&problem)?;
//! assert!((best.p()[0] - 0.5).abs() < 1e-6);
//! # Ok::<(), perceived_welfare::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benefit;
pub mod cli;
pub mod error;
pub mod harm;
pub mod model;
pub mod oracle;
pub mod search;
pub mod weighting;

pub use error::{Error, Result};
pub use model::{
    check_feasible, perceived_welfare, AllocationProblem, Distribution, FeasibilityReport, Method,
    PriorityProfile, Sense, SolveResult, Structure,
};
pub use weighting::{WeightingLandmarks, WeightingParams};
