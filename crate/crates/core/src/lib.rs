//! Two-stage maximum score estimation of preference parameters in binary
//! choice models where a payoff-relevant outcome is uncertain at the time of
//! choice.
//!
//! The agent chooses `d = 1{z'β1 + G(x)'β2 > ε}` with `Med(ε | z, x) = 0`,
//! where `G(x) = E(y | x, d=1) - E(y | x, d=0)` is the expected outcome
//! difference. The estimator replaces `G` with a first-stage fit `Ĝ`
//! (OLS or kernel regression) and maximizes the score objective on a grid.

pub mod data;
pub mod error;
pub mod first_stage;
pub mod io;
pub mod kernels;
pub mod maxscore;
pub mod montecarlo;
pub mod simulation;

pub use data::{Dataset, Dims, Observation};
pub use error::{Error, Result};
