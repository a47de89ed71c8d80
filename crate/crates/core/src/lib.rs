//! Coordinate descent with coordinate selection driven by marginal decreases.
//!
//! The solver minimizes `F(x) = f(Ax) + sum_i g_i(x_i)` one coordinate at a
//! time. Each candidate coordinate gets a certified lower bound `r_i` on the
//! decrease of `F` that updating it would bring; `max_r` picks the largest
//! bound every iteration and `b_max_r` learns the bounds with an
//! epsilon-greedy bandit that only recomputes all of them once per bin.
//!
//! Modules:
//!
//! * [`sparse`]: column-major sparse data, LIBSVM parsing, synthetic data.
//! * [`problems`]: Lasso, L1 logistic regression and the ridge dual, with
//!   conjugates and coordinate-wise duality gaps.
//! * [`updates`]: the reference safe step and the specialized coordinate
//!   updates, plus a membership check against the reference step.
//! * [`selection`]: uniform, ada_gap, gap_per_epoch, Gauss-Southwell, max_r
//!   and b_max_r.
//! * [`engine`]: the coordinate descent loop, caches, traces.
//! * [`oracle`]: dense brute-force references for testing.

pub mod engine;
mod error;
pub mod oracle;
pub mod problems;
pub mod selection;
pub mod sparse;
pub mod updates;

pub use error::{Error, Result};
