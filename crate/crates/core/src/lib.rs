//! Asynchronous single-neighbor gossip for learning personalized models.
//!
//! `n` agents on a weighted network jointly minimize
//!
//! ```text
//! ½ Σ_{i<j} W_ij ‖θ_i − θ_j‖² + Σ_i f_i(θ_i)
//! ```
//!
//! where each `f_i` is strongly convex with Lipschitz gradient. In every
//! round one edge `(i, j)` is drawn at random; agents `i` and `j` each solve
//! their local problem against their stored copies of their neighbors'
//! models and send the result to each other. No step size or penalty needs
//! tuning.
//!
//! Modules:
//!
//! - [`network`]: the weighted agent graph.
//! - [`losses`]: personal losses and the resolvent solver behind every update.
//! - [`djam`]: the gossip engine, edge scheduling and convergence diagnostics.
//! - [`oracle`]: reference solutions (exact quadratic solve, synchronous Jacobi).
//! - [`admm`]: an edge-activated ADMM baseline with penalty `ρ`.
//! - [`experiment`]: robust field estimation, Monte Carlo harness, CSV output.
//!
//! Runnable walkthroughs live in `examples/`; the `djam` binary drives the
//! field-estimation pipeline from a config file.

pub mod admm;
pub mod djam;
pub mod error;
pub mod experiment;
pub mod losses;
pub mod network;
pub mod oracle;
pub mod rng;

pub use error::{Error, Result};
pub use losses::{HuberFieldLoss, Loss, PersonalLoss, QuadraticLoss};
pub use network::{Edge, Network};

/// Formats a float with 17 significant digits, the CSV convention used
/// throughout the crate.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}
