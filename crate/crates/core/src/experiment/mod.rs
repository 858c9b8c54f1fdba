//! Robust field estimation over a sensor network.
//!
//! Agents at random locations each measure a spatial field at their own
//! position, with occasional gross outliers. A graph-structured Gaussian
//! prior couples neighbors and a Huber data term absorbs outliers; the MAP
//! estimate is an instance of the network problem solved by [`crate::djam`].

pub mod commands;
pub mod config;
pub mod harness;
pub mod instance;

pub use config::{ExperimentConfig, NoiseConfig, Topology};
pub use harness::{
    block_averages, monte_carlo, prepare, relative_error_series, run_trials, AggregateTrace, Algorithm, Prepared,
    TraceColumns, TraceSink,
};
pub use instance::{generate_instance, instance_losses, network_objective, precision_matrix, FieldInstance};
