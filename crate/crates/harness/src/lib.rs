//! Experiment runner for the `geql` command: builds task artifacts, runs the
//! agent grid over seeded trials in parallel, and writes CSV results with a
//! text summary.

pub mod config;
pub mod output;
pub mod profile;
pub mod run;
pub mod stats;
pub mod summary;
pub mod tasks;

pub use config::{AgentSpec, ExperimentSpec, Task};
pub use run::{run_experiment, ResultTable};
pub use summary::{summarize, Summary};
