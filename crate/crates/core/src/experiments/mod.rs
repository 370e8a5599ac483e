//! Seeded Monte Carlo experiments on random matrices, random simplices and
//! random polytopes.

pub mod config;
pub mod mc;
pub mod rng;
pub mod stats;
pub mod table;
pub mod toolkit;
pub mod trials;

pub use config::{Experiment, ExperimentConfig};
pub use rng::RngStream;
pub use stats::{ColumnSummary, SlopeFit};
pub use table::{summarize, Summary, TrialRecord, TrialTable};
pub use trials::{config_comments, run_experiment};
