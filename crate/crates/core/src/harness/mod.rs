//! Configuration, stage drivers, reports and the command implementations
//! behind the `restray` binary.

pub mod commands;
pub mod config;
pub mod pipeline;
pub mod report;
pub mod verify;

pub use config::PipelineConfig;
pub use report::{ConvergenceRow, Metric, ReconstructionReport};
pub use verify::{run_verify, Check, VerifyReport};
