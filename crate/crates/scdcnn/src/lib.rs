//! File formats, experiment sweeps and reports around `scdcnn-core`.

pub mod error;
pub mod experiments;
pub mod idx;
pub mod netspec;
pub mod report;
pub mod scdw;

pub use error::{Error, Result};
pub use experiments::{run_experiment, ExperimentConfig, ExperimentId};
pub use report::{emit_report, Format, Report};
