//! File formats, reporting and the command line for `lagshap-core`.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod io;
pub mod output;
pub mod pipeline;
pub mod report;
pub mod selftest;
pub mod svg;

pub use config::PipelineConfig;
pub use error::{AppError, AppResult};
pub use pipeline::run_pipeline;
pub use report::ReportBundle;
