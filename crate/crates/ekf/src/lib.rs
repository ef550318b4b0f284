//! File formats, pipeline stages, and the command-line front end for the
//! knowledge-graph toolkit. The algorithms live in [`ekf_core`].

pub mod config;
pub mod error;
pub mod files;
pub mod pipeline;
pub mod records;

pub use config::PipelineConfig;
pub use ekf_core;
pub use error::{EkfError, Result};
pub use files::{file_provider, write_vectors};
pub use pipeline::{run_stage, Stage};
