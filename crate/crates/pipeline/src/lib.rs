//! Scan, fit, validate and report stages around the `btzone` numerics.

pub mod analysis;
pub mod config;
pub mod dataset;
pub mod error;
pub mod report;
pub mod scan;

pub use config::{Method, ScanConfig};
pub use error::{PipelineError, Result};
