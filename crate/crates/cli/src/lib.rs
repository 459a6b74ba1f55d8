//! Figure sweeps, oracle validation and Monte Carlo runs on top of `superres-core`.

pub mod dataset;
pub mod error;
pub mod figures;
pub mod scenario;
pub mod simulate;
pub mod validate;

pub use dataset::{Dataset, Row};
pub use error::{CliError, CliResult};

/// Recorded in every emitted file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
