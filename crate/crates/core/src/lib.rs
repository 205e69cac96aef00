//! Truncated Fourier transforms of CARMA processes sampled on randomised
//! non-equidistant grids: model, drivers, grids, Euler simulation, trapezoid
//! estimators, and a Monte Carlo harness checking the asymptotic laws.

pub mod cli;
pub mod driver;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod linalg;
pub mod mc;
pub mod model;
pub mod simulate;

pub use driver::{DriverSpec, RngStream};
pub use error::{CarmaError, Result};
pub use fourier::{theoretical_product_mean, truncated_ft, FtSample, KFormula};
pub use grid::{FineGrid, ObservationGrid};
pub use mc::{run_mc, MCConfig, MCReport};
pub use model::{CarmaSpec, LimitKind, LimitLaw, Statistic};
pub use simulate::{simulate_path, FinePath, SamplePath};

/// Lowercase hex SHA-256 of `bytes`.
pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
