//! Library side of the `genbound` command: the Gaussian sweep with CSV and
//! SVG output, randomized verification suites, and discrete bound reports.

pub mod discrete;
pub mod error;
pub mod svg;
pub mod sweep;
pub mod verify;

pub use error::{CliError, Result};
