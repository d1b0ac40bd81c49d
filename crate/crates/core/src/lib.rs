//! Expected generalization error of randomized learners and the family of
//! information-measure upper bounds built on the average joint distribution
//! of hypothesis and training sample.
//!
//! - [`measures`]: exact divergences and Wasserstein-1 on finite supports.
//! - [`avgjoint`]: discrete learners, average joints and exact generalization error.
//! - [`gaussian`]: the two-sample Gaussian mean-estimation example, by quadrature and Monte Carlo.
//! - [`bounds`]: assembly of every bound from divergence values and loss constants.
//! - [`instances`]: seeded random instances for property checks.

pub mod error;
pub mod avgjoint;
pub mod bounds;
pub mod gaussian;
pub mod instances;
pub mod measures;

pub use error::{Error, Result};
