//! Data budgeting for tabular classification.
//!
//! Given a small pilot sample of a dataset, estimate two things: the
//! saturating performance a strong learner reaches with plenty of data, and
//! how many rows are needed to get within 1% of it. Pilot samples are
//! summarised as learning curves by repeated random splitting; those curves
//! are either extrapolated with a saturating power law or mapped to the two
//! targets by meta-models trained across many datasets.
//!
//! Module map:
//!
//! - [`tabular`]: CSV loading, encoding, eligibility, sampling, synthetic data.
//! - [`learners`]: CART forests, linear and logistic regression, metrics.
//! - [`curves`]: pilot learning curves and benchmark ground truth.
//! - [`powerlaw`]: the dataset-independent extrapolation baseline.
//! - [`budgeter`]: featurisation, bins and the meta-learned predictors.
//! - [`evalharness`]: name clustering, cluster-level bootstrap, scoring.

pub mod budgeter;
pub mod curves;
pub mod error;
pub mod evalharness;
pub mod learners;
pub mod par;
pub mod powerlaw;
pub mod seed;
pub mod tabular;

pub use error::{Error, Result};

/// Version tag written into every persisted model, record and report.
pub const FORMAT_VERSION: u32 = 1;
