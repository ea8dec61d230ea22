//! Individual treatment effect (ITE) estimation for randomized experiments
//! with a binary response: two-model and modified-outcome reductions over
//! from-scratch base learners, a KL-divergence uplift random forest, and a
//! top-k targeting evaluation harness.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod learners;
pub mod matrix;
pub mod meta;
pub mod method;
pub mod persist;
pub mod report;
pub mod rng;
pub mod uplift_forest;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use matrix::Matrix;
