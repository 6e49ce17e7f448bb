//! Noteset classification from clinical-style free text: preprocessing,
//! TF-IDF bag-of-words features, from-scratch tree/ensemble/linear
//! classifiers, and evaluation tooling.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod models;
pub mod pipeline;
pub mod preprocess;
pub mod report;
pub mod vectorize;

pub use error::{Error, Result};
