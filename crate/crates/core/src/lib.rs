//! Fairness-aware classification over chunked data streams.
//!
//! A stream is consumed chunk by chunk under the prequential protocol: the
//! current model predicts a chunk, the predictions are scored for accuracy and
//! statistical parity, and the chunk (corrected by massaging or re-weighting
//! when discrimination is detected) is then used to update the model according
//! to one of the adaptation strategies.

pub mod classifiers;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod fairness;
pub mod generator;
pub mod parity;
pub mod report;
pub mod schema;
pub mod strategy;
pub mod stream;

pub use error::{Error, Result};
