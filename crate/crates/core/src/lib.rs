//! Relation classification with a bidirectional RNN over position-indicator
//! annotated sentences, max-pooled into a sentence vector, plus a
//! convolutional baseline with position features.
//!
//! Everything is implemented from scratch on `f64`: forward passes, exact
//! backpropagation through time, SGD, the official-style macro-F1 scorer, the
//! context-length and semantic-contribution analyses, and the KBP37 dataset
//! refinement pipeline.

pub mod embedding;
pub mod encoders;
pub mod evaluation;
pub mod numeric;
pub mod synthetic;
pub mod text;
pub mod training;

pub use numeric::{GradCheckReport, Matrix, NumericError};
