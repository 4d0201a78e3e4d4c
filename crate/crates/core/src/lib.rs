//! Multimodal emotion classification with an attention-pooling head.
//!
//! Speech and text embedding sequences are concatenated along the frame
//! axis, pooled into one vector by a learned softmax attention query, and
//! classified by a small dense stack. The crate also carries the audio
//! preprocessing and augmentation pipeline, the training loop with
//! plateau learning-rate decay and early stopping, macro-F1 metrics and a
//! hard-voting ensemble.

// `!(x > 0.0)` is how validation rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod cli;
pub mod dataio;
pub mod ensemble;
mod error;
pub mod model;
pub mod numerics;
pub mod train;

pub use error::{Error, Result};
