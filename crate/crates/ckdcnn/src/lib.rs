//! CT kidney image classification toolkit.
//!
//! Everything is built from first principles on a dense [`tensor::Tensor`]:
//! a three-stage convolutional classifier with hand-derived backprop
//! ([`nn`]), dataset ingestion and deterministic splits ([`imgdata`]),
//! SMOTE class balancing ([`smote`]), the full evaluation suite
//! ([`metrics`]), Grad-CAM explanations ([`gradcam`]), and binary
//! checkpointing ([`checkpoint`]).
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability, or the `ckdcnn` binary for the end-to-end pipeline.

pub mod checkpoint;
pub mod cli;
pub mod error;
pub mod gradcam;
pub mod imgdata;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod seeds;
pub mod smote;
pub mod tensor;

pub use error::{Error, Result};
