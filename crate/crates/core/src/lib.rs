//! Two-box/three-crop face ensemble for gender classification.
//!
//! A detected face box is widened by a margin, split into overlapping left,
//! middle and right crops, each crop is classified independently, and the
//! three scores are fused into one label. The crate also carries the video
//! loop, a throughput benchmark, dataset split tooling and an accuracy
//! evaluator.

pub mod boxcrop;
pub mod cli;
pub mod datakit;
pub mod ensemble;
pub mod error;
pub mod infer;
pub mod pipeline;
pub mod score;

pub use boxcrop::{BoxTriple, CropSet, FaceBox, Frame, Point};
pub use ensemble::{Decision, VoteMode};
pub use error::{Error, Result};
pub use infer::{ClassifierHandle, ModelManifest};
pub use score::{Gender, GenderScore};
