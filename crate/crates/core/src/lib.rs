//! Spuriosity ranking and last-layer retraining toolkit.
//!
//! The crate turns an open-vocabulary detector's per-image confidence into a
//! within-class spuriosity ranking, selects training subsets by rank, retrains
//! a linear classification head on frozen backbone features, and evaluates the
//! result under rank-stratified slices, masked foreground/background noise,
//! and restricted-class OOD sets.
//!
//! Stages are pure and cache-backed: scoring and feature extraction both
//! persist to resumable on-disk caches keyed by backend identity, and every
//! stochastic draw is keyed by `(seed, image_id)` so outputs are independent
//! of iteration order and parallelism.

pub mod detect;
pub mod error;
pub mod eval;
pub mod features;
pub mod linear;
pub mod manifest;
pub mod perturb;
pub mod pipeline;
pub mod ranking;
pub mod seeding;
pub mod stats;
pub mod synthetic;
pub mod tensor;

pub use error::{Result, SpurankError};
pub use manifest::{DatasetManifest, ImageRecord, Split};
