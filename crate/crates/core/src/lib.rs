//! Crop-and-concatenate augmentation for multichannel time series, with the
//! preprocessing and reference training harness needed to exercise it.
//!
//! The crate is organized around four modules:
//!
//! - [`signal`]: trial/dataset containers, soft labels, provenance records,
//!   a deterministic synthetic generator, and binary dataset I/O.
//! - [`preprocess`]: causal Butterworth low-pass filtering and exponential
//!   moving standardization.
//! - [`augment`]: the two crop-and-concatenate variants (spatial and
//!   temporal) plus time masking, Gaussian noise, and cutout baselines.
//! - [`trainer`]: softmax regression on log-variance features trained with
//!   Adam and a cosine schedule, k-fold splitting, vote ensembling, and
//!   model file I/O.
//!
//! Every operation that draws randomness takes an explicit generator, and
//! all generators are seeded; given the same seed the whole pipeline is
//! bit-reproducible.

pub mod augment;
mod error;
pub mod preprocess;
pub mod rng;
pub mod signal;
pub mod trainer;

pub use error::{Error, Result};

// Shared types, re-exported so downstream crates can use `cropcat_core::Trial`
// without spelling out the module path.
pub use augment::{AugConfig, Method};
pub use signal::{AugmentedPair, Dataset, MixAxis, Provenance, SoftLabel, Trial};
pub use trainer::{Metrics, ModelState, TrainConfig};
