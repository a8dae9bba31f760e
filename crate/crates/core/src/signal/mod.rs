//! Trials, datasets, soft labels, and augmentation provenance.
//!
//! A [`Trial`] is one `channels x timepoints` recording with a hard class
//! label; a [`Dataset`] is a uniformly shaped collection of trials plus the
//! class count and sampling rate. Augmentations produce [`AugmentedPair`]s,
//! which carry a [`SoftLabel`] (a probability vector over classes) and, for
//! crop-and-concatenate outputs, a [`Provenance`] record describing exactly
//! which window was transplanted from which trial.

pub(crate) mod container;
mod synth;

pub use container::{load_dataset, save_dataset, SCHEMA_VERSION};
pub use synth::{generate_synthetic, SUBJECT_POOL};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One multichannel recording with its integer class label.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    /// Samples, `channels x timepoints`, row per channel.
    pub data: Array2<f64>,
    /// Identifier of the recorded subject.
    pub subject_id: u32,
    /// Class index; validated against the dataset's class count.
    pub label: u32,
}

impl Trial {
    /// Builds a trial, rejecting empty shapes and non-finite samples.
    pub fn new(data: Array2<f64>, subject_id: u32, label: u32) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "trial must have at least one channel and one timepoint, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if let Some((idx, _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Format(format!(
                "non-finite sample at channel {} timepoint {}",
                idx.0, idx.1
            )));
        }
        Ok(Trial {
            data,
            subject_id,
            label,
        })
    }

    /// Number of channels (rows).
    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    /// Number of timepoints (columns).
    pub fn timepoints(&self) -> usize {
        self.data.ncols()
    }
}

/// A uniformly shaped collection of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub trials: Vec<Trial>,
    /// Number of classes; labels must lie below it.
    pub num_classes: u32,
    /// Sampling rate of every trial, in hertz.
    pub sample_rate_hz: f64,
    /// On-disk schema version this dataset corresponds to.
    pub schema_version: u32,
}

impl Dataset {
    /// Builds a dataset and checks its invariants.
    pub fn new(trials: Vec<Trial>, num_classes: u32, sample_rate_hz: f64) -> Result<Self> {
        let ds = Dataset {
            trials,
            num_classes,
            sample_rate_hz,
            schema_version: SCHEMA_VERSION,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Checks shape uniformity, label ranges, class count, and sampling rate.
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::Format(format!(
                "num_classes must be at least 2, got {}",
                self.num_classes
            )));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::Format(format!(
                "sample_rate_hz must be positive, got {}",
                self.sample_rate_hz
            )));
        }
        if let Some(first) = self.trials.first() {
            let (c, t) = (first.channels(), first.timepoints());
            for (i, trial) in self.trials.iter().enumerate() {
                if trial.channels() != c || trial.timepoints() != t {
                    return Err(Error::Format(format!(
                        "trial {i} has shape {}x{}, expected {c}x{t}",
                        trial.channels(),
                        trial.timepoints()
                    )));
                }
                if trial.label >= self.num_classes {
                    return Err(Error::Format(format!(
                        "trial {i} label {} out of range (num_classes {})",
                        trial.label, self.num_classes
                    )));
                }
            }
        }
        Ok(())
    }

    /// Shared `(channels, timepoints)` shape, or `None` for an empty dataset.
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.trials.first().map(|t| (t.channels(), t.timepoints()))
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }
}

/// A probability vector over classes.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLabel {
    probs: Vec<f64>,
}

impl SoftLabel {
    /// Wraps a probability vector, requiring entries in `[0, 1]` that sum to
    /// one within `1e-9`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "soft label needs at least 2 classes, got {}",
                probs.len()
            )));
        }
        for (k, &p) in probs.iter().enumerate() {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidArgument(format!(
                    "soft label entry {k} is {p}, expected a probability"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "soft label sums to {sum}, expected 1"
            )));
        }
        Ok(SoftLabel { probs })
    }

    /// Probability mass one on `label`, zero elsewhere.
    pub fn one_hot(label: u32, num_classes: u32) -> Result<Self> {
        if num_classes < 2 || label >= num_classes {
            return Err(Error::InvalidArgument(format!(
                "label {label} out of range (num_classes {num_classes})"
            )));
        }
        let mut probs = vec![0.0; num_classes as usize];
        probs[label as usize] = 1.0;
        Ok(SoftLabel { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_classes(&self) -> usize {
        self.probs.len()
    }

    /// Index of the largest probability; exact ties resolve to the lowest
    /// class index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = k;
            }
        }
        best
    }
}

/// Axis a crop-and-concatenate window runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixAxis {
    /// Window over channel rows.
    Spatial,
    /// Window over time columns.
    Temporal,
}

/// Record of one crop-and-concatenate mix: which trials were combined and
/// exactly which index window came from the material trial.
///
/// `window_start..=window_end` are inclusive indices on the mixed axis, and
/// `realized_ratio` is exactly `(window_end - window_start + 1) / axis_len`.
/// Because window bounds round outward by up to half an index on each side,
/// the realized ratio can exceed the sampled ratio by up to `2/axis_len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Position of the base trial in the augmented batch.
    pub base_index: usize,
    /// Position of the material trial in the augmented batch.
    pub material_index: usize,
    pub axis: MixAxis,
    pub window_start: usize,
    pub window_end: usize,
    pub realized_ratio: f64,
}

/// An augmented trial: data, its fused soft label, and provenance when the
/// output actually mixes two trials. Pass-through outputs (no eligible
/// material, empty window, non-mixing methods) carry `provenance: None`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPair {
    pub data: Array2<f64>,
    pub label: SoftLabel,
    pub provenance: Option<Provenance>,
}
