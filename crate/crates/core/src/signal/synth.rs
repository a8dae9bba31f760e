//! Deterministic synthetic dataset generation.
//!
//! Trials are class-tagged sinusoids in noise, designed so that the
//! per-channel variance profile separates the classes: class `k` drives
//! channel `c` with amplitude `sep * (1 + 0.5 * sin(2*pi*k/K + pi*c/C))` at a
//! class-and-channel specific frequency, plus white Gaussian noise. Larger
//! `class_separation` widens the gap between class variance profiles; larger
//! `noise_sd` blurs it.

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::{seeded_rng, uniform_f64};
use crate::{Dataset, Error, Result, Trial};

/// Subjects are assigned round-robin from this fixed pool size.
pub const SUBJECT_POOL: u32 = 3;

/// Sampling rate of generated datasets, in hertz.
const SAMPLE_RATE_HZ: f64 = 250.0;

/// Generates `n_per_class * num_classes` trials of shape
/// `channels x timepoints`, grouped by class and bit-reproducible for a given
/// seed.
///
/// Samples are rounded to 32-bit float precision so a generated dataset
/// survives dataset-file round trips unchanged.
pub fn generate_synthetic(
    n_per_class: usize,
    channels: usize,
    timepoints: usize,
    num_classes: u32,
    class_separation: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_per_class == 0 || channels == 0 || timepoints == 0 {
        return Err(Error::InvalidArgument(
            "n_per_class, channels, and timepoints must all be at least 1".into(),
        ));
    }
    if num_classes < 2 {
        return Err(Error::InvalidArgument(format!(
            "num_classes must be at least 2, got {num_classes}"
        )));
    }
    if !(class_separation.is_finite() && class_separation >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "class_separation must be finite and non-negative, got {class_separation}"
        )));
    }
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise_sd must be finite and non-negative, got {noise_sd}"
        )));
    }

    let mut rng = seeded_rng(seed);
    let mut trials = Vec::with_capacity(n_per_class * num_classes as usize);
    let k_total = num_classes as usize;
    for class in 0..k_total {
        for _ in 0..n_per_class {
            let subject_id = (trials.len() as u32) % SUBJECT_POOL;
            let mut data = Array2::zeros((channels, timepoints));
            for c in 0..channels {
                let amp = class_separation
                    * (1.0
                        + 0.5
                            * (2.0 * std::f64::consts::PI * class as f64 / k_total as f64
                                + std::f64::consts::PI * c as f64 / channels as f64)
                                .sin());
                let freq = tone_frequency(class, c);
                let phase = uniform_f64(&mut rng) * 2.0 * std::f64::consts::PI;
                for t in 0..timepoints {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    let x = amp
                        * (2.0 * std::f64::consts::PI * freq * t as f64 / SAMPLE_RATE_HZ + phase)
                            .sin()
                        + noise_sd * noise;
                    data[[c, t]] = x as f32 as f64;
                }
            }
            trials.push(Trial::new(data, subject_id, class as u32)?);
        }
    }
    Dataset::new(trials, num_classes, SAMPLE_RATE_HZ)
}

/// Class-and-channel tone frequency, kept well below the Nyquist rate by
/// wrapping. For small class and channel counts this is `8 + 4k + 2c` Hz.
fn tone_frequency(class: usize, channel: usize) -> f64 {
    let span = 0.45 * SAMPLE_RATE_HZ - 6.0;
    6.0 + (2.0 + 4.0 * class as f64 + 2.0 * channel as f64) % span
}
