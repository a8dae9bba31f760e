//! Data augmentation: the two crop-and-concatenate variants and three
//! reference baselines (time masking, Gaussian noise, cutout).
//!
//! Crop-and-concatenate replaces a contiguous window of the base trial (a
//! block of channel rows for the spatial variant, of time columns for the
//! temporal one) with the same window of a material trial recorded from the
//! same subject but labeled with a different class. The fused label splits
//! probability mass between the two classes in proportion to the fraction of
//! the axis actually replaced, so a mix that swaps 30% of the columns moves
//! 30% of the label mass to the material class.
//!
//! Randomized ops take an explicit generator. [`augment_batch`] draws, per
//! base trial in batch order: the material pick (when candidates exist),
//! then the window center, then the window ratio. Baseline methods draw per
//! their own contracts. Batch-level parallelism is deliberately absent; the
//! fixed draw order is what makes runs reproducible.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{uniform_f64, uniform_index};
use crate::signal::{AugmentedPair, MixAxis, Provenance, SoftLabel, Trial};
use crate::{Error, Result};

/// Augmentation method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Pass trials through untouched (labels become one-hot).
    None,
    /// Replace a window of channel rows from a same-subject trial.
    CropcatSpatial,
    /// Replace a window of time columns from a same-subject trial.
    CropcatTemporal,
    /// Zero a contiguous block of time columns.
    TimeMask,
    /// Add scaled white Gaussian noise.
    GaussianNoise,
    /// Zero a few rectangular regions.
    Cutout,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::CropcatSpatial => "cropcat_spatial",
            Method::CropcatTemporal => "cropcat_temporal",
            Method::TimeMask => "time_mask",
            Method::GaussianNoise => "gaussian_noise",
            Method::Cutout => "cutout",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Method::None),
            "cropcat_spatial" => Ok(Method::CropcatSpatial),
            "cropcat_temporal" => Ok(Method::CropcatTemporal),
            "time_mask" => Ok(Method::TimeMask),
            "gaussian_noise" => Ok(Method::GaussianNoise),
            "cutout" => Ok(Method::Cutout),
            other => Err(Error::InvalidArgument(format!(
                "unknown augmentation method `{other}`"
            ))),
        }
    }
}

/// Full augmentation configuration. Only the fields relevant to the selected
/// method are consulted, but all of them are validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugConfig {
    pub method: Method,
    /// Upper bound of the sampled window ratio; at most 0.5 so the base
    /// trial keeps the label majority.
    pub lambda: f64,
    /// Fraction of time columns a time mask zeroes.
    pub mask_ratio: f64,
    /// Standard deviation multiplier for Gaussian noise.
    pub noise_scale: f64,
    /// Fraction of channels covered by one cutout region.
    pub cutout_channel_frac: f64,
    /// Fraction of timepoints covered by one cutout region.
    pub cutout_time_frac: f64,
    /// Number of cutout regions.
    pub cutout_regions: usize,
    /// Seed for the augmentation stream.
    pub seed: u64,
}

impl AugConfig {
    /// Defaults for a method: `lambda` 0.125, mask ratio 0.1, noise scale
    /// 0.05, cutout fractions 0.25 x 0.5 with 3 regions, seed 0.
    pub fn new(method: Method) -> Self {
        AugConfig {
            method,
            lambda: 0.125,
            mask_ratio: 0.1,
            noise_scale: 0.05,
            cutout_channel_frac: 0.25,
            cutout_time_frac: 0.5,
            cutout_regions: 3,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && (0.0..=0.5).contains(&self.lambda)) {
            return Err(Error::InvalidArgument(format!(
                "lambda must lie in [0, 0.5], got {}",
                self.lambda
            )));
        }
        if !(self.mask_ratio.is_finite() && 0.0 < self.mask_ratio && self.mask_ratio < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "mask_ratio must lie in (0, 1), got {}",
                self.mask_ratio
            )));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise_scale must be finite and non-negative, got {}",
                self.noise_scale
            )));
        }
        for (name, frac) in [
            ("cutout_channel_frac", self.cutout_channel_frac),
            ("cutout_time_frac", self.cutout_time_frac),
        ] {
            if !(frac.is_finite() && 0.0 < frac && frac <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in (0, 1], got {frac}"
                )));
            }
        }
        if self.cutout_regions == 0 {
            return Err(Error::InvalidArgument(
                "cutout_regions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Draws a window center, uniform over `[0, axis_len)`. Consumes exactly one
/// draw.
pub fn sample_center<R: RngCore>(axis_len: usize, rng: &mut R) -> Result<usize> {
    if axis_len == 0 {
        return Err(Error::InvalidArgument("axis_len must be at least 1".into()));
    }
    Ok(uniform_index(rng, axis_len))
}

/// Draws a window ratio, uniform over `[0, lambda)`. Consumes exactly one
/// draw; `lambda = 0` degenerates to exactly 0.
pub fn sample_ratio<R: RngCore>(lambda: f64, rng: &mut R) -> Result<f64> {
    if !(lambda.is_finite() && (0.0..=0.5).contains(&lambda)) {
        return Err(Error::InvalidArgument(format!(
            "lambda must lie in [0, 0.5], got {lambda}"
        )));
    }
    Ok(lambda * uniform_f64(rng))
}

/// Picks a material trial for `base_index`: uniform over batch members with
/// the same subject and a different label. Returns `None` when no candidate
/// exists (and then consumes no draw).
pub fn select_material<R: RngCore>(
    batch: &[&Trial],
    base_index: usize,
    rng: &mut R,
) -> Option<usize> {
    assert!(base_index < batch.len(), "base_index out of range");
    let base = batch[base_index];
    let candidates: Vec<usize> = (0..batch.len())
        .filter(|&j| {
            j != base_index
                && batch[j].subject_id == base.subject_id
                && batch[j].label != base.label
        })
        .collect();
    if candidates.is_empty() {
        None
    } else {
        Some(candidates[uniform_index(rng, candidates.len())])
    }
}

/// Turns a sampled `(center, ratio)` into inclusive window bounds on an axis
/// of length `axis_len`.
///
/// The half-width is `ratio * axis_len / 2`; bounds round half away from
/// zero and clamp to the axis. When `ratio * axis_len < 1` the window is
/// empty and `None` is returned. The returned ratio is exactly
/// `(end - start + 1) / axis_len`; since both edges round outward it can
/// exceed the sampled `ratio` by up to `2/axis_len` (short odd axes can even
/// round up to the whole axis), and clamping can pull it below.
pub fn clamp_window(center: usize, ratio: f64, axis_len: usize) -> Option<(usize, usize, f64)> {
    debug_assert!(axis_len >= 1);
    debug_assert!(center < axis_len);
    debug_assert!((0.0..=1.0).contains(&ratio));
    if ratio * (axis_len as f64) < 1.0 {
        return None;
    }
    let half = ratio * axis_len as f64 / 2.0;
    let start = (center as f64 - half).round().max(0.0) as usize;
    let end = ((center as f64 + half).round() as usize).min(axis_len - 1);
    let realized = (end - start + 1) as f64 / axis_len as f64;
    Some((start, end, realized))
}

/// Fuses two one-hot labels: the material class receives `ratio` of the
/// probability mass, the base class the rest.
///
/// `ratio` is the realized window fraction, which clamping can push slightly
/// past 0.5, so anything in `[0, 1]` is accepted. The two entries are
/// computed as `1 - ratio` and its exact complement, which makes the vector
/// sum to exactly 1.0 in floating point.
pub fn mix_labels(y_base: u32, y_material: u32, ratio: f64, num_classes: u32) -> Result<SoftLabel> {
    if y_base == y_material {
        return Err(Error::InvalidArgument(format!(
            "base and material labels are both {y_base}; mixing needs distinct classes"
        )));
    }
    if y_base >= num_classes || y_material >= num_classes {
        return Err(Error::InvalidArgument(format!(
            "labels {y_base}/{y_material} out of range (num_classes {num_classes})"
        )));
    }
    if !(ratio.is_finite() && (0.0..=1.0).contains(&ratio)) {
        return Err(Error::InvalidArgument(format!(
            "mix ratio must lie in [0, 1], got {ratio}"
        )));
    }
    let base_mass = 1.0 - ratio;
    let material_mass = 1.0 - base_mass;
    let mut probs = vec![0.0; num_classes as usize];
    probs[y_base as usize] = base_mass;
    probs[y_material as usize] = material_mass;
    SoftLabel::new(probs)
}

/// Crop-and-concatenate over channel rows: rows in the clamped window come
/// from `material`, the rest from `base`.
pub fn cropcat_spatial(
    base: &Trial,
    material: &Trial,
    center: usize,
    ratio: f64,
    num_classes: u32,
) -> Result<AugmentedPair> {
    cropcat(base, material, center, ratio, num_classes, MixAxis::Spatial)
}

/// Crop-and-concatenate over time columns: columns in the clamped window
/// come from `material`, the rest from `base`.
pub fn cropcat_temporal(
    base: &Trial,
    material: &Trial,
    center: usize,
    ratio: f64,
    num_classes: u32,
) -> Result<AugmentedPair> {
    cropcat(
        base,
        material,
        center,
        ratio,
        num_classes,
        MixAxis::Temporal,
    )
}

fn cropcat(
    base: &Trial,
    material: &Trial,
    center: usize,
    ratio: f64,
    num_classes: u32,
    axis: MixAxis,
) -> Result<AugmentedPair> {
    if base.data.dim() != material.data.dim() {
        return Err(Error::InvalidArgument(format!(
            "base shape {:?} differs from material shape {:?}",
            base.data.dim(),
            material.data.dim()
        )));
    }
    if base.label == material.label {
        return Err(Error::InvalidArgument(format!(
            "base and material share label {}; crop-and-concatenate needs distinct classes",
            base.label
        )));
    }
    if !(ratio.is_finite() && (0.0..=0.5).contains(&ratio)) {
        return Err(Error::InvalidArgument(format!(
            "sampled ratio must lie in [0, 0.5], got {ratio}"
        )));
    }
    let axis_len = match axis {
        MixAxis::Spatial => base.channels(),
        MixAxis::Temporal => base.timepoints(),
    };
    if center >= axis_len {
        return Err(Error::InvalidArgument(format!(
            "center {center} out of range (axis length {axis_len})"
        )));
    }

    let window = clamp_window(center, ratio, axis_len);
    let Some((start, end, realized)) = window else {
        return Ok(AugmentedPair {
            data: base.data.clone(),
            label: SoftLabel::one_hot(base.label, num_classes)?,
            provenance: None,
        });
    };

    let mut data = base.data.clone();
    match axis {
        MixAxis::Spatial => {
            for c in start..=end {
                for t in 0..base.timepoints() {
                    data[[c, t]] = material.data[[c, t]];
                }
            }
        }
        MixAxis::Temporal => {
            for c in 0..base.channels() {
                for t in start..=end {
                    data[[c, t]] = material.data[[c, t]];
                }
            }
        }
    }
    Ok(AugmentedPair {
        data,
        label: mix_labels(base.label, material.label, realized, num_classes)?,
        // batch positions are unknown at this level; augment_batch fills them
        provenance: Some(Provenance {
            base_index: 0,
            material_index: 0,
            axis,
            window_start: start,
            window_end: end,
            realized_ratio: realized,
        }),
    })
}

/// Zeroes `round(ratio * timepoints)` consecutive time columns at a uniform
/// start position. A window that rounds to zero length consumes no draw and
/// returns the trial unchanged.
pub fn time_mask<R: RngCore>(
    trial: &Trial,
    ratio: f64,
    num_classes: u32,
    rng: &mut R,
) -> Result<AugmentedPair> {
    if !(ratio.is_finite() && 0.0 < ratio && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "mask_ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let timepoints = trial.timepoints();
    let len = (ratio * timepoints as f64).round() as usize;
    let mut data = trial.data.clone();
    if len > 0 {
        let start = uniform_index(rng, timepoints - len + 1);
        for c in 0..trial.channels() {
            for t in start..start + len {
                data[[c, t]] = 0.0;
            }
        }
    }
    Ok(AugmentedPair {
        data,
        label: SoftLabel::one_hot(trial.label, num_classes)?,
        provenance: None,
    })
}

/// Adds `scale`-scaled standard Gaussian noise to every sample. Draws one
/// normal variate per sample in row-major (channel-major) order.
pub fn gaussian_noise<R: RngCore>(
    trial: &Trial,
    scale: f64,
    num_classes: u32,
    rng: &mut R,
) -> Result<AugmentedPair> {
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise_scale must be finite and non-negative, got {scale}"
        )));
    }
    let mut data = trial.data.clone();
    for v in data.iter_mut() {
        let n: f64 = StandardNormal.sample(rng);
        *v += scale * n;
    }
    Ok(AugmentedPair {
        data,
        label: SoftLabel::one_hot(trial.label, num_classes)?,
        provenance: None,
    })
}

/// Zeroes `regions` rectangles of `round(channel_frac * channels)` rows by
/// `round(time_frac * timepoints)` columns. Each rectangle is centered at a
/// uniform position (two draws: channel then time) and shifted inward so it
/// fits entirely on the trial; rectangles may overlap. Rectangles that round
/// to zero size consume no draws.
pub fn cutout<R: RngCore>(
    trial: &Trial,
    channel_frac: f64,
    time_frac: f64,
    regions: usize,
    num_classes: u32,
    rng: &mut R,
) -> Result<AugmentedPair> {
    for (name, frac) in [("channel_frac", channel_frac), ("time_frac", time_frac)] {
        if !(frac.is_finite() && 0.0 < frac && frac <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "{name} must lie in (0, 1], got {frac}"
            )));
        }
    }
    if regions == 0 {
        return Err(Error::InvalidArgument(
            "cutout_regions must be at least 1".into(),
        ));
    }
    let (channels, timepoints) = (trial.channels(), trial.timepoints());
    let height = (channel_frac * channels as f64).round() as usize;
    let width = (time_frac * timepoints as f64).round() as usize;
    let mut data = trial.data.clone();
    if height > 0 && width > 0 {
        for _ in 0..regions {
            let c_center = uniform_index(rng, channels);
            let t_center = uniform_index(rng, timepoints);
            let c_start = c_center.saturating_sub(height / 2).min(channels - height);
            let t_start = t_center.saturating_sub(width / 2).min(timepoints - width);
            for c in c_start..c_start + height {
                for t in t_start..t_start + width {
                    data[[c, t]] = 0.0;
                }
            }
        }
    }
    Ok(AugmentedPair {
        data,
        label: SoftLabel::one_hot(trial.label, num_classes)?,
        provenance: None,
    })
}

/// Augments every trial of a batch with the configured method.
///
/// Output position `i` corresponds to input position `i`. Crop-and-
/// concatenate entries carry provenance with batch positions filled in; when
/// a base trial has no eligible material (no same-subject different-label
/// member) it passes through unchanged with a one-hot label and no
/// provenance, as do empty-window mixes.
pub fn augment_batch<R: RngCore>(
    batch: &[&Trial],
    config: &AugConfig,
    num_classes: u32,
    rng: &mut R,
) -> Result<Vec<AugmentedPair>> {
    config.validate()?;
    if let Some(first) = batch.first() {
        for (i, trial) in batch.iter().enumerate() {
            if trial.data.dim() != first.data.dim() {
                return Err(Error::InvalidArgument(format!(
                    "batch trial {i} has shape {:?}, expected {:?}",
                    trial.data.dim(),
                    first.data.dim()
                )));
            }
            if trial.label >= num_classes {
                return Err(Error::InvalidArgument(format!(
                    "batch trial {i} label {} out of range (num_classes {num_classes})",
                    trial.label
                )));
            }
        }
    }

    let mut out = Vec::with_capacity(batch.len());
    for (i, base) in batch.iter().enumerate() {
        let pair = match config.method {
            Method::None => AugmentedPair {
                data: base.data.clone(),
                label: SoftLabel::one_hot(base.label, num_classes)?,
                provenance: None,
            },
            Method::CropcatSpatial | Method::CropcatTemporal => {
                match select_material(batch, i, rng) {
                    None => AugmentedPair {
                        data: base.data.clone(),
                        label: SoftLabel::one_hot(base.label, num_classes)?,
                        provenance: None,
                    },
                    Some(j) => {
                        let material = batch[j];
                        let axis_len = if config.method == Method::CropcatSpatial {
                            base.channels()
                        } else {
                            base.timepoints()
                        };
                        let center = sample_center(axis_len, rng)?;
                        let ratio = sample_ratio(config.lambda, rng)?;
                        let mut pair = if config.method == Method::CropcatSpatial {
                            cropcat_spatial(base, material, center, ratio, num_classes)?
                        } else {
                            cropcat_temporal(base, material, center, ratio, num_classes)?
                        };
                        if let Some(p) = pair.provenance.as_mut() {
                            p.base_index = i;
                            p.material_index = j;
                        }
                        pair
                    }
                }
            }
            Method::TimeMask => time_mask(base, config.mask_ratio, num_classes, rng)?,
            Method::GaussianNoise => gaussian_noise(base, config.noise_scale, num_classes, rng)?,
            Method::Cutout => cutout(
                base,
                config.cutout_channel_frac,
                config.cutout_time_frac,
                config.cutout_regions,
                num_classes,
                rng,
            )?,
        };
        out.push(pair);
    }
    Ok(out)
}
