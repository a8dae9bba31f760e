//! Binary model files.
//!
//! Layout, little-endian:
//!
//! ```text
//! magic            4 bytes, "CCML"
//! schema_version   u32, currently 1
//! num_classes      u32 (K)
//! num_features     u32 (F)
//! weights          K * F f64, row-major
//! bias             K f64
//! ```
//!
//! Only the checkpointed parameters are stored; optimizer state and the loss
//! history are training-time artifacts and do not survive a round trip.

use std::path::Path;

use ndarray::{Array1, Array2};

use super::ModelState;
use crate::signal::container::{write_atomically, Reader};
use crate::{Error, Result};

/// On-disk model schema version written and accepted by this crate.
pub const MODEL_SCHEMA_VERSION: u32 = 1;

const MAGIC: &[u8; 4] = b"CCML";
const HEADER_LEN: usize = 4 + 4 * 3;

/// Serializes a model's parameters. The write is atomic, so a failed save
/// never leaves a partial file behind.
pub fn save_model(state: &ModelState, path: &Path) -> Result<()> {
    let k = state.num_classes() as usize;
    let f = state.num_features();
    let mut bytes = Vec::with_capacity(HEADER_LEN + (k * f + k) * 8);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&MODEL_SCHEMA_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(k as u32).to_le_bytes());
    bytes.extend_from_slice(&(f as u32).to_le_bytes());
    for &w in state.weights.iter() {
        bytes.extend_from_slice(&w.to_le_bytes());
    }
    for &b in state.bias.iter() {
        bytes.extend_from_slice(&b.to_le_bytes());
    }
    write_atomically(path, &bytes)
}

/// Deserializes model parameters into a fresh (untrained-state) model:
/// optimizer moments zeroed, no loss history, checkpoint equal to the
/// loaded parameters.
pub fn load_model(path: &Path) -> Result<ModelState> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "missing header: file holds {} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    let mut r = Reader::new(&bytes);
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let version = r.u32("schema_version")?;
    if version != MODEL_SCHEMA_VERSION {
        return Err(Error::Format(format!(
            "unsupported schema_version {version}, expected {MODEL_SCHEMA_VERSION}"
        )));
    }
    let k = r.u32("num_classes")? as usize;
    let f = r.u32("num_features")? as usize;
    if k < 2 || f == 0 {
        return Err(Error::Format(format!(
            "implausible model dimensions: {k} classes, {f} features"
        )));
    }

    let mut read_f64 = |field: &str| -> Result<f64> {
        let raw = r.take(8, field)?;
        let value = f64::from_le_bytes(raw.try_into().unwrap());
        if !value.is_finite() {
            return Err(Error::Format(format!(
                "non-finite value in field `{field}`"
            )));
        }
        Ok(value)
    };
    let mut weights = Array2::zeros((k, f));
    for slot in weights.iter_mut() {
        *slot = read_f64("weights")?;
    }
    let mut bias = Array1::zeros(k);
    for slot in bias.iter_mut() {
        *slot = read_f64("bias")?;
    }
    if !r.at_end() {
        return Err(Error::Format(format!(
            "{} trailing bytes after the bias",
            r.remaining()
        )));
    }

    let mut state = ModelState::new(k as u32, f)?;
    state.weights.assign(&weights);
    state.bias.assign(&bias);
    state.best_weights.assign(&weights);
    state.best_bias.assign(&bias);
    Ok(state)
}
