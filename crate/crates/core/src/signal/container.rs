//! Binary dataset files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic            4 bytes, "CCAT"
//! schema_version   u32, currently 1
//! trial_count      u32
//! channels         u32
//! timepoints       u32
//! num_classes      u32
//! sample_rate_hz   f32
//! trials           trial_count records:
//!     subject_id   u32
//!     label        u32
//!     data         channels * timepoints f32, row-major (channel-major)
//! ```
//!
//! Samples are stored as 32-bit floats; in memory they widen to `f64`, so a
//! load-save cycle reproduces a file byte for byte, and save-load reproduces
//! any dataset whose samples carry at most 32-bit precision (which holds for
//! everything the synthetic generator or a previous load produced).

use std::io::Write;
use std::path::Path;

use crate::{Dataset, Error, Result, Trial};
use ndarray::Array2;

/// On-disk schema version written and accepted by this crate.
pub const SCHEMA_VERSION: u32 = 1;

const MAGIC: &[u8; 4] = b"CCAT";
const HEADER_LEN: usize = 4 + 4 * 5 + 4;

/// Serializes a dataset.
///
/// The write is atomic: see [`write_atomically`].
pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    dataset.validate()?;
    let (channels, timepoints) = dataset.shape().unwrap_or((0, 0));

    let mut bytes =
        Vec::with_capacity(HEADER_LEN + dataset.len() * (8 + channels * timepoints * 4));
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&SCHEMA_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(dataset.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&(channels as u32).to_le_bytes());
    bytes.extend_from_slice(&(timepoints as u32).to_le_bytes());
    bytes.extend_from_slice(&dataset.num_classes.to_le_bytes());
    bytes.extend_from_slice(&(dataset.sample_rate_hz as f32).to_le_bytes());
    for trial in &dataset.trials {
        bytes.extend_from_slice(&trial.subject_id.to_le_bytes());
        bytes.extend_from_slice(&trial.label.to_le_bytes());
        for &x in trial.data.iter() {
            bytes.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }

    write_atomically(path, &bytes)
}

/// Writes to a temporary file in the target directory and renames it over
/// `path` once complete, so failures never leave partial files.
pub(crate) fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Deserializes a dataset, validating every structural invariant.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader::new(&bytes);

    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "missing header: file holds {} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let version = r.u32("schema_version")?;
    if version != SCHEMA_VERSION {
        return Err(Error::Format(format!(
            "unsupported schema_version {version}, expected {SCHEMA_VERSION}"
        )));
    }
    let trial_count = r.u32("trial_count")? as usize;
    let channels = r.u32("channels")? as usize;
    let timepoints = r.u32("timepoints")? as usize;
    let num_classes = r.u32("num_classes")?;
    let sample_rate_hz = f32::from_le_bytes(r.take(4, "sample_rate_hz")?.try_into().unwrap());

    let mut trials = Vec::with_capacity(trial_count);
    for i in 0..trial_count {
        let subject_id = r
            .u32("subject_id")
            .map_err(|_| truncated(i, trial_count, "subject_id"))?;
        let label = r
            .u32("label")
            .map_err(|_| truncated(i, trial_count, "label"))?;
        let mut data = Array2::zeros((channels, timepoints));
        {
            let raw = r
                .take(channels * timepoints * 4, "data")
                .map_err(|_| truncated(i, trial_count, "data"))?;
            for (slot, chunk) in data.iter_mut().zip(raw.chunks_exact(4)) {
                *slot = f32::from_le_bytes(chunk.try_into().unwrap()) as f64;
            }
        }
        trials.push(
            Trial::new(data, subject_id, label)
                .map_err(|e| Error::Format(format!("trial {i}: {e}")))?,
        );
    }
    if !r.at_end() {
        return Err(Error::Format(format!(
            "{} trailing bytes after the last trial",
            r.remaining()
        )));
    }

    let dataset = Dataset {
        trials,
        num_classes,
        sample_rate_hz: sample_rate_hz as f64,
        schema_version: version,
    };
    dataset.validate()?;
    Ok(dataset)
}

fn truncated(index: usize, total: usize, field: &str) -> Error {
    Error::Format(format!(
        "truncated payload: trial {index} of {total} ends inside field `{field}`"
    ))
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format(format!(
                "truncated payload: field `{field}` needs {n} bytes, {} left",
                self.bytes.len() - self.pos
            )));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub(crate) fn u32(&mut self, field: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, field)?.try_into().unwrap()))
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos == self.bytes.len()
    }

    pub(crate) fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}
