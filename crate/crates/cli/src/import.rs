//! CSV-to-dataset conversion: one trial per file, one channel per row, one
//! timepoint per column. The class label is encoded in the filename as
//! `label<digits>`; an optional `subject<digits>` marker assigns the trial to
//! a subject (default 0). Files are processed in sorted filename order so the
//! resulting dataset is independent of directory enumeration order.

use std::path::Path;

use cropcat_core::{Dataset, Trial};

use crate::CliError;

#[derive(Debug)]
pub struct ParsedName {
    pub label: u32,
    pub subject: u32,
}

/// Extract the `label<digits>` (required) and `subject<digits>` (optional,
/// default 0) markers from a file stem.
pub fn parse_trial_name(stem: &str) -> Result<ParsedName, CliError> {
    let label = find_marker(stem, "label").ok_or_else(|| {
        CliError::Data(format!(
            "filename {stem:?} has no label<digits> marker; expected names like trial_label2_subject1.csv"
        ))
    })?;
    let subject = find_marker(stem, "subject").unwrap_or(0);
    Ok(ParsedName { label, subject })
}

/// Find `marker` immediately followed by at least one ASCII digit and return
/// the digit run parsed as u32. Case-sensitive; the first occurrence wins.
fn find_marker(stem: &str, marker: &str) -> Option<u32> {
    let mut search_from = 0;
    while let Some(pos) = stem[search_from..].find(marker) {
        let digits_start = search_from + pos + marker.len();
        let digits: String = stem[digits_start..]
            .chars()
            .take_while(|c| c.is_ascii_digit())
            .collect();
        if !digits.is_empty() {
            // overflowing digit runs are a malformed name, not a dataset
            return digits.parse().ok();
        }
        search_from = digits_start;
    }
    None
}

/// Read one headerless CSV file of C rows x T columns into row-major samples.
pub fn read_trial_csv(path: &Path) -> Result<(usize, usize, Vec<f64>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("failed to open {}: {e}", path.display())))?;

    let mut samples = Vec::new();
    let mut channels = 0usize;
    let mut timepoints = 0usize;
    for (row_index, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| CliError::Data(format!("{}: bad CSV row: {e}", path.display())))?;
        if row_index == 0 {
            timepoints = record.len();
            if timepoints == 0 {
                return Err(CliError::Data(format!(
                    "{}: first row has no columns",
                    path.display()
                )));
            }
        } else if record.len() != timepoints {
            return Err(CliError::Data(format!(
                "{}: row {} has {} columns, expected {}",
                path.display(),
                row_index,
                record.len(),
                timepoints
            )));
        }
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: row {row_index} column {col}: {field:?} is not a number",
                    path.display()
                ))
            })?;
            samples.push(value);
        }
        channels += 1;
    }
    if channels == 0 {
        return Err(CliError::Data(format!(
            "{}: empty CSV file",
            path.display()
        )));
    }
    Ok((channels, timepoints, samples))
}

/// Import every `.csv` file in `dir` into one dataset. All trials must share
/// one channel/timepoint shape and all labels must be < `classes`.
pub fn import_dir(dir: &Path, classes: u32, sample_rate_hz: f64) -> Result<Dataset, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("failed to read directory {}: {e}", dir.display())))?;
    let mut csv_paths = Vec::new();
    for entry in entries {
        let entry =
            entry.map_err(|e| CliError::Io(format!("failed to read {}: {e}", dir.display())))?;
        let path = entry.path();
        if path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"))
        {
            csv_paths.push(path);
        }
    }
    if csv_paths.is_empty() {
        return Err(CliError::Data(format!(
            "no .csv files found in {}",
            dir.display()
        )));
    }
    csv_paths.sort();

    let mut trials = Vec::with_capacity(csv_paths.len());
    let mut shape: Option<(usize, usize)> = None;
    for path in &csv_paths {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let name = parse_trial_name(&stem)?;
        if name.label >= classes {
            return Err(CliError::Data(format!(
                "{}: label {} out of range for {} classes",
                path.display(),
                name.label,
                classes
            )));
        }
        let (channels, timepoints, samples) = read_trial_csv(path)?;
        match shape {
            None => shape = Some((channels, timepoints)),
            Some((c, t)) if (c, t) != (channels, timepoints) => {
                return Err(CliError::Data(format!(
                    "{}: shape {}x{} differs from first trial's {}x{}",
                    path.display(),
                    channels,
                    timepoints,
                    c,
                    t
                )));
            }
            Some(_) => {}
        }
        let data = ndarray::Array2::from_shape_vec((channels, timepoints), samples)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        trials.push(Trial::new(data, name.subject, name.label)?);
    }
    Ok(Dataset::new(trials, classes, sample_rate_hz)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marker_parsing_finds_label_and_subject() {
        let parsed = parse_trial_name("run3_subject12_label4_take2").unwrap();
        assert_eq!(parsed.label, 4);
        assert_eq!(parsed.subject, 12);
    }

    #[test]
    fn marker_parsing_defaults_subject_to_zero() {
        let parsed = parse_trial_name("trial_label0").unwrap();
        assert_eq!(parsed.label, 0);
        assert_eq!(parsed.subject, 0);
    }

    #[test]
    fn marker_parsing_requires_digits_after_label() {
        assert!(parse_trial_name("label_only_text").is_err());
        // a bare marker followed later by a digit-suffixed one still parses
        let parsed = parse_trial_name("labelx_label7").unwrap();
        assert_eq!(parsed.label, 7);
    }

    #[test]
    fn missing_label_is_a_data_error() {
        let err = parse_trial_name("subject3_run1").unwrap_err();
        assert_eq!(err.code(), 3);
    }
}
