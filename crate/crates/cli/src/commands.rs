//! Implementations of the six subcommands. Each validates its arguments,
//! runs the corresponding pipeline stage, writes outputs atomically, and
//! records a manifest next to the primary output.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use cropcat_core::augment::augment_batch;
use cropcat_core::preprocess::{preprocess_dataset, FilterSpec};
use cropcat_core::rng::seeded_rng;
use cropcat_core::signal::{generate_synthetic, load_dataset, save_dataset};
use cropcat_core::trainer::{evaluate_models, load_model, save_model, train_folds};
use cropcat_core::{AugConfig, Dataset, Method, ModelState, TrainConfig, Trial};

use crate::manifest::{manifest_path_for, write_atomic, write_manifest, ManifestTimer};
use crate::{
    AugmentArgs, CliError, EvaluateArgs, GenerateArgs, ImportArgs, PreprocessArgs, TrainArgs,
};

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let timer = ManifestTimer::start("generate");
    let dataset = generate_synthetic(
        args.per_class,
        args.channels,
        args.timepoints,
        args.classes,
        args.sep,
        args.noise_sd,
        args.seed,
    )?;
    save_dataset(&dataset, &args.out)?;
    log::info!(
        "generated {} trials ({} classes, {}x{}) into {}",
        dataset.len(),
        dataset.num_classes,
        args.channels,
        args.timepoints,
        args.out.display()
    );
    let manifest = timer.finish(args, Some(args.seed), &[], &[&args.out])?;
    write_manifest(&manifest_path_for(&args.out), &manifest)
}

pub fn preprocess(args: &PreprocessArgs) -> Result<(), CliError> {
    let timer = ManifestTimer::start("preprocess");
    let dataset = load_dataset(&args.input)?;
    let spec = FilterSpec::new(args.cutoff, args.order, dataset.sample_rate_hz)?;
    let processed = preprocess_dataset(&dataset, &spec, args.alpha, args.eps)?;
    save_dataset(&processed, &args.out)?;
    log::info!(
        "filtered and standardized {} trials into {}",
        processed.len(),
        args.out.display()
    );
    let manifest = timer.finish(args, None, &[&args.input], &[&args.out])?;
    write_manifest(&manifest_path_for(&args.out), &manifest)
}

fn parse_method(name: &str) -> Result<Method, CliError> {
    Method::from_str(name).map_err(|e| CliError::Data(e.to_string()))
}

/// The augmentation flags a command resolved, ready to become an [`AugConfig`].
struct MethodSpec<'a> {
    method: &'a str,
    lambda: f64,
    mask_ratio: f64,
    noise_scale: f64,
    cutout_channel_frac: f64,
    cutout_time_frac: f64,
    cutout_regions: usize,
    seed: u64,
}

impl MethodSpec<'_> {
    fn to_config(&self) -> Result<AugConfig, CliError> {
        let mut config = AugConfig::new(parse_method(self.method)?);
        config.lambda = self.lambda;
        config.mask_ratio = self.mask_ratio;
        config.noise_scale = self.noise_scale;
        config.cutout_channel_frac = self.cutout_channel_frac;
        config.cutout_time_frac = self.cutout_time_frac;
        config.cutout_regions = self.cutout_regions;
        config.seed = self.seed;
        config.validate()?;
        Ok(config)
    }
}

impl<'a> From<&'a AugmentArgs> for MethodSpec<'a> {
    fn from(args: &'a AugmentArgs) -> Self {
        MethodSpec {
            method: &args.method,
            lambda: args.lambda,
            mask_ratio: args.mask_ratio,
            noise_scale: args.noise_scale,
            cutout_channel_frac: args.cutout_channel_frac,
            cutout_time_frac: args.cutout_time_frac,
            cutout_regions: args.cutout_regions,
            seed: args.seed,
        }
    }
}

impl<'a> From<&'a TrainArgs> for MethodSpec<'a> {
    fn from(args: &'a TrainArgs) -> Self {
        MethodSpec {
            method: &args.method,
            lambda: args.lambda,
            mask_ratio: args.mask_ratio,
            noise_scale: args.noise_scale,
            cutout_channel_frac: args.cutout_channel_frac,
            cutout_time_frac: args.cutout_time_frac,
            cutout_regions: args.cutout_regions,
            seed: args.seed,
        }
    }
}

impl<'a> From<&'a EvaluateArgs> for MethodSpec<'a> {
    fn from(args: &'a EvaluateArgs) -> Self {
        // baseline knobs are irrelevant to evaluation's mixed-input pass;
        // use the library defaults
        let defaults = AugConfig::new(Method::None);
        MethodSpec {
            method: &args.method,
            lambda: args.lambda,
            mask_ratio: defaults.mask_ratio,
            noise_scale: defaults.noise_scale,
            cutout_channel_frac: defaults.cutout_channel_frac,
            cutout_time_frac: defaults.cutout_time_frac,
            cutout_regions: defaults.cutout_regions,
            seed: args.seed,
        }
    }
}

pub fn augment(args: &AugmentArgs) -> Result<(), CliError> {
    let timer = ManifestTimer::start("augment");
    let config = MethodSpec::from(args).to_config()?;
    let dataset = load_dataset(&args.input)?;

    // The whole dataset is augmented as a single batch so material selection
    // can see every same-subject trial.
    let batch: Vec<&Trial> = dataset.trials.iter().collect();
    let mut rng = seeded_rng(config.seed);
    let pairs = augment_batch(&batch, &config, dataset.num_classes, &mut rng)?;

    let mut provenance_lines = Vec::new();
    let mut trials = Vec::with_capacity(pairs.len());
    for (index, pair) in pairs.iter().enumerate() {
        if args.emit_provenance.is_some() {
            let line = serde_json::json!({
                "index": index,
                "label": pair.label.probs(),
                "provenance": pair.provenance,
            });
            provenance_lines.push(line.to_string());
        }
        // The container stores hard labels; the soft label's majority class
        // is the right hard label because window ratios stay at or below
        // one half of the axis.
        trials.push(Trial::new(
            pair.data.clone(),
            dataset.trials[index].subject_id,
            pair.label.argmax() as u32,
        )?);
    }
    let augmented = Dataset::new(trials, dataset.num_classes, dataset.sample_rate_hz)?;
    save_dataset(&augmented, &args.out)?;

    let mut outputs: Vec<&Path> = vec![&args.out];
    if let Some(jsonl) = &args.emit_provenance {
        let mut body = provenance_lines.join("\n");
        body.push('\n');
        write_atomic(jsonl, body.as_bytes())?;
        outputs.push(jsonl);
    }
    log::info!(
        "augmented {} trials with {} into {}",
        augmented.len(),
        config.method.name(),
        args.out.display()
    );
    let manifest = timer.finish(args, Some(args.seed), &[&args.input], &outputs)?;
    write_manifest(&manifest_path_for(&args.out), &manifest)
}

fn train_config_from(args: &TrainArgs) -> Result<TrainConfig, CliError> {
    let aug = MethodSpec::from(args).to_config()?;
    let config = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch_size,
        lr0: args.lr0,
        eta_min: args.eta_min,
        folds: args.folds,
        aug,
        seed: args.seed,
    };
    config.validate()?;
    Ok(config)
}

pub fn train(args: &TrainArgs) -> Result<(), CliError> {
    let timer = ManifestTimer::start("train");
    let config = train_config_from(args)?;
    let dataset = load_dataset(&args.data)?;
    let holdout = match &args.holdout {
        Some(path) => Some(load_dataset(path)?),
        None => None,
    };

    let models = train_folds(&dataset, &config)?;

    std::fs::create_dir_all(&args.out).map_err(|e| {
        CliError::Io(format!(
            "failed to create output directory {}: {e}",
            args.out.display()
        ))
    })?;
    let mut model_paths = Vec::with_capacity(models.len());
    for (fold, model) in models.iter().enumerate() {
        let path = args.out.join(format!("fold_{fold}.ccml"));
        save_model(model, &path)?;
        model_paths.push(path);
    }

    let mut outputs: Vec<PathBuf> = model_paths.clone();
    if let Some(holdout) = &holdout {
        let metrics = evaluate_models(&models, holdout, &config)?;
        let json = serde_json::to_vec_pretty(&metrics)
            .map_err(|e| CliError::Data(format!("failed to serialize metrics: {e}")))?;
        let metrics_path = args.out.join("metrics.json");
        write_atomic(&metrics_path, &json)?;
        log::info!(
            "holdout vote accuracy {:.4} (std {:.4})",
            metrics.accuracy,
            metrics.std
        );
        outputs.push(metrics_path);
    }

    let mut inputs: Vec<&Path> = vec![&args.data];
    if let Some(path) = &args.holdout {
        inputs.push(path);
    }
    let output_refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    log::info!(
        "trained {} fold models into {}",
        models.len(),
        args.out.display()
    );
    let manifest = timer.finish(args, Some(args.seed), &inputs, &output_refs)?;
    write_manifest(&args.out.join("manifest.json"), &manifest)
}

/// Load every `.ccml` file in `dir`, sorted by filename.
fn load_model_dir(dir: &Path) -> Result<(Vec<ModelState>, Vec<PathBuf>), CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("failed to read directory {}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry =
            entry.map_err(|e| CliError::Io(format!("failed to read {}: {e}", dir.display())))?;
        let path = entry.path();
        if path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("ccml"))
        {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(CliError::Data(format!(
            "no .ccml model files found in {}",
            dir.display()
        )));
    }
    paths.sort();
    let mut models = Vec::with_capacity(paths.len());
    for path in &paths {
        models.push(load_model(path)?);
    }
    Ok((models, paths))
}

pub fn evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let timer = ManifestTimer::start("evaluate");
    let aug = MethodSpec::from(args).to_config()?;
    let mut config = TrainConfig::new(aug);
    config.seed = args.seed;
    config.validate()?;

    let (models, model_paths) = load_model_dir(&args.models)?;
    let dataset = load_dataset(&args.data)?;
    let metrics = evaluate_models(&models, &dataset, &config)?;
    let json = serde_json::to_vec_pretty(&metrics)
        .map_err(|e| CliError::Data(format!("failed to serialize metrics: {e}")))?;
    write_atomic(&args.report, &json)?;
    log::info!(
        "ensemble of {} models: vote accuracy {:.4} on {}",
        models.len(),
        metrics.accuracy,
        args.data.display()
    );

    let mut inputs: Vec<&Path> = vec![&args.data];
    for path in &model_paths {
        inputs.push(path);
    }
    let manifest = timer.finish(args, Some(args.seed), &inputs, &[&args.report])?;
    write_manifest(&manifest_path_for(&args.report), &manifest)
}

pub fn import(args: &ImportArgs) -> Result<(), CliError> {
    let timer = ManifestTimer::start("import");
    let dataset = crate::import::import_dir(&args.dir, args.classes, args.rate)?;
    save_dataset(&dataset, &args.out)?;
    log::info!(
        "imported {} trials from {} into {}",
        dataset.len(),
        args.dir.display(),
        args.out.display()
    );
    let manifest = timer.finish(args, None, &[&args.dir], &[&args.out])?;
    write_manifest(&manifest_path_for(&args.out), &manifest)
}
