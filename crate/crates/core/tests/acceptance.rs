//! Acceptance suite: one test per numbered criterion, each validating a
//! user-visible guarantee of the crate against an oracle implemented
//! independently in this file (naive loops, closed-form values, or
//! statistical limits). Test names carry the criterion numbers; each test
//! also prints a `[acceptance]` line visible with `--nocapture`.

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};

use cropcat_core::augment::{
    augment_batch, clamp_window, cropcat_spatial, cropcat_temporal, sample_center, sample_ratio,
    AugConfig, Method,
};
use cropcat_core::preprocess::{exp_moving_standardize, lowpass_filter, FilterSpec};
use cropcat_core::rng::seeded_rng;
use cropcat_core::signal::generate_synthetic;
use cropcat_core::trainer::{
    adam_step, cosine_lr, evaluate, extract_features, grad, soft_cross_entropy, ModelState,
    TrainConfig,
};
use cropcat_core::{SoftLabel, Trial};

fn pass(number: u32, name: &str) {
    println!("[acceptance] criterion {number} ({name}): PASS");
}

/// Naive crop-and-concatenate: per-element membership test of the rounded
/// window, label mass from counting replaced indices, identical arithmetic
/// order to keep the comparison bit-exact.
fn oracle_mix(
    base: &Trial,
    material: &Trial,
    center: usize,
    ratio: f64,
    spatial: bool,
) -> (Array2<f64>, Vec<f64>) {
    let axis_len = if spatial {
        base.channels()
    } else {
        base.timepoints()
    };
    let half = ratio * axis_len as f64 / 2.0;
    let in_window = |idx: usize| -> bool {
        if ratio * (axis_len as f64) < 1.0 {
            return false;
        }
        let lo = (center as f64 - half).round().max(0.0);
        let hi = (center as f64 + half).round().min(axis_len as f64 - 1.0);
        (idx as f64) >= lo && (idx as f64) <= hi
    };
    let data = Array2::from_shape_fn(base.data.dim(), |(c, t)| {
        if in_window(if spatial { c } else { t }) {
            material.data[[c, t]]
        } else {
            base.data[[c, t]]
        }
    });
    let replaced = (0..axis_len).filter(|&i| in_window(i)).count();
    let label = if replaced == 0 {
        vec![1.0, 0.0]
    } else {
        let realized = replaced as f64 / axis_len as f64;
        let base_mass = 1.0 - realized;
        vec![base_mass, 1.0 - base_mass]
    };
    (data, label)
}

fn distinct_pair(channels: usize, timepoints: usize) -> (Trial, Trial) {
    let base = Trial::new(
        Array2::from_shape_fn((channels, timepoints), |(c, t)| (c * 131 + t) as f64 + 0.25),
        0,
        0,
    )
    .unwrap();
    let material = Trial::new(
        Array2::from_shape_fn((channels, timepoints), |(c, t)| {
            -((c * 131 + t) as f64) - 7.5
        }),
        0,
        1,
    )
    .unwrap();
    (base, material)
}

#[test]
fn criterion_01_oracle_equivalence() {
    let mut cases = 0usize;
    for channels in 1..=6usize {
        for timepoints in 1..=10usize {
            let (base, material) = distinct_pair(channels, timepoints);
            for step in 0..=5 {
                let ratio = step as f64 * 0.1;
                for spatial in [true, false] {
                    let axis_len = if spatial { channels } else { timepoints };
                    for center in 0..axis_len {
                        let got = if spatial {
                            cropcat_spatial(&base, &material, center, ratio, 2)
                        } else {
                            cropcat_temporal(&base, &material, center, ratio, 2)
                        }
                        .unwrap();
                        let (want_data, want_label) =
                            oracle_mix(&base, &material, center, ratio, spatial);
                        assert_eq!(
                            got.data, want_data,
                            "C={channels} T={timepoints} center={center} r={ratio} spatial={spatial}"
                        );
                        assert_eq!(
                            got.label.probs(),
                            &want_label[..],
                            "C={channels} T={timepoints} center={center} r={ratio} spatial={spatial}"
                        );
                        cases += 1;
                    }
                }
            }
        }
    }
    // 6 ratios x sum over C<=6, T<=10 of (C centers + T centers) = 3240
    assert_eq!(cases, 3240, "sweep size changed");
    pass(1, "oracle equivalence");
}

#[test]
fn criterion_02_label_ratio_exactness() {
    let (base, material) = distinct_pair(5, 40);
    let mut rng = seeded_rng(0xACCE_0002);
    for round in 0..100_000usize {
        let spatial = round % 2 == 0;
        let axis_len = if spatial { 5 } else { 40 };
        let center = sample_center(axis_len, &mut rng).unwrap();
        let ratio = sample_ratio(0.5, &mut rng).unwrap();
        let pair = if spatial {
            cropcat_spatial(&base, &material, center, ratio, 2)
        } else {
            cropcat_temporal(&base, &material, center, ratio, 2)
        }
        .unwrap();
        let probs = pair.label.probs();
        let realized = match &pair.provenance {
            Some(p) => {
                assert_eq!(
                    p.realized_ratio,
                    (p.window_end - p.window_start + 1) as f64 / axis_len as f64
                );
                p.realized_ratio
            }
            None => 0.0,
        };
        assert!(
            (probs[1] - realized).abs() <= 1e-12,
            "round {round}: material mass {} vs realized {realized}",
            probs[1]
        );
        let sum: f64 = probs.iter().sum();
        assert_eq!(sum, 1.0, "round {round}: label sum {sum}");
    }
    pass(2, "label-ratio exactness");
}

#[test]
fn criterion_03_lambda_cap() {
    let mut rng = seeded_rng(0xACCE_0003);
    // the two axis lengths of the motor-imagery geometry the defaults target
    for round in 0..100_000usize {
        let axis_len = if round % 2 == 0 { 22 } else { 1000 };
        let center = sample_center(axis_len, &mut rng).unwrap();
        let ratio = sample_ratio(0.5, &mut rng).unwrap();
        if let Some((_, _, realized)) = clamp_window(center, ratio, axis_len) {
            assert!(
                realized <= 0.5 + 1.0 / axis_len as f64,
                "round {round}: L={axis_len} center={center} r={ratio} realized={realized}"
            );
        }
    }
    assert!(sample_ratio(0.500001, &mut rng).is_err());
    assert!(sample_ratio(0.6, &mut rng).is_err());
    pass(3, "lambda cap");
}

#[test]
fn criterion_04_filter_response() {
    let started = std::time::Instant::now();
    let fs = 250.0;
    let spec = FilterSpec::new(38.0, 4, fs).unwrap();
    let total = 2500usize;
    let tail = 2000usize;
    for freq in [10.0, 38.0, 50.0] {
        let omega = 2.0 * std::f64::consts::PI * freq / fs;
        let tone = Trial::new(
            Array2::from_shape_fn((1, total), |(_, t)| (omega * t as f64).sin()),
            0,
            0,
        )
        .unwrap();
        let filtered = lowpass_filter(&tone, &spec).unwrap();
        // quadrature projection over an integer number of cycles
        let (mut u, mut v) = (0.0, 0.0);
        for t in total - tail..total {
            let y = filtered.data[[0, t]];
            u += y * (omega * t as f64).sin();
            v += y * (omega * t as f64).cos();
        }
        let gain = 2.0 * (u * u + v * v).sqrt() / tail as f64;
        let analog = 1.0 / (1.0 + (freq / 38.0f64).powi(8)).sqrt();
        assert!(
            (gain - analog).abs() <= 0.02 * analog,
            "{freq} Hz: measured {gain}, analog {analog}"
        );
    }
    assert!(
        started.elapsed() < std::time::Duration::from_secs(1),
        "took {:?}",
        started.elapsed()
    );
    pass(4, "filter response");
}

#[test]
fn criterion_05_standardizer() {
    // constant input standardizes to all zeros
    let constant = Trial::new(Array2::from_elem((3, 200), -4.5), 0, 0).unwrap();
    let out = exp_moving_standardize(&constant, 1e-3, 1e-4).unwrap();
    assert!(out.data.iter().all(|&x| x == 0.0));

    // random inputs match the naive recursion
    let mut rng = seeded_rng(0xACCE_0005);
    for round in 0..20 {
        let alpha = 10f64.powf(-1.0 - 2.0 * (round as f64 / 19.0));
        let eps = 1e-4;
        let trial = Trial::new(
            Array2::from_shape_fn((2, 400), |_| {
                let n: f64 = StandardNormal.sample(&mut rng);
                5.0 + 3.0 * n
            }),
            0,
            0,
        )
        .unwrap();
        let got = exp_moving_standardize(&trial, alpha, eps).unwrap();
        for c in 0..2 {
            let mut mean = trial.data[[c, 0]];
            let mut var = 0.0;
            for t in 0..400 {
                let x = trial.data[[c, t]];
                mean = (1.0 - alpha) * mean + alpha * x;
                var = (1.0 - alpha) * var + alpha * (x - mean) * (x - mean);
                let want = (x - mean) / var.max(eps).sqrt();
                let tol = 1e-12 * want.abs().max(1.0);
                assert!(
                    (got.data[[c, t]] - want).abs() <= tol,
                    "alpha={alpha} c={c} t={t}: got {} want {want}",
                    got.data[[c, t]]
                );
            }
        }
    }
    pass(5, "standardizer");
}

#[test]
fn criterion_06_gradient_check() {
    let mut rng = seeded_rng(0xACCE_0006);
    let mut unit = || {
        let raw: f64 = StandardNormal.sample(&mut rng);
        raw
    };
    let h = 1e-5;
    for draw in 0..100 {
        let (k, f) = (2 + draw % 3, 1 + draw % 4);
        let mut state = ModelState::new(k as u32, f).unwrap();
        for w in state.weights.iter_mut() {
            *w = unit();
        }
        for b in state.bias.iter_mut() {
            *b = unit();
        }
        let feats: Vec<Vec<f64>> = (0..5).map(|_| (0..f).map(|_| unit()).collect()).collect();
        let targets: Vec<SoftLabel> = (0..5)
            .map(|_| {
                let raw: Vec<f64> = (0..k).map(|_| unit().abs() + 0.05).collect();
                let sum: f64 = raw.iter().sum();
                SoftLabel::new(raw.into_iter().map(|x| x / sum).collect()).unwrap()
            })
            .collect();
        let loss_at = |state: &ModelState| -> f64 {
            feats
                .iter()
                .zip(&targets)
                .map(|(feat, target)| {
                    soft_cross_entropy(&state.forward(feat).unwrap(), target).unwrap()
                })
                .sum::<f64>()
                / feats.len() as f64
        };
        let (gw, gb) = grad(&state, &feats, &targets).unwrap();
        for row in 0..k {
            for col in 0..f {
                let orig = state.weights[[row, col]];
                state.weights[[row, col]] = orig + h;
                let plus = loss_at(&state);
                state.weights[[row, col]] = orig - h;
                let minus = loss_at(&state);
                state.weights[[row, col]] = orig;
                let fd = (plus - minus) / (2.0 * h);
                let rel = (gw[[row, col]] - fd).abs() / fd.abs().max(1.0);
                assert!(rel <= 1e-5, "draw {draw} W[{row},{col}]: rel error {rel}");
            }
            let orig = state.bias[row];
            state.bias[row] = orig + h;
            let plus = loss_at(&state);
            state.bias[row] = orig - h;
            let minus = loss_at(&state);
            state.bias[row] = orig;
            let fd = (plus - minus) / (2.0 * h);
            let rel = (gb[row] - fd).abs() / fd.abs().max(1.0);
            assert!(rel <= 1e-5, "draw {draw} b[{row}]: rel error {rel}");
        }
    }
    pass(6, "gradient check");
}

#[test]
fn criterion_07_scheduler_anchors() {
    for (total, lr0, eta_min) in [(1000usize, 2e-3, 0.0), (4000, 2e-3, 1e-5), (2, 0.5, 0.125)] {
        assert!((cosine_lr(0, total, lr0, eta_min) - lr0).abs() <= 1e-12);
        assert!((cosine_lr(total, total, lr0, eta_min) - eta_min).abs() <= 1e-12);
        let mid = cosine_lr(total / 2, total, lr0, eta_min);
        assert!((mid - (lr0 + eta_min) / 2.0).abs() <= 1e-12);
    }
    pass(7, "scheduler anchors");
}

#[test]
fn criterion_08_desk_scale_behavioral_experiment() {
    let started = std::time::Instant::now();
    let seeds: Vec<u64> = (1..=5).collect();
    let mut acc_plain = Vec::new();
    let mut acc_cropcat = Vec::new();
    let mut conf_pure = Vec::new();
    let mut conf_mixed = Vec::new();
    for &seed in &seeds {
        let train = generate_synthetic(200, 3, 500, 2, 2.0, 1.0, seed).unwrap();
        let holdout = generate_synthetic(100, 3, 500, 2, 2.0, 1.0, seed + 1000).unwrap();

        let mut plain = TrainConfig::new(AugConfig::new(Method::None));
        plain.epochs = 100;
        plain.seed = seed;
        let metrics_plain = evaluate(&train, &plain, &holdout).unwrap();
        acc_plain.push(metrics_plain.accuracy);

        let mut cropcat = TrainConfig::new(AugConfig::new(Method::CropcatTemporal));
        cropcat.epochs = 100;
        cropcat.seed = seed;
        assert_eq!(cropcat.aug.lambda, 0.125);
        let metrics_cropcat = evaluate(&train, &cropcat, &holdout).unwrap();
        acc_cropcat.push(metrics_cropcat.accuracy);
        conf_pure.push(metrics_cropcat.mean_confidence_pure);
        conf_mixed.push(metrics_cropcat.mean_confidence_mixed);
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let (mp, mc) = (mean(&acc_plain), mean(&acc_cropcat));
    println!("no-augmentation accuracy {mp:.4}, crop-and-concatenate accuracy {mc:.4}");
    assert!(
        mc >= mp - 0.02,
        "augmented accuracy {mc} fell more than 0.02 below baseline {mp}"
    );
    let (pure, mixed) = (mean(&conf_pure), mean(&conf_mixed));
    println!("confidence on pure inputs {pure:.4}, on mixed inputs {mixed:.4}");
    assert!(
        mixed < pure,
        "mixed-input confidence {mixed} is not strictly below pure-input confidence {pure}"
    );
    assert!(
        started.elapsed() < std::time::Duration::from_secs(120),
        "took {:?}",
        started.elapsed()
    );
    pass(8, "desk-scale behavioral experiment");
}

#[test]
fn criterion_09_soft_target_optimum() {
    // mixed pairs with a fixed sampled ratio of 0.3: base trials of class 0,
    // materials of class 1, temporal windows centered mid-trial
    let source = generate_synthetic(40, 3, 500, 2, 2.0, 0.5, 77).unwrap();
    let bases: Vec<&Trial> = source.trials.iter().filter(|t| t.label == 0).collect();
    let materials: Vec<&Trial> = source.trials.iter().filter(|t| t.label == 1).collect();
    let mut feats = Vec::new();
    let mut targets = Vec::new();
    for (base, material) in bases.iter().zip(&materials) {
        let pair = cropcat_temporal(base, material, 250, 0.3, 2).unwrap();
        let trial = Trial::new(pair.data, base.subject_id, base.label).unwrap();
        feats.push(extract_features(&trial).unwrap());
        targets.push(pair.label.clone());
        let mass = pair.label.probs()[1];
        assert!((mass - 0.3).abs() <= 2.0 / 500.0, "realized mass {mass}");
    }

    let mut state = ModelState::new(2, 3).unwrap();
    let total = 3000;
    for step in 0..total {
        let (gw, gb) = grad(&state, &feats, &targets).unwrap();
        adam_step(&mut state, &gw, &gb, cosine_lr(step, total, 2e-3, 0.0)).unwrap();
    }
    let mean_base = feats
        .iter()
        .map(|f| state.forward(f).unwrap().probs()[0])
        .sum::<f64>()
        / feats.len() as f64;
    assert!(
        (0.6..=0.8).contains(&mean_base),
        "converged base-class probability {mean_base}"
    );
    pass(9, "soft-target optimum");
}

/// Guard used by the suite itself: the batch augmentation entry point feeds
/// criterion 2's randomized sweep, so its determinism is asserted here too.
#[test]
fn augment_batch_is_reproducible_across_calls() {
    let dataset = generate_synthetic(10, 4, 30, 2, 1.5, 0.8, 5).unwrap();
    let batch: Vec<&Trial> = dataset.trials.iter().collect();
    let mut config = AugConfig::new(Method::CropcatSpatial);
    config.lambda = 0.4;
    let a = augment_batch(&batch, &config, 2, &mut seeded_rng(9)).unwrap();
    let b = augment_batch(&batch, &config, 2, &mut seeded_rng(9)).unwrap();
    assert_eq!(a, b);
}
