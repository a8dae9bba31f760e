//! Causal low-pass filtering and exponential moving standardization.
//!
//! The filter is a Butterworth low-pass discretized by impulse invariance and
//! realized as a cascade of second-order sections. Impulse invariance keeps
//! the digital magnitude response within a fraction of a percent of the
//! analog Butterworth curve `1 / sqrt(1 + (f/fc)^(2n))` everywhere below the
//! Nyquist rate (the bilinear transform would warp the response far off that
//! curve between cutoff and Nyquist), at the price of a small aliasing
//! residue that is negligible for the cutoff/rate ratios used here.
//!
//! Standardization runs the exponential moving recursion per channel:
//!
//! ```text
//! mean_t = (1 - alpha) * mean_(t-1) + alpha * x_t        mean_0 = x_1
//! var_t  = (1 - alpha) * var_(t-1)  + alpha * (x_t - mean_t)^2   var_0 = 0
//! out_t  = (x_t - mean_t) / sqrt(max(var_t, eps))
//! ```

use ndarray::Array2;
use num_complex::Complex64;

use crate::{Dataset, Error, Result, Trial};

/// Low-pass filter description.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    /// Cutoff frequency in hertz; must sit below the Nyquist rate.
    pub cutoff_hz: f64,
    /// Filter order; even and at least 2.
    pub order: usize,
    /// Sampling rate of the signals to filter, in hertz.
    pub sample_rate_hz: f64,
}

/// Default cutoff frequency in hertz.
pub const DEFAULT_CUTOFF_HZ: f64 = 38.0;
/// Default filter order.
pub const DEFAULT_ORDER: usize = 4;
/// Default standardizer decay.
pub const DEFAULT_ALPHA: f64 = 1e-3;
/// Default standardizer variance floor.
pub const DEFAULT_EPS: f64 = 1e-4;

impl FilterSpec {
    pub fn new(cutoff_hz: f64, order: usize, sample_rate_hz: f64) -> Result<Self> {
        let spec = FilterSpec {
            cutoff_hz,
            order,
            sample_rate_hz,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The 38 Hz order-4 default for a given sampling rate.
    pub fn default_for_rate(sample_rate_hz: f64) -> Result<Self> {
        FilterSpec::new(DEFAULT_CUTOFF_HZ, DEFAULT_ORDER, sample_rate_hz)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample_rate_hz must be positive, got {}",
                self.sample_rate_hz
            )));
        }
        if self.order < 2 || !self.order.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "order must be even and at least 2, got {}",
                self.order
            )));
        }
        if !(self.cutoff_hz.is_finite() && self.cutoff_hz > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff_hz must be positive, got {}",
                self.cutoff_hz
            )));
        }
        if self.cutoff_hz >= self.sample_rate_hz / 2.0 {
            return Err(Error::InvalidArgument(format!(
                "cutoff_hz {} must lie below the Nyquist rate {}",
                self.cutoff_hz,
                self.sample_rate_hz / 2.0
            )));
        }
        Ok(())
    }
}

/// One second-order section, denominator normalized to `a0 = 1`.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    /// Direct form II transposed, zero initial state, in place.
    fn run(&self, x: &mut [f64]) {
        let (mut w1, mut w2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let xi = *v;
            let yi = self.b0 * xi + w1;
            w1 = self.b1 * xi - self.a1 * yi + w2;
            w2 = self.b2 * xi - self.a2 * yi;
            *v = yi;
        }
    }
}

/// Designs the impulse-invariant Butterworth cascade for `spec`.
///
/// The transfer function is `z^-1 * Q(z^-1) / prod_k D_k(z^-1)` where the
/// `D_k` come from the sampled analog pole pairs and `Q` (even degree
/// `order - 2`) collects the partial-fraction numerators. The leading delay
/// and overall gain form the first section; `Q`'s quadratic factors fill the
/// rest.
fn design_sections(spec: &FilterSpec) -> Result<Vec<Biquad>> {
    spec.validate()?;
    let n = spec.order;
    let wc = 2.0 * std::f64::consts::PI * spec.cutoff_hz;
    let period = 1.0 / spec.sample_rate_hz;

    let poles: Vec<Complex64> = (1..=n)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + n - 1) as f64 / (2 * n) as f64;
            wc * Complex64::new(theta.cos(), theta.sin())
        })
        .collect();

    // residues of wc^n / prod(s - p_k) at each pole
    let gain = Complex64::new(wc, 0.0).powu(n as u32);
    let residues: Vec<Complex64> = (0..n)
        .map(|k| {
            let denom: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| poles[k] - poles[j])
                .product();
            gain / denom
        })
        .collect();

    let zpoles: Vec<Complex64> = poles.iter().map(|p| (p * period).exp()).collect();

    // combined numerator in x = z^-1:
    // N(x) = sum_k T * A_k * prod_{j != k} (1 - zp_j x), degree n - 1
    let mut num = vec![Complex64::new(0.0, 0.0); n];
    for (k, residue) in residues.iter().enumerate() {
        let mut prod = vec![Complex64::new(1.0, 0.0)];
        for (j, zp) in zpoles.iter().enumerate() {
            if j != k {
                prod = poly_mul(&prod, &[Complex64::new(1.0, 0.0), -zp]);
            }
        }
        for (slot, c) in num.iter_mut().zip(prod) {
            *slot += residue * c * period;
        }
    }
    let num: Vec<f64> = num.iter().map(|c| c.re).collect();
    // The constant coefficient is the sum of residues scaled by T, which
    // vanishes for any strictly proper function with pole excess >= 2.
    let scale = num[1];
    if !scale.is_finite() || scale == 0.0 {
        return Err(Error::Numeric(format!(
            "degenerate filter design for cutoff {} at rate {}",
            spec.cutoff_hz, spec.sample_rate_hz
        )));
    }
    let q_monic: Vec<f64> = num[1..].iter().map(|c| c / scale).collect();

    // denominator sections from conjugate pole pairs
    let mut dens: Vec<(f64, f64)> = zpoles
        .iter()
        .filter(|z| z.im > 0.0)
        .map(|z| (-2.0 * z.re, z.norm_sqr()))
        .collect();
    dens.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let quads = factor_into_quadratics(&q_monic)?;
    debug_assert_eq!(quads.len() + 1, dens.len());

    let mut sections = Vec::with_capacity(n / 2);
    if n == 2 {
        // single section carries both the delay and the gain
        sections.push(Biquad {
            b0: 0.0,
            b1: scale,
            b2: 0.0,
            a1: dens[0].0,
            a2: dens[0].1,
        });
    } else {
        sections.push(Biquad {
            b0: 0.0,
            b1: scale,
            b2: 0.0,
            a1: dens[0].0,
            a2: dens[0].1,
        });
        for ((c1, c2), &(a1, a2)) in quads.into_iter().zip(&dens[1..]) {
            sections.push(Biquad {
                b0: 1.0,
                b1: c1,
                b2: c2,
                a1,
                a2,
            });
        }
    }
    for s in &sections {
        for v in [s.b0, s.b1, s.b2, s.a1, s.a2] {
            if !v.is_finite() {
                return Err(Error::Numeric(
                    "filter design produced non-finite coefficients".into(),
                ));
            }
        }
    }
    Ok(sections)
}

/// Polynomial product, coefficients in ascending powers.
fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Splits a real polynomial with constant term 1 and even degree into
/// quadratic factors `1 + c1 x + c2 x^2`.
fn factor_into_quadratics(poly: &[f64]) -> Result<Vec<(f64, f64)>> {
    let degree = poly.len() - 1;
    debug_assert_eq!(degree % 2, 0);
    if degree == 0 {
        return Ok(vec![]);
    }
    if degree == 2 {
        return Ok(vec![(poly[1], poly[2])]);
    }
    let roots = durand_kerner(poly)?;
    let mut reals: Vec<f64> = Vec::new();
    let mut factors = Vec::new();
    for r in &roots {
        let tol = 1e-8 * (1.0 + r.norm());
        if r.im.abs() <= tol {
            reals.push(r.re);
        } else if r.im > 0.0 {
            // conjugate pair (1 - x/r)(1 - x/conj(r))
            let inv = r.inv();
            factors.push((-2.0 * inv.re, inv.norm_sqr()));
        }
    }
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for pair in reals.chunks_exact(2) {
        factors.push((-(1.0 / pair[0] + 1.0 / pair[1]), 1.0 / (pair[0] * pair[1])));
    }
    if factors.len() != degree / 2 {
        return Err(Error::Numeric(
            "failed to factor the filter numerator into quadratics".into(),
        ));
    }
    Ok(factors)
}

/// Durand-Kerner root finding on a real polynomial given by ascending
/// coefficients with a nonzero leading term.
fn durand_kerner(poly: &[f64]) -> Result<Vec<Complex64>> {
    let degree = poly.len() - 1;
    let lead = poly[degree];
    let monic: Vec<Complex64> = poly
        .iter()
        .map(|&c| Complex64::new(c / lead, 0.0))
        .collect();
    let eval = |x: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in monic.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..degree).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..500 {
        let mut shift = 0.0f64;
        for i in 0..degree {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..degree {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            shift = shift.max(delta.norm());
        }
        if shift < 1e-14 {
            return Ok(roots);
        }
    }
    Err(Error::Numeric(
        "polynomial root finding did not converge".into(),
    ))
}

/// Applies the causal Butterworth low-pass to every channel of a trial.
pub fn lowpass_filter(trial: &Trial, spec: &FilterSpec) -> Result<Trial> {
    let sections = design_sections(spec)?;
    Ok(filter_with_sections(trial, &sections))
}

fn filter_with_sections(trial: &Trial, sections: &[Biquad]) -> Trial {
    let mut data = trial.data.clone();
    for mut row in data.rows_mut() {
        let slice = row.as_slice_mut().expect("row-major trial data");
        for s in sections {
            s.run(slice);
        }
    }
    Trial {
        data,
        subject_id: trial.subject_id,
        label: trial.label,
    }
}

/// Running per-channel mean/variance state of the exponential moving
/// standardizer. Feed one multichannel sample at a time with
/// [`StandardizerState::push`]; the first sample primes the means.
#[derive(Debug, Clone)]
pub struct StandardizerState {
    alpha: f64,
    eps: f64,
    mean: Vec<f64>,
    var: Vec<f64>,
    primed: bool,
}

impl StandardizerState {
    pub fn new(alpha: f64, eps: f64, channels: usize) -> Result<Self> {
        if !(alpha.is_finite() && 0.0 < alpha && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if channels == 0 {
            return Err(Error::InvalidArgument("channels must be at least 1".into()));
        }
        Ok(StandardizerState {
            alpha,
            eps,
            mean: vec![0.0; channels],
            var: vec![0.0; channels],
            primed: false,
        })
    }

    /// Current running means, one per channel.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Current running variances, one per channel; never negative.
    pub fn var(&self) -> &[f64] {
        &self.var
    }

    /// Consumes one sample per channel and writes the standardized values.
    pub fn push(&mut self, sample: &[f64], out: &mut [f64]) {
        debug_assert_eq!(sample.len(), self.mean.len());
        debug_assert_eq!(out.len(), self.mean.len());
        if !self.primed {
            self.mean.copy_from_slice(sample);
            self.primed = true;
        }
        for c in 0..sample.len() {
            let x = sample[c];
            self.mean[c] = (1.0 - self.alpha) * self.mean[c] + self.alpha * x;
            let centered = x - self.mean[c];
            self.var[c] = (1.0 - self.alpha) * self.var[c] + self.alpha * centered * centered;
            out[c] = centered / self.var[c].max(self.eps).sqrt();
        }
    }
}

/// Standardizes a trial with the exponential moving recursion, channel by
/// channel. A constant channel maps to all zeros.
pub fn exp_moving_standardize(trial: &Trial, alpha: f64, eps: f64) -> Result<Trial> {
    let channels = trial.channels();
    let mut state = StandardizerState::new(alpha, eps, channels)?;
    let mut data = Array2::zeros((channels, trial.timepoints()));
    let mut sample = vec![0.0; channels];
    let mut out = vec![0.0; channels];
    for t in 0..trial.timepoints() {
        for (c, slot) in sample.iter_mut().enumerate() {
            *slot = trial.data[[c, t]];
        }
        state.push(&sample, &mut out);
        for (c, &value) in out.iter().enumerate() {
            data[[c, t]] = value;
        }
    }
    Ok(Trial {
        data,
        subject_id: trial.subject_id,
        label: trial.label,
    })
}

/// Filters then standardizes every trial of a dataset.
pub fn preprocess_dataset(
    dataset: &Dataset,
    spec: &FilterSpec,
    alpha: f64,
    eps: f64,
) -> Result<Dataset> {
    dataset.validate()?;
    let sections = design_sections(spec)?;
    // validate the standardizer arguments once, even for an empty dataset
    StandardizerState::new(alpha, eps, 1)?;
    let mut trials = Vec::with_capacity(dataset.len());
    for trial in &dataset.trials {
        let filtered = filter_with_sections(trial, &sections);
        trials.push(exp_moving_standardize(&filtered, alpha, eps)?);
    }
    Ok(Dataset {
        trials,
        num_classes: dataset.num_classes,
        sample_rate_hz: dataset.sample_rate_hz,
        schema_version: dataset.schema_version,
    })
}
