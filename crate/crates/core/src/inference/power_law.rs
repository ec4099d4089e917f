//! Discrete power-law fitting: maximum likelihood for the exponent at each
//! candidate lower bound, lower bound chosen by minimum Kolmogorov–Smirnov
//! distance.

use crate::error::{Error, Result};
use crate::special::{hurwitz_zeta, hurwitz_zeta_with_derivative};

const MIN_SAMPLES: usize = 50;
const MIN_TAIL: usize = 10;
const EXPONENT_LO: f64 = 1.0 + 1e-9;
const EXPONENT_HI: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// Exponent of the probability mass, `p(x) ∝ x^-exponent`.
    pub exponent: f64,
    pub x_min: u64,
    pub ks: f64,
    pub n_tail: usize,
}

/// Log-likelihood of `p(x) = x^-s / ζ(s, x_min)` over `tail` (all `>= x_min`).
pub fn power_law_log_likelihood(tail: &[u64], exponent: f64, x_min: u64) -> Result<f64> {
    let z = hurwitz_zeta(exponent, x_min as f64)?;
    let sum_ln: f64 = tail.iter().map(|&x| (x as f64).ln()).sum();
    Ok(-exponent * sum_ln - tail.len() as f64 * z.ln())
}

/// Derivative of the log-likelihood in the exponent, per sample.
pub fn power_law_score(tail: &[u64], exponent: f64, x_min: u64) -> Result<f64> {
    let (z, dz) = hurwitz_zeta_with_derivative(exponent, x_min as f64)?;
    let mean_ln = tail.iter().map(|&x| (x as f64).ln()).sum::<f64>() / tail.len() as f64;
    Ok(-dz / z - mean_ln)
}

/// Root of the score equation by bisection; the log-likelihood is concave
/// in the exponent.
fn mle_exponent(mean_ln: f64, x_min: u64) -> Result<f64> {
    let q = x_min as f64;
    let score = |s: f64| -> Result<f64> {
        let (z, dz) = hurwitz_zeta_with_derivative(s, q)?;
        Ok(-dz / z - mean_ln)
    };
    let (mut lo, mut hi) = (EXPONENT_LO, EXPONENT_HI);
    if score(hi)? > 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if score(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest gap between empirical and model CDFs over the observed tail,
/// checked on both sides of every jump.
fn ks_distance(tail_sorted: &[u64], exponent: f64, x_min: u64) -> Result<f64> {
    let n = tail_sorted.len() as f64;
    let z_min = hurwitz_zeta(exponent, x_min as f64)?;
    let mut ks: f64 = 0.0;
    let mut i = 0;
    while i < tail_sorted.len() {
        let x = tail_sorted[i];
        // empirical P(X >= x) and P(X > x)
        let ge = (tail_sorted.len() - i) as f64 / n;
        while i < tail_sorted.len() && tail_sorted[i] == x {
            i += 1;
        }
        let gt = (tail_sorted.len() - i) as f64 / n;
        let model_ge = hurwitz_zeta(exponent, x as f64)? / z_min;
        let model_gt = hurwitz_zeta(exponent, (x + 1) as f64)? / z_min;
        ks = ks.max((ge - model_ge).abs()).max((gt - model_gt).abs());
    }
    Ok(ks)
}

pub fn fit_power_law(samples: &[u64]) -> Result<PowerLawFit> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.contains(&0) {
        return Err(Error::Domain("power-law samples must be positive integers".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    if max < 2 * min {
        return Err(Error::InsufficientData(format!("support too narrow: [{min}, {max}]")));
    }

    // suffix sums of ln x for the tail means
    let mut suffix_ln = vec![0.0; sorted.len() + 1];
    for i in (0..sorted.len()).rev() {
        suffix_ln[i] = suffix_ln[i + 1] + (sorted[i] as f64).ln();
    }

    let mut best: Option<PowerLawFit> = None;
    let mut i = 0;
    while i < sorted.len() {
        let x_min = sorted[i];
        let tail = &sorted[i..];
        let next = i + sorted[i..].partition_point(|&x| x == x_min);
        if tail.len() < MIN_TAIL || next == sorted.len() {
            break;
        }
        let mean_ln = suffix_ln[i] / tail.len() as f64;
        let exponent = mle_exponent(mean_ln, x_min)?;
        let ks = ks_distance(tail, exponent, x_min)?;
        if best.is_none_or(|b| ks < b.ks) {
            best = Some(PowerLawFit { exponent, x_min, ks, n_tail: tail.len() });
        }
        i = next;
    }
    best.ok_or_else(|| Error::InsufficientData("no admissible lower bound".into()))
}
