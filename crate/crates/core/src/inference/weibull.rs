//! Weibull fitting by rank regression with an optimised upper cutoff.
//!
//! With `n_x` the number of samples `>= x` and `N_X` the sample size, the
//! Weibull CCDF gives `x^c = beta * ln(N_X / n_x)` with `beta = lambda^c`.
//! Every observation is one regression point: sorting the samples as
//! `x_1 >= x_2 >= ... >= x_N`, observation `n` contributes
//! `(ln(N_X / n), x_n^c)`, so tied values occupy consecutive ordinal ranks.
//! For each candidate log-rank cutoff `n_hat`, values at or below the
//! `e^n_hat`-th largest are regressed through the origin for every `c` on
//! the grid; `c` maximising `R²` is kept per cutoff, and the cutoff with the
//! best `R²` wins.

use crate::error::{Error, Result};

const MIN_SAMPLES: usize = 50;
const MIN_POINTS_AFTER_CUTOFF: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullFit {
    pub c: f64,
    /// `lambda^c`.
    pub beta_coef: f64,
    pub lambda: f64,
    /// Optimal log-rank cutoff.
    pub n_hat: f64,
    /// The `ceil(e^n_hat)`-th largest sample.
    pub cutoff: f64,
    pub r2: f64,
    pub n_points: usize,
}

/// `exp(-(x / lambda)^c)`.
pub fn weibull_ccdf(c: f64, lambda: f64, x: f64) -> f64 {
    (-(x / lambda).powf(c)).exp()
}

/// `{0.01, 0.02, ..., 0.99}`.
pub fn default_c_grid() -> Vec<f64> {
    (1..100).map(|k| k as f64 / 100.0).collect()
}

/// 50 evenly spaced log-ranks from `ln 20` to `ln n_samples`.
pub fn default_n_hat_grid(n_samples: usize) -> Vec<f64> {
    let lo = 20f64.ln();
    let hi = (n_samples.max(21) as f64).ln();
    (0..50).map(|k| lo + (hi - lo) * k as f64 / 49.0).collect()
}

/// Distinct values in decreasing order; each groups a run of ordinal ranks.
struct RankPoints {
    values: Vec<f64>,
    /// Sum of `ln(N_X / n)` over the group's ranks.
    log_rank_sum: Vec<f64>,
    /// Sum of `ln(N_X / n)^2` over the group's ranks.
    log_rank_sq_sum: Vec<f64>,
    /// `n_x`, the number of samples `>= value`.
    ranks: Vec<usize>,
    counts: Vec<usize>,
}

impl RankPoints {
    fn new(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let total = sorted.len() as f64;
        let mut p = RankPoints {
            values: Vec::new(),
            log_rank_sum: Vec::new(),
            log_rank_sq_sum: Vec::new(),
            ranks: Vec::new(),
            counts: Vec::new(),
        };
        let mut i = 0;
        while i < sorted.len() {
            let v = sorted[i];
            let (mut l, mut l2) = (0.0, 0.0);
            let first = i;
            while i < sorted.len() && sorted[i] == v {
                i += 1;
                let x = (total / i as f64).ln();
                l += x;
                l2 += x * x;
            }
            p.values.push(v);
            p.log_rank_sum.push(l);
            p.log_rank_sq_sum.push(l2);
            p.ranks.push(i);
            p.counts.push(i - first);
        }
        p
    }

    /// First point whose rank reaches `e^n_hat`.
    fn cutoff_index(&self, n_hat: f64) -> usize {
        let min_rank = n_hat.exp();
        self.ranks.partition_point(|&r| (r as f64) < min_rank)
    }
}

/// Suffix sums over the regression points for one exponent `c`.
struct SuffixSums {
    n: Vec<usize>,
    sxx: Vec<f64>,
    sxy: Vec<f64>,
    sy: Vec<f64>,
    syy: Vec<f64>,
}

impl SuffixSums {
    fn new(points: &RankPoints, c: f64) -> Self {
        let k = points.values.len();
        let mut s = SuffixSums {
            n: vec![0; k + 1],
            sxx: vec![0.0; k + 1],
            sxy: vec![0.0; k + 1],
            sy: vec![0.0; k + 1],
            syy: vec![0.0; k + 1],
        };
        for i in (0..k).rev() {
            let w = points.counts[i] as f64;
            let y = points.values[i].powf(c);
            s.n[i] = s.n[i + 1] + points.counts[i];
            s.sxx[i] = s.sxx[i + 1] + points.log_rank_sq_sum[i];
            s.sxy[i] = s.sxy[i + 1] + points.log_rank_sum[i] * y;
            s.sy[i] = s.sy[i + 1] + w * y;
            s.syy[i] = s.syy[i + 1] + w * y * y;
        }
        s
    }

    /// `(beta, R²)` of the through-origin fit over points `start..`.
    fn fit_from(&self, start: usize) -> Option<(f64, f64)> {
        let (sxx, sxy, sy, syy) = (self.sxx[start], self.sxy[start], self.sy[start], self.syy[start]);
        let n = self.n[start];
        if sxx <= 0.0 {
            return None;
        }
        let beta = sxy / sxx;
        let ssr = (syy - sxy * sxy / sxx).max(0.0);
        let sst = syy - sy * sy / n as f64;
        if sst.is_nan() || sst <= 0.0 {
            return None;
        }
        Some((beta, 1.0 - ssr / sst))
    }
}

pub fn fit_weibull_rank(samples: &[f64], c_grid: &[f64], n_hat_grid: &[f64]) -> Result<WeibullFit> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "Weibull fit needs at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("Weibull samples must be positive and finite".into()));
    }
    if c_grid.is_empty() || n_hat_grid.is_empty() {
        return Err(Error::Parameter("c and n_hat grids must be nonempty".into()));
    }
    if c_grid.iter().any(|&c| !(c > 0.0 && c < 1.0)) {
        return Err(Error::Parameter("c grid values must lie in (0, 1)".into()));
    }
    let first = samples[0];
    if samples.iter().all(|&x| x == first) {
        return Err(Error::InsufficientData("degenerate samples: zero variance".into()));
    }

    let points = RankPoints::new(samples);
    let retained = |start: usize| samples.len() - if start == 0 { 0 } else { points.ranks[start - 1] };
    let starts: Vec<Option<usize>> = n_hat_grid
        .iter()
        .map(|&n_hat| {
            let start = points.cutoff_index(n_hat);
            (retained(start) >= MIN_POINTS_AFTER_CUTOFF).then_some(start)
        })
        .collect();
    if starts.iter().all(Option::is_none) {
        return Err(Error::InsufficientData(format!(
            "fewer than {MIN_POINTS_AFTER_CUTOFF} points remain below every cutoff"
        )));
    }

    // best (R², c, beta) per cutoff
    let mut best: Vec<Option<(f64, f64, f64)>> = vec![None; n_hat_grid.len()];
    for &c in c_grid {
        let sums = SuffixSums::new(&points, c);
        for (slot, start) in best.iter_mut().zip(&starts) {
            let Some(start) = *start else { continue };
            if let Some((beta, r2)) = sums.fit_from(start) {
                if beta > 0.0 && slot.is_none_or(|(r, _, _)| r2 > r) {
                    *slot = Some((r2, c, beta));
                }
            }
        }
    }

    let (idx, (r2, c, beta)) = best
        .iter()
        .enumerate()
        .filter_map(|(i, b)| b.map(|b| (i, b)))
        .fold(None::<(usize, (f64, f64, f64))>, |acc, cur| match acc {
            Some(a) if a.1 .0 >= cur.1 .0 => Some(a),
            _ => Some(cur),
        })
        .ok_or_else(|| Error::InsufficientData("no cutoff admits a valid regression".into()))?;

    let n_hat = n_hat_grid[idx];
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let rank = (n_hat.exp().ceil() as usize).clamp(1, sorted.len());
    Ok(WeibullFit {
        c,
        beta_coef: beta,
        lambda: beta.powf(1.0 / c),
        n_hat,
        cutoff: sorted[rank - 1],
        r2,
        n_points: retained(starts[idx].unwrap_or(0)),
    })
}
