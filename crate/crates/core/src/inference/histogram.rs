//! Simulated conditional histogram `f(N, M | N_P)` and the argmax estimator
//! of the potential market size.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::model::{simulate_sizes, ModelParams, WeightParams};
use crate::network::NetworkSeries;
use crate::seeding::derive_seed;
use crate::series_io::sidecar_path;

const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramConfig {
    pub n_p_grid: Vec<usize>,
    /// Independent model runs per grid value.
    pub replicates: usize,
    /// Retained days sampled per run, evenly spaced over the retained window.
    pub days_per_replicate: usize,
    /// `(w_N, w_M)`.
    pub bin_widths: (usize, usize),
    /// Total pseudo-count spread evenly over all bins of each row.
    pub smoothing: f64,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            n_p_grid: (20..=400).step_by(10).collect(),
            replicates: 500,
            days_per_replicate: 10,
            bin_widths: (5, 20),
            smoothing: 1.0,
            seed: 0,
            workers: 0,
        }
    }
}

impl HistogramConfig {
    fn validate(&self) -> Result<()> {
        if self.n_p_grid.is_empty() {
            return Err(Error::Parameter("n_p grid is empty".into()));
        }
        if self.n_p_grid.contains(&0) {
            return Err(Error::Parameter("n_p grid values must be positive".into()));
        }
        if self.bin_widths.0 == 0 || self.bin_widths.1 == 0 {
            return Err(Error::Parameter("bin widths must be positive".into()));
        }
        if self.replicates == 0 || self.days_per_replicate == 0 {
            return Err(Error::Parameter("replicates and days_per_replicate must be positive".into()));
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(Error::Parameter("smoothing must be a finite non-negative number".into()));
        }
        Ok(())
    }
}

/// Smoothed probability mass of `(N, M)` bins for each grid value of `N_P`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalHistogram {
    pub n_p_grid: Vec<usize>,
    pub bin_widths: (usize, usize),
    pub n_bins: usize,
    pub m_bins: usize,
    /// `prob[g][i * m_bins + j]` is the mass of bin `(i, j)` given `n_p_grid[g]`.
    pub prob: Vec<Vec<f64>>,
    pub replicates: usize,
    pub params_fingerprint: KeyValues,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpEstimate {
    pub n_p_ml: usize,
    pub log_likelihood: f64,
    /// More than one grid value attains the maximum.
    pub flat_flag: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayEstimate {
    pub day: usize,
    pub n: usize,
    pub m: usize,
    /// `None` when `(n, m)` falls outside the binned range.
    pub estimate: Option<NpEstimate>,
}

fn sample_offsets(effective_days: usize, count: usize) -> Vec<usize> {
    let count = count.min(effective_days);
    let mut days: Vec<usize> = (0..count).map(|k| k * effective_days / count).collect();
    days.dedup();
    days
}

pub fn build_conditional_histogram(
    config: &HistogramConfig,
    params: &ModelParams,
    wp: &WeightParams,
) -> Result<ConditionalHistogram> {
    config.validate()?;
    wp.validate()?;
    params.validate()?;
    let mut grid = config.n_p_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let days = sample_offsets(params.effective_days(), config.days_per_replicate);

    let cells: Vec<(usize, usize)> =
        grid.iter().flat_map(|&n_p| (0..config.replicates).map(move |r| (n_p, r))).collect();
    let run = |&(n_p, r): &(usize, usize)| -> Result<Vec<(usize, usize)>> {
        let p = ModelParams { n_p, ..params.clone() };
        simulate_sizes(&p, derive_seed(config.seed, &[n_p as u64, r as u64]), &days)
    };
    let sizes: Vec<Vec<(usize, usize)>> = if config.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?;
        pool.install(|| cells.par_iter().map(run).collect::<Result<_>>())?
    } else {
        cells.par_iter().map(run).collect::<Result<_>>()?
    };

    let (w_n, w_m) = config.bin_widths;
    let max_n = sizes.iter().flatten().map(|s| s.0).max().unwrap_or(0);
    let max_m = sizes.iter().flatten().map(|s| s.1).max().unwrap_or(0);
    let n_bins = max_n / w_n + 1;
    let m_bins = max_m / w_m + 1;
    let total_bins = (n_bins * m_bins) as f64;

    let mut prob = Vec::with_capacity(grid.len());
    for chunk in sizes.chunks(config.replicates) {
        let mut counts = vec![0.0f64; n_bins * m_bins];
        let mut total = 0.0;
        for &(n, m) in chunk.iter().flatten() {
            counts[(n / w_n) * m_bins + m / w_m] += 1.0;
            total += 1.0;
        }
        let pseudo = config.smoothing / total_bins;
        let norm = total + config.smoothing;
        prob.push(counts.into_iter().map(|c| (c + pseudo) / norm).collect());
    }

    let mut fingerprint = KeyValues::new();
    params.write_keys(&mut fingerprint);
    // n_p is swept by the grid
    fingerprint.remove("n_p");
    wp.write_keys(&mut fingerprint);
    fingerprint.set("days_per_replicate", days.len());
    fingerprint.set("smoothing", config.smoothing);
    fingerprint.set("seed", config.seed);
    Ok(ConditionalHistogram {
        n_p_grid: grid,
        bin_widths: config.bin_widths,
        n_bins,
        m_bins,
        prob,
        replicates: config.replicates,
        params_fingerprint: fingerprint,
    })
}

impl ConditionalHistogram {
    pub fn bin_of(&self, n: usize, m: usize) -> Option<usize> {
        let (i, j) = (n / self.bin_widths.0, m / self.bin_widths.1);
        (i < self.n_bins && j < self.m_bins).then_some(i * self.m_bins + j)
    }

    /// Probability row for one grid value.
    pub fn row(&self, n_p: usize) -> Option<&[f64]> {
        self.n_p_grid.iter().position(|&g| g == n_p).map(|g| self.prob[g].as_slice())
    }

    /// Writes `n_p,n_bin_lo,m_bin_lo,prob` rows plus a `<path>.meta` sidecar.
    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))?;
        self.metadata().write(&sidecar_path(path))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n_p,n_bin_lo,m_bin_lo,prob")?;
        for (g, &n_p) in self.n_p_grid.iter().enumerate() {
            for i in 0..self.n_bins {
                for j in 0..self.m_bins {
                    let p = self.prob[g][i * self.m_bins + j];
                    writeln!(w, "{n_p},{},{},{p}", i * self.bin_widths.0, j * self.bin_widths.1)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn metadata(&self) -> KeyValues {
        let mut kv = self.params_fingerprint.clone();
        kv.set("w_n", self.bin_widths.0);
        kv.set("w_m", self.bin_widths.1);
        kv.set("n_bins", self.n_bins);
        kv.set("m_bins", self.m_bins);
        kv.set("replicates", self.replicates);
        kv.set("n_p_grid", self.n_p_grid.iter().map(usize::to_string).collect::<Vec<_>>().join(" "));
        kv
    }

    pub fn read(path: &Path) -> Result<Self> {
        let meta = KeyValues::read(&sidecar_path(path))?;
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, &meta)
    }

    pub fn read_csv<R: Read>(reader: R, meta: &KeyValues) -> Result<Self> {
        let need = |k: &str| -> Result<usize> {
            meta.parsed(k)?.ok_or_else(|| Error::Format(format!("histogram metadata lacks {k:?}")))
        };
        let bin_widths = (need("w_n")?, need("w_m")?);
        let (n_bins, m_bins) = (need("n_bins")?, need("m_bins")?);
        let replicates = need("replicates")?;
        if bin_widths.0 == 0 || bin_widths.1 == 0 {
            return Err(Error::Format("histogram bin widths must be positive".into()));
        }
        let n_p_grid: Vec<usize> = meta
            .get("n_p_grid")
            .ok_or_else(|| Error::Format("histogram metadata lacks \"n_p_grid\"".into()))?
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| Error::Format(format!("bad grid value {s:?}"))))
            .collect::<Result<_>>()?;
        let mut prob = vec![vec![f64::NAN; n_bins * m_bins]; n_p_grid.len()];
        let mut lines = BufReader::new(reader).lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "n_p,n_bin_lo,m_bin_lo,prob" => {}
            _ => return Err(Error::Format("histogram CSV header missing".into())),
        }
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Format(format!("histogram CSV line {}: {line:?}", k + 2));
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(bad());
            }
            let n_p: usize = fields[0].parse().map_err(|_| bad())?;
            let n_lo: usize = fields[1].parse().map_err(|_| bad())?;
            let m_lo: usize = fields[2].parse().map_err(|_| bad())?;
            let p: f64 = fields[3].parse().map_err(|_| bad())?;
            let g = n_p_grid.iter().position(|&x| x == n_p).ok_or_else(bad)?;
            let (i, j) = (n_lo / bin_widths.0, m_lo / bin_widths.1);
            if i >= n_bins || j >= m_bins {
                return Err(bad());
            }
            prob[g][i * m_bins + j] = p;
        }
        if prob.iter().flatten().any(|p| p.is_nan()) {
            return Err(Error::Format("histogram CSV is missing bins".into()));
        }
        let mut fingerprint = meta.clone();
        for k in ["w_n", "w_m", "n_bins", "m_bins", "replicates", "n_p_grid"] {
            fingerprint.remove(k);
        }
        Ok(Self { n_p_grid, bin_widths, n_bins, m_bins, prob, replicates, params_fingerprint: fingerprint })
    }
}

/// `argmax_{N_P} f(n, m | N_P)`; ties go to the smallest `N_P`.
pub fn estimate_np(hist: &ConditionalHistogram, n: usize, m: usize) -> Result<NpEstimate> {
    let bin = hist.bin_of(n, m).ok_or(Error::OutOfRange { n, m })?;
    let best = hist.prob.iter().map(|row| row[bin]).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = hist
        .n_p_grid
        .iter()
        .zip(&hist.prob)
        .filter(|(_, row)| row[bin] >= best * (1.0 - TIE_TOLERANCE))
        .map(|(&n_p, _)| n_p)
        .collect();
    let n_p_ml = *tied.iter().min().ok_or_else(|| Error::Internal("empty histogram grid".into()))?;
    Ok(NpEstimate { n_p_ml, log_likelihood: best.ln(), flat_flag: tied.len() > 1 })
}

/// Per-day estimates; out-of-range days are kept with `estimate: None`.
pub fn estimate_np_series(hist: &ConditionalHistogram, series: &NetworkSeries) -> Vec<DayEstimate> {
    series
        .networks
        .iter()
        .map(|net| {
            let (n, m) = (net.n_active(), net.n_edges());
            DayEstimate { day: net.day, n, m, estimate: estimate_np(hist, n, m).ok() }
        })
        .collect()
}
