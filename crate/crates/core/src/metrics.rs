//! Structural and temporal statistics of network series.
//!
//! The position of a network within its series is the business-day clock:
//! gaps in the `day` labels of ingested data do not lengthen durations or
//! intervals.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::network::{BankId, DailyNetwork, NetworkSeries};

/// What a duration/interval run is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunSubject {
    /// Ordered bank pair with at least one loan that day.
    Pair,
    /// Bank with any edge.
    NodeActive,
    /// Bank with any incoming edge (borrowing).
    NodeIn,
    /// Bank with any outgoing edge (lending).
    NodeOut,
}

impl RunSubject {
    pub const ALL: [RunSubject; 4] = [RunSubject::Pair, RunSubject::NodeActive, RunSubject::NodeIn, RunSubject::NodeOut];

    pub fn name(self) -> &'static str {
        match self {
            RunSubject::Pair => "pair",
            RunSubject::NodeActive => "node_active",
            RunSubject::NodeIn => "node_in",
            RunSubject::NodeOut => "node_out",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurationIntervalSamples {
    pub subject: RunSubject,
    /// Lengths of maximal activity runs not touching either end of the series.
    pub durations: Vec<u32>,
    /// Lengths of gaps between consecutive runs of the same subject.
    pub intervals: Vec<u32>,
    /// Lengths of runs touching the first or last day (excluded from `durations`).
    pub censored_durations: Vec<u32>,
}

/// Empirical complementary CDF, `P(X >= value)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CcdfTable {
    pub points: Vec<(f64, f64)>,
}

impl CcdfTable {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut sorted: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite()).collect();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut points = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let v = sorted[i];
            points.push((v, (sorted.len() - i) as f64 / n));
            while i < sorted.len() && sorted[i] == v {
                i += 1;
            }
        }
        Self { points }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `P(X >= x)` under the table.
    pub fn eval(&self, x: f64) -> f64 {
        match self.points.iter().find(|(v, _)| *v >= x) {
            Some(&(_, p)) => p,
            None => 0.0,
        }
    }
}

/// Estrada spectral bipartivity of the symmetrised network:
/// `Σ cosh(λ) / Σ exp(λ)` over adjacency eigenvalues.
pub fn bipartivity(net: &DailyNetwork) -> Result<f64> {
    if net.is_empty() {
        return Err(Error::UndefinedMetric(format!("bipartivity of empty network on day {}", net.day)));
    }
    let (index, adjacency) = undirected_adjacency(net);
    let n = index.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, nbrs) in adjacency.iter().enumerate() {
        for &j in nbrs {
            a[(i, j)] = 1.0;
        }
    }
    let eig = SymmetricEigen::new(a).eigenvalues;
    let top = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // scale by exp(-top); the spectrum is bounded below by -top
    let (mut even, mut total) = (0.0, 0.0);
    for &l in eig.iter() {
        let up = (l - top).exp();
        let down = (-l - top).exp();
        even += 0.5 * (up + down);
        total += up;
    }
    Ok(even / total)
}

/// Direction-blind simple graph over active banks: sorted bank list and
/// neighbour lists by position.
fn undirected_adjacency(net: &DailyNetwork) -> (Vec<BankId>, Vec<Vec<usize>>) {
    let banks: Vec<BankId> = net.active_banks().into_iter().collect();
    let pos: HashMap<BankId, usize> = banks.iter().enumerate().map(|(k, b)| (*b, k)).collect();
    let mut sets = vec![BTreeSet::new(); banks.len()];
    for e in net.edges() {
        let (i, j) = (pos[&e.lender], pos[&e.borrower]);
        sets[i].insert(j);
        sets[j].insert(i);
    }
    (banks, sets.into_iter().map(|s| s.into_iter().collect()).collect())
}

/// Two-colouring test on the symmetrised network.
pub fn is_bipartite(net: &DailyNetwork) -> bool {
    let (banks, adj) = undirected_adjacency(net);
    let mut colour = vec![None::<bool>; banks.len()];
    for start in 0..banks.len() {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(false);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            let cu = colour[u].unwrap();
            for &v in &adj[u] {
                match colour[v] {
                    None => {
                        colour[v] = Some(!cu);
                        stack.push(v);
                    }
                    Some(cv) if cv == cu => return false,
                    Some(_) => {}
                }
            }
        }
    }
    true
}

/// Mean Jaccard distance `1 - |I_t ∩ I_{t-1}| / |I_t ∪ I_{t-1}|` between
/// consecutive active-bank sets. Pairs of empty days are skipped.
pub fn turnover_rate(series: &NetworkSeries) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::InsufficientData("turnover needs at least two days".into()));
    }
    let sets: Vec<BTreeSet<BankId>> = series.networks.iter().map(DailyNetwork::active_banks).collect();
    let mut total = 0.0;
    let mut count = 0usize;
    for pair in sets.windows(2) {
        let union = pair[0].union(&pair[1]).count();
        if union == 0 {
            continue;
        }
        let inter = pair[0].intersection(&pair[1]).count();
        total += 1.0 - inter as f64 / union as f64;
        count += 1;
    }
    if count == 0 {
        return Err(Error::UndefinedMetric("no day pair has any active bank".into()));
    }
    Ok(total / count as f64)
}

/// Run-length samples for the chosen subject.
pub fn duration_interval_samples(series: &NetworkSeries, subject: RunSubject) -> Result<DurationIntervalSamples> {
    if series.is_empty() {
        return Err(Error::InsufficientData("series has no days".into()));
    }
    let last = series.len() - 1;
    let mut days_by_subject: HashMap<(BankId, BankId), Vec<usize>> = HashMap::new();
    for (pos, net) in series.networks.iter().enumerate() {
        let mut mark = |key: (BankId, BankId)| {
            let v = days_by_subject.entry(key).or_default();
            if v.last() != Some(&pos) {
                v.push(pos);
            }
        };
        for e in net.edges() {
            match subject {
                RunSubject::Pair => mark(e.key()),
                RunSubject::NodeActive => {
                    mark((e.lender, e.lender));
                    mark((e.borrower, e.borrower));
                }
                RunSubject::NodeIn => mark((e.borrower, e.borrower)),
                RunSubject::NodeOut => mark((e.lender, e.lender)),
            }
        }
    }

    let mut out = DurationIntervalSamples {
        subject,
        durations: Vec::new(),
        intervals: Vec::new(),
        censored_durations: Vec::new(),
    };
    for days in days_by_subject.values() {
        let mut run_start = days[0];
        let mut prev = days[0];
        for &d in days[1..].iter().chain(std::iter::once(&usize::MAX)) {
            if d == prev + 1 {
                prev = d;
                continue;
            }
            let len = (prev - run_start + 1) as u32;
            if run_start == 0 || prev == last {
                out.censored_durations.push(len);
            } else {
                out.durations.push(len);
            }
            if d != usize::MAX {
                out.intervals.push((d - prev - 1) as u32);
                run_start = d;
                prev = d;
            }
        }
    }
    out.durations.sort_unstable();
    out.intervals.sort_unstable();
    out.censored_durations.sort_unstable();
    Ok(out)
}

/// Normalised aggregate degree `K(t)/K(T)`, where `K(t)` is the mean over
/// banks ever active in the series of the number of distinct counterparties
/// met up to day `t`. Returns `(day, k_norm)`.
pub fn aggregate_degree_curve(series: &NetworkSeries) -> Result<Vec<(usize, f64)>> {
    if series.is_empty() {
        return Err(Error::InsufficientData("series has no days".into()));
    }
    let population = series.banks().len();
    if population == 0 {
        return Err(Error::UndefinedMetric("series has no edges".into()));
    }
    let mut seen: HashSet<(BankId, BankId)> = HashSet::new();
    let mut total = 0usize;
    let mut curve = Vec::with_capacity(series.len());
    for net in &series.networks {
        for e in net.edges() {
            let key = if e.lender < e.borrower { (e.lender, e.borrower) } else { (e.borrower, e.lender) };
            if seen.insert(key) {
                total += 2;
            }
        }
        curve.push((net.day, total as f64 / population as f64));
    }
    let k_final = curve.last().map(|c| c.1).unwrap_or(0.0);
    Ok(curve.into_iter().map(|(d, k)| (d, k / k_final)).collect())
}

/// Log-log least-squares exponent of `K(t) ∝ t^gamma`, with `t` the number
/// of elapsed days, over the middle `fraction` of the curve.
pub fn aggregate_degree_exponent(curve: &[(usize, f64)], fraction: f64) -> Result<f64> {
    let n = curve.len();
    let trim = ((1.0 - fraction) / 2.0 * n as f64).floor() as usize;
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .enumerate()
        .skip(trim)
        .take(n.saturating_sub(2 * trim))
        .filter(|(_, (_, k))| *k > 0.0)
        .map(|(pos, (_, k))| (((pos + 1) as f64).ln(), k.ln()))
        .collect();
    ols_slope(&pts).ok_or_else(|| Error::InsufficientData("too few points for growth exponent".into()))
}

pub(crate) fn ols_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Pooled per-day in- and out-degree CCDFs over active banks (zeros included).
pub fn degree_distributions(series: &NetworkSeries) -> (CcdfTable, CcdfTable) {
    let mut ins = Vec::new();
    let mut outs = Vec::new();
    for net in &series.networks {
        for (_, (din, dout)) in net.degrees() {
            ins.push(din as f64);
            outs.push(dout as f64);
        }
    }
    (CcdfTable::from_samples(&ins), CcdfTable::from_samples(&outs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    In,
    Out,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrengthPoint {
    pub direction: Direction,
    pub degree: usize,
    pub mean_strength: f64,
    pub count: usize,
}

/// Mean strength per degree, pooled over bank-days with nonzero degree in
/// that direction. Sorted by direction, then degree.
pub fn strength_vs_degree(series: &NetworkSeries) -> Result<Vec<StrengthPoint>> {
    if series.is_empty() {
        return Err(Error::InsufficientData("series has no days".into()));
    }
    if !series.is_weighted() {
        return Err(Error::UndefinedMetric("strength requires a weighted series".into()));
    }
    let mut acc: BTreeMap<(Direction, usize), (f64, usize)> = BTreeMap::new();
    for net in &series.networks {
        let deg = net.degrees();
        let strength = net.strengths();
        for (bank, (din, dout)) in deg {
            let (sin, sout) = strength[&bank];
            for (dir, d, s) in [(Direction::In, din, sin), (Direction::Out, dout, sout)] {
                if d > 0 {
                    let slot = acc.entry((dir, d)).or_default();
                    slot.0 += s;
                    slot.1 += 1;
                }
            }
        }
    }
    Ok(acc
        .into_iter()
        .map(|((direction, degree), (sum, count))| StrengthPoint {
            direction,
            degree,
            mean_strength: sum / count as f64,
            count,
        })
        .collect())
}

/// `log(w_{t+1} / w_t)` for every pair trading on two consecutive days.
pub fn weight_growth_rates(series: &NetworkSeries) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::InsufficientData("growth rates need at least two days".into()));
    }
    if !series.is_weighted() {
        return Err(Error::UndefinedMetric("growth rates require a weighted series".into()));
    }
    let mut rates = Vec::new();
    for pair in series.networks.windows(2) {
        let (prev, next) = (pair[0].edges(), pair[1].edges());
        let (mut i, mut j) = (0, 0);
        while i < prev.len() && j < next.len() {
            match prev[i].key().cmp(&next[j].key()) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let (w0, w1) = (prev[i].weight, next[j].weight);
                    if w0 * w1 > 0.0 {
                        rates.push((w1 / w0).ln());
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    Ok(rates)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityFraction {
    pub bank: BankId,
    pub window: usize,
    pub f_active: f64,
    /// Change from the previous window; `None` for the first window.
    pub delta: Option<f64>,
}

/// Fraction of active days per bank in consecutive full windows.
pub fn activity_fractions(series: &NetworkSeries, window: usize) -> Result<Vec<ActivityFraction>> {
    if window == 0 {
        return Err(Error::Parameter("window must be at least one day".into()));
    }
    let banks = series.banks();
    let n_windows = series.len() / window;
    let pos: HashMap<BankId, usize> = banks.iter().enumerate().map(|(k, b)| (*b, k)).collect();
    let mut counts = vec![vec![0usize; n_windows]; banks.len()];
    for (d, net) in series.networks.iter().take(n_windows * window).enumerate() {
        for b in net.active_banks() {
            counts[pos[&b]][d / window] += 1;
        }
    }
    let mut out = Vec::with_capacity(banks.len() * n_windows);
    for (k, bank) in banks.iter().enumerate() {
        let mut prev = None;
        for (w, &c) in counts[k].iter().enumerate() {
            let f = c as f64 / window as f64;
            out.push(ActivityFraction { bank: *bank, window: w, f_active: f, delta: prev.map(|p| f - p) });
            prev = Some(f);
        }
    }
    Ok(out)
}
