//! The dynamical fitness model of daily interbank networks.
//!
//! Each of `n_p` banks has a fixed role and an activity level
//! `a = |cos(theta)|` in `[0, 1]`. Every day a directed edge `i -> j` forms
//! independently with probability `(a_i a_j)^alpha` when the role pair is
//! admissible; afterwards each bank's angle takes a small uniform random
//! step, or with probability `a^c2 / c1` its activity is redrawn uniformly.
//!
//! # Draw order
//!
//! A simulation owns one [`ChaCha8Rng`] seeded from the user seed. Variates
//! are consumed in this fixed order:
//!
//! 1. bank types (a shuffle of the largest-remainder counts),
//! 2. initial activities, one uniform per bank in id order,
//! 3. then for each day:
//!    - one uniform per admissible ordered pair in `(lender, borrower)`
//!      lexicographic order (only on days whose network is materialised),
//!    - weight variates, per edge in the same order,
//!    - two variates per bank in id order for the activity update.
//!
//! Activity dynamics do not depend on the realised edges, so days that are
//! discarded as burn-in skip edge sampling entirely. The last burn-in day is
//! still materialised so that the first retained day sees its predecessor's
//! weights.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::network::{BankId, DailyNetwork, Edge, NetworkSeries, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BankType {
    PureLender,
    PureBorrower,
    Bidirectional,
}

impl BankType {
    /// Whether `self -> other` may carry a loan.
    pub fn may_lend_to(self, other: BankType) -> bool {
        use BankType::*;
        self != PureBorrower && other != PureLender && !(self == Bidirectional && other == Bidirectional)
    }
}

/// Population shares `(f_B, f_L, f_D)` of pure borrowers, pure lenders and
/// bidirectional traders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeFractions {
    pub borrower: f64,
    pub lender: f64,
    pub bidirectional: f64,
}

impl Default for TypeFractions {
    fn default() -> Self {
        Self { borrower: 0.56, lender: 0.34, bidirectional: 0.1 }
    }
}

impl TypeFractions {
    pub fn new(borrower: f64, lender: f64, bidirectional: f64) -> Self {
        Self { borrower, lender, bidirectional }
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.borrower, self.lender, self.bidirectional];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::Parameter(format!("type fractions must lie in [0, 1], got {parts:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!("type fractions must sum to 1, got {sum}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Potential market size.
    pub n_p: usize,
    /// Edge-kernel exponent.
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    pub fractions: TypeFractions,
    /// Half-width of the uniform angle step (in turns).
    pub walk_half_width: f64,
    pub horizon: usize,
    pub burn_in: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n_p: 300,
            alpha: 4.0,
            c1: 2000.0,
            c2: 2.0,
            fractions: TypeFractions::default(),
            walk_half_width: 0.002,
            horizon: 6500,
            burn_in: 5000,
        }
    }
}

impl ModelParams {
    pub fn with_n_p(n_p: usize) -> Self {
        Self { n_p, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_p == 0 {
            return Err(Error::Parameter("n_p must be at least 1".into()));
        }
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::Parameter(format!("alpha must be >= 1, got {}", self.alpha)));
        }
        if !(self.c1 >= 1.0 && self.c1.is_finite()) {
            return Err(Error::Parameter(format!("c1 must be >= 1 so that h(a) <= 1, got {}", self.c1)));
        }
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return Err(Error::Parameter(format!("c2 must be positive, got {}", self.c2)));
        }
        if !(self.walk_half_width >= 0.0 && self.walk_half_width.is_finite()) {
            return Err(Error::Parameter(format!(
                "walk_half_width must be a finite non-negative number, got {}",
                self.walk_half_width
            )));
        }
        self.fractions.validate()?;
        if self.horizon <= self.burn_in {
            return Err(Error::Parameter(format!(
                "horizon ({}) must exceed burn_in ({})",
                self.horizon, self.burn_in
            )));
        }
        Ok(())
    }

    /// Reset probability `h(a) = a^c2 / c1`.
    pub fn reset_probability(&self, activity: f64) -> f64 {
        if self.c2.fract() == 0.0 && self.c2.abs() <= 64.0 {
            activity.powi(self.c2 as i32) / self.c1
        } else {
            activity.powf(self.c2) / self.c1
        }
    }

    /// Number of retained days, `horizon - burn_in`.
    pub fn effective_days(&self) -> usize {
        self.horizon.saturating_sub(self.burn_in)
    }

    pub fn write_keys(&self, kv: &mut KeyValues) {
        kv.set("n_p", self.n_p);
        kv.set("alpha", self.alpha);
        kv.set("c1", self.c1);
        kv.set("c2", self.c2);
        kv.set("f_borrower", self.fractions.borrower);
        kv.set("f_lender", self.fractions.lender);
        kv.set("f_bidirectional", self.fractions.bidirectional);
        kv.set("walk_half_width", self.walk_half_width);
        kv.set("horizon", self.horizon);
        kv.set("burn_in", self.burn_in);
    }

    /// Reads any keys present in `kv`, leaving the rest at their defaults.
    pub fn from_keys(kv: &KeyValues) -> Result<Self> {
        let mut p = Self::default();
        if let Some(v) = kv.parsed("n_p")? {
            p.n_p = v;
        }
        if let Some(v) = kv.parsed("alpha")? {
            p.alpha = v;
        }
        if let Some(v) = kv.parsed("c1")? {
            p.c1 = v;
        }
        if let Some(v) = kv.parsed("c2")? {
            p.c2 = v;
        }
        if let Some(v) = kv.parsed("f_borrower")? {
            p.fractions.borrower = v;
        }
        if let Some(v) = kv.parsed("f_lender")? {
            p.fractions.lender = v;
        }
        if let Some(v) = kv.parsed("f_bidirectional")? {
            p.fractions.bidirectional = v;
        }
        if let Some(v) = kv.parsed("walk_half_width")? {
            p.walk_half_width = v;
        }
        if let Some(v) = kv.parsed("horizon")? {
            p.horizon = v;
        }
        if let Some(v) = kv.parsed("burn_in")? {
            p.burn_in = v;
        }
        Ok(p)
    }
}

/// Edge-weight dynamics: a persisting edge keeps yesterday's weight with
/// probability `1 - q`; otherwise (and for new edges) the weight is
/// `kappa * nu * p` with `nu` Pareto-distributed, density `∝ nu^-eta` on
/// `[nu_min, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightParams {
    pub q: f64,
    pub kappa: f64,
    pub eta: f64,
    pub nu_min: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        Self { q: 0.5, kappa: 80.0, eta: 3.3, nu_min: 1.0 }
    }
}

impl WeightParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::Parameter(format!("q must lie in [0, 1], got {}", self.q)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Parameter(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.eta > 1.0 && self.eta.is_finite()) {
            return Err(Error::Parameter(format!("eta must exceed 1, got {}", self.eta)));
        }
        if !(self.nu_min > 0.0 && self.nu_min.is_finite()) {
            return Err(Error::Parameter(format!("nu_min must be positive, got {}", self.nu_min)));
        }
        Ok(())
    }

    /// Inverse-CDF draw of `nu`.
    pub fn sample_nu<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.nu_min * (1.0 - u).powf(-1.0 / (self.eta - 1.0))
    }

    pub fn write_keys(&self, kv: &mut KeyValues) {
        kv.set("q", self.q);
        kv.set("kappa", self.kappa);
        kv.set("eta", self.eta);
        kv.set("nu_min", self.nu_min);
    }

    pub fn from_keys(kv: &KeyValues) -> Result<Self> {
        let mut w = Self::default();
        if let Some(v) = kv.parsed("q")? {
            w.q = v;
        }
        if let Some(v) = kv.parsed("kappa")? {
            w.kappa = v;
        }
        if let Some(v) = kv.parsed("eta")? {
            w.eta = v;
        }
        if let Some(v) = kv.parsed("nu_min")? {
            w.nu_min = v;
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankState {
    pub id: BankId,
    pub bank_type: BankType,
    pub activity: f64,
    pub angle: f64,
}

impl BankState {
    /// State with angle `arccos(activity)`.
    pub fn new(id: BankId, bank_type: BankType, activity: f64) -> Self {
        Self { id, bank_type, activity, angle: activity.acos() }
    }
}

/// Type counts by largest-remainder rounding, in `(borrower, lender, bidirectional)` order.
pub fn type_counts(n_p: usize, fractions: &TypeFractions) -> Result<[usize; 3]> {
    fractions.validate()?;
    let quotas = [fractions.borrower, fractions.lender, fractions.bidirectional].map(|f| f * n_p as f64);
    let mut counts = quotas.map(|q| q.floor() as usize);
    let assigned: usize = counts.iter().sum();
    let mut order = [0usize, 1, 2];
    // stable: ties go to the earlier category
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra)
    });
    for &k in order.iter().take(n_p.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    Ok(counts)
}

/// Assigns a fixed role to each of `n_p` banks, in randomised order.
pub fn assign_types<R: Rng + ?Sized>(n_p: usize, fractions: &TypeFractions, rng: &mut R) -> Result<Vec<BankType>> {
    if n_p == 0 {
        return Err(Error::Parameter("n_p must be at least 1".into()));
    }
    let [nb, nl, nd] = type_counts(n_p, fractions)?;
    let mut types = Vec::with_capacity(n_p);
    types.extend(std::iter::repeat_n(BankType::PureBorrower, nb));
    types.extend(std::iter::repeat_n(BankType::PureLender, nl));
    types.extend(std::iter::repeat_n(BankType::Bidirectional, nd));
    types.shuffle(rng);
    Ok(types)
}

/// Probability that bank `i` lends to bank `j` on a given day.
pub fn edge_probability(a_i: f64, a_j: f64, type_i: BankType, type_j: BankType, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a_i) || !(0.0..=1.0).contains(&a_j) {
        return Err(Error::Domain(format!("activities must lie in [0, 1], got ({a_i}, {a_j})")));
    }
    if alpha.is_nan() || alpha < 1.0 {
        return Err(Error::Domain(format!("alpha must be >= 1, got {alpha}")));
    }
    if type_i.may_lend_to(type_j) {
        Ok((a_i * a_j).powf(alpha))
    } else {
        Ok(0.0)
    }
}

/// Samples one day's unweighted network; returns the network and the edge
/// probability of each realised edge, aligned with `network.edges()`.
pub fn generate_daily_edges_with_probs<R: Rng + ?Sized>(
    states: &[BankState],
    alpha: f64,
    day: usize,
    rng: &mut R,
) -> (DailyNetwork, Vec<f64>) {
    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by_key(|&k| states[k].id);
    let powered: Vec<f64> = states.iter().map(|s| s.activity.powf(alpha)).collect();
    let mut edges = Vec::new();
    let mut probs = Vec::new();
    for &i in &order {
        let si = &states[i];
        if si.bank_type == BankType::PureBorrower {
            continue;
        }
        for &j in &order {
            let sj = &states[j];
            if i == j || !si.bank_type.may_lend_to(sj.bank_type) {
                continue;
            }
            let p = powered[i] * powered[j];
            let u: f64 = rng.random();
            if u < p {
                edges.push(Edge::new(si.id, sj.id, 1.0));
                probs.push(p);
            }
        }
    }
    (DailyNetwork::from_sorted(day, edges, false), probs)
}

/// Samples one day's unweighted network from the current bank states.
pub fn generate_daily_edges<R: Rng + ?Sized>(states: &[BankState], alpha: f64, day: usize, rng: &mut R) -> DailyNetwork {
    generate_daily_edges_with_probs(states, alpha, day, rng).0
}

/// One day of activity dynamics for a single bank. Always consumes two variates.
pub fn update_activity<R: Rng + ?Sized>(state: &BankState, params: &ModelParams, rng: &mut R) -> BankState {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let mut next = *state;
    if u < params.reset_probability(state.activity) {
        next.activity = v;
        next.angle = v.acos();
    } else {
        let eps = params.walk_half_width * (2.0 * v - 1.0);
        next.angle = state.angle + 2.0 * PI * eps;
        next.activity = next.angle.cos().abs();
    }
    next
}

/// Attaches weights to `current` given yesterday's network.
///
/// `edge_probs` must hold `p_ij` for every edge of `current`.
pub fn assign_weights<R: Rng + ?Sized>(
    prev: Option<&DailyNetwork>,
    current: &DailyNetwork,
    wp: &WeightParams,
    edge_probs: &HashMap<(BankId, BankId), f64>,
    rng: &mut R,
) -> Result<DailyNetwork> {
    let probs = current
        .edges()
        .iter()
        .map(|e| {
            edge_probs.get(&e.key()).copied().ok_or_else(|| {
                Error::Internal(format!("no edge probability for {} -> {}", e.lender, e.borrower))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(assign_weights_aligned(prev, current, wp, &probs, rng))
}

pub(crate) fn assign_weights_aligned<R: Rng + ?Sized>(
    prev: Option<&DailyNetwork>,
    current: &DailyNetwork,
    wp: &WeightParams,
    probs: &[f64],
    rng: &mut R,
) -> DailyNetwork {
    debug_assert_eq!(probs.len(), current.n_edges());
    let prev_edges = prev.map(DailyNetwork::edges).unwrap_or(&[]);
    let mut cursor = 0;
    let mut out = Vec::with_capacity(current.n_edges());
    for (edge, &p) in current.edges().iter().zip(probs) {
        while cursor < prev_edges.len() && prev_edges[cursor].key() < edge.key() {
            cursor += 1;
        }
        let persisted = prev_edges.get(cursor).filter(|e| e.key() == edge.key());
        let weight = match persisted {
            Some(old) => {
                let u: f64 = rng.random();
                if u < wp.q {
                    wp.kappa * wp.sample_nu(rng) * p
                } else {
                    old.weight
                }
            }
            None => wp.kappa * wp.sample_nu(rng) * p,
        };
        out.push(Edge { weight, ..*edge });
    }
    DailyNetwork::from_sorted(current.day, out, true)
}

/// Stepwise driver of the typed model.
pub struct Simulator {
    params: ModelParams,
    states: Vec<BankState>,
    rng: ChaCha8Rng,
}

impl Simulator {
    pub fn new(params: &ModelParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let types = assign_types(params.n_p, &params.fractions, &mut rng)?;
        let states = types
            .into_iter()
            .enumerate()
            .map(|(k, t)| {
                let a: f64 = rng.random();
                BankState::new(BankId(k as u32 + 1), t, a)
            })
            .collect();
        Ok(Self { params: params.clone(), states, rng })
    }

    pub fn states(&self) -> &[BankState] {
        &self.states
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn sample_edges(&mut self, day: usize) -> (DailyNetwork, Vec<f64>) {
        generate_daily_edges_with_probs(&self.states, self.params.alpha, day, &mut self.rng)
    }

    pub fn sample_weights(&mut self, prev: Option<&DailyNetwork>, current: &DailyNetwork, probs: &[f64], wp: &WeightParams) -> DailyNetwork {
        assign_weights_aligned(prev, current, wp, probs, &mut self.rng)
    }

    /// Active-bank and edge counts of a freshly sampled day, without
    /// materialising the network.
    pub fn sample_sizes(&mut self) -> (usize, usize) {
        let alpha = self.params.alpha;
        let powered: Vec<f64> = self.states.iter().map(|s| s.activity.powf(alpha)).collect();
        let mut active = vec![false; self.states.len()];
        let mut m = 0;
        for (i, si) in self.states.iter().enumerate() {
            if si.bank_type == BankType::PureBorrower {
                continue;
            }
            for (j, sj) in self.states.iter().enumerate() {
                if i == j || !si.bank_type.may_lend_to(sj.bank_type) {
                    continue;
                }
                let u: f64 = self.rng.random();
                if u < powered[i] * powered[j] {
                    m += 1;
                    active[i] = true;
                    active[j] = true;
                }
            }
        }
        (active.iter().filter(|&&a| a).count(), m)
    }

    pub fn advance(&mut self) {
        for k in 0..self.states.len() {
            self.states[k] = update_activity(&self.states[k], &self.params, &mut self.rng);
        }
    }
}

/// Runs the model for `horizon` days and returns the days after burn-in,
/// re-indexed from 0.
pub fn simulate_series(params: &ModelParams, wp: &WeightParams, seed: u64) -> Result<NetworkSeries> {
    wp.validate()?;
    let mut sim = Simulator::new(params, seed)?;
    let first_materialised = params.burn_in.saturating_sub(1);
    let mut prev: Option<DailyNetwork> = None;
    let mut networks = Vec::with_capacity(params.effective_days());
    for t in 0..params.horizon {
        if t >= first_materialised {
            let day = t.saturating_sub(params.burn_in);
            let (net, probs) = sim.sample_edges(day);
            let weighted = sim.sample_weights(prev.as_ref(), &net, &probs, wp);
            if t >= params.burn_in {
                networks.push(weighted.clone());
            }
            prev = Some(weighted);
        }
        if t + 1 < params.horizon {
            sim.advance();
        }
    }
    NetworkSeries::new(networks, Provenance::Simulated { params: params.clone(), weights: wp.clone(), seed })
}

/// Per-day `(N, M)` of a typed-model run, sampled only on the given
/// retained-day offsets (`0..horizon - burn_in`, ascending).
pub fn simulate_sizes(params: &ModelParams, seed: u64, sample_days: &[usize]) -> Result<Vec<(usize, usize)>> {
    if sample_days.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("sample days must be strictly increasing".into()));
    }
    if sample_days.last().is_some_and(|&d| d >= params.effective_days()) {
        return Err(Error::Parameter("sample day beyond the retained window".into()));
    }
    let mut sim = Simulator::new(params, seed)?;
    let mut out = Vec::with_capacity(sample_days.len());
    let mut next = sample_days.iter().peekable();
    for t in 0..params.horizon {
        if t >= params.burn_in && next.peek().is_some_and(|&&d| d + params.burn_in == t) {
            next.next();
            out.push(sim.sample_sizes());
        }
        if next.peek().is_none() {
            break;
        }
        sim.advance();
    }
    Ok(out)
}

/// One realisation of the untyped, undirected fitness model with i.i.d.
/// uniform activities; returns `(N, M)`.
pub fn sample_untyped_sizes<R: Rng + ?Sized>(n_p: usize, alpha: f64, rng: &mut R) -> (usize, usize) {
    let powered: Vec<f64> = (0..n_p).map(|_| rng.random::<f64>().powf(alpha)).collect();
    let mut active = vec![false; n_p];
    let mut m = 0;
    for i in 0..n_p {
        for j in (i + 1)..n_p {
            let u: f64 = rng.random();
            if u < powered[i] * powered[j] {
                m += 1;
                active[i] = true;
                active[j] = true;
            }
        }
    }
    (active.iter().filter(|&&a| a).count(), m)
}
