//! Daily directed networks and ordered series of them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{ModelParams, WeightParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BankId(pub u32);

impl fmt::Display for BankId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A directed lending relation `lender -> borrower` for one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub lender: BankId,
    pub borrower: BankId,
    pub weight: f64,
}

impl Edge {
    pub fn new(lender: BankId, borrower: BankId, weight: f64) -> Self {
        Self { lender, borrower, weight }
    }

    pub fn key(&self) -> (BankId, BankId) {
        (self.lender, self.borrower)
    }
}

/// One day's simple directed graph.
///
/// Edges are kept sorted by `(lender, borrower)` with no duplicates and no
/// self-loops. Networks produced by edge generation alone carry unit
/// placeholder weights and `weighted == false`.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyNetwork {
    pub day: usize,
    edges: Vec<Edge>,
    weighted: bool,
}

impl DailyNetwork {
    pub fn new(day: usize, mut edges: Vec<Edge>, weighted: bool) -> Result<Self> {
        edges.sort_by_key(Edge::key);
        for pair in edges.windows(2) {
            if pair[0].key() == pair[1].key() {
                return Err(Error::Format(format!(
                    "day {day}: duplicate edge {} -> {}",
                    pair[0].lender, pair[0].borrower
                )));
            }
        }
        for e in &edges {
            if e.lender == e.borrower {
                return Err(Error::Format(format!("day {day}: self-loop at bank {}", e.lender)));
            }
            if weighted && !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::Format(format!(
                    "day {day}: edge {} -> {} has non-positive weight {}",
                    e.lender, e.borrower, e.weight
                )));
            }
        }
        Ok(Self { day, edges, weighted })
    }

    /// Builds from edges already sorted and validated by the caller.
    pub(crate) fn from_sorted(day: usize, edges: Vec<Edge>, weighted: bool) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0].key() < w[1].key()));
        Self { day, edges, weighted }
    }

    pub fn empty(day: usize) -> Self {
        Self { day, edges: Vec::new(), weighted: true }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<Edge> {
        self.edges
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Number of edges, `M`.
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Banks with at least one edge, sorted.
    pub fn active_banks(&self) -> BTreeSet<BankId> {
        self.edges.iter().flat_map(|e| [e.lender, e.borrower]).collect()
    }

    /// Number of active banks, `N`.
    pub fn n_active(&self) -> usize {
        self.active_banks().len()
    }

    pub fn contains(&self, lender: BankId, borrower: BankId) -> bool {
        self.get(lender, borrower).is_some()
    }

    pub fn get(&self, lender: BankId, borrower: BankId) -> Option<&Edge> {
        self.edges
            .binary_search_by_key(&(lender, borrower), Edge::key)
            .ok()
            .map(|i| &self.edges[i])
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Per-bank `(in_degree, out_degree)` over active banks.
    pub fn degrees(&self) -> BTreeMap<BankId, (usize, usize)> {
        let mut deg: BTreeMap<BankId, (usize, usize)> = BTreeMap::new();
        for e in &self.edges {
            deg.entry(e.lender).or_default().1 += 1;
            deg.entry(e.borrower).or_default().0 += 1;
        }
        deg
    }

    /// Per-bank `(in_strength, out_strength)` over active banks.
    pub fn strengths(&self) -> BTreeMap<BankId, (f64, f64)> {
        let mut s: BTreeMap<BankId, (f64, f64)> = BTreeMap::new();
        for e in &self.edges {
            s.entry(e.lender).or_default().1 += e.weight;
            s.entry(e.borrower).or_default().0 += e.weight;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Simulated { params: ModelParams, weights: WeightParams, seed: u64 },
    Ingested { source: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSeries {
    pub networks: Vec<DailyNetwork>,
    pub provenance: Provenance,
}

impl NetworkSeries {
    pub fn new(networks: Vec<DailyNetwork>, provenance: Provenance) -> Result<Self> {
        for pair in networks.windows(2) {
            if pair[1].day <= pair[0].day {
                return Err(Error::Format(format!(
                    "day indices must be strictly increasing ({} after {})",
                    pair[1].day, pair[0].day
                )));
            }
        }
        Ok(Self { networks, provenance })
    }

    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }

    pub fn is_weighted(&self) -> bool {
        self.networks.iter().all(DailyNetwork::is_weighted)
    }

    /// All banks active on at least one day, sorted.
    pub fn banks(&self) -> Vec<BankId> {
        let set: BTreeSet<BankId> = self.networks.iter().flat_map(|n| n.active_banks()).collect();
        set.into_iter().collect()
    }

    /// Per-day `(N, M)`.
    pub fn size_series(&self) -> Vec<(usize, usize)> {
        self.networks.iter().map(|n| (n.n_active(), n.n_edges())).collect()
    }
}
