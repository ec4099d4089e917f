//! Transaction logs to daily networks.
//!
//! Input is CSV with header `timestamp,lender,borrower,amount,category` and
//! timestamps `YYYY-MM-DD HH:MM`. Per calendar day, in-window transactions on
//! the same ordered pair are summed into one edge and only the largest weakly
//! connected component is kept. Days without in-window transactions are
//! dropped, so the series day index counts retained days.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};

use crate::error::{Error, Result};
use crate::network::{BankId, DailyNetwork, Edge, NetworkSeries, Provenance};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M";
const HEADER: [&str; 5] = ["timestamp", "lender", "borrower", "amount", "category"];

#[derive(Debug, Clone, PartialEq)]
pub struct TransactionRecord {
    pub timestamp: NaiveDateTime,
    pub lender: String,
    pub borrower: String,
    pub amount: f64,
    pub category: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    /// 1-based line number in the input, header included.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedLog {
    pub records: Vec<TransactionRecord>,
    pub rejects: Vec<Reject>,
}

pub fn parse_transactions<R: Read>(reader: R) -> Result<ParsedLog> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Format(format!("expected header {:?}, got {:?}", HEADER.join(","), header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = ParsedLog::default();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row) {
            Ok(rec) => out.records.push(rec),
            Err(reason) => out.rejects.push(Reject { line, reason }),
        }
    }
    Ok(out)
}

fn parse_row(row: &csv::StringRecord) -> std::result::Result<TransactionRecord, String> {
    if row.len() != HEADER.len() {
        return Err(format!("expected {} fields, got {}", HEADER.len(), row.len()));
    }
    let timestamp = NaiveDateTime::parse_from_str(&row[0], TIMESTAMP_FORMAT)
        .map_err(|_| format!("unparseable timestamp {:?}", &row[0]))?;
    let (lender, borrower) = (row[1].to_string(), row[2].to_string());
    if lender.is_empty() || borrower.is_empty() {
        return Err("empty bank id".into());
    }
    if lender == borrower {
        return Err("self-loop".into());
    }
    let amount: f64 = row[3].parse().map_err(|_| format!("unparseable amount {:?}", &row[3]))?;
    if !(amount > 0.0 && amount.is_finite()) {
        return Err(format!("non-positive amount {amount}"));
    }
    Ok(TransactionRecord { timestamp, lender, borrower, amount, category: row[4].to_string() })
}

pub fn default_categories() -> BTreeSet<String> {
    ["ON", "ONL"].into_iter().map(String::from).collect()
}

pub fn filter_categories(records: Vec<TransactionRecord>, allow: &BTreeSet<String>) -> Vec<TransactionRecord> {
    records.into_iter().filter(|r| allow.contains(&r.category)).collect()
}

/// Keeps the `ON` and `ONL` categories.
pub fn filter_overnight(records: Vec<TransactionRecord>) -> Vec<TransactionRecord> {
    filter_categories(records, &default_categories())
}

/// Half-open time-of-day window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    pub start: NaiveTime,
    pub end: NaiveTime,
}

impl Default for TimeWindow {
    fn default() -> Self {
        Self { start: NaiveTime::from_hms_opt(8, 0, 0).unwrap(), end: NaiveTime::from_hms_opt(18, 0, 0).unwrap() }
    }
}

impl TimeWindow {
    pub fn contains(&self, t: NaiveTime) -> bool {
        self.start <= t && t < self.end
    }
}

/// Series plus the bank names, where `names[k]` is the name of `BankId(k + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedSeries {
    pub series: NetworkSeries,
    pub names: Vec<String>,
    /// Calendar date of each retained network.
    pub dates: Vec<NaiveDate>,
}

pub fn build_daily_networks(records: &[TransactionRecord], window: TimeWindow, source: &str) -> Result<IngestedSeries> {
    let in_window: Vec<&TransactionRecord> = records.iter().filter(|r| window.contains(r.timestamp.time())).collect();
    let names: Vec<String> = in_window
        .iter()
        .flat_map(|r| [r.lender.clone(), r.borrower.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let ids: HashMap<&str, BankId> =
        names.iter().enumerate().map(|(k, n)| (n.as_str(), BankId(k as u32 + 1))).collect();

    let mut by_day: BTreeMap<NaiveDate, BTreeMap<(BankId, BankId), f64>> = BTreeMap::new();
    for r in in_window {
        let key = (ids[r.lender.as_str()], ids[r.borrower.as_str()]);
        *by_day.entry(r.timestamp.date()).or_default().entry(key).or_insert(0.0) += r.amount;
    }

    let mut networks = Vec::with_capacity(by_day.len());
    let mut dates = Vec::with_capacity(by_day.len());
    for (day, (date, pairs)) in by_day.into_iter().enumerate() {
        let edges = pairs.into_iter().map(|((l, b), w)| Edge::new(l, b, w)).collect();
        let net = DailyNetwork::new(day, edges, true)?;
        networks.push(largest_weakly_connected_component(&net)?);
        dates.push(date);
    }
    let series = NetworkSeries::new(networks, Provenance::Ingested { source: source.to_string() })?;
    Ok(IngestedSeries { series, names, dates })
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Ties on size go to the larger total weight, then to the smallest bank id.
pub fn largest_weakly_connected_component(net: &DailyNetwork) -> Result<DailyNetwork> {
    if net.is_empty() {
        return Err(Error::UndefinedMetric("largest component of an empty network".into()));
    }
    let banks: Vec<BankId> = net.active_banks().into_iter().collect();
    let index = |b: BankId| banks.binary_search(&b).expect("edge endpoint is active");
    let mut parent: Vec<usize> = (0..banks.len()).collect();
    for e in net.edges() {
        let (a, b) = (find(&mut parent, index(e.lender)), find(&mut parent, index(e.borrower)));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    // root -> (size, weight); banks are sorted so the smallest member id
    // orders the same way as the root index
    let mut comps: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for i in 0..banks.len() {
        let r = find(&mut parent, i);
        comps.entry(r).or_default().0 += 1;
    }
    for e in net.edges() {
        let r = find(&mut parent, index(e.lender));
        comps.get_mut(&r).expect("root registered").1 += e.weight;
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for (&root, &(size, weight)) in &comps {
        let better = match best {
            None => true,
            Some((_, s, w)) => size > s || (size == s && weight > w),
        };
        if better {
            best = Some((root, size, weight));
        }
    }
    let root = best.map(|b| b.0).expect("nonempty network has a component");
    let kept: Vec<Edge> = net.edges().iter().filter(|e| find(&mut parent, index(e.lender)) == root).copied().collect();
    Ok(DailyNetwork::from_sorted(net.day, kept, net.is_weighted()))
}
