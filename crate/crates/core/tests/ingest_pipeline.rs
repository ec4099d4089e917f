use std::collections::BTreeSet;
use std::path::PathBuf;

use chrono::NaiveDateTime;
use interbank_core::ingest::{
    build_daily_networks, filter_overnight, largest_weakly_connected_component, parse_transactions, TimeWindow,
    TransactionRecord, TIMESTAMP_FORMAT,
};
use interbank_core::series_io::write_series_csv;
use interbank_core::{BankId, DailyNetwork};
use proptest::prelude::*;

fn sample_log() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample_log.csv")
}

/// Weak connectivity by breadth-first search over undirected adjacency.
fn weakly_connected(net: &DailyNetwork) -> bool {
    let banks: Vec<BankId> = net.active_banks().into_iter().collect();
    let Some(&start) = banks.first() else { return true };
    let mut seen = BTreeSet::from([start]);
    let mut frontier = vec![start];
    while let Some(b) = frontier.pop() {
        for e in net.edges() {
            for (x, y) in [(e.lender, e.borrower), (e.borrower, e.lender)] {
                if x == b && seen.insert(y) {
                    frontier.push(y);
                }
            }
        }
    }
    seen.len() == banks.len()
}

#[test]
fn bundled_log_end_to_end() {
    let bytes = std::fs::read(sample_log()).unwrap();
    let log = parse_transactions(bytes.as_slice()).unwrap();
    assert_eq!(log.rejects.len(), 3);
    assert!(log.rejects.iter().any(|r| r.reason == "self-loop"));

    let all = log.records.len();
    let overnight = filter_overnight(log.records.clone());
    let expected: usize = log.records.iter().filter(|r| r.category == "ON" || r.category == "ONL").count();
    assert_eq!(overnight.len(), expected);
    assert!(overnight.len() < all);

    let out = build_daily_networks(&overnight, TimeWindow::default(), "sample_log.csv").unwrap();
    assert_eq!(out.series.len(), 40);
    for net in &out.series.networks {
        assert!(weakly_connected(net));
        assert!(net.is_weighted());
    }

    let again = build_daily_networks(&filter_overnight(parse_transactions(bytes.as_slice()).unwrap().records), TimeWindow::default(), "sample_log.csv").unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    write_series_csv(&out.series, &mut a).unwrap();
    write_series_csv(&again.series, &mut b).unwrap();
    assert_eq!(a, b);
}

fn record_strategy() -> impl Strategy<Value = TransactionRecord> {
    (0u32..3, 6u32..20, 0u32..60, 0u32..8, 0u32..8, 1u32..10_000).prop_filter_map("self-loop", |(d, h, m, l, b, cents)| {
        (l != b).then(|| TransactionRecord {
            timestamp: NaiveDateTime::parse_from_str(&format!("2024-03-{:02} {h:02}:{m:02}", d + 4), TIMESTAMP_FORMAT).unwrap(),
            lender: format!("L{l}"),
            borrower: format!("L{b}"),
            amount: cents as f64 / 100.0,
            category: "ON".into(),
        })
    })
}

proptest! {
    #[test]
    fn retained_volume_equals_in_component_amounts(records in proptest::collection::vec(record_strategy(), 0..60)) {
        let window = TimeWindow::default();
        let out = build_daily_networks(&records, window, "p").unwrap();
        for (net, date) in out.series.networks.iter().zip(&out.dates) {
            prop_assert!(weakly_connected(net));
            let kept = net.active_banks();
            let id = |name: &str| BankId(out.names.iter().position(|n| n == name).unwrap() as u32 + 1);
            let expected: f64 = records
                .iter()
                .filter(|r| r.timestamp.date() == *date && window.contains(r.timestamp.time()))
                .filter(|r| kept.contains(&id(&r.lender)))
                .map(|r| r.amount)
                .sum();
            prop_assert!((net.total_weight() - expected).abs() < 1e-9 * expected.max(1.0));
            prop_assert_eq!(largest_weakly_connected_component(net).unwrap(), net.clone());
        }
    }
}
