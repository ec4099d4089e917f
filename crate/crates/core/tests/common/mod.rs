//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use interbank_core::{BankId, DailyNetwork, Edge, NetworkSeries, Provenance};
use proptest::prelude::*;

/// Composite 5-point Gauss–Legendre on `panels` equal panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * h;
            X.iter().zip(W).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// `∫_0^z t^(x-1) (1-t)^(y-1) dt` for `z < 1`.
pub fn incomplete_beta_by_quadrature(z: f64, x: f64, y: f64) -> f64 {
    if x < 1.0 {
        // t = u^(1/x) removes the singularity at 0
        let f = |u: f64| if u <= 0.0 { 0.0 } else { (1.0 - u.powf(1.0 / x)).powf(y - 1.0) / x };
        gauss_legendre(f, 0.0, z.powf(x), 20_000)
    } else {
        gauss_legendre(|t| t.powf(x - 1.0) * (1.0 - t).powf(y - 1.0), 0.0, z, 20_000)
    }
}

pub const INCOMPLETE_BETA_CASES: [(f64, f64, f64); 6] =
    [(0.3, 2.0, 3.0), (0.8, 5.0, 0.25), (0.999, 1.5, 0.5), (0.5, 30.0, 0.125), (0.1, 0.5, 0.5), (0.8, 300.0, 0.25)];

pub fn network_from_mask(day: usize, n: u32, mask: &[bool]) -> DailyNetwork {
    let mut edges = Vec::new();
    let mut k = 0;
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                if mask[k] {
                    edges.push(Edge::new(BankId(i), BankId(j), 1.0 + k as f64));
                }
                k += 1;
            }
        }
    }
    DailyNetwork::new(day, edges, true).unwrap()
}

/// Small random series over up to six banks.
pub fn series_strategy() -> impl Strategy<Value = NetworkSeries> {
    (2u32..7, 1usize..14).prop_flat_map(|(n, days)| {
        let pairs = (n * (n - 1)) as usize;
        proptest::collection::vec(proptest::collection::vec(proptest::bool::weighted(0.3), pairs), days).prop_map(
            move |masks| {
                let nets = masks.iter().enumerate().map(|(d, m)| network_from_mask(d, n, m)).collect();
                NetworkSeries::new(nets, Provenance::Ingested { source: "proptest".into() }).unwrap()
            },
        )
    })
}

pub fn series_of(nets: Vec<DailyNetwork>) -> NetworkSeries {
    NetworkSeries::new(nets, Provenance::Ingested { source: String::new() }).unwrap()
}

pub fn net_of(day: usize, edges: &[(u32, u32)]) -> DailyNetwork {
    DailyNetwork::new(day, edges.iter().map(|&(l, b)| Edge::new(BankId(l), BankId(b), 1.0)).collect(), true).unwrap()
}
