use std::collections::{BTreeSet, HashSet};

use interbank_core::metrics::{
    bipartivity, duration_interval_samples, is_bipartite, turnover_rate, CcdfTable, RunSubject,
};
use interbank_core::{BankId, DailyNetwork};
use proptest::prelude::*;

mod common;
use common::{net_of, series_of as ingested, series_strategy};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bipartivity_is_one_exactly_for_bipartite_graphs(series in series_strategy()) {
        for net in &series.networks {
            match bipartivity(net) {
                Ok(b) => {
                    prop_assert!(b > 0.5 && b <= 1.0 + 1e-12, "b = {}", b);
                    prop_assert_eq!((b - 1.0).abs() < 1e-9, is_bipartite(net));
                }
                Err(_) => prop_assert!(net.is_empty()),
            }
        }
    }

    #[test]
    fn active_days_are_conserved(series in series_strategy()) {
        for subject in RunSubject::ALL {
            let s = duration_interval_samples(&series, subject).unwrap();
            let mut active = 0usize;
            let mut subjects: HashSet<(BankId, BankId)> = HashSet::new();
            for net in &series.networks {
                let mut today: BTreeSet<(BankId, BankId)> = BTreeSet::new();
                for e in net.edges() {
                    match subject {
                        RunSubject::Pair => { today.insert(e.key()); }
                        RunSubject::NodeActive => {
                            today.insert((e.lender, e.lender));
                            today.insert((e.borrower, e.borrower));
                        }
                        RunSubject::NodeIn => { today.insert((e.borrower, e.borrower)); }
                        RunSubject::NodeOut => { today.insert((e.lender, e.lender)); }
                    }
                }
                active += today.len();
                subjects.extend(today);
            }
            let counted: u32 = s.durations.iter().chain(&s.censored_durations).sum();
            prop_assert_eq!(counted as usize, active);
            // one fewer gap than runs per subject
            let runs = s.durations.len() + s.censored_durations.len();
            prop_assert_eq!(s.intervals.len() + subjects.len(), runs);
            prop_assert!(s.intervals.iter().all(|&g| g >= 1));
        }
    }

    #[test]
    fn ccdf_is_a_survival_function(samples in proptest::collection::vec(0.0f64..1e3, 1..200)) {
        let t = CcdfTable::from_samples(&samples);
        prop_assert_eq!(t.points[0].1, 1.0);
        for w in t.points.windows(2) {
            prop_assert!(w[0].0 < w[1].0);
            prop_assert!(w[0].1 > w[1].1);
        }
        prop_assert!(t.points.last().unwrap().1 > 0.0);
        for &x in &samples {
            let direct = samples.iter().filter(|&&y| y >= x).count() as f64 / samples.len() as f64;
            prop_assert!((t.eval(x) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn metrics_are_pure(series in series_strategy()) {
        for subject in RunSubject::ALL {
            prop_assert_eq!(duration_interval_samples(&series, subject).unwrap(), duration_interval_samples(&series, subject).unwrap());
        }
        for net in &series.networks {
            let (a, b) = (bipartivity(net).ok(), bipartivity(net).ok());
            prop_assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
        }
    }
}

#[test]
fn jaccard_hand_cases() {
    let same = ingested(vec![net_of(0, &[(1, 2)]), net_of(1, &[(2, 1)]), net_of(2, &[(1, 2)])]);
    assert_eq!(turnover_rate(&same).unwrap(), 0.0);
    let disjoint = ingested(vec![net_of(0, &[(1, 2)]), net_of(1, &[(3, 4)])]);
    assert_eq!(turnover_rate(&disjoint).unwrap(), 1.0);
    let shifted = ingested(vec![net_of(0, &[(1, 2)]), net_of(1, &[(2, 3)])]);
    assert!((turnover_rate(&shifted).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    let with_empty = ingested(vec![net_of(0, &[(1, 2)]), net_of(1, &[]), net_of(2, &[]), net_of(3, &[(1, 2)])]);
    // empty-to-empty skipped, the two transitions through emptiness count 1
    assert_eq!(turnover_rate(&with_empty).unwrap(), 1.0);
}

#[test]
fn pair_runs_hand_case() {
    let days = [false, true, true, true, false, true, false];
    let nets = days.iter().enumerate().map(|(d, &on)| if on { net_of(d, &[(1, 2)]) } else { DailyNetwork::empty(d) }).collect();
    let s = duration_interval_samples(&ingested(nets), RunSubject::Pair).unwrap();
    assert_eq!(s.durations, vec![1, 3]);
    assert_eq!(s.intervals, vec![1]);
}
