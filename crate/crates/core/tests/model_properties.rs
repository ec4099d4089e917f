use interbank_core::model::{generate_daily_edges, simulate_series, BankState, Simulator};
use interbank_core::series_io::write_series_csv;
use interbank_core::{BankId, BankType, ModelParams, WeightParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn short(n_p: usize) -> ModelParams {
    ModelParams { n_p, horizon: 60, burn_in: 20, ..ModelParams::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn activities_stay_in_unit_interval(seed in any::<u64>(), n_p in 1usize..60) {
        let mut sim = Simulator::new(&ModelParams::with_n_p(n_p), seed).unwrap();
        for _ in 0..2000 {
            sim.advance();
            for s in sim.states() {
                prop_assert!((0.0..=1.0).contains(&s.activity));
            }
        }
    }

    #[test]
    fn generated_edges_respect_bank_types(seed in any::<u64>(), n_p in 2usize..80) {
        let mut sim = Simulator::new(&short(n_p), seed).unwrap();
        for day in 0..30 {
            let types: Vec<BankType> = sim.states().iter().map(|s| s.bank_type).collect();
            let (net, probs) = sim.sample_edges(day);
            prop_assert_eq!(net.n_edges(), probs.len());
            for e in net.edges() {
                let (ti, tj) = (types[e.lender.0 as usize - 1], types[e.borrower.0 as usize - 1]);
                prop_assert!(ti != BankType::PureBorrower);
                prop_assert!(tj != BankType::PureLender);
                prop_assert!(!(ti == BankType::Bidirectional && tj == BankType::Bidirectional));
            }
            sim.advance();
        }
    }
}

#[test]
fn frozen_pair_frequency_matches_kernel() {
    let states = vec![
        BankState::new(BankId(1), BankType::PureLender, 0.9),
        BankState::new(BankId(2), BankType::PureBorrower, 0.8),
        BankState::new(BankId(3), BankType::Bidirectional, 0.95),
        BankState::new(BankId(4), BankType::Bidirectional, 1.0),
    ];
    let alpha = 4.0;
    let trials = 40_000;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let pairs = [(1, 2), (1, 3), (3, 2), (4, 2)];
    let mut hits = [0usize; 4];
    for day in 0..trials {
        let net = generate_daily_edges(&states, alpha, day, &mut rng);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if net.contains(BankId(i), BankId(j)) {
                hits[k] += 1;
            }
        }
        assert!(!net.contains(BankId(3), BankId(4)) && !net.contains(BankId(4), BankId(3)));
        assert!(!net.contains(BankId(2), BankId(1)));
    }
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let p = (states[i as usize - 1].activity * states[j as usize - 1].activity).powf(alpha);
        let freq = hits[k] as f64 / trials as f64;
        let bound = 4.5 * (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() <= bound, "pair {i}->{j}: {freq} vs {p}");
    }
}

fn ks_distance(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn activity_marginal_is_stationary_under_window_shift() {
    let params = ModelParams::with_n_p(300);
    let mut sim = Simulator::new(&params, 5).unwrap();
    for _ in 0..params.burn_in {
        sim.advance();
    }
    let mut history: Vec<Vec<f64>> = Vec::new();
    for _ in 0..1100 {
        history.push(sim.states().iter().map(|s| s.activity).collect());
        sim.advance();
    }
    let window = |from: usize| history[from..from + 1000].iter().step_by(10).flatten().copied().collect::<Vec<_>>();
    let d = ks_distance(window(0), window(100));
    assert!(d < 0.05, "KS distance {d}");
}

#[test]
fn simulation_is_a_pure_function_of_inputs() {
    let params = ModelParams { n_p: 60, horizon: 150, burn_in: 100, ..ModelParams::default() };
    let wp = WeightParams::default();
    let bytes = |seed| {
        let mut buf = Vec::new();
        write_series_csv(&simulate_series(&params, &wp, seed).unwrap(), &mut buf).unwrap();
        buf
    };
    assert_eq!(bytes(3), bytes(3));
    assert_ne!(bytes(3), bytes(4));
}

#[test]
fn retained_days_are_contiguous_from_zero() {
    let params = ModelParams { n_p: 40, horizon: 130, burn_in: 100, ..ModelParams::default() };
    let s = simulate_series(&params, &WeightParams::default(), 1).unwrap();
    assert_eq!(s.networks.iter().map(|n| n.day).collect::<Vec<_>>(), (0..30).collect::<Vec<_>>());
}
