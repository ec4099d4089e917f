use interbank_core::config::KeyValues;
use interbank_core::inference::{
    build_conditional_histogram, default_c_grid, default_n_hat_grid, estimate_np, fit_power_law, fit_scaling,
    fit_weibull_rank, power_law_log_likelihood, power_law_score, ConditionalHistogram, HistogramConfig,
};
use interbank_core::{Error, ModelParams, WeightParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn weibull_samples(c: f64, lambda: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| lambda * (-(1.0 - rng.random::<f64>()).ln()).powf(1.0 / c)).collect()
}

/// Inverse-CDF sampler for `p(x) ∝ x^-s` on `x >= 1`, with the normaliser
/// summed directly up to `table_len` and a continuous tail beyond it.
fn discrete_power_law(s: f64, n: usize, seed: u64) -> Vec<u64> {
    let table_len = 200_000usize;
    let mut cdf = Vec::with_capacity(table_len);
    let mut acc = 0.0;
    for x in 1..=table_len {
        acc += (x as f64).powf(-s);
        cdf.push(acc);
    }
    let tail = (table_len as f64 + 0.5).powf(1.0 - s) / (s - 1.0);
    let total = acc + tail;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            if u < acc {
                cdf.partition_point(|&c| c < u) as u64 + 1
            } else {
                let v: f64 = rng.random();
                ((table_len as f64 + 0.5) * (1.0 - v).powf(-1.0 / (s - 1.0))).round() as u64
            }
        })
        .collect()
}

#[test]
fn weibull_recovery_on_large_synthetic_sample() {
    let xs = weibull_samples(0.5, 10.0, 100_000, 2024);
    let fit = fit_weibull_rank(&xs, &default_c_grid(), &default_n_hat_grid(xs.len())).unwrap();
    assert!((fit.c - 0.5).abs() <= 0.05, "c = {}", fit.c);
    assert!((fit.lambda / 10.0 - 1.0).abs() <= 0.10, "lambda = {}", fit.lambda);
}

#[test]
fn weibull_r2_is_unimodal_around_truth() {
    let xs = weibull_samples(0.5, 10.0, 50_000, 8);
    let fit = fit_weibull_rank(&xs, &default_c_grid(), &default_n_hat_grid(xs.len())).unwrap();
    let r2_at = |c: f64| fit_weibull_rank(&xs, &[c], &[fit.n_hat]).unwrap().r2;
    assert!(fit.r2 > r2_at(fit.c - 0.1));
    assert!(fit.r2 > r2_at(fit.c + 0.1));
}

#[test]
fn power_law_recovery_from_independent_sampler() {
    let xs = discrete_power_law(2.7, 100_000, 11);
    let fit = fit_power_law(&xs).unwrap();
    assert!((fit.exponent - 2.7).abs() <= 0.1, "exponent = {} at x_min {}", fit.exponent, fit.x_min);
}

#[test]
fn power_law_score_and_likelihood_are_consistent() {
    let xs = discrete_power_law(2.4, 5_000, 3);
    let fit = fit_power_law(&xs).unwrap();
    let tail: Vec<u64> = xs.iter().copied().filter(|&x| x >= fit.x_min).collect();
    assert!(power_law_score(&tail, fit.exponent, fit.x_min).unwrap().abs() < 1e-6);
    for s in [1.8, 2.4, 3.1] {
        let h = 1e-5;
        let fd = (power_law_log_likelihood(&tail, s + h, fit.x_min).unwrap()
            - power_law_log_likelihood(&tail, s - h, fit.x_min).unwrap())
            / (2.0 * h);
        let score = power_law_score(&tail, s, fit.x_min).unwrap() * tail.len() as f64;
        assert!((fd - score).abs() < 1e-5 * fd.abs().max(1.0), "s={s}: {fd} vs {score}");
    }
    let ll = |s| power_law_log_likelihood(&tail, s, fit.x_min).unwrap();
    assert!(ll(fit.exponent) > ll(fit.exponent - 0.05) && ll(fit.exponent) > ll(fit.exponent + 0.05));
}

#[test]
fn scaling_on_superlinear_synthetic_cloud() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts: Vec<(f64, f64)> = (0..2000)
        .map(|_| {
            let n = rng.random_range(20.0..200.0);
            (n, 0.3 * f64::powf(n, 1.5) * (0.1 * (rng.random::<f64>() - 0.5)).exp())
        })
        .collect();
    let fit = fit_scaling(&pts).unwrap();
    assert!((fit.beta - 1.5).abs() < 0.01);
}

fn toy(grid: Vec<usize>, prob: Vec<Vec<f64>>, n_bins: usize, m_bins: usize) -> ConditionalHistogram {
    ConditionalHistogram { n_p_grid: grid, bin_widths: (5, 20), n_bins, m_bins, prob, replicates: 100, params_fingerprint: KeyValues::new() }
}

proptest! {
    #[test]
    fn estimate_is_invariant_under_grid_relabelling(
        rows in proptest::collection::vec(proptest::collection::vec(0u8..6, 6), 2..8),
        perm_seed in any::<u64>(),
        n in 0usize..10,
        m in 0usize..60,
    ) {
        let grid: Vec<usize> = (0..rows.len()).map(|k| 20 + 10 * k).collect();
        let prob: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64 + 1.0).collect()).collect();
        let base = toy(grid.clone(), prob.clone(), 2, 3);
        let mut order: Vec<usize> = (0..grid.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let shuffled = toy(order.iter().map(|&k| grid[k]).collect(), order.iter().map(|&k| prob[k].clone()).collect(), 2, 3);
        match (estimate_np(&base, n, m), estimate_np(&shuffled, n, m)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(Error::OutOfRange { .. }), Err(Error::OutOfRange { .. })) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

#[test]
fn histogram_rows_are_probability_mass_functions() {
    let params = ModelParams { horizon: 60, burn_in: 30, ..ModelParams::default() };
    let cfg = HistogramConfig { n_p_grid: vec![20, 60, 100], replicates: 100, days_per_replicate: 3, seed: 5, ..HistogramConfig::default() };
    let h = build_conditional_histogram(&cfg, &params, &WeightParams::default()).unwrap();
    for row in &h.prob {
        assert_eq!(row.len(), h.n_bins * h.m_bins);
        assert!(row.iter().all(|&p| p > 0.0 && p < 1.0));
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hist.csv");
    h.write(&path).unwrap();
    assert_eq!(ConditionalHistogram::read(&path).unwrap(), h);
}
