//! Closed-form results checked against independent numerical evaluations.

use interbank_core::closed_form::{expected_n_m, isolation_probability, theoretical_scaling_curve};
use interbank_core::model::sample_untyped_sizes;
use interbank_core::special::{beta, incomplete_beta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

mod common;
use common::{gauss_legendre, incomplete_beta_by_quadrature, INCOMPLETE_BETA_CASES};

/// A bank with activity `a` is isolated with probability
/// `(1 - a^alpha E[a'^alpha])^(n_p - 1)`; average over uniform `a`.
fn isolation_by_quadrature(n_p: usize, alpha: f64) -> f64 {
    let m = 1.0 / (alpha + 1.0);
    gauss_legendre(|a| (1.0 - a.powf(alpha) * m).powi(n_p as i32 - 1), 0.0, 1.0, 4000)
}

#[test]
fn isolation_probability_matches_direct_integral() {
    for alpha in [1.0, 2.0, 4.0, 8.0] {
        for n_p in [1, 2, 5, 20, 50, 100, 300, 1000] {
            let closed = isolation_probability(n_p, alpha).unwrap();
            let direct = isolation_by_quadrature(n_p, alpha);
            assert!((closed - direct).abs() < 1e-8, "alpha={alpha} n_p={n_p}: {closed} vs {direct}");
        }
    }
}

#[test]
fn complete_beta_matches_gamma_evaluation() {
    for alpha in [1.0, 2.0, 4.0, 8.0] {
        let y = 1.0 / alpha;
        for x in 1..=300 {
            let x = x as f64;
            let via_gamma = (ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp();
            let b1 = incomplete_beta(1.0, x, y).unwrap();
            assert!((b1 / via_gamma - 1.0).abs() < 1e-10, "x={x} y={y}: {b1} vs {via_gamma}");
            assert!((beta(x, y) / via_gamma - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn incomplete_beta_matches_quadrature() {
    for (z, x, y) in INCOMPLETE_BETA_CASES {
        let direct = incomplete_beta_by_quadrature(z, x, y);
        let value = incomplete_beta(z, x, y).unwrap();
        assert!((value - direct).abs() < 1e-8 * direct, "B_{z}({x},{y}): {value} vs {direct}");
    }
}

#[test]
fn monotonicity_on_grid() {
    let grid: Vec<usize> = (1..=400).collect();
    for alpha in [2.0, 4.0, 8.0] {
        let pts = theoretical_scaling_curve(&grid, alpha).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].q0 < w[0].q0);
            assert!(w[1].expected_n > w[0].expected_n);
        }
        for p in &pts {
            let n = p.n_p as f64;
            let quadratic = n * (n - 1.0) / 2.0 / (alpha + 1.0).powi(2);
            assert!((p.expected_m - quadratic).abs() <= 1e-15 * quadratic);
        }
    }
}

#[test]
fn untyped_monte_carlo_agrees_with_theory() {
    let replicates = 500;
    for alpha in [2.0, 4.0] {
        for n_p in [20, 100] {
            let mut rng = ChaCha8Rng::seed_from_u64(n_p as u64 * 31 + alpha as u64);
            let draws: Vec<(f64, f64)> = (0..replicates)
                .map(|_| {
                    let (n, m) = sample_untyped_sizes(n_p, alpha, &mut rng);
                    (n as f64, m as f64)
                })
                .collect();
            let theory = expected_n_m(n_p, alpha).unwrap();
            for (values, expected) in [
                (draws.iter().map(|d| d.0).collect::<Vec<_>>(), theory.expected_n),
                (draws.iter().map(|d| d.1).collect::<Vec<_>>(), theory.expected_m),
            ] {
                let mean = values.iter().sum::<f64>() / replicates as f64;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (replicates - 1) as f64;
                let se = (var / replicates as f64).sqrt();
                assert!((mean - expected).abs() <= 3.0 * se, "alpha={alpha} n_p={n_p}: {mean} vs {expected} (se {se})");
            }
        }
    }
}
