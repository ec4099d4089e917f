//! Finite-size theory of the untyped, undirected fitness model with uniform
//! activities and kernel `(a_i a_j)^alpha`.

use crate::error::{Error, Result};
use crate::special::{beta, regularized_incomplete_beta_complement};

pub use crate::special::incomplete_beta;

/// Expected `(N, M)` for one potential market size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryPoint {
    pub n_p: usize,
    pub expected_n: f64,
    pub expected_m: f64,
    pub q0: f64,
}

/// Probability that a bank ends the day isolated:
///
/// `q0 = (1/alpha) (alpha+1)^(1/alpha) [B(n_p, 1/alpha) - B_z(n_p, 1/alpha)]`
/// with `z = 1 - 1/(alpha+1)`.
pub fn isolation_probability(n_p: usize, alpha: f64) -> Result<f64> {
    if n_p == 0 {
        return Err(Error::Domain("n_p must be at least 1".into()));
    }
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("alpha must be >= 1, got {alpha}")));
    }
    let x = n_p as f64;
    let y = 1.0 / alpha;
    let z = 1.0 - 1.0 / (alpha + 1.0);
    // B(x,y) - B_z(x,y) = B(x,y) * (1 - I_z(x,y))
    let tail = beta(x, y) * regularized_incomplete_beta_complement(z, x, y)?;
    let q0 = (alpha + 1.0).powf(y) * tail / alpha;
    if !(-1e-12..=1.0 + 1e-12).contains(&q0) {
        return Err(Error::Internal(format!("isolation probability {q0} outside [0, 1]")));
    }
    Ok(q0.clamp(0.0, 1.0))
}

pub fn expected_n_m(n_p: usize, alpha: f64) -> Result<TheoryPoint> {
    let q0 = isolation_probability(n_p, alpha)?;
    let n = n_p as f64;
    let moment = (alpha + 1.0).powi(-2);
    Ok(TheoryPoint {
        n_p,
        expected_n: (1.0 - q0) * n,
        expected_m: moment * n * (n - 1.0) / 2.0,
        q0,
    })
}

/// Theory points over a grid of market sizes, ordered by `n_p`.
pub fn theoretical_scaling_curve(n_p_grid: &[usize], alpha: f64) -> Result<Vec<TheoryPoint>> {
    if n_p_grid.is_empty() {
        return Err(Error::Parameter("n_p grid is empty".into()));
    }
    let mut grid = n_p_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    grid.into_iter().map(|n_p| expected_n_m(n_p, alpha)).collect()
}

/// Least-squares slope of `log M` on `log N` across theory points with `M > 0`.
pub fn log_log_slope(points: &[TheoryPoint]) -> Option<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.expected_n > 0.0 && p.expected_m > 0.0)
        .map(|p| (p.expected_n.ln(), p.expected_m.ln()))
        .collect();
    if xy.len() < 2 {
        return None;
    }
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lone_bank_is_isolated() {
        for &alpha in &[1.0, 2.0, 4.0, 8.0] {
            assert!((isolation_probability(1, alpha).unwrap() - 1.0).abs() < 1e-12);
            let p = expected_n_m(1, alpha).unwrap();
            assert!(p.expected_n.abs() < 1e-10);
            assert_eq!(p.expected_m, 0.0);
        }
    }

    #[test]
    fn large_market_isolation_follows_power_decay() {
        // q0 ~ Gamma(1 + 1/alpha) ((alpha + 1) / n_p)^(1/alpha)
        let q0 = isolation_probability(10_000, 4.0).unwrap();
        let asymptote = statrs::function::gamma::gamma(1.25) * (5.0f64 / 10_000.0).powf(0.25);
        assert!((q0 / asymptote - 1.0).abs() < 1e-4, "{q0} vs {asymptote}");
    }

    #[test]
    fn two_bank_edge_count() {
        assert!((expected_n_m(2, 4.0).unwrap().expected_m - 0.04).abs() < 1e-15);
    }

    #[test]
    fn q0_decreases_with_market_size() {
        for &alpha in &[2.0, 4.0, 8.0] {
            let qs: Vec<f64> = (1..=400).map(|n| isolation_probability(n, alpha).unwrap()).collect();
            assert!(qs.windows(2).all(|w| w[1] < w[0]), "alpha={alpha}");
        }
    }

    #[test]
    fn expected_n_increases_and_m_is_quadratic() {
        let pts = theoretical_scaling_curve(&(1..=300).collect::<Vec<_>>(), 4.0).unwrap();
        assert!(pts.windows(2).all(|w| w[1].expected_n > w[0].expected_n));
        for p in &pts {
            let n = p.n_p as f64;
            assert!((p.expected_m - n * (n - 1.0) / 50.0).abs() <= 1e-12 * p.expected_m.max(1.0));
            assert!((p.expected_n - (1.0 - p.q0) * n).abs() < 1e-9);
            assert!(p.expected_n <= n);
        }
    }

    #[test]
    fn curve_is_sorted_and_single_point_works() {
        let pts = theoretical_scaling_curve(&[300, 20, 100], 4.0).unwrap();
        assert_eq!(pts.iter().map(|p| p.n_p).collect::<Vec<_>>(), vec![20, 100, 300]);
        assert_eq!(theoretical_scaling_curve(&[50], 4.0).unwrap().len(), 1);
        assert!(theoretical_scaling_curve(&[], 4.0).is_err());
    }

    #[test]
    fn superlinear_slope_on_small_markets() {
        let grid: Vec<usize> = (20..=300).step_by(10).collect();
        for &alpha in &[2.0, 4.0, 8.0] {
            let slope = log_log_slope(&theoretical_scaling_curve(&grid, alpha).unwrap()).unwrap();
            assert!(slope > 1.0 && slope < 2.0, "alpha={alpha}: slope {slope}");
        }
    }
}
