use crate::error::{Error, Result};

/// Power-law fit `M = e^intercept * N^beta` by OLS in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub beta: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_points: usize,
}

/// Regresses `log M` on `log N` over the points with `N >= 2` and `M >= 1`.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(n, m)| n >= 2.0 && m >= 1.0 && n.is_finite() && m.is_finite())
        .map(|&(n, m)| (n.ln(), m.ln()))
        .collect();
    if xy.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs at least 3 points with N >= 2 and M >= 1, got {}",
            xy.len()
        )));
    }
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("all points share the same N".into()));
    }
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let ssr: f64 = xy.iter().map(|p| (p.1 - intercept - beta * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ssr / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(ScalingFit { beta, intercept, r2, n_points: xy.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (2..40).map(|n| (n as f64, 2.0 * (n as f64).powf(1.5))).collect();
        let fit = fit_scaling(&pts).unwrap();
        assert!((fit.beta - 1.5).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(fit_scaling(&[(5.0, 10.0), (5.0, 20.0), (5.0, 30.0)]), Err(Error::InsufficientData(_))));
        assert!(matches!(fit_scaling(&[(5.0, 10.0), (6.0, 20.0)]), Err(Error::InsufficientData(_))));
        // filtered: N < 2 or M < 1
        assert!(fit_scaling(&[(1.0, 10.0), (6.0, 0.0), (3.0, 4.0), (4.0, 5.0)]).is_err());
    }

    proptest! {
        #[test]
        fn scaling_m_shifts_only_intercept(
            pts in proptest::collection::vec((2.0f64..500.0, 1.0f64..1e4), 3..40),
            scale in 1.0f64..100.0,
        ) {
            let base = fit_scaling(&pts);
            prop_assume!(base.is_ok());
            let base = base.unwrap();
            let scaled: Vec<_> = pts.iter().map(|&(n, m)| (n, m * scale)).collect();
            let fit = fit_scaling(&scaled).unwrap();
            prop_assert!((fit.beta - base.beta).abs() < 1e-12);
            prop_assert!((fit.intercept - base.intercept - scale.ln()).abs() < 1e-12);
        }
    }
}
