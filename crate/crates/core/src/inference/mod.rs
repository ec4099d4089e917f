//! Statistical fitting of network series.

mod histogram;
mod power_law;
mod scaling;
mod weibull;

pub use histogram::{
    build_conditional_histogram, estimate_np, estimate_np_series, ConditionalHistogram, DayEstimate, HistogramConfig,
    NpEstimate,
};
pub use power_law::{fit_power_law, power_law_log_likelihood, power_law_score, PowerLawFit};
pub use scaling::{fit_scaling, ScalingFit};
pub use weibull::{default_c_grid, default_n_hat_grid, fit_weibull_rank, weibull_ccdf, WeibullFit};
