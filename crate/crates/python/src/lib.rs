//! Python bindings: `import interbank`.

use std::path::PathBuf;

use chrono::NaiveTime;
use interbank_core as core;
use interbank_core::metrics::RunSubject;
use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(interbank, InsufficientDataError, PyValueError, "Too little data for the requested fit or metric.");
create_exception!(interbank, UndefinedMetricError, PyValueError, "The metric is undefined for this input.");

fn py_err(e: core::Error) -> PyErr {
    match e {
        core::Error::InsufficientData(_) => InsufficientDataError::new_err(e.to_string()),
        core::Error::UndefinedMetric(_) => UndefinedMetricError::new_err(e.to_string()),
        core::Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct ModelParams {
    n_p: usize,
    alpha: f64,
    c1: f64,
    c2: f64,
    f_borrower: f64,
    f_lender: f64,
    f_bidirectional: f64,
    walk_half_width: f64,
    horizon: usize,
    burn_in: usize,
}

impl From<&core::ModelParams> for ModelParams {
    fn from(p: &core::ModelParams) -> Self {
        Self {
            n_p: p.n_p,
            alpha: p.alpha,
            c1: p.c1,
            c2: p.c2,
            f_borrower: p.fractions.borrower,
            f_lender: p.fractions.lender,
            f_bidirectional: p.fractions.bidirectional,
            walk_half_width: p.walk_half_width,
            horizon: p.horizon,
            burn_in: p.burn_in,
        }
    }
}

impl ModelParams {
    fn core(&self) -> core::ModelParams {
        core::ModelParams {
            n_p: self.n_p,
            alpha: self.alpha,
            c1: self.c1,
            c2: self.c2,
            fractions: core::TypeFractions::new(self.f_borrower, self.f_lender, self.f_bidirectional),
            walk_half_width: self.walk_half_width,
            horizon: self.horizon,
            burn_in: self.burn_in,
        }
    }
}

#[pymethods]
impl ModelParams {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut p = Self::from(&core::ModelParams::default());
        if let Some(kwargs) = kwargs {
            for (key, value) in kwargs.iter() {
                let key: String = key.extract()?;
                match key.as_str() {
                    "n_p" => p.n_p = value.extract()?,
                    "alpha" => p.alpha = value.extract()?,
                    "c1" => p.c1 = value.extract()?,
                    "c2" => p.c2 = value.extract()?,
                    "f_borrower" => p.f_borrower = value.extract()?,
                    "f_lender" => p.f_lender = value.extract()?,
                    "f_bidirectional" => p.f_bidirectional = value.extract()?,
                    "walk_half_width" => p.walk_half_width = value.extract()?,
                    "horizon" => p.horizon = value.extract()?,
                    "burn_in" => p.burn_in = value.extract()?,
                    other => return Err(PyValueError::new_err(format!("unknown model parameter {other:?}"))),
                }
            }
        }
        p.core().validate().map_err(py_err)?;
        Ok(p)
    }

    fn effective_days(&self) -> usize {
        self.core().effective_days()
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelParams(n_p={}, alpha={}, c1={}, c2={}, f_borrower={}, f_lender={}, f_bidirectional={}, walk_half_width={}, horizon={}, burn_in={})",
            self.n_p, self.alpha, self.c1, self.c2, self.f_borrower, self.f_lender, self.f_bidirectional,
            self.walk_half_width, self.horizon, self.burn_in
        )
    }
}

#[pyclass(get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct WeightParams {
    q: f64,
    kappa: f64,
    eta: f64,
    nu_min: f64,
}

impl WeightParams {
    fn core(&self) -> core::WeightParams {
        core::WeightParams { q: self.q, kappa: self.kappa, eta: self.eta, nu_min: self.nu_min }
    }
}

#[pymethods]
impl WeightParams {
    #[new]
    #[pyo3(signature = (q = 0.5, kappa = 80.0, eta = 3.3, nu_min = 1.0))]
    fn new(q: f64, kappa: f64, eta: f64, nu_min: f64) -> PyResult<Self> {
        let w = Self { q, kappa, eta, nu_min };
        w.core().validate().map_err(py_err)?;
        Ok(w)
    }

    fn __repr__(&self) -> String {
        format!("WeightParams(q={}, kappa={}, eta={}, nu_min={})", self.q, self.kappa, self.eta, self.nu_min)
    }
}

fn model_or_default(p: Option<PyRef<'_, ModelParams>>) -> core::ModelParams {
    p.map(|p| p.core()).unwrap_or_default()
}

fn weights_or_default(w: Option<PyRef<'_, WeightParams>>) -> core::WeightParams {
    w.map(|w| w.core()).unwrap_or_default()
}

/// A sequence of daily directed networks.
#[pyclass(frozen)]
struct NetworkSeries {
    inner: core::NetworkSeries,
}

#[pymethods]
impl NetworkSeries {
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        core::series_io::read_series(&path).map(|inner| Self { inner }).map_err(py_err)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        core::series_io::write_series(&self.inner, &path).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn days(&self) -> Vec<usize> {
        self.inner.networks.iter().map(|n| n.day).collect()
    }

    /// `(lender, borrower, weight)` triples of the network at position `index`.
    fn edges(&self, index: usize) -> PyResult<Vec<(u32, u32, f64)>> {
        let net = self.inner.networks.get(index).ok_or_else(|| PyValueError::new_err(format!("no network at {index}")))?;
        Ok(net.edges().iter().map(|e| (e.lender.0, e.borrower.0, e.weight)).collect())
    }

    /// Per-day `(N, M)`: active banks and edges.
    fn sizes(&self) -> Vec<(usize, usize)> {
        self.inner.size_series()
    }

    fn is_weighted(&self) -> bool {
        self.inner.is_weighted()
    }

    fn __repr__(&self) -> String {
        format!("NetworkSeries(days={})", self.inner.len())
    }
}

#[pyfunction]
#[pyo3(signature = (params = None, weights = None, seed = 0))]
fn simulate_series(
    py: Python<'_>,
    params: Option<PyRef<'_, ModelParams>>,
    weights: Option<PyRef<'_, WeightParams>>,
    seed: u64,
) -> PyResult<NetworkSeries> {
    let (p, w) = (model_or_default(params), weights_or_default(weights));
    py.detach(|| core::model::simulate_series(&p, &w, seed)).map(|inner| NetworkSeries { inner }).map_err(py_err)
}

/// `(N, M)` on the given retained days, without weights.
#[pyfunction]
#[pyo3(signature = (params = None, seed = 0, days = None))]
fn simulate_sizes(
    py: Python<'_>,
    params: Option<PyRef<'_, ModelParams>>,
    seed: u64,
    days: Option<Vec<usize>>,
) -> PyResult<Vec<(usize, usize)>> {
    let p = model_or_default(params);
    let days = days.unwrap_or_else(|| (0..p.effective_days()).collect());
    py.detach(|| core::model::simulate_sizes(&p, seed, &days)).map_err(py_err)
}

#[pyfunction]
fn isolation_probability(n_p: usize, alpha: f64) -> PyResult<f64> {
    core::closed_form::isolation_probability(n_p, alpha).map_err(py_err)
}

/// `(expected_n, expected_m, q0)`.
#[pyfunction]
fn expected_n_m(n_p: usize, alpha: f64) -> PyResult<(f64, f64, f64)> {
    let t = core::closed_form::expected_n_m(n_p, alpha).map_err(py_err)?;
    Ok((t.expected_n, t.expected_m, t.q0))
}

/// `(n_p, expected_n, expected_m, q0)` rows.
#[pyfunction]
fn theoretical_scaling_curve(n_p_grid: Vec<usize>, alpha: f64) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let curve = core::closed_form::theoretical_scaling_curve(&n_p_grid, alpha).map_err(py_err)?;
    Ok(curve.into_iter().map(|t| (t.n_p, t.expected_n, t.expected_m, t.q0)).collect())
}

#[pyfunction]
fn incomplete_beta(z: f64, x: f64, y: f64) -> PyResult<f64> {
    core::special::incomplete_beta(z, x, y).map_err(py_err)
}

/// Per-day bipartivity; `None` for empty days.
#[pyfunction]
fn bipartivity(series: &NetworkSeries) -> Vec<Option<f64>> {
    series.inner.networks.iter().map(|n| core::metrics::bipartivity(n).ok()).collect()
}

#[pyfunction]
fn turnover_rate(series: &NetworkSeries) -> PyResult<f64> {
    core::metrics::turnover_rate(&series.inner).map_err(py_err)
}

/// Dict with `durations`, `intervals` and `censored_durations`.
#[pyfunction]
#[pyo3(signature = (series, subject = "pair"))]
fn duration_interval_samples<'py>(py: Python<'py>, series: &NetworkSeries, subject: &str) -> PyResult<Bound<'py, PyDict>> {
    let subject = RunSubject::ALL
        .into_iter()
        .find(|s| s.name() == subject)
        .ok_or_else(|| PyValueError::new_err(format!("unknown subject {subject:?}")))?;
    let s = core::metrics::duration_interval_samples(&series.inner, subject).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("durations", s.durations)?;
    d.set_item("intervals", s.intervals)?;
    d.set_item("censored_durations", s.censored_durations)?;
    Ok(d)
}

#[pyfunction]
fn aggregate_degree_curve(series: &NetworkSeries) -> PyResult<Vec<(usize, f64)>> {
    core::metrics::aggregate_degree_curve(&series.inner).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (curve, fraction = 0.8))]
fn aggregate_degree_exponent(curve: Vec<(usize, f64)>, fraction: f64) -> PyResult<f64> {
    core::metrics::aggregate_degree_exponent(&curve, fraction).map_err(py_err)
}

#[pyfunction]
fn weight_growth_rates(series: &NetworkSeries) -> PyResult<Vec<f64>> {
    core::metrics::weight_growth_rates(&series.inner).map_err(py_err)
}

#[pyfunction]
fn fit_scaling<'py>(py: Python<'py>, points: Vec<(f64, f64)>) -> PyResult<Bound<'py, PyDict>> {
    let f = core::inference::fit_scaling(&points).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("beta", f.beta)?;
    d.set_item("intercept", f.intercept)?;
    d.set_item("r2", f.r2)?;
    d.set_item("n_points", f.n_points)?;
    Ok(d)
}

#[pyfunction]
fn fit_weibull_rank<'py>(py: Python<'py>, samples: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let grid = core::inference::default_n_hat_grid(samples.len());
    let f = py
        .detach(|| core::inference::fit_weibull_rank(&samples, &core::inference::default_c_grid(), &grid))
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("c", f.c)?;
    d.set_item("lambda", f.lambda)?;
    d.set_item("cutoff", f.cutoff)?;
    d.set_item("n_hat", f.n_hat)?;
    d.set_item("r2", f.r2)?;
    d.set_item("n_points", f.n_points)?;
    Ok(d)
}

#[pyfunction]
fn fit_power_law<'py>(py: Python<'py>, samples: Vec<u64>) -> PyResult<Bound<'py, PyDict>> {
    let f = py.detach(|| core::inference::fit_power_law(&samples)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("exponent", f.exponent)?;
    d.set_item("x_min", f.x_min)?;
    d.set_item("ks", f.ks)?;
    d.set_item("n_tail", f.n_tail)?;
    Ok(d)
}

/// Conditional `(N, M)` histogram over an `N_P` grid.
#[pyclass(frozen)]
struct ConditionalHistogram {
    inner: core::inference::ConditionalHistogram,
}

#[pymethods]
impl ConditionalHistogram {
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        core::inference::ConditionalHistogram::read(&path).map(|inner| Self { inner }).map_err(py_err)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write(&path).map_err(py_err)
    }

    #[getter]
    fn n_p_grid(&self) -> Vec<usize> {
        self.inner.n_p_grid.clone()
    }

    /// `(n_p_ml, log_likelihood, flat_flag)`.
    fn estimate(&self, n: usize, m: usize) -> PyResult<(usize, f64, bool)> {
        let e = core::inference::estimate_np(&self.inner, n, m).map_err(py_err)?;
        Ok((e.n_p_ml, e.log_likelihood, e.flat_flag))
    }

    /// Per-day estimates; `None` where `(N, M)` is outside the binned range.
    fn estimate_series(&self, series: &NetworkSeries) -> Vec<Option<usize>> {
        core::inference::estimate_np_series(&self.inner, &series.inner)
            .into_iter()
            .map(|d| d.estimate.map(|e| e.n_p_ml))
            .collect()
    }
}

#[pyfunction]
#[pyo3(signature = (n_p_grid, params = None, weights = None, replicates = 500, days_per_replicate = 10, bin_widths = (5, 20), smoothing = 1.0, seed = 0, workers = 0))]
#[allow(clippy::too_many_arguments)]
fn build_conditional_histogram(
    py: Python<'_>,
    n_p_grid: Vec<usize>,
    params: Option<PyRef<'_, ModelParams>>,
    weights: Option<PyRef<'_, WeightParams>>,
    replicates: usize,
    days_per_replicate: usize,
    bin_widths: (usize, usize),
    smoothing: f64,
    seed: u64,
    workers: usize,
) -> PyResult<ConditionalHistogram> {
    let config = core::inference::HistogramConfig {
        n_p_grid,
        replicates,
        days_per_replicate,
        bin_widths,
        smoothing,
        seed,
        workers,
    };
    let (p, w) = (model_or_default(params), weights_or_default(weights));
    py.detach(|| core::inference::build_conditional_histogram(&config, &p, &w))
        .map(|inner| ConditionalHistogram { inner })
        .map_err(py_err)
}

/// Reads a transaction log; returns the series and `(line, reason)` rejects.
#[pyfunction]
#[pyo3(signature = (path, window_start = "08:00", window_end = "18:00", categories = None))]
fn ingest_log(
    path: PathBuf,
    window_start: &str,
    window_end: &str,
    categories: Option<Vec<String>>,
) -> PyResult<(NetworkSeries, Vec<(u64, String)>)> {
    let time = |s: &str| NaiveTime::parse_from_str(s, "%H:%M").map_err(|_| PyValueError::new_err(format!("expected HH:MM, got {s:?}")));
    let window = core::ingest::TimeWindow { start: time(window_start)?, end: time(window_end)? };
    let file = std::fs::File::open(&path).map_err(|e| py_err(e.into()))?;
    let parsed = core::ingest::parse_transactions(file).map_err(py_err)?;
    let allow = categories.map(|c| c.into_iter().collect()).unwrap_or_else(core::ingest::default_categories);
    let records = core::ingest::filter_categories(parsed.records, &allow);
    let ingested = core::ingest::build_daily_networks(&records, window, &path.display().to_string()).map_err(py_err)?;
    let rejects = parsed.rejects.into_iter().map(|r| (r.line, r.reason)).collect();
    Ok((NetworkSeries { inner: ingested.series }, rejects))
}

#[pymodule]
pub fn interbank(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ModelParams>()?;
    m.add_class::<WeightParams>()?;
    m.add_class::<NetworkSeries>()?;
    m.add_class::<ConditionalHistogram>()?;
    m.add("InsufficientDataError", m.py().get_type::<InsufficientDataError>())?;
    m.add("UndefinedMetricError", m.py().get_type::<UndefinedMetricError>())?;
    m.add_function(wrap_pyfunction!(simulate_series, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_sizes, m)?)?;
    m.add_function(wrap_pyfunction!(isolation_probability, m)?)?;
    m.add_function(wrap_pyfunction!(expected_n_m, m)?)?;
    m.add_function(wrap_pyfunction!(theoretical_scaling_curve, m)?)?;
    m.add_function(wrap_pyfunction!(incomplete_beta, m)?)?;
    m.add_function(wrap_pyfunction!(bipartivity, m)?)?;
    m.add_function(wrap_pyfunction!(turnover_rate, m)?)?;
    m.add_function(wrap_pyfunction!(duration_interval_samples, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_degree_curve, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_degree_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(weight_growth_rates, m)?)?;
    m.add_function(wrap_pyfunction!(fit_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(fit_weibull_rank, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    m.add_function(wrap_pyfunction!(build_conditional_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(ingest_log, m)?)?;
    Ok(())
}
