//! Command pipelines. Each takes resolved settings, writes its outputs and
//! then the manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveTime;
use interbank_core::closed_form::theoretical_scaling_curve;
use interbank_core::config::KeyValues;
use interbank_core::inference::{
    build_conditional_histogram, default_c_grid, default_n_hat_grid, estimate_np_series, fit_power_law, fit_scaling,
    fit_weibull_rank, ConditionalHistogram, HistogramConfig,
};
use interbank_core::ingest::{build_daily_networks, default_categories, filter_categories, parse_transactions, TimeWindow};
use interbank_core::metrics::{
    activity_fractions, aggregate_degree_curve, aggregate_degree_exponent, bipartivity, degree_distributions,
    duration_interval_samples, strength_vs_degree, turnover_rate, weight_growth_rates, RunSubject,
};
use interbank_core::model::simulate_series;
use interbank_core::series_io::{read_series, write_series};
use interbank_core::{Error, ModelParams, NetworkSeries, WeightParams};

use crate::settings::{parse_grid, CliError, CliResult, Settings};

pub struct CommandSpec {
    pub name: &'static str,
    keys: &'static [&'static str],
    defaults: fn() -> KeyValues,
    pub run: fn(Settings) -> CliResult<()>,
}

impl CommandSpec {
    pub fn keys(&self) -> Vec<&'static str> {
        self.keys.to_vec()
    }

    pub fn defaults(&self) -> KeyValues {
        (self.defaults)()
    }
}

const SIMULATE_KEYS: &[&str] = &[
    "n_p", "alpha", "c1", "c2", "f_borrower", "f_lender", "f_bidirectional", "walk_half_width", "horizon", "burn_in",
    "q", "kappa", "eta", "nu_min", "seed", "out",
];
const BUILD_HIST_KEYS: &[&str] = &[
    "alpha", "c1", "c2", "f_borrower", "f_lender", "f_bidirectional", "walk_half_width", "horizon", "burn_in",
    "q", "kappa", "eta", "nu_min", "grid", "replicates", "days_per_replicate", "w_n", "w_m", "smoothing", "seed",
    "workers", "out",
];

fn model_defaults(with_n_p: bool) -> KeyValues {
    let mut kv = KeyValues::new();
    ModelParams::default().write_keys(&mut kv);
    WeightParams::default().write_keys(&mut kv);
    if !with_n_p {
        kv.remove("n_p");
    }
    kv
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    s.into()
}

fn derived_path(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

/// Parameter keys are config, so unparseable values are usage errors.
fn as_usage(e: Error) -> CliError {
    match e {
        Error::Format(msg) => CliError::Usage(msg),
        other => CliError::Core(other),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| writing(path)(Error::Io(e)))
}

/// Attaches the path to I/O failures while writing.
fn writing(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| match e {
        Error::Io(io) => CliError::Core(Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display())))),
        other => CliError::Core(other),
    }
}

fn load_series(path: &Path) -> CliResult<NetworkSeries> {
    read_series(path).map_err(|e| match e {
        Error::Io(io) => CliError::Core(Error::Format(format!("cannot read series {}: {io}", path.display()))),
        other => CliError::Core(other),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const SIMULATE: CommandSpec = CommandSpec {
    name: "simulate",
    keys: SIMULATE_KEYS,
    defaults: || {
        let mut kv = model_defaults(true);
        kv.set("seed", 0);
        kv.set("out", "series.csv");
        kv
    },
    run: simulate,
};

fn simulate(s: Settings) -> CliResult<()> {
    let params = ModelParams::from_keys(&s.kv).map_err(as_usage)?;
    let wp = WeightParams::from_keys(&s.kv).map_err(as_usage)?;
    let seed: u64 = s.get("seed")?;
    let out = s.path("out")?;
    let series = simulate_series(&params, &wp, seed)?;
    write_series(&series, &out).map_err(writing(&out))?;
    s.write_manifest(&manifest_path(&out))
}

pub const METRICS: [&str; 9] =
    ["sizes", "bipartivity", "turnover", "durations", "aggregate_degree", "degrees", "strengths", "growth_rates", "activity"];

pub const ANALYZE: CommandSpec = CommandSpec {
    name: "analyze",
    keys: &["series", "metric", "window", "fraction", "out_dir"],
    defaults: || {
        let mut kv = KeyValues::new();
        kv.set("metric", "all");
        kv.set("window", 250);
        kv.set("fraction", 0.8);
        kv.set("out_dir", "analysis");
        kv
    },
    run: analyze,
};

fn selected_metrics(text: &str) -> CliResult<Vec<&'static str>> {
    if text.trim() == "all" {
        return Ok(METRICS.to_vec());
    }
    text.split(',')
        .map(|m| {
            METRICS.iter().find(|&&k| k == m.trim()).copied().ok_or_else(|| {
                CliError::Usage(format!("unknown metric {:?}; valid names: all, {}", m.trim(), METRICS.join(", ")))
            })
        })
        .collect()
}

fn analyze(s: Settings) -> CliResult<()> {
    let metrics = selected_metrics(&s.get::<String>("metric")?)?;
    let window: usize = s.get("window")?;
    let fraction: f64 = s.get("fraction")?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(CliError::Usage(format!("--fraction must lie in (0, 1], got {fraction}")));
    }
    let series = load_series(&s.path("series")?)?;
    let dir = s.path("out_dir")?;
    std::fs::create_dir_all(&dir)?;
    let all = metrics.len() == METRICS.len();
    for metric in metrics {
        match write_metric(metric, &series, window, fraction, &dir) {
            Err(CliError::Core(e @ (Error::UndefinedMetric(_) | Error::InsufficientData(_)))) if all => {
                eprintln!("skipping {metric}: {e}");
            }
            other => other?,
        }
    }
    s.write_manifest(&dir.join("manifest"))
}

fn write_metric(metric: &str, series: &NetworkSeries, window: usize, fraction: f64, dir: &Path) -> CliResult<()> {
    let path = dir.join(format!("{metric}.csv"));
    match metric {
        "sizes" => {
            let mut w = create(&path)?;
            writeln!(w, "day,n,m")?;
            for net in &series.networks {
                writeln!(w, "{},{},{}", net.day, net.n_active(), net.n_edges())?;
            }
            w.flush()?;
        }
        "bipartivity" => {
            let mut w = create(&path)?;
            writeln!(w, "day,bipartivity")?;
            for net in &series.networks {
                writeln!(w, "{},{}", net.day, opt(bipartivity(net).ok()))?;
            }
            w.flush()?;
        }
        "turnover" => {
            let rate = turnover_rate(series)?;
            let mut w = create(&path)?;
            writeln!(w, "turnover_rate\n{rate}")?;
            w.flush()?;
        }
        "durations" => {
            let samples: Vec<_> =
                RunSubject::ALL.iter().map(|&s| duration_interval_samples(series, s)).collect::<Result<_, _>>()?;
            let mut w = create(&path)?;
            writeln!(w, "subject,kind,length")?;
            for s in &samples {
                for (kind, values) in [("duration", &s.durations), ("interval", &s.intervals), ("censored", &s.censored_durations)] {
                    for v in values {
                        writeln!(w, "{},{kind},{v}", s.subject.name())?;
                    }
                }
            }
            w.flush()?;
        }
        "aggregate_degree" => {
            let curve = aggregate_degree_curve(series)?;
            let gamma = aggregate_degree_exponent(&curve, fraction)?;
            let mut w = create(&path)?;
            writeln!(w, "day,k_norm")?;
            for (day, k) in &curve {
                writeln!(w, "{day},{k}")?;
            }
            w.flush()?;
            let mut w = create(&dir.join("aggregate_degree_exponent.csv"))?;
            writeln!(w, "fraction,gamma\n{fraction},{gamma}")?;
            w.flush()?;
        }
        "degrees" => {
            let (ins, outs) = degree_distributions(series);
            let mut w = create(&path)?;
            writeln!(w, "direction,degree,ccdf")?;
            for (direction, table) in [("in", ins), ("out", outs)] {
                for (x, p) in table.points {
                    writeln!(w, "{direction},{x},{p}")?;
                }
            }
            w.flush()?;
        }
        "strengths" => {
            let points = strength_vs_degree(series)?;
            let mut w = create(&path)?;
            writeln!(w, "direction,degree,mean_strength,count")?;
            for p in points {
                writeln!(w, "{},{},{},{}", p.direction.name(), p.degree, p.mean_strength, p.count)?;
            }
            w.flush()?;
        }
        "growth_rates" => {
            let rates = weight_growth_rates(series)?;
            let mut w = create(&path)?;
            writeln!(w, "r")?;
            for r in rates {
                writeln!(w, "{r}")?;
            }
            w.flush()?;
        }
        "activity" => {
            let fractions = activity_fractions(series, window)?;
            let mut w = create(&path)?;
            writeln!(w, "bank,window,f_active,delta")?;
            for f in fractions {
                writeln!(w, "{},{},{},{}", f.bank, f.window, f.f_active, opt(f.delta))?;
            }
            w.flush()?;
        }
        _ => unreachable!("metric names are validated"),
    }
    Ok(())
}

pub const FIT: CommandSpec = CommandSpec {
    name: "fit",
    keys: &["fitter", "series", "samples", "subject", "out"],
    defaults: || {
        let mut kv = KeyValues::new();
        kv.set("subject", "pair");
        kv.set("out", "fit.csv");
        kv
    },
    run: fit,
};

enum Fitter {
    Scaling,
    Weibull,
    PowerLaw,
}

enum Source {
    Series(NetworkSeries),
    Samples(Vec<Vec<f64>>),
}

fn read_samples(path: &Path, columns: usize) -> CliResult<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::Format(format!("cannot read samples {}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut rows = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() < columns {
            return Err(Error::Format(format!("samples line {line}: expected {columns} column(s)")).into());
        }
        let values = (0..columns)
            .map(|k| row[k].parse::<f64>().map_err(|_| Error::Format(format!("samples line {line}: bad number {:?}", &row[k]))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(values);
    }
    Ok(rows)
}

fn subject_of(name: &str) -> CliResult<RunSubject> {
    RunSubject::ALL.into_iter().find(|s| s.name() == name).ok_or_else(|| {
        let names: Vec<_> = RunSubject::ALL.iter().map(|s| s.name()).collect();
        CliError::Usage(format!("unknown subject {name:?}; valid: {}", names.join(", ")))
    })
}

fn fit(s: Settings) -> CliResult<()> {
    let fitter = match s.get::<String>("fitter")?.as_str() {
        "scaling" => Fitter::Scaling,
        "weibull" => Fitter::Weibull,
        "power-law" | "power_law" => Fitter::PowerLaw,
        other => return Err(CliError::Usage(format!("unknown fitter {other:?}; valid: scaling, weibull, power-law"))),
    };
    let subject = subject_of(&s.get::<String>("subject")?)?;
    let columns = if matches!(fitter, Fitter::Scaling) { 2 } else { 1 };
    let source = match (s.optional::<String>("series")?, s.optional::<String>("samples")?) {
        (Some(series), None) => Source::Series(load_series(Path::new(&series))?),
        (None, Some(samples)) => Source::Samples(read_samples(Path::new(&samples), columns)?),
        _ => return Err(CliError::Usage("`fit` needs exactly one of --series or --samples".into())),
    };
    let mut report: Vec<(&str, String)> = Vec::new();
    match fitter {
        Fitter::Scaling => {
            let points: Vec<(f64, f64)> = match &source {
                Source::Series(series) => series.size_series().iter().map(|&(n, m)| (n as f64, m as f64)).collect(),
                Source::Samples(rows) => rows.iter().map(|r| (r[0], r[1])).collect(),
            };
            let f = fit_scaling(&points)?;
            report.extend([
                ("beta", f.beta.to_string()),
                ("intercept", f.intercept.to_string()),
                ("r2", f.r2.to_string()),
                ("n_points", f.n_points.to_string()),
            ]);
        }
        Fitter::Weibull => {
            let values: Vec<f64> = match &source {
                Source::Series(series) => {
                    duration_interval_samples(series, subject)?.intervals.iter().map(|&x| x as f64).collect()
                }
                Source::Samples(rows) => rows.iter().map(|r| r[0]).collect(),
            };
            let f = fit_weibull_rank(&values, &default_c_grid(), &default_n_hat_grid(values.len()))?;
            report.extend([
                ("c", f.c.to_string()),
                ("lambda", f.lambda.to_string()),
                ("beta_coef", f.beta_coef.to_string()),
                ("cutoff", f.cutoff.to_string()),
                ("n_hat", f.n_hat.to_string()),
                ("r2", f.r2.to_string()),
                ("n_points", f.n_points.to_string()),
            ]);
        }
        Fitter::PowerLaw => {
            let values: Vec<u64> = match &source {
                Source::Series(series) => {
                    duration_interval_samples(series, subject)?.durations.iter().map(|&d| d as u64).collect()
                }
                Source::Samples(rows) => rows
                    .iter()
                    .map(|r| {
                        let x = r[0];
                        if x >= 1.0 && x.fract() == 0.0 && x < 2f64.powi(53) {
                            Ok(x as u64)
                        } else {
                            Err(Error::Format(format!("power-law samples must be positive integers, got {x}")))
                        }
                    })
                    .collect::<Result<_, _>>()?,
            };
            let f = fit_power_law(&values)?;
            report.extend([
                ("exponent", f.exponent.to_string()),
                ("x_min", f.x_min.to_string()),
                ("ks", f.ks.to_string()),
                ("n_tail", f.n_tail.to_string()),
                ("n_samples", values.len().to_string()),
            ]);
        }
    }
    let out = s.path("out")?;
    let mut w = create(&out)?;
    writeln!(w, "parameter,value")?;
    for (k, v) in report {
        writeln!(w, "{k},{v}")?;
    }
    w.flush()?;
    s.write_manifest(&manifest_path(&out))
}

pub const THEORY: CommandSpec = CommandSpec {
    name: "theory",
    keys: &["alpha", "grid", "out"],
    defaults: || {
        let mut kv = KeyValues::new();
        kv.set("alpha", 4);
        kv.set("grid", "20:300");
        kv.set("out", "theory.csv");
        kv
    },
    run: theory,
};

fn theory(s: Settings) -> CliResult<()> {
    let alpha: f64 = s.get("alpha")?;
    let grid = parse_grid(&s.get::<String>("grid")?)?;
    let curve = theoretical_scaling_curve(&grid, alpha)?;
    let out = s.path("out")?;
    let mut w = create(&out)?;
    writeln!(w, "n_p,expected_n,expected_m,q0")?;
    for p in curve {
        writeln!(w, "{},{},{},{}", p.n_p, p.expected_n, p.expected_m, p.q0)?;
    }
    w.flush()?;
    s.write_manifest(&manifest_path(&out))
}

pub const BUILD_HIST: CommandSpec = CommandSpec {
    name: "build-hist",
    keys: BUILD_HIST_KEYS,
    defaults: || {
        let mut kv = model_defaults(false);
        let h = HistogramConfig::default();
        kv.set("grid", "20:400:10");
        kv.set("replicates", h.replicates);
        kv.set("days_per_replicate", h.days_per_replicate);
        kv.set("w_n", h.bin_widths.0);
        kv.set("w_m", h.bin_widths.1);
        kv.set("smoothing", h.smoothing);
        kv.set("seed", h.seed);
        kv.set("workers", h.workers);
        kv.set("out", "hist.csv");
        kv
    },
    run: build_hist,
};

fn build_hist(mut s: Settings) -> CliResult<()> {
    // n_p is swept by the grid; a stray key from a shared config is ignored
    s.kv.remove("n_p");
    let params = ModelParams::from_keys(&s.kv).map_err(as_usage)?;
    let wp = WeightParams::from_keys(&s.kv).map_err(as_usage)?;
    let config = HistogramConfig {
        n_p_grid: parse_grid(&s.get::<String>("grid")?)?,
        replicates: s.get("replicates")?,
        days_per_replicate: s.get("days_per_replicate")?,
        bin_widths: (s.get("w_n")?, s.get("w_m")?),
        smoothing: s.get("smoothing")?,
        seed: s.get("seed")?,
        workers: s.get("workers")?,
    };
    let out = s.path("out")?;
    let hist = build_conditional_histogram(&config, &params, &wp)?;
    hist.write(&out).map_err(writing(&out))?;
    s.write_manifest(&manifest_path(&out))
}

pub const ESTIMATE_NP: CommandSpec = CommandSpec {
    name: "estimate-np",
    keys: &["hist", "series", "out"],
    defaults: || {
        let mut kv = KeyValues::new();
        kv.set("out", "np_estimates.csv");
        kv
    },
    run: estimate_np,
};

fn estimate_np(s: Settings) -> CliResult<()> {
    let hist_path = s.path("hist")?;
    let hist = ConditionalHistogram::read(&hist_path).map_err(|e| match e {
        Error::Io(io) => CliError::Core(Error::Format(format!("cannot read histogram {}: {io}", hist_path.display()))),
        other => CliError::Core(other),
    })?;
    let series = load_series(&s.path("series")?)?;
    let out = s.path("out")?;
    let mut w = create(&out)?;
    writeln!(w, "day,n,m,n_p_ml,log_likelihood,flat_flag")?;
    for d in estimate_np_series(&hist, &series) {
        match d.estimate {
            Some(e) => writeln!(w, "{},{},{},{},{},{}", d.day, d.n, d.m, e.n_p_ml, e.log_likelihood, e.flat_flag)?,
            None => writeln!(w, "{},{},{},,,", d.day, d.n, d.m)?,
        }
    }
    w.flush()?;
    s.write_manifest(&manifest_path(&out))
}

pub const INGEST: CommandSpec = CommandSpec {
    name: "ingest",
    keys: &["input", "out", "rejects", "categories", "window_start", "window_end"],
    defaults: || {
        let mut kv = KeyValues::new();
        kv.set("out", "series.csv");
        kv.set("categories", default_categories().into_iter().collect::<Vec<_>>().join(","));
        kv.set("window_start", "08:00");
        kv.set("window_end", "18:00");
        kv
    },
    run: ingest,
};

fn time_of_day(s: &Settings, key: &str) -> CliResult<NaiveTime> {
    let text: String = s.get(key)?;
    NaiveTime::parse_from_str(&text, "%H:%M")
        .map_err(|_| CliError::Usage(format!("--{}: expected HH:MM, got {text:?}", key.replace('_', "-"))))
}

fn ingest(s: Settings) -> CliResult<()> {
    let input: String = s.get("input")?;
    let out = s.path("out")?;
    let rejects_path = match s.optional::<String>("rejects")? {
        Some(p) => PathBuf::from(p),
        None => derived_path(&out, ".rejects.csv"),
    };
    let window = TimeWindow { start: time_of_day(&s, "window_start")?, end: time_of_day(&s, "window_end")? };
    if window.end <= window.start {
        return Err(CliError::Usage("--window-end must be later than --window-start".into()));
    }
    let categories: String = s.get("categories")?;

    let file = File::open(&input).map_err(|e| Error::Format(format!("cannot read log {input}: {e}")))?;
    let parsed = parse_transactions(file)?;
    let records = if categories.trim() == "all" {
        parsed.records
    } else {
        let allow = categories.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect();
        filter_categories(parsed.records, &allow)
    };
    let ingested = build_daily_networks(&records, window, &input)?;
    write_series(&ingested.series, &out).map_err(writing(&out))?;

    let mut w = csv::Writer::from_writer(create(&rejects_path)?);
    w.write_record(["line", "reason"])?;
    for r in &parsed.rejects {
        w.write_record([r.line.to_string(), r.reason.clone()])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_writer(create(&derived_path(&out, ".banks.csv"))?);
    w.write_record(["id", "name"])?;
    for (k, name) in ingested.names.iter().enumerate() {
        w.write_record([(k + 1).to_string(), name.clone()])?;
    }
    w.flush()?;
    let mut w = create(&derived_path(&out, ".days.csv"))?;
    writeln!(w, "day,date")?;
    for (net, date) in ingested.series.networks.iter().zip(&ingested.dates) {
        writeln!(w, "{},{date}", net.day)?;
    }
    w.flush()?;
    eprintln!(
        "{} records kept, {} rejected, {} days, {} banks",
        records.len(),
        parsed.rejects.len(),
        ingested.series.len(),
        ingested.names.len()
    );
    s.write_manifest(&manifest_path(&out))
}
