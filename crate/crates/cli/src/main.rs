//! `interbank`: simulation, analysis and fitting pipelines for daily
//! interbank networks.
//!
//! Every flag `--some-key` doubles the config key `some_key`. Settings are
//! resolved as defaults, then `--config <file>`, then flags, and the
//! effective set is written to a manifest next to the outputs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use interbank_core::config::KeyValues;

mod commands;
mod settings;

use settings::{put, CliResult, Settings};

#[derive(Parser, Debug)]
#[command(name = "interbank", version, about = "Dynamical fitness model of daily interbank networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a network series and write it as CSV with a metadata sidecar.
    Simulate(SimulateArgs),
    /// Compute metric tables for a series.
    Analyze(AnalyzeArgs),
    /// Fit a scaling law, Weibull or discrete power law.
    Fit(FitArgs),
    /// Expected (N, M) of the untyped model over an N_P grid.
    #[command(alias = "theory-curve")]
    Theory(TheoryArgs),
    /// Build the conditional (N, M) histogram over an N_P grid.
    BuildHist(BuildHistArgs),
    /// Per-day maximum-likelihood N_P for a series.
    EstimateNp(EstimateNpArgs),
    /// Convert a transaction log into a daily network series.
    Ingest(IngestArgs),
}

#[derive(Args, Debug)]
struct ConfigFlag {
    /// key=value settings file; a manifest from an earlier run also works.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Model parameters other than the market size.
#[derive(Args, Debug)]
struct ModelFlags {
    /// Edge-kernel exponent [4]
    #[arg(long)]
    alpha: Option<f64>,
    /// Reset-rate divisor [2000]
    #[arg(long)]
    c1: Option<f64>,
    /// Reset-rate exponent [2]
    #[arg(long)]
    c2: Option<f64>,
    /// Share of pure borrowers [0.56]
    #[arg(long)]
    f_borrower: Option<f64>,
    /// Share of pure lenders [0.34]
    #[arg(long)]
    f_lender: Option<f64>,
    /// Share of banks that both lend and borrow [0.1]
    #[arg(long)]
    f_bidirectional: Option<f64>,
    /// Half-width of the daily angle step, in turns [0.002]
    #[arg(long)]
    walk_half_width: Option<f64>,
    /// Simulated days including burn-in [6500]
    #[arg(long)]
    horizon: Option<usize>,
    /// Discarded initial days [5000]
    #[arg(long)]
    burn_in: Option<usize>,
}

impl ModelFlags {
    fn put(&self, kv: &mut KeyValues) {
        put(kv, "alpha", &self.alpha);
        put(kv, "c1", &self.c1);
        put(kv, "c2", &self.c2);
        put(kv, "f_borrower", &self.f_borrower);
        put(kv, "f_lender", &self.f_lender);
        put(kv, "f_bidirectional", &self.f_bidirectional);
        put(kv, "walk_half_width", &self.walk_half_width);
        put(kv, "horizon", &self.horizon);
        put(kv, "burn_in", &self.burn_in);
    }
}

#[derive(Args, Debug)]
struct WeightFlags {
    /// Daily probability that a persisting loan is renegotiated [0.5]
    #[arg(long)]
    q: Option<f64>,
    /// Weight scale [80]
    #[arg(long)]
    kappa: Option<f64>,
    /// Pareto exponent of the weight multiplier [3.3]
    #[arg(long)]
    eta: Option<f64>,
    /// Lower bound of the weight multiplier [1]
    #[arg(long)]
    nu_min: Option<f64>,
}

impl WeightFlags {
    fn put(&self, kv: &mut KeyValues) {
        put(kv, "q", &self.q);
        put(kv, "kappa", &self.kappa);
        put(kv, "eta", &self.eta);
        put(kv, "nu_min", &self.nu_min);
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigFlag,
    /// Potential market size [300]
    #[arg(long)]
    n_p: Option<usize>,
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    weights: WeightFlags,
    /// Master seed [0]
    #[arg(long)]
    seed: Option<u64>,
    /// Series CSV [series.csv]
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    config: ConfigFlag,
    /// Series CSV with its .meta sidecar
    #[arg(long)]
    series: Option<String>,
    /// Comma-separated metric names, or `all` [all]
    #[arg(long)]
    metric: Option<String>,
    /// Window length in days for activity fractions [250]
    #[arg(long)]
    window: Option<usize>,
    /// Middle fraction of K(t) used for its growth exponent [0.8]
    #[arg(long)]
    fraction: Option<f64>,
    /// Output directory [analysis]
    #[arg(long)]
    out_dir: Option<String>,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    config: ConfigFlag,
    /// scaling, weibull or power-law
    #[arg(long)]
    fitter: Option<String>,
    /// Series CSV to draw the samples from
    #[arg(long)]
    series: Option<String>,
    /// Samples CSV with a header: one value column, or `n,m` for scaling
    #[arg(long)]
    samples: Option<String>,
    /// Run subject for series input: pair, node_active, node_in, node_out [pair]
    #[arg(long)]
    subject: Option<String>,
    /// Fit report CSV [fit.csv]
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    #[command(flatten)]
    config: ConfigFlag,
    /// Edge-kernel exponent [4]
    #[arg(long)]
    alpha: Option<f64>,
    /// N_P grid as a:b, a:b:step or a comma list [20:300]
    #[arg(long)]
    grid: Option<String>,
    /// Theory CSV [theory.csv]
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct BuildHistArgs {
    #[command(flatten)]
    config: ConfigFlag,
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    weights: WeightFlags,
    /// N_P grid [20:400:10]
    #[arg(long)]
    grid: Option<String>,
    /// Model runs per grid value [500]
    #[arg(long)]
    replicates: Option<usize>,
    /// Retained days sampled per run [10]
    #[arg(long)]
    days_per_replicate: Option<usize>,
    /// Bin width along N [5]
    #[arg(long)]
    w_n: Option<usize>,
    /// Bin width along M [20]
    #[arg(long)]
    w_m: Option<usize>,
    /// Pseudo-count mass per grid value [1]
    #[arg(long)]
    smoothing: Option<f64>,
    /// Master seed [0]
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores [0]
    #[arg(long)]
    workers: Option<usize>,
    /// Histogram CSV [hist.csv]
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct EstimateNpArgs {
    #[command(flatten)]
    config: ConfigFlag,
    /// Histogram CSV with its .meta sidecar
    #[arg(long)]
    hist: Option<String>,
    /// Series CSV with its .meta sidecar
    #[arg(long)]
    series: Option<String>,
    /// Estimates CSV [np_estimates.csv]
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    config: ConfigFlag,
    /// Transaction log CSV: timestamp,lender,borrower,amount,category
    #[arg(long)]
    input: Option<String>,
    /// Series CSV [series.csv]
    #[arg(long)]
    out: Option<String>,
    /// Rejected rows CSV [<out>.rejects.csv]
    #[arg(long)]
    rejects: Option<String>,
    /// Comma-separated categories to keep, or `all` [ON,ONL]
    #[arg(long)]
    categories: Option<String>,
    /// Start of the daily window, inclusive [08:00]
    #[arg(long)]
    window_start: Option<String>,
    /// End of the daily window, exclusive [18:00]
    #[arg(long)]
    window_end: Option<String>,
}

fn flags_of(command: &Command) -> (Option<&PathBuf>, KeyValues) {
    let mut kv = KeyValues::new();
    let config = match command {
        Command::Simulate(a) => {
            put(&mut kv, "n_p", &a.n_p);
            a.model.put(&mut kv);
            a.weights.put(&mut kv);
            put(&mut kv, "seed", &a.seed);
            put(&mut kv, "out", &a.out);
            &a.config
        }
        Command::Analyze(a) => {
            put(&mut kv, "series", &a.series);
            put(&mut kv, "metric", &a.metric);
            put(&mut kv, "window", &a.window);
            put(&mut kv, "fraction", &a.fraction);
            put(&mut kv, "out_dir", &a.out_dir);
            &a.config
        }
        Command::Fit(a) => {
            put(&mut kv, "fitter", &a.fitter);
            put(&mut kv, "series", &a.series);
            put(&mut kv, "samples", &a.samples);
            put(&mut kv, "subject", &a.subject);
            put(&mut kv, "out", &a.out);
            &a.config
        }
        Command::Theory(a) => {
            put(&mut kv, "alpha", &a.alpha);
            put(&mut kv, "grid", &a.grid);
            put(&mut kv, "out", &a.out);
            &a.config
        }
        Command::BuildHist(a) => {
            a.model.put(&mut kv);
            a.weights.put(&mut kv);
            put(&mut kv, "grid", &a.grid);
            put(&mut kv, "replicates", &a.replicates);
            put(&mut kv, "days_per_replicate", &a.days_per_replicate);
            put(&mut kv, "w_n", &a.w_n);
            put(&mut kv, "w_m", &a.w_m);
            put(&mut kv, "smoothing", &a.smoothing);
            put(&mut kv, "seed", &a.seed);
            put(&mut kv, "workers", &a.workers);
            put(&mut kv, "out", &a.out);
            &a.config
        }
        Command::EstimateNp(a) => {
            put(&mut kv, "hist", &a.hist);
            put(&mut kv, "series", &a.series);
            put(&mut kv, "out", &a.out);
            &a.config
        }
        Command::Ingest(a) => {
            put(&mut kv, "input", &a.input);
            put(&mut kv, "out", &a.out);
            put(&mut kv, "rejects", &a.rejects);
            put(&mut kv, "categories", &a.categories);
            put(&mut kv, "window_start", &a.window_start);
            put(&mut kv, "window_end", &a.window_end);
            &a.config
        }
    };
    (config.config.as_ref(), kv)
}

fn run(cli: Cli) -> CliResult<()> {
    let (config, flags) = flags_of(&cli.command);
    let spec = match cli.command {
        Command::Simulate(_) => commands::SIMULATE,
        Command::Analyze(_) => commands::ANALYZE,
        Command::Fit(_) => commands::FIT,
        Command::Theory(_) => commands::THEORY,
        Command::BuildHist(_) => commands::BUILD_HIST,
        Command::EstimateNp(_) => commands::ESTIMATE_NP,
        Command::Ingest(_) => commands::INGEST,
    };
    let settings = Settings::resolve(spec.name, &spec.keys(), spec.defaults(), config.map(PathBuf::as_path), flags)?;
    (spec.run)(settings)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
