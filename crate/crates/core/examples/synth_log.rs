//! Writes a synthetic transaction log in the ingest CSV format from a
//! simulated series: `synth_log <out.csv> [n_p] [days] [seed]`.
//!
//! Each daily edge becomes one to three in-window transactions whose amounts
//! (millions) sum to the edge weight. A few out-of-window, non-overnight and
//! malformed rows are mixed in so that every filtering rule is exercised.

use std::io::Write;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use interbank_core::model::simulate_series;
use interbank_core::{ModelParams, WeightParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let out = args.get(1).ok_or("usage: synth_log <out.csv> [n_p] [days] [seed]")?;
    let n_p: usize = args.get(2).map_or(Ok(80), |s| s.parse())?;
    let days: usize = args.get(3).map_or(Ok(40), |s| s.parse())?;
    let seed: u64 = args.get(4).map_or(Ok(1), |s| s.parse())?;

    let params = ModelParams { n_p, horizon: 5000 + days, burn_in: 5000, ..ModelParams::default() };
    let series = simulate_series(&params, &WeightParams::default(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut w = std::io::BufWriter::new(std::fs::File::create(out)?);
    writeln!(w, "timestamp,lender,borrower,amount,category")?;

    let mut date = NaiveDate::from_ymd_opt(2024, 1, 2).unwrap();
    let name = |id: u32| format!("BK{id:03}");
    for net in &series.networks {
        while matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            date += Duration::days(1);
        }
        let mut rows: Vec<(u32, String, String, f64, &str)> = Vec::new();
        for e in net.edges() {
            let parts = rng.random_range(1..=3);
            let total = ((e.weight * 100.0).round() / 100.0).max(0.01);
            let mut left = total;
            for k in 0..parts {
                let amount = if k + 1 == parts { left } else { ((left * rng.random_range(0.2..0.6) * 100.0).round() / 100.0).max(0.01) };
                left = ((left - amount) * 100.0).round() / 100.0;
                let minute = rng.random_range(8 * 60..18 * 60);
                let category = if rng.random::<f64>() < 0.3 { "ONL" } else { "ON" };
                rows.push((minute, name(e.lender.0), name(e.borrower.0), amount, category));
            }
            if rng.random::<f64>() < 0.05 {
                let minute = if rng.random::<bool>() { rng.random_range(6 * 60..8 * 60) } else { rng.random_range(18 * 60..20 * 60) };
                rows.push((minute, name(e.lender.0), name(e.borrower.0), total, "ON"));
            }
            if rng.random::<f64>() < 0.05 {
                rows.push((rng.random_range(8 * 60..18 * 60), name(e.lender.0), name(e.borrower.0), total, "1W"));
            }
        }
        rows.sort_by_key(|r| r.0);
        for (minute, l, b, amount, cat) in rows {
            writeln!(w, "{} {:02}:{:02},{l},{b},{amount:.2},{cat}", date.format("%Y-%m-%d"), minute / 60, minute % 60)?;
        }
        date += Duration::days(1);
    }
    writeln!(w, "2024-01-02 10:00,BK001,BK001,5,ON")?;
    writeln!(w, "2024-01-02 24:10,BK001,BK002,5,ON")?;
    writeln!(w, "2024-01-02 11:00,BK001,BK002,n/a,ON")?;
    w.flush()?;
    Ok(())
}
