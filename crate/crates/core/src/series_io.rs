//! Series CSV `day,lender,borrower,weight` with a `<path>.meta` key=value
//! sidecar carrying the day range and provenance.
//!
//! Unweighted networks leave the weight column empty. Days without edges have
//! no rows and are restored from the sidecar.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::model::{ModelParams, WeightParams};
use crate::network::{BankId, DailyNetwork, Edge, NetworkSeries, Provenance};

const HEADER: &str = "day,lender,borrower,weight";

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    s.into()
}

pub fn write_series(series: &NetworkSeries, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_series_csv(series, std::io::BufWriter::new(file))?;
    series_metadata(series).write(&sidecar_path(path))
}

pub fn read_series(path: &Path) -> Result<NetworkSeries> {
    let meta = KeyValues::read(&sidecar_path(path))?;
    read_series_csv(std::fs::File::open(path)?, &meta)
}

pub fn write_series_csv<W: Write>(series: &NetworkSeries, mut w: W) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    for net in &series.networks {
        for e in net.edges() {
            if net.is_weighted() {
                writeln!(w, "{},{},{},{}", net.day, e.lender, e.borrower, e.weight)?;
            } else {
                writeln!(w, "{},{},{},", net.day, e.lender, e.borrower)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn series_metadata(series: &NetworkSeries) -> KeyValues {
    let mut kv = KeyValues::new();
    let days: Vec<usize> = series.networks.iter().map(|n| n.day).collect();
    kv.set("day_count", days.len());
    kv.set("first_day", days.first().copied().unwrap_or(0));
    let contiguous = days.windows(2).all(|w| w[1] == w[0] + 1);
    if !contiguous {
        kv.set("days", days.iter().map(usize::to_string).collect::<Vec<_>>().join(" "));
    }
    kv.set("weighted", series.is_weighted());
    match &series.provenance {
        Provenance::Simulated { params, weights, seed } => {
            kv.set("provenance", "simulated");
            params.write_keys(&mut kv);
            weights.write_keys(&mut kv);
            kv.set("seed", seed);
        }
        Provenance::Ingested { source } => {
            kv.set("provenance", "ingested");
            kv.set("source", source);
        }
    }
    kv
}

fn metadata_days(meta: &KeyValues) -> Result<Vec<usize>> {
    if let Some(list) = meta.get("days") {
        return list
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| Error::Format(format!("bad day index {s:?} in metadata"))))
            .collect();
    }
    let count: usize = meta.parsed("day_count")?.ok_or_else(|| Error::Format("metadata lacks day_count".into()))?;
    let first: usize = meta.parsed("first_day")?.unwrap_or(0);
    Ok((first..first + count).collect())
}

fn metadata_provenance(meta: &KeyValues) -> Result<Provenance> {
    match meta.get("provenance") {
        Some("simulated") => Ok(Provenance::Simulated {
            params: ModelParams::from_keys(meta)?,
            weights: WeightParams::from_keys(meta)?,
            seed: meta.parsed("seed")?.unwrap_or(0),
        }),
        Some("ingested") => Ok(Provenance::Ingested { source: meta.get("source").unwrap_or_default().to_string() }),
        other => Err(Error::Format(format!("unknown provenance {other:?}"))),
    }
}

pub fn read_series_csv<R: Read>(reader: R, meta: &KeyValues) -> Result<NetworkSeries> {
    let days = metadata_days(meta)?;
    let weighted: bool = meta.parsed("weighted")?.unwrap_or(true);
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    if rdr.headers()?.iter().collect::<Vec<_>>().join(",") != HEADER {
        return Err(Error::Format(format!("series CSV must start with header {HEADER:?}")));
    }
    let mut by_day: BTreeMap<usize, Vec<Edge>> = days.iter().map(|&d| (d, Vec::new())).collect();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::Format(format!("series CSV line {line}: {what}"));
        if row.len() != 4 {
            return Err(bad("expected 4 fields"));
        }
        let day: usize = row[0].parse().map_err(|_| bad("bad day"))?;
        let lender = BankId(row[1].parse().map_err(|_| bad("bad lender id"))?);
        let borrower = BankId(row[2].parse().map_err(|_| bad("bad borrower id"))?);
        let weight = match (&row[3], weighted) {
            ("", false) => 1.0,
            ("", true) => return Err(bad("missing weight in a weighted series")),
            (w, _) => w.parse().map_err(|_| bad("bad weight"))?,
        };
        by_day.get_mut(&day).ok_or_else(|| bad("day outside the recorded range"))?.push(Edge::new(lender, borrower, weight));
    }
    let networks = by_day
        .into_iter()
        .map(|(day, edges)| DailyNetwork::new(day, edges, weighted))
        .collect::<Result<Vec<_>>>()?;
    NetworkSeries::new(networks, metadata_provenance(meta)?)
}
