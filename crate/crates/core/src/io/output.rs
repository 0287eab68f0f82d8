use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::batch::{aggregate, AggregateStats, GridPoint, PointResult};
use crate::engine::{RoundRecord, RunSummary};
use crate::{Error, Result};

pub const TIMESERIES_HEADER: &str =
    "round,susceptible,infected,recovered,dead,quarantined,cum_infected,max_exposure,total_exposure";

/// Shortest decimal form of `value` rounded to `digits` significant digits.
pub fn format_significant(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), value)
        .parse()
        .expect("scientific notation parses");
    format!("{rounded}")
}

pub fn render_timeseries(records: &[RoundRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.round,
            r.susceptible,
            r.infected,
            r.recovered,
            r.dead,
            r.quarantined,
            r.cumulative_unique_infected,
            format_significant(r.max_exposure, 6),
            format_significant(r.total_exposure, 6),
        );
    }
    out
}

/// Reads back a file produced by [`render_timeseries`].
pub fn parse_timeseries(text: &str) -> Result<Vec<RoundRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(TIMESERIES_HEADER) {
        return Err(Error::config("timeseries", "missing or unexpected header"));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let bad =
                |what: &str| Error::config(format!("timeseries line {}", k + 2), what.to_owned());
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(bad("expected 9 columns"));
            }
            let int = |s: &str| s.parse::<usize>().map_err(|_| bad("bad integer"));
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
            Ok(RoundRecord {
                round: f[0].parse().map_err(|_| bad("bad round"))?,
                susceptible: int(f[1])?,
                infected: int(f[2])?,
                recovered: int(f[3])?,
                dead: int(f[4])?,
                quarantined: int(f[5])?,
                cumulative_unique_infected: int(f[6])?,
                max_exposure: real(f[7])?,
                total_exposure: real(f[8])?,
            })
        })
        .collect()
}

/// Per grid point raw summaries and their aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub point: GridPoint,
    pub aggregate: AggregateStats,
    pub summaries: Vec<RunSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub master_seed: u64,
    pub replicates: usize,
    pub points: Vec<PointReport>,
}

impl BatchReport {
    pub fn new(master_seed: u64, replicates: usize, results: Vec<PointResult>) -> Result<Self> {
        let points = results
            .into_iter()
            .map(|p| {
                Ok(PointReport {
                    aggregate: aggregate(&p.summaries)?,
                    point: p.point,
                    summaries: p.summaries,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            master_seed,
            replicates,
            points,
        })
    }
}

/// Pretty JSON with a trailing newline. Field order follows the struct
/// definitions, so identical inputs give identical bytes.
pub fn render_summary<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn write_timeseries(records: &[RoundRecord], path: &Path) -> Result<()> {
    write_text(path, &render_timeseries(records))
}

pub fn write_summary<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    write_text(path, &render_summary(value))
}
