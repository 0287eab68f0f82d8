//! Replicated and swept experiments.
//!
//! A sweep is the cartesian product of its axes (last axis varying fastest)
//! times a replicate count. Replicate `r` of grid point `g` runs with seed
//! [`derive_seed`]`(master_seed, g, r)`, so results do not depend on the
//! worker count or on the other cells of the grid.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::engine::{RunSummary, Simulation, SimulationConfig};
use crate::model::CommunitySpec;
use crate::seed::derive_seed;
use crate::{Error, Result};

pub const DEFAULT_REPLICATES: usize = 30;

/// One swept parameter: a dotted path into [`SimulationConfig`] and the
/// values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub path: String,
    pub values: Vec<Value>,
}

impl Axis {
    pub fn new<T: Into<Value>>(path: &str, values: impl IntoIterator<Item = T>) -> Self {
        Self {
            path: path.to_owned(),
            values: values.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SimulationConfig,
    pub axes: Vec<Axis>,
    pub replicates: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisValue {
    pub path: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub values: Vec<AxisValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub point: GridPoint,
    pub summaries: Vec<RunSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub runs: usize,
    pub infection_rate_mean: f64,
    pub infection_rate_stddev: f64,
    pub death_rate_mean: f64,
    pub death_rate_stddev: f64,
    pub outbreak_fraction: f64,
    pub rounds_mean: f64,
}

/// Replaces the value at `path` (dot separated) in a configuration.
pub fn apply_override(
    config: &SimulationConfig,
    path: &str,
    value: &Value,
) -> Result<SimulationConfig> {
    let unresolved = || Error::config(path, "does not name a configuration field");
    let mut doc = serde_json::to_value(config).expect("configuration serializes");
    let mut slot = &mut doc;
    for key in path.split('.') {
        slot = slot
            .as_object_mut()
            .and_then(|o| o.get_mut(key))
            .ok_or_else(unresolved)?;
    }
    *slot = match (&*slot, value.as_f64()) {
        // integer fields accept integral floats such as `100.0`
        (Value::Number(n), Some(f)) if n.is_u64() && f.fract() == 0.0 && f >= 0.0 => {
            Value::from(f as u64)
        }
        _ => value.clone(),
    };
    serde_json::from_value(doc).map_err(|e| Error::config(path, e.to_string()))
}

impl SweepSpec {
    pub fn new(
        base: SimulationConfig,
        axes: Vec<Axis>,
        replicates: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            base,
            axes,
            replicates,
            master_seed,
        }
    }

    pub fn grid_size(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Every grid point with its resolved configuration, in grid order.
    pub fn grid(&self) -> Result<Vec<(GridPoint, SimulationConfig)>> {
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        for (k, axis) in self.axes.iter().enumerate() {
            if axis.values.is_empty() {
                return Err(Error::config(
                    format!("axes[{k}].values"),
                    "axis has no values",
                ));
            }
        }
        let mut points = Vec::with_capacity(self.grid_size());
        for index in 0..self.grid_size() {
            let mut rest = index;
            let mut values = Vec::with_capacity(self.axes.len());
            for axis in self.axes.iter().rev() {
                let len = axis.values.len();
                values.push(AxisValue {
                    path: axis.path.clone(),
                    value: axis.values[rest % len].clone(),
                });
                rest /= len;
            }
            values.reverse();
            let mut config = self.base.clone();
            for v in &values {
                config = apply_override(&config, &v.path, &v.value)?;
            }
            config.validate().map_err(|e| match e {
                Error::Parameter { field, message } => {
                    Error::config(field, format!("{message} (grid point {index})"))
                }
                other => other,
            })?;
            points.push((GridPoint { index, values }, config));
        }
        Ok(points)
    }
}

/// Runs one configuration to completion without keeping the time series.
pub fn run_summary(config: SimulationConfig) -> Result<RunSummary> {
    let mut sim = Simulation::new(config)?;
    while !sim.is_terminated() {
        sim.step()?;
    }
    Ok(sim.summary())
}

fn execute(jobs: Vec<SimulationConfig>, parallelism: usize) -> Result<Vec<RunSummary>> {
    #[cfg(feature = "parallel")]
    if parallelism != 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::config("parallel", e.to_string()))?;
        return pool.install(|| jobs.into_par_iter().map(run_summary).collect());
    }
    let _ = parallelism;
    jobs.into_iter().map(run_summary).collect()
}

/// Executes every (grid point, replicate) pair once. `parallelism` is the
/// worker count; 0 uses every available core.
pub fn run_batch(sweep: &SweepSpec, parallelism: usize) -> Result<Vec<PointResult>> {
    let grid = sweep.grid()?;
    let mut jobs = Vec::with_capacity(grid.len() * sweep.replicates);
    for (point, config) in &grid {
        for r in 0..sweep.replicates {
            let mut c = config.clone();
            c.master_seed = derive_seed(sweep.master_seed, point.index as u64, r as u64);
            jobs.push(c);
        }
    }
    let mut summaries = execute(jobs, parallelism)?.into_iter();
    Ok(grid
        .into_iter()
        .map(|(point, _)| PointResult {
            point,
            summaries: summaries.by_ref().take(sweep.replicates).collect(),
        })
        .collect())
}

fn mean_and_stddev(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Means, sample standard deviations and outbreak fraction of one grid point.
pub fn aggregate(summaries: &[RunSummary]) -> Result<AggregateStats> {
    if summaries.is_empty() {
        return Err(Error::parameter(
            "summaries",
            "cannot aggregate an empty list",
        ));
    }
    let (infection_rate_mean, infection_rate_stddev) =
        mean_and_stddev(summaries.iter().map(|s| s.infection_rate));
    let (death_rate_mean, death_rate_stddev) =
        mean_and_stddev(summaries.iter().map(|s| s.death_rate));
    let n = summaries.len() as f64;
    Ok(AggregateStats {
        runs: summaries.len(),
        infection_rate_mean,
        infection_rate_stddev,
        death_rate_mean,
        death_rate_stddev,
        outbreak_fraction: summaries.iter().filter(|s| s.outbreak).count() as f64 / n,
        rounds_mean: summaries
            .iter()
            .map(|s| s.rounds_elapsed as f64)
            .sum::<f64>()
            / n,
    })
}

pub const THRESHOLD_PATH: &str = "disease.pathogenic_threshold";
pub const CONTACTS_PATH: &str = "network.contact_count_mean";

/// Default pathogenic-threshold axis of the outbreak map: 0.1 to 1.2.
pub fn default_map_thresholds() -> Vec<f64> {
    (1..=12).map(|k| k as f64 / 10.0).collect()
}

/// Default contact axis of the outbreak map: 0 to 10.
pub fn default_map_contacts() -> Vec<f64> {
    (0..=10).map(f64::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutbreakMap {
    pub thresholds: Vec<f64>,
    pub contacts: Vec<f64>,
    /// `fractions[t][c]`: share of replicates that broke out at threshold
    /// `thresholds[t]` and mean contacts `contacts[c]`.
    pub fractions: Vec<Vec<f64>>,
    pub points: Vec<PointResult>,
}

/// Outbreak fraction over a pathogenic threshold × mean contacts grid.
pub fn outbreak_map(
    thresholds: &[f64],
    contacts: &[f64],
    base: &SimulationConfig,
    replicates: usize,
    master_seed: u64,
    parallelism: usize,
) -> Result<OutbreakMap> {
    if thresholds.is_empty() {
        return Err(Error::parameter("thresholds", "axis is empty"));
    }
    if contacts.is_empty() {
        return Err(Error::parameter("contacts", "axis is empty"));
    }
    let sweep = SweepSpec::new(
        base.clone(),
        vec![
            Axis::new(THRESHOLD_PATH, thresholds.iter().copied()),
            Axis::new(CONTACTS_PATH, contacts.iter().copied()),
        ],
        replicates,
        master_seed,
    );
    let points = run_batch(&sweep, parallelism)?;
    let fractions = points
        .chunks(contacts.len())
        .map(|row| {
            row.iter()
                .map(|p| {
                    p.summaries.iter().filter(|s| s.outbreak).count() as f64
                        / p.summaries.len() as f64
                })
                .collect()
        })
        .collect();
    Ok(OutbreakMap {
        thresholds: thresholds.to_vec(),
        contacts: contacts.to_vec(),
        fractions,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRow {
    pub population: usize,
    pub stats: AggregateStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeInvarianceReport {
    pub community: Option<CommunitySpec>,
    pub rows: Vec<SizeRow>,
    pub max_infection_rate_difference: f64,
    pub max_death_rate_difference: f64,
}

fn spread(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = values.fold(f64::INFINITY, f64::min);
    max - min
}

/// Aggregates per population size and the largest pairwise difference of
/// mean rates across sizes.
pub fn size_invariance_report(
    sizes: &[usize],
    base: &SimulationConfig,
    replicates: usize,
    master_seed: u64,
    parallelism: usize,
) -> Result<SizeInvarianceReport> {
    if sizes.is_empty() {
        return Err(Error::parameter("sizes", "axis is empty"));
    }
    let sweep = SweepSpec::new(
        base.clone(),
        vec![Axis::new(
            "network.population",
            sizes.iter().map(|&n| n as u64),
        )],
        replicates,
        master_seed,
    );
    let rows = run_batch(&sweep, parallelism)?
        .iter()
        .zip(sizes)
        .map(|(p, &population)| {
            Ok(SizeRow {
                population,
                stats: aggregate(&p.summaries)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SizeInvarianceReport {
        community: base.network.community,
        max_infection_rate_difference: spread(rows.iter().map(|r| r.stats.infection_rate_mean)),
        max_death_rate_difference: spread(rows.iter().map(|r| r.stats.death_rate_mean)),
        rows,
    })
}
