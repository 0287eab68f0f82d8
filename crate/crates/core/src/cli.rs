//! The `contagion` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 for I/O
//! errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::batch::{
    default_map_contacts, default_map_thresholds, outbreak_map, run_batch, size_invariance_report,
    OutbreakMap, SizeInvarianceReport, DEFAULT_REPLICATES,
};
use crate::engine::{run, SimulationConfig};
use crate::io::{
    format_significant, parse_config, parse_sweep, render_config, write_summary, write_text,
    write_timeseries, BatchReport,
};
use crate::model::CommunitySpec;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "contagion",
    version,
    about = "Threshold epidemic simulations on random contact networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single run; writes timeseries.csv and summary.json.
    Run(RunArgs),
    /// Replicated parameter sweep; writes aggregates.json.
    Sweep(SweepArgs),
    /// Outbreak fraction over pathogenic threshold × mean contacts.
    OutbreakMap(MapArgs),
    /// Infection and death rates across population sizes.
    SizeInvariance(SizeArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Master seed.
    #[arg(long, env = "CONTAGION_SEED")]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario preset; keys from --config are merged over it.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    max_rounds: Option<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// JSON sweep file with `base`, `axes`, `replicates` and `master_seed`.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the file's replicate count.
    #[arg(long)]
    replicates: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    parallel: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct MapArgs {
    /// Base configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pathogenic thresholds, comma separated.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// Mean contact counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    contacts: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    parallel: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SizeArgs {
    /// Base configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Population sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100,500,1000,2000")]
    sizes: Vec<usize>,
    /// Use a community network with this many individuals per community.
    #[arg(long)]
    community: Option<usize>,
    /// Edges between each pair of communities.
    #[arg(long, default_value_t = 1)]
    links: usize,
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    parallel: usize,
    #[command(flatten)]
    common: Common,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn prepare(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_owned(),
        source,
    })
}

fn load_base(config: Option<&Path>, preset: Option<&str>) -> Result<SimulationConfig> {
    let text = match config {
        Some(path) => read(path)?,
        None => String::new(),
    };
    let Some(name) = preset else {
        return parse_config(&text);
    };
    let mut doc: Value = if text.trim().is_empty() {
        Value::Object(Default::default())
    } else {
        serde_json::from_str(&text)
            .map_err(|e| Error::config("", format!("malformed document: {e}")))?
    };
    match doc.as_object_mut() {
        Some(map) => {
            map.insert("preset".into(), Value::String(name.to_owned()));
        }
        None => return Err(Error::config("", "expected a JSON object")),
    }
    parse_config(&doc.to_string())
}

fn cmd_run(args: RunArgs) -> Result<String> {
    let mut config = load_base(args.config.as_deref(), args.preset.as_deref())?;
    if let Some(seed) = args.common.seed {
        config.master_seed = seed;
    }
    if let Some(rounds) = args.max_rounds {
        config.max_rounds = rounds;
        config.validate()?;
    }
    let result = run(config.clone())?;
    let dir = &args.common.out_dir;
    prepare(dir)?;
    write_timeseries(&result.records, &dir.join("timeseries.csv"))?;
    write_summary(&result.summary, &dir.join("summary.json"))?;
    write_text(&dir.join("config.json"), &(render_config(&config) + "\n"))?;
    let s = &result.summary;
    Ok(format!(
        "rounds {} infection rate {} death rate {} outbreak {}\n",
        s.rounds_elapsed,
        format_significant(s.infection_rate, 6),
        format_significant(s.death_rate, 6),
        s.outbreak
    ))
}

fn cmd_sweep(args: SweepArgs) -> Result<String> {
    let mut sweep = parse_sweep(&read(&args.config)?)?;
    if let Some(r) = args.replicates {
        sweep.replicates = r;
    }
    if let Some(seed) = args.common.seed {
        sweep.master_seed = seed;
    }
    if sweep.replicates == 0 {
        return Err(Error::config("replicates", "must be at least 1"));
    }
    let results = run_batch(&sweep, args.parallel)?;
    let report = BatchReport::new(sweep.master_seed, sweep.replicates, results)?;
    prepare(&args.common.out_dir)?;
    write_summary(&report, &args.common.out_dir.join("aggregates.json"))?;
    let mut out = String::new();
    for p in &report.points {
        let label: Vec<String> = p
            .point
            .values
            .iter()
            .map(|v| format!("{}={}", v.path, v.value))
            .collect();
        let _ = writeln!(
            out,
            "{} infection {} death {} outbreak {}",
            if label.is_empty() {
                "base".into()
            } else {
                label.join(" ")
            },
            format_significant(p.aggregate.infection_rate_mean, 6),
            format_significant(p.aggregate.death_rate_mean, 6),
            format_significant(p.aggregate.outbreak_fraction, 6),
        );
    }
    Ok(out)
}

fn map_csv(map: &OutbreakMap) -> String {
    let mut out = String::from("pathogenic_threshold,contact_count_mean,outbreak_fraction\n");
    for (t, row) in map.thresholds.iter().zip(&map.fractions) {
        for (c, f) in map.contacts.iter().zip(row) {
            let _ = writeln!(
                out,
                "{},{},{}",
                format_significant(*t, 6),
                format_significant(*c, 6),
                format_significant(*f, 6)
            );
        }
    }
    out
}

fn replicates(n: usize) -> Result<usize> {
    if n == 0 {
        Err(Error::config("replicates", "must be at least 1"))
    } else {
        Ok(n)
    }
}

fn cmd_outbreak_map(args: MapArgs) -> Result<String> {
    let base = load_base(args.config.as_deref(), None)?;
    let thresholds = args.thresholds.unwrap_or_else(default_map_thresholds);
    let contacts = args.contacts.unwrap_or_else(default_map_contacts);
    let seed = args.common.seed.unwrap_or(base.master_seed);
    let map = outbreak_map(
        &thresholds,
        &contacts,
        &base,
        replicates(args.replicates)?,
        seed,
        args.parallel,
    )
    .map_err(into_config)?;
    let dir = &args.common.out_dir;
    prepare(dir)?;
    let csv = map_csv(&map);
    write_text(&dir.join("outbreak_map.csv"), &csv)?;
    write_summary(&map, &dir.join("outbreak_map.json"))?;
    Ok(csv)
}

fn size_csv(report: &SizeInvarianceReport) -> String {
    let mut out = String::from(
        "population,runs,infection_rate_mean,infection_rate_stddev,death_rate_mean,death_rate_stddev,outbreak_fraction\n",
    );
    for row in &report.rows {
        let s = &row.stats;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.population,
            s.runs,
            format_significant(s.infection_rate_mean, 6),
            format_significant(s.infection_rate_stddev, 6),
            format_significant(s.death_rate_mean, 6),
            format_significant(s.death_rate_stddev, 6),
            format_significant(s.outbreak_fraction, 6),
        );
    }
    out
}

fn cmd_size_invariance(args: SizeArgs) -> Result<String> {
    let mut base = load_base(args.config.as_deref(), None)?;
    if let Some(size) = args.community {
        base.network.community = Some(CommunitySpec {
            community_size: size,
            inter_community_links: args.links,
        });
    }
    let seed = args.common.seed.unwrap_or(base.master_seed);
    let report = size_invariance_report(
        &args.sizes,
        &base,
        replicates(args.replicates)?,
        seed,
        args.parallel,
    )
    .map_err(into_config)?;
    let dir = &args.common.out_dir;
    prepare(dir)?;
    let csv = size_csv(&report);
    write_text(&dir.join("size_invariance.csv"), &csv)?;
    write_summary(&report, &dir.join("size_invariance.json"))?;
    Ok(format!(
        "{csv}max infection rate difference {}\nmax death rate difference {}\n",
        format_significant(report.max_infection_rate_difference, 6),
        format_significant(report.max_death_rate_difference, 6),
    ))
}

fn into_config(e: Error) -> Error {
    match e {
        Error::Parameter { field, message } => Error::Config {
            path: field,
            message,
        },
        other => other,
    }
}

fn dispatch(command: Command) -> Result<String> {
    match command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::OutbreakMap(a) => cmd_outbreak_map(a),
        Command::SizeInvariance(a) => cmd_size_invariance(a),
    }
}

/// Runs the command line given in `args` (program name first) and returns
/// the process exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_configuration() {
                EXIT_CONFIG
            } else {
                EXIT_IO
            }
        }
    }
}
