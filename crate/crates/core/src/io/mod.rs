//! Configuration documents, scenario presets and output files.
//!
//! Configurations are JSON. A document may name a `preset`; the preset's
//! fragment is expanded first and the rest of the document is merged over it
//! key by key. Missing fields take their defaults and unknown keys are
//! rejected with their path.

mod config;
mod output;
mod presets;

pub use config::{load_config, load_sweep, parse_config, parse_sweep, render_config};
pub use output::{
    format_significant, parse_timeseries, render_summary, render_timeseries, write_summary,
    write_text, write_timeseries, BatchReport, PointReport, TIMESERIES_HEADER,
};
pub use presets::{preset, preset_names, PRESET_NAMES};
