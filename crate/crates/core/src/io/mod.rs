//! Case files, snapshot files and run summaries.

mod config;
mod snapshot;

pub use config::{config_to_string, parse_config, parse_config_str};
pub use snapshot::{format_snapshot, format_summary, parse_snapshot, snapshot_file_name, write_run, COLUMNS};
