//! Configuration files, CSV tables, binary snapshots and SVG plots.

pub mod config;
pub mod csv;
pub mod plot;
pub mod snapshot;

pub use config::{load_config, parse_config, parse_config_str, RunConfig};
pub use csv::{read_csv, write_csv, Table};
pub use plot::{emit_plot, PlotStyle};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
