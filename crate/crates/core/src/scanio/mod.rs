//! Scenario configs, scan files, reports, presets and the scenario runner.

mod config;
mod presets;
mod report;
mod run;
mod scanfile;
pub mod svg;

pub use config::*;
pub use presets::{preset, preset_json, preset_names};
pub use report::*;
pub use run::*;
pub use scanfile::*;
