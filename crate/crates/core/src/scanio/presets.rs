//! Built-in scenarios.

use crate::error::{Error, Result};

use super::config::ScenarioConfig;

const PRESETS: [(&str, &str); 6] = [
    ("fig2a", include_str!("../../presets/fig2a.json")),
    ("fig2b", include_str!("../../presets/fig2b.json")),
    ("fig3", include_str!("../../presets/fig3.json")),
    ("fig4a", include_str!("../../presets/fig4a.json")),
    ("fig4b", include_str!("../../presets/fig4b.json")),
    ("fig4sweep", include_str!("../../presets/fig4sweep.json")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.0)
}

pub fn preset_json(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| p.1)
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let text = preset_json(name).ok_or_else(|| {
        let known: Vec<_> = preset_names().collect();
        Error::config("--scenario", format!("unknown scenario `{name}` (known: {})", known.join(", ")))
    })?;
    ScenarioConfig::from_json(text)
}
