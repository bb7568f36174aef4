//! Scenarios shipped with the binary.

use crate::config::ScenarioConfig;
use crate::error::HarnessError;

pub const NAMES: [&str; 4] = ["fig1", "cavity-demo", "jc-demo", "dicke-demo"];

pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => include_str!("../presets/fig1.json"),
        "cavity-demo" => include_str!("../presets/cavity-demo.json"),
        "jc-demo" => include_str!("../presets/jc-demo.json"),
        "dicke-demo" => include_str!("../presets/dicke-demo.json"),
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<ScenarioConfig, HarnessError> {
    let text = source(name).ok_or_else(|| {
        HarnessError::Config(format!("unknown preset `{name}` (known: {})", NAMES.join(", ")))
    })?;
    ScenarioConfig::from_json(text)
}
