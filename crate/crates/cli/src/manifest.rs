//! Per-run JSON manifest: what ran, on which input, with which settings,
//! and what it produced.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub scenario: String,
    pub scenario_sha256: String,
    /// RFC 3339 creation time (UTC).
    pub created: String,
    pub settings: Map<String, Value>,
    pub outputs: Vec<String>,
    pub metrics: Map<String, Value>,
}

impl Manifest {
    pub fn new(command: &str, scenario: &Path, digest: &str) -> Manifest {
        Manifest {
            command: command.into(),
            scenario: scenario.display().to_string(),
            scenario_sha256: digest.into(),
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            settings: Map::new(),
            outputs: Vec::new(),
            metrics: Map::new(),
        }
    }

    pub fn setting<V: Serialize>(&mut self, key: &str, value: V) {
        self.settings
            .insert(key.into(), serde_json::to_value(value).unwrap());
    }

    pub fn output(&mut self, name: &str) {
        self.outputs.push(name.into());
    }

    pub fn metric<V: Serialize>(&mut self, key: &str, value: V) {
        self.metrics
            .insert(key.into(), serde_json::to_value(value).unwrap());
    }

    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).unwrap();
        text.push('\n');
        text
    }
}
