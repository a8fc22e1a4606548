//! JSON reports. Keys are emitted in sorted order.

use std::path::Path;

use drapegeom_core::losses::{Counters, LossReport};
use serde_json::{json, Map, Value};

use crate::config::Config;
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub config: Config,
    pub threads: usize,
    pub inputs: Map<String, Value>,
    pub results: Map<String, Value>,
    pub counters: Counters,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, config: &Config, threads: usize) -> Report {
        Report {
            command,
            config: config.clone(),
            threads,
            inputs: Map::new(),
            results: Map::new(),
            counters: Counters::default(),
            warnings: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, path: &Path) {
        self.inputs.insert(key.into(), Value::String(path.display().to_string()));
    }

    pub fn result(&mut self, key: &str, value: Value) {
        self.results.insert(key.into(), value);
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tool": crate::TOOL_NAME,
            "version": crate::VERSION,
            "command": self.command,
            "config": self.config.to_json(),
            "threads": self.threads,
            "inputs": self.inputs,
            "results": self.results,
            "counters": counters_json(&self.counters),
            "warnings": self.warnings,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        text.push('\n');
        crate::io::write_file(path, text.as_bytes())
    }
}

pub fn counters_json(c: &Counters) -> Value {
    json!({
        "clamp_events": c.clamp_events,
        "skipped_faces": c.skipped_faces,
        "degenerate": c.degenerate,
        "mc_dropped": c.mc_dropped,
        "active_penetrations": c.active_penetrations,
        "gated_off": c.gated_off,
    })
}

/// Non-finite numbers become strings, since JSON has no spelling for them.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(format!("{x}"))
    }
}

pub fn loss_json(r: &LossReport) -> Value {
    let mut per_term = Map::new();
    let mut weights = Map::new();
    for e in &r.terms {
        per_term.insert(e.term.name(), number(e.value));
        weights.insert(e.term.name(), number(e.weight));
    }
    json!({
        "recipe": r.recipe.map(|x| x.name()),
        "per_term": per_term,
        "term_weights": weights,
        "total": number(r.total),
    })
}
