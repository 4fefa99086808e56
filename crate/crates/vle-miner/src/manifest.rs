//! Run manifests: every subcommand writes one next to its outputs so a run
//! can be reproduced exactly. Contents are limited to inputs, parameters and
//! the tool version; nothing time- or host-dependent is included, keeping reruns
//! byte-identical.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    /// Input files by role (clicks, assessments, config, ...).
    pub inputs: BTreeMap<String, String>,
    pub output_dir: String,
    /// Flag values after defaulting, by flag name.
    pub parameters: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(subcommand: &str, output_dir: &Path) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            inputs: BTreeMap::new(),
            output_dir: output_dir.display().to_string(),
            parameters: BTreeMap::new(),
            seed: None,
        }
    }

    pub fn input(mut self, role: &str, path: &Path) -> Self {
        self.inputs.insert(role.into(), path.display().to_string());
        self
    }

    pub fn parameter(mut self, name: &str, value: impl ToString) -> Self {
        self.parameters.insert(name.into(), value.to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn to_json(&self) -> String {
        let mut json = serde_json::to_string_pretty(self).expect("manifest serializes");
        json.push('\n');
        json
    }

    /// Rebuilds the argv that reproduces this run.
    pub fn to_argv(&self) -> Vec<String> {
        let mut argv = vec![self.subcommand.clone()];
        for (role, path) in &self.inputs {
            argv.push(format!("--{role}"));
            argv.push(path.clone());
        }
        for (name, value) in &self.parameters {
            if value == "true" {
                argv.push(format!("--{name}"));
            } else {
                argv.push(format!("--{name}"));
                argv.push(value.clone());
            }
        }
        if let Some(seed) = self.seed {
            argv.push("--seed".into());
            argv.push(seed.to_string());
        }
        argv.push("--out".into());
        argv.push(self.output_dir.clone());
        argv
    }
}
