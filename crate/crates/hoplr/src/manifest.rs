//! Run manifests written next to constructed rules.
//!
//! `params` holds everything that determines the rule, with `p` resolved to
//! a code; timing and thread count are informational only.

use std::path::Path;

use anyhow::{ensure, Context, Result};
use hoplr_core::cbc::LatticeRule;
use serde::{Deserialize, Serialize};

use crate::construct::ConstructParams;

pub const TOOL: &str = "hoplr";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutputs {
    pub rule_file: String,
    pub q: Vec<u64>,
    pub errors: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub params: ConstructParams,
    pub generator_g: u64,
    pub threads: usize,
    pub elapsed_seconds: f64,
    pub outputs: RunOutputs,
}

impl RunManifest {
    pub fn new(
        params: ConstructParams,
        rule: &LatticeRule,
        rule_file: &Path,
        threads: usize,
        elapsed_seconds: f64,
    ) -> Self {
        RunManifest {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            params,
            generator_g: rule.generator.code(),
            threads,
            elapsed_seconds,
            outputs: RunOutputs {
                rule_file: rule_file.display().to_string(),
                q: rule.q.iter().map(|q| q.code()).collect(),
                errors: rule.errors.clone(),
            },
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m: RunManifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        ensure!(m.tool == TOOL, "{} is not a {TOOL} manifest", path.display());
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))
    }
}

/// `rule.json` gets `rule.json.manifest.json`.
pub fn default_path(rule_file: &Path) -> std::path::PathBuf {
    let mut name = rule_file.as_os_str().to_owned();
    name.push(".manifest.json");
    name.into()
}
