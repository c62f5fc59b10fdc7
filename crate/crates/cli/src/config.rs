//! Config files and flag overrides.
//!
//! A config file is a JSON object whose keys are the long flag names. Keys of the
//! chosen subcommand sit at the top level next to the global keys `out`, `format`,
//! `threads` and `deterministic`. Flags given on the command line win.

use std::path::{Path, PathBuf};

use chiral_core::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(rename_all = "kebab-case")]
pub struct Globals {
    /// Directory for output files; the primary artifact goes to stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for the parallel kernels
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Fixed seeds everywhere (on unless set to false)
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub deterministic: Option<bool>,
}

const GLOBAL_KEYS: [&str; 4] = ["out", "format", "threads", "deterministic"];

/// Effective settings of one run, written next to the artifacts in the same
/// layout a config file uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig<O> {
    pub command: String,
    #[serde(flatten)]
    pub globals: Globals,
    #[serde(flatten)]
    pub options: O,
}

impl<O: Serialize + DeserializeOwned> RunConfig<O> {
    pub fn deterministic(&self) -> bool {
        self.globals.deterministic.unwrap_or(true)
    }

    pub fn canonical_json(&self) -> Result<String> {
        chiral_core::io::to_json_string(self)
    }
}

fn overlay(base: &mut Map<String, Value>, top: Value) {
    if let Value::Object(top) = top {
        for (k, v) in top {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
}

fn load(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)?;
    match serde_json::from_str(&text)? {
        Value::Object(m) => Ok(m),
        _ => Err(Error::InvalidInput(format!("{}: config must be a JSON object", path.display()))),
    }
}

/// Merge `config` (if any) under the command-line values.
pub fn resolve<O>(command: &str, config: Option<&Path>, globals: &Globals, options: &O) -> Result<RunConfig<O>>
where
    O: Serialize + DeserializeOwned,
{
    let mut file = match config {
        Some(p) => load(p)?,
        None => Map::new(),
    };
    if let Some(c) = file.remove("command") {
        if c.as_str() != Some(command) {
            return Err(Error::InvalidInput(format!("config is for command {c}, not {command}")));
        }
    }
    let mut g = Map::new();
    for k in GLOBAL_KEYS {
        if let Some(v) = file.remove(k) {
            g.insert(k.to_string(), v);
        }
    }
    overlay(&mut g, serde_json::to_value(globals)?);
    overlay(&mut file, serde_json::to_value(options)?);
    let bad = |e: serde_json::Error| Error::InvalidInput(format!("config: {e}"));
    let keys: Vec<String> = file.keys().cloned().collect();
    let options: O = serde_json::from_value(Value::Object(file)).map_err(bad)?;
    // every option serializes, even when unset, so a key missing here is unknown
    if let Value::Object(known) = serde_json::to_value(&options)? {
        if let Some(k) = keys.iter().find(|k| !known.contains_key(*k)) {
            return Err(Error::InvalidInput(format!("config: unknown key {k:?} for {command}")));
        }
    }
    Ok(RunConfig {
        command: command.to_string(),
        globals: serde_json::from_value(Value::Object(g)).map_err(bad)?,
        options,
    })
}
