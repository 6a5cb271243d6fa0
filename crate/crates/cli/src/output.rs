//! Run directory layout: `result.csv` or `result.json` plus `meta.json`.

use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{Profile, RunConfig};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const GIT_REVISION: &str = env!("TWPA_GIT_REVISION");

pub struct RunContext {
    pub command: &'static str,
    pub profile: Profile,
    pub config: RunConfig,
    pub config_sha256: String,
    pub out_dir: PathBuf,
}

impl RunContext {
    /// `config` must already be resolved. The output directory is left out
    /// of the hash so that the same run written to two places hashes alike.
    pub fn new(command: &'static str, profile: Profile, mut config: RunConfig, out: Option<PathBuf>) -> Self {
        let out_dir = out
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("runs").join(command));
        config.output_dir = None;
        let canonical = serde_json::to_vec(&json!({
            "command": command,
            "profile": profile,
            "config": config,
        }))
        .expect("config serializes");
        let config_sha256 = hex(&Sha256::digest(&canonical));
        Self {
            command,
            profile,
            config,
            config_sha256,
            out_dir,
        }
    }

    fn prepare(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::runtime(format!("creating {}: {e}", self.out_dir.display())))
    }

    fn header(&self) -> String {
        format!(
            "# twpa {} schema={SCHEMA_VERSION}\n# config_sha256={}\n",
            self.command, self.config_sha256
        )
    }

    pub fn write_csv(&self, columns: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf, CliError> {
        self.prepare()?;
        let mut text = self.header();
        text.push_str(&columns.join(","));
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        let path = self.out_dir.join("result.csv");
        fs::write(&path, text)?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, value: &T) -> Result<PathBuf, CliError> {
        self.prepare()?;
        let body = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config_sha256": self.config_sha256,
            "result": value,
        });
        let path = self.out_dir.join("result.json");
        fs::write(&path, pretty(&body)?)?;
        Ok(path)
    }

    /// `extra` carries command-specific annotations (markers, landmarks).
    pub fn write_meta(&self, extra: serde_json::Value) -> Result<PathBuf, CliError> {
        self.prepare()?;
        let meta = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "profile": self.profile,
            "seed": self.config.seed(),
            "git_revision": GIT_REVISION,
            "crate_version": env!("CARGO_PKG_VERSION"),
            "config_sha256": self.config_sha256,
            "resolved_config": self.config,
            "annotations": extra,
        });
        let path = self.out_dir.join("meta.json");
        fs::write(&path, pretty(&meta)?)?;
        Ok(path)
    }
}

fn pretty(value: &serde_json::Value) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Shortest round-trip text, switching to exponent form for very large or
/// small magnitudes.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e7).contains(&a) || !a.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
