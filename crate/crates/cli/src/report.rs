//! Report plumbing shared by every command.
//!
//! Each command resolves its effective settings into one serializable
//! struct; the SHA-256 of that struct's JSON is the config hash stamped
//! on everything the command prints or writes, so any report can be
//! traced back to the exact parameters (and seed) that produced it.
//!
//! A report file is a fixed header, the human-readable table, and one
//! trailing JSON record for machines:
//!
//! ```text
//! marketsieve-report v1
//! command: eval
//! config_sha256: 9f2c…
//! seed: 13
//!
//! <table>
//!
//! {"command":"eval","config_sha256":"9f2c…","seed":13,...}
//! ```

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use marketsieve::{Error, Result};

pub const REPORT_HEADER: &str = "marketsieve-report v1";

/// SHA-256 hex digest of the settings' canonical JSON form.
pub fn config_hash(settings: &impl Serialize) -> Result<String> {
    let json = serde_json::to_string(settings)
        .map_err(|e| Error::Internal(format!("settings failed to serialize: {e}")))?;
    let digest = Sha256::digest(json.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub struct Report<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub settings: serde_json::Value,
    pub table: String,
    pub data: serde_json::Value,
}

impl Report<'_> {
    /// Prints the stamped table to stdout and, when asked, writes the
    /// full report file.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        let hash = config_hash(&self.settings)?;
        let mut head = String::new();
        head.push_str(&format!("command: {}\n", self.command));
        head.push_str(&format!("config_sha256: {hash}\n"));
        head.push_str(&format!("seed: {}\n", self.seed));
        print!("{head}\n{}", self.table);
        if !self.table.ends_with('\n') {
            println!();
        }

        if let Some(path) = path {
            let record = serde_json::json!({
                "command": self.command,
                "config_sha256": hash,
                "seed": self.seed,
                "settings": self.settings,
                "data": self.data,
            });
            let mut out = String::new();
            out.push_str(REPORT_HEADER);
            out.push('\n');
            out.push_str(&head);
            out.push('\n');
            out.push_str(&self.table);
            if !self.table.ends_with('\n') {
                out.push('\n');
            }
            out.push('\n');
            out.push_str(&record.to_string());
            out.push('\n');
            fs::write(path, out)?;
        }
        Ok(())
    }
}

/// "12.34" — metrics rendered as percentages with two decimals.
pub fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}
