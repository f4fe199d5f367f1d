//! CSV and manifest writing. CSV files are RFC-4180 style with a header
//! row, '.' decimal floats, UTF-8; header names are part of the output
//! contract. Each run also writes a JSON manifest sufficient to re-run
//! bit-identically.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::Resolved;

pub struct RunWriter {
    dir: PathBuf,
    subcommand: String,
    started: Instant,
    outputs: Vec<(String, String, u64)>, // path, sha256, bytes
}

impl RunWriter {
    pub fn new(out_dir: &str, subcommand: &str) -> std::io::Result<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(Self {
            dir: PathBuf::from(out_dir),
            subcommand: subcommand.to_string(),
            started: Instant::now(),
            outputs: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes one CSV: fixed header plus preformatted rows.
    pub fn write_csv(&mut self, name: &str, header: &str, rows: &[String]) -> std::io::Result<()> {
        let mut body = String::with_capacity(rows.len() * 32 + header.len() + 1);
        body.push_str(header);
        body.push('\n');
        for row in rows {
            body.push_str(row);
            body.push('\n');
        }
        self.write_bytes(name, body.as_bytes())
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        let path = self.path(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(bytes)?;
        let digest = Sha256::digest(bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.outputs
            .push((name.to_string(), hex, bytes.len() as u64));
        Ok(())
    }

    /// Writes `<subcommand>_manifest.json` echoing the effective config,
    /// seeds, PRNG identities, code version, wall time, and per-output
    /// checksums.
    pub fn finish<S: Serialize>(self, resolved: &Resolved, extra: S) -> std::io::Result<()> {
        let manifest = json!({
            "subcommand": self.subcommand,
            "config": resolved,
            "seed": resolved.seed,
            "seed_generated": resolved.seed_generated,
            "prng": {
                "process": dynwalk_core::rng::PROCESS_PRNG,
                "estimators": dynwalk_core::rng::ESTIMATOR_PRNG,
            },
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "outputs": self.outputs.iter().map(|(p, h, b)| json!({
                "path": p, "sha256": h, "bytes": b,
            })).collect::<Vec<_>>(),
            "summary": extra,
        });
        let name = format!("{}_manifest.json", self.subcommand);
        let path = self.dir.join(name);
        fs::write(path, serde_json::to_string_pretty(&manifest)?)
    }
}

/// Float formatting for CSV cells: shortest round-trip representation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
