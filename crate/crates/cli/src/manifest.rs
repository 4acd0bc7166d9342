//! Audit manifests written next to every output file.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// What produced an output: the command, the configuration it ran with,
/// digests of everything it read, and the tool version. The duration is
/// the only field permitted to differ between re-runs on identical inputs;
/// primary outputs must stay byte-identical.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, String>,
    pub tool_version: String,
    pub duration_ms: u64,
}

/// Collects manifest fields while a command runs, then stamps one manifest
/// file per output.
pub struct ManifestBuilder {
    started: Instant,
    command: String,
    config: BTreeMap<String, String>,
    inputs: BTreeMap<String, String>,
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        ManifestBuilder {
            started: Instant::now(),
            command: command.to_string(),
            config: BTreeMap::new(),
            inputs: BTreeMap::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    /// Registers an input file by its SHA-256 digest.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        let file = File::open(path).with_context(|| path.display().to_string())?;
        let mut hasher = Sha256::new();
        std::io::copy(&mut BufReader::new(file), &mut hasher)
            .with_context(|| path.display().to_string())?;
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        self.inputs.insert(path.display().to_string(), hex);
        Ok(())
    }

    /// Writes `<output>.manifest.json` for each output produced.
    pub fn write_alongside(&self, outputs: &[&Path]) -> Result<()> {
        let manifest = RunManifest {
            command: self.command.clone(),
            config: self.config.clone(),
            inputs: self.inputs.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            duration_ms: self.started.elapsed().as_millis() as u64,
        };
        for output in outputs {
            let mut path = output.as_os_str().to_owned();
            path.push(".manifest.json");
            let file = File::create(&path).with_context(|| Path::new(&path).display().to_string())?;
            let mut writer = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut writer, &manifest)?;
            writer.write_all(b"\n")?;
            writer.flush()?;
        }
        Ok(())
    }
}
