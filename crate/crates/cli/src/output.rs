//! CSV formatting and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use minkit::min::OptimizerConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Significant digits of every CSV number.
pub const CSV_DIGITS: usize = 12;

/// Shortest decimal that round-trips the value rounded to 12 significant digits.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{:.*e}", CSV_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses");
    format!("{rounded}")
}

pub fn write_csv(path: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => {
            Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: serde_json::Value,
    pub config: OptimizerConfig,
    pub seed: u64,
    /// SHA-256 of the input file, or of the canonical arguments when there is none.
    pub input_digest: String,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        arguments: serde_json::Value,
        config: &OptimizerConfig,
        input: Option<&[u8]>,
    ) -> Self {
        let digest = match input {
            Some(bytes) => Sha256::digest(bytes),
            None => Sha256::digest(arguments.to_string().as_bytes()),
        };
        Self {
            command: command.into(),
            arguments,
            config: config.clone(),
            seed: config.seed,
            input_digest: hex::encode(digest),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            extra: None,
        }
    }

    /// Writes `<out>.manifest.json` next to an output file.
    pub fn write_beside(&self, out: Option<&Path>) -> Result<()> {
        if let Some(out) = out {
            write_json(Some(&sidecar_path(out)), self)?;
        }
        Ok(())
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
