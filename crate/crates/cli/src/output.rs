//! Run manifests and crash-safe report writing.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// One hashed input file.
#[derive(Clone, Debug, Serialize)]
pub struct InputHash {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to rerun a command. Apart from `wall_time_s`, equal
/// manifests produce byte-identical reports.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub inputs: Vec<InputHash>,
    pub version: String,
    pub seed: Option<u64>,
    pub wall_time_s: f64,
}

/// A command report: the manifest next to the command's own fields.
#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub manifest: RunManifest,
    #[serde(flatten)]
    pub body: T,
}

pub struct ManifestBuilder {
    command: String,
    params: serde_json::Value,
    inputs: Vec<InputHash>,
    seed: Option<u64>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, params: &impl Serialize) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            params: serde_json::to_value(params)?,
            inputs: Vec::new(),
            seed: None,
            started: Instant::now(),
        })
    }

    /// Reads a file, recording its hash, and returns the bytes.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.inputs.push(InputHash {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(bytes)
    }

    pub fn seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn finish<T: Serialize>(self, body: T) -> Report<T> {
        Report {
            manifest: RunManifest {
                command: self.command,
                params: self.params,
                inputs: self.inputs,
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: self.seed,
                wall_time_s: self.started.elapsed().as_secs_f64(),
            },
            body,
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        write(&mut buf)?;
        buf.flush()?;
    }
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Writes the report to `path`, or to standard output when no path is given.
pub fn emit_json<T: Serialize>(report: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match path {
        Some(p) => write_atomic(p, |w| w.write_all(text.as_bytes())),
        None => write_stdout(&text),
    }
}

/// Writes to standard output; a reader that closed the pipe early is not an error.
pub fn write_stdout(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

/// Plot data with columns `x, y, series`.
pub fn csv_text(rows: &[(f64, f64, String)]) -> String {
    let mut text = String::from("x,y,series\n");
    for (x, y, series) in rows {
        text.push_str(&format!("{x},{y},{series}\n"));
    }
    text
}

pub fn emit_csv(rows: &[(f64, f64, String)], path: &Path) -> Result<()> {
    let text = csv_text(rows);
    write_atomic(path, |w| w.write_all(text.as_bytes()))
}
