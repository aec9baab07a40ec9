//! Atomic file emission: every file is written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use akconj_core::scenarios::Artifact;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Emit {
    pub json: bool,
    pub csv: bool,
    pub svg: bool,
}

impl Emit {
    pub fn parse(items: &[String]) -> Result<Emit, CliError> {
        let mut e = Emit { json: false, csv: false, svg: false };
        for item in items {
            match item.trim() {
                "json" => e.json = true,
                "csv" => e.csv = true,
                "svg" => e.svg = true,
                other => return Err(CliError::Config(format!("unknown emit kind {other:?}"))),
            }
        }
        Ok(e)
    }
}

impl Default for Emit {
    fn default() -> Self {
        Emit { json: true, csv: true, svg: false }
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Run(format!("writing {}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Collects the files of one command; paths in artifacts are relative to `dir`.
pub struct Output {
    pub dir: PathBuf,
    pub emit: Emit,
    pub artifacts: Vec<Artifact>,
}

impl Output {
    pub fn new(dir: PathBuf, emit: Emit) -> Self {
        Output { dir, emit, artifacts: Vec::new() }
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if !self.emit.json {
            return Ok(());
        }
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Run(e.to_string()))?;
        text.push('\n');
        write_atomic(&self.dir.join(name), text.as_bytes())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        if !self.emit.csv {
            return Ok(());
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Run(e.to_string());
        w.write_record(header).map_err(err)?;
        for r in rows {
            w.write_record(r).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Run(e.to_string()))?;
        write_atomic(&self.dir.join(name), &bytes)?;
        self.artifacts.push(Artifact { kind: "csv".into(), path: name.into(), rows: Some(rows.len()) });
        Ok(())
    }

    pub fn svg(&mut self, name: &str, doc: String) -> Result<(), CliError> {
        if !self.emit.svg {
            return Ok(());
        }
        write_atomic(&self.dir.join(name), doc.as_bytes())?;
        self.artifacts.push(Artifact { kind: "svg".into(), path: name.into(), rows: None });
        Ok(())
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}
