//! Atomic CSV/JSON persistence.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::Result;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// `<out>.meta.json`
pub fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// A temp file created next to the destination up front, so an unwritable
/// location fails before any computation. Nothing appears at the
/// destination until [`PendingFile::commit`] renames it into place.
pub struct PendingFile {
    dest: PathBuf,
    tmp: NamedTempFile,
}

impl PendingFile {
    pub fn prepare(dest: &Path) -> Result<Self> {
        let parent = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let tmp = NamedTempFile::new_in(parent)?;
        Ok(Self {
            dest: dest.to_path_buf(),
            tmp,
        })
    }

    pub fn file(&mut self) -> &mut File {
        self.tmp.as_file_mut()
    }

    pub fn commit(mut self) -> Result<()> {
        self.tmp.as_file_mut().flush()?;
        self.tmp.as_file().sync_all()?;
        self.tmp.persist(&self.dest).map_err(|e| e.error)?;
        Ok(())
    }
}

/// Writes `header` and `rows` as CSV through a [`PendingFile`].
pub fn write_csv(mut pending: PendingFile, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    {
        let mut w = csv::Writer::from_writer(pending.file());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    pending.commit()
}

#[derive(Debug, Serialize)]
struct Meta<'a, C: Serialize> {
    artifact: &'static str,
    version: &'static str,
    command: &'a str,
    timestamp_unix: u64,
    config: &'a C,
}

/// Writes the JSON sidecar for `out` atomically.
pub fn write_meta<C: Serialize>(out: &Path, command: &str, config: &C) -> Result<()> {
    let path = meta_path(out);
    let mut pending = PendingFile::prepare(&path)?;
    let meta = Meta {
        artifact: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        config,
    };
    serde_json::to_writer_pretty(pending.file(), &meta)?;
    pending.file().write_all(b"\n")?;
    pending.commit()
}
