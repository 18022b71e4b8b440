//! Deterministic run outputs: CSV tables, JSON summaries, and a manifest
//! with content digests.
//!
//! Every byte written here is a pure function of the run inputs:
//!
//! * floats are rendered with a fixed 17-significant-digit scientific
//!   format in CSV and shortest-round-trip form in JSON;
//! * line endings are always `\n`;
//! * JSON objects are sorted by key;
//! * the manifest timestamp honors `SOURCE_DATE_EPOCH` and falls back
//!   to 0.
//!
//! A lock file guards each output directory against concurrent runs; it
//! is removed when the writer finishes or is dropped.

use crate::error::{Error, Result};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

/// Lock-file name used inside output directories.
pub const LOCK_FILE: &str = ".grushin-lab.lock";
/// Manifest name written by [`OutputWriter::finish`].
pub const MANIFEST_FILE: &str = "manifest.json";

/// Fixed CSV rendering for floats: full `f64` precision, locale-free.
pub fn float_cell(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a CSV document with a header and pre-formatted rows.
pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::InvalidArgument(format!(
                "CSV row {i} has {} cells for {} columns",
                row.len(),
                header.len()
            )));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn epoch_from(raw: Option<String>) -> u64 {
    raw.and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

/// Reproducible timestamp: `SOURCE_DATE_EPOCH` when set and parseable,
/// otherwise 0.
pub fn build_epoch() -> u64 {
    epoch_from(std::env::var("SOURCE_DATE_EPOCH").ok())
}

/// One file written by a run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FileRecord {
    /// Bare file name inside the output directory.
    pub name: String,
    /// Lowercase hex SHA-256 of the contents.
    pub sha256: String,
    /// Size in bytes.
    pub bytes: u64,
}

/// Writes run outputs into one directory, guarded by a lock file, and
/// finishes with a digest manifest.
#[derive(Debug)]
pub struct OutputWriter {
    dir: PathBuf,
    lock_path: PathBuf,
    files: Vec<FileRecord>,
    finished: bool,
}

impl OutputWriter {
    /// Creates the directory (if needed) and takes its lock.
    pub fn create(dir: &Path) -> Result<OutputWriter> {
        fs::create_dir_all(dir)?;
        let lock_path = dir.join(LOCK_FILE);
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock_path)
        {
            Ok(_) => {}
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(Error::Config(format!(
                    "  output directory {} is already in use by another run \
                     (remove {} if that run is gone)",
                    dir.display(),
                    lock_path.display()
                )));
            }
            Err(e) => return Err(e.into()),
        }
        Ok(OutputWriter {
            dir: dir.to_path_buf(),
            lock_path,
            files: Vec::new(),
            finished: false,
        })
    }

    /// The output directory.
    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes one file (bare name, no separators) and records its digest.
    pub fn write_text(&mut self, name: &str, content: &str) -> Result<()> {
        if name.is_empty()
            || name.contains(['/', '\\'])
            || name == LOCK_FILE
            || name == MANIFEST_FILE
        {
            return Err(Error::InvalidArgument(format!(
                "output file name `{name}` must be a bare name and not reserved"
            )));
        }
        if self.files.iter().any(|f| f.name == name) {
            return Err(Error::InvalidArgument(format!(
                "output file `{name}` written twice"
            )));
        }
        let bytes = content.as_bytes();
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(FileRecord {
            name: name.to_string(),
            sha256: format!("{:x}", Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Writes `manifest.json` (experiment name, tool version, reproducible
    /// timestamp, resolved configuration, file digests) and releases the
    /// lock.  Returns the manifest path.
    pub fn finish(
        mut self,
        experiment: &str,
        config_entries: &[(String, String)],
    ) -> Result<PathBuf> {
        let mut config = serde_json::Map::new();
        for (k, v) in config_entries {
            config.insert(k.clone(), serde_json::Value::String(v.clone()));
        }
        let mut files = self.files.clone();
        files.sort_by(|a, b| a.name.cmp(&b.name));
        let manifest = serde_json::json!({
            "experiment": experiment,
            "generated_at_epoch": build_epoch(),
            "tool": {
                "name": "grushin-lab",
                "version": env!("CARGO_PKG_VERSION"),
            },
            "config": serde_json::Value::Object(config),
            "outputs": files,
        });
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::InvalidArgument(format!("manifest serialization: {e}")))?;
        text.push('\n');
        let path = self.dir.join(MANIFEST_FILE);
        fs::write(&path, text.as_bytes())?;
        fs::remove_file(&self.lock_path)?;
        self.finished = true;
        Ok(path)
    }
}

impl Drop for OutputWriter {
    fn drop(&mut self) {
        if !self.finished {
            let _ = fs::remove_file(&self.lock_path);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_cells_are_full_precision() {
        assert_eq!(float_cell(1.0), "1.0000000000000000e0");
        let x = 0.1 + 0.2;
        let cell = float_cell(x);
        assert_eq!(cell.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_documents_have_unix_newlines_and_checked_widths() {
        let doc = csv_document(
            &["a", "b"],
            &[vec!["1".into(), "2".into()], vec!["3".into(), "4".into()]],
        )
        .unwrap();
        assert_eq!(doc, "a,b\n1,2\n3,4\n");
        assert!(!doc.contains('\r'));
        assert!(csv_document(&["a", "b"], &[vec!["1".into()]]).is_err());
    }

    #[test]
    fn epoch_parses_and_defaults() {
        assert_eq!(epoch_from(None), 0);
        assert_eq!(epoch_from(Some("12345".into())), 12345);
        assert_eq!(epoch_from(Some(" 7 ".into())), 7);
        assert_eq!(epoch_from(Some("not-a-number".into())), 0);
    }

    #[test]
    fn writer_locks_writes_and_manifests() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("run");
        let mut w = OutputWriter::create(&dir).unwrap();
        assert!(dir.join(LOCK_FILE).exists());
        // A second writer on the same directory is refused while locked.
        assert!(OutputWriter::create(&dir).is_err());

        w.write_text("table.csv", "a\n1\n").unwrap();
        assert!(w.write_text("table.csv", "again").is_err());
        assert!(w.write_text("nested/name.csv", "x").is_err());
        assert!(w.write_text(MANIFEST_FILE, "x").is_err());

        let manifest_path = w
            .finish("solve", &[("params.h".into(), "1".into())])
            .unwrap();
        assert!(!dir.join(LOCK_FILE).exists());
        let text = fs::read_to_string(&manifest_path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["experiment"], "solve");
        assert_eq!(v["config"]["params.h"], "1");
        assert_eq!(v["outputs"][0]["name"], "table.csv");
        // Digest of "a\n1\n" is stable.
        let expected = format!("{:x}", Sha256::digest(b"a\n1\n"));
        assert_eq!(v["outputs"][0]["sha256"], expected.as_str());
        assert_eq!(v["outputs"][0]["bytes"], 4);
        // Keys are serialized in sorted order.
        let cfg_pos = text.find("\"config\"").unwrap();
        let exp_pos = text.find("\"experiment\"").unwrap();
        let out_pos = text.find("\"outputs\"").unwrap();
        assert!(cfg_pos < exp_pos && exp_pos < out_pos);
    }

    #[test]
    fn dropping_a_writer_releases_the_lock() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("run");
        {
            let _w = OutputWriter::create(&dir).unwrap();
            assert!(dir.join(LOCK_FILE).exists());
        }
        assert!(!dir.join(LOCK_FILE).exists());
        // And the directory can be reused afterwards.
        let w = OutputWriter::create(&dir).unwrap();
        drop(w);
    }
}
