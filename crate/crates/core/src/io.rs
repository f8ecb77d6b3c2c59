//! Output helpers: atomic file writes and full-precision CSV formatting.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Writes `contents` to `path` via a temporary file in the same directory and
/// a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Lossless decimal representation (17 significant digits).
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Joins values into one CSV line without the trailing newline.
pub fn csv_row(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt).collect::<Vec<_>>().join(",")
}
