//! File formats: Matrix Market, compressed containers and plain vectors.

pub mod container;
pub mod matrix_market;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub use container::{container_from_bytes, container_read, container_to_bytes, container_write, Container, Metadata};
pub use matrix_market::{mm_format, mm_format_dense, mm_parse, mm_read, mm_write, mm_write_dense};

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// One value per line; blank lines and `#` comments are skipped.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| l.parse().map_err(|_| Error::Parse(format!("line {}: bad number {l:?}", i + 1))))
        .collect()
}

pub fn format_vector(v: &[f64]) -> String {
    let mut s = String::with_capacity(24 * v.len());
    for x in v {
        let _ = writeln!(s, "{x:e}");
    }
    s
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    parse_vector(&std::fs::read_to_string(path)?)
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    write_atomic(path, format_vector(v).as_bytes())
}
