//! Matrix Market exchange format (real, general or symmetric).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::CooMatrix;
use crate::tensor::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

fn parse_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse(msg.into()))
}

fn parse_value(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("line {line}: missing value")))?;
    tok.parse().map_err(|_| Error::Parse(format!("line {line}: bad number {tok:?}")))
}

fn parse_index(tok: Option<&str>, line: usize, bound: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("line {line}: missing index")))?;
    let i: usize = tok.parse().map_err(|_| Error::Parse(format!("line {line}: bad index {tok:?}")))?;
    if i == 0 || i > bound {
        return parse_err(format!("line {line}: index {i} outside 1..={bound}"));
    }
    Ok(i - 1)
}

/// Parses Matrix Market text. Symmetric files are expanded to full storage.
pub fn mm_parse(text: &str) -> Result<CooMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return parse_err(format!("malformed header {header:?}"));
    }
    let layout = match words[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        f => return parse_err(format!("unknown format {f:?}")),
    };
    match words[3].as_str() {
        "real" | "double" | "integer" => {}
        f @ ("complex" | "pattern") => return parse_err(format!("unsupported field type {f:?}")),
        f => return parse_err(format!("unknown field type {f:?}")),
    }
    let symmetric = match words[4].as_str() {
        "general" => false,
        "symmetric" => true,
        s => return parse_err(format!("unsupported symmetry {s:?}")),
    };
    let mut body = lines.filter(|(_, l)| !l.trim_start().starts_with('%') && !l.trim().is_empty());
    let (sline, size) = body.next().ok_or_else(|| Error::Parse("missing size line".into()))?;
    let sline = sline + 1;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("line {sline}: bad size {t:?}"))))
        .collect::<Result<_>>()?;
    let want = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != want {
        return parse_err(format!("line {sline}: expected {want} size fields"));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if symmetric && rows != cols {
        return parse_err("symmetric matrix must be square");
    }
    let mut out = CooMatrix::new(rows, cols);
    match layout {
        Layout::Coordinate => {
            let count = dims[2];
            for _ in 0..count {
                let (ln, l) = body.next().ok_or_else(|| Error::Parse("fewer entries than declared".into()))?;
                let ln = ln + 1;
                let mut toks = l.split_whitespace();
                let i = parse_index(toks.next(), ln, rows)?;
                let j = parse_index(toks.next(), ln, cols)?;
                let v = parse_value(toks.next(), ln)?;
                if symmetric && j > i {
                    return parse_err(format!("line {ln}: symmetric file has an upper-triangle entry"));
                }
                out.entries.push((i, j, v));
                if symmetric && i != j {
                    out.entries.push((j, i, v));
                }
            }
        }
        Layout::Array => {
            for j in 0..cols {
                let start = if symmetric { j } else { 0 };
                for i in start..rows {
                    let (ln, l) = body.next().ok_or_else(|| Error::Parse("fewer entries than declared".into()))?;
                    let v = parse_value(l.split_whitespace().next(), ln + 1)?;
                    if v != 0.0 {
                        out.entries.push((i, j, v));
                        if symmetric && i != j {
                            out.entries.push((j, i, v));
                        }
                    }
                }
            }
        }
    }
    if let Some((ln, _)) = body.next() {
        return parse_err(format!("line {}: more entries than declared", ln + 1));
    }
    Ok(out)
}

pub fn mm_read(path: &Path) -> Result<CooMatrix> {
    mm_parse(&std::fs::read_to_string(path)?)
}

/// Coordinate/general text; values use the shortest decimal that reads back exactly.
pub fn mm_format(a: &CooMatrix) -> String {
    let mut s = String::with_capacity(32 * (a.entries.len() + 2));
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.rows, a.cols, a.entries.len());
    for &(i, j, v) in &a.entries {
        let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
    }
    s
}

/// Array/general text in column-major order.
pub fn mm_format_dense(a: &Matrix) -> String {
    let mut s = String::with_capacity(24 * (a.len() + 2));
    s.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} {}", a.nrows(), a.ncols());
    for v in a.iter() {
        let _ = writeln!(s, "{v:e}");
    }
    s
}

pub fn mm_write(path: &Path, a: &CooMatrix) -> Result<()> {
    super::write_atomic(path, mm_format(a).as_bytes())
}

pub fn mm_write_dense(path: &Path, a: &Matrix) -> Result<()> {
    super::write_atomic(path, mm_format_dense(a).as_bytes())
}
