//! Single-file container for compressed representations.
//!
//! Layout: UTF-8 `key: value` header lines, the separator `\n---\n`, then the
//! arrays listed under `arrays:` in order. Each array is its dimension count
//! (u64), its extents (u64 each) and its values (f64, first index fastest),
//! all little-endian.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::applications::SourceInfo;
use crate::decompositions::{Factor, TuckerRep};
use crate::error::{Error, Result};
use crate::multilevel::{MlKronSumRep, MlKronTerm, MultilevelPattern};
use crate::pattern::{BlockPattern, StructureClass};
use crate::psd::{SpdRep, SpsdRep};
use crate::reconstruction::{BlockLowRankRep, KronSumRep, KronTerm};
use crate::representation::Representation;
use crate::tensor::{Matrix, Tensor};

pub const MAGIC: &str = "kronblock-container";
pub const VERSION: u32 = 1;
const SEPARATOR: &[u8] = b"\n---\n";
const MAX_NDIM: u64 = 16;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metadata {
    pub method: Option<String>,
    pub seed: Option<u64>,
    pub source: Option<SourceInfo>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Container {
    pub meta: Metadata,
    pub rep: Representation,
}

struct Writer {
    header: String,
    names: Vec<String>,
    payload: Vec<u8>,
}

impl Writer {
    fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.header, "{key}: {value}");
    }

    fn array(&mut self, name: &str, dims: &[usize], data: &[f64]) {
        self.names.push(name.to_string());
        self.payload.extend_from_slice(&(dims.len() as u64).to_le_bytes());
        for &d in dims {
            self.payload.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in data {
            self.payload.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn matrix(&mut self, name: &str, m: &Matrix) {
        self.array(name, &[m.nrows(), m.ncols()], m.as_slice());
    }

    /// Matrices of equal shape stacked along a trailing axis.
    fn stack(&mut self, name: &str, shape: (usize, usize), ms: &[Matrix]) {
        let data: Vec<f64> = ms.iter().flat_map(|m| m.iter().copied()).collect();
        self.array(name, &[shape.0, shape.1, ms.len()], &data);
    }

    fn factor(&mut self, name: &str, f: &Factor) {
        match f {
            Factor::Identity(n) => self.kv(name, format!("identity {n}")),
            Factor::Dense(m) => {
                self.kv(name, "dense");
                self.matrix(name, m);
            }
        }
    }

    fn pattern(&mut self, prefix: &str, p: &BlockPattern) {
        self.kv(&format!("{prefix}.structure"), p.structure());
        let (m, n) = p.block_dims();
        self.kv(&format!("{prefix}.grid"), format!("{} {} {m} {n}", p.block_rows(), p.block_cols()));
        self.kv(&format!("{prefix}.classes"), p.p());
        for k in 0..p.p() {
            let pos: Vec<String> = p.positions(k).iter().map(|(i, j)| format!("{i},{j}")).collect();
            self.kv(&format!("{prefix}.class.{k}"), pos.join(" "));
        }
    }
}

fn rep_body(w: &mut Writer, rep: &Representation) {
    match rep {
        Representation::KronSum(r) => {
            w.pattern("pattern", &r.pattern);
            w.kv("terms", r.terms.len());
            let p = r.pattern.p();
            let coeffs: Vec<f64> = r.terms.iter().flat_map(|t| t.coeffs.iter().copied()).collect();
            w.array("coeffs", &[p, r.terms.len()], &coeffs);
            let ds: Vec<Matrix> = r.terms.iter().map(|t| t.d.clone()).collect();
            w.stack("d", r.pattern.block_dims(), &ds);
        }
        Representation::Blr(r) => {
            w.pattern("pattern", &r.pattern);
            w.factor("left", &r.left);
            w.factor("right", &r.right);
            w.stack("middle", (r.left.rank(), r.right.rank()), &r.middle);
        }
        Representation::Tucker { pattern, tucker } => {
            w.pattern("pattern", pattern);
            for (k, f) in tucker.factors.iter().enumerate() {
                w.factor(&format!("factor{k}"), f);
            }
            w.array("core", tucker.core.dims(), tucker.core.data());
        }
        Representation::Spsd(r) => spsd_body(w, "", r),
        Representation::Spd(r) => {
            w.kv("block_rows", r.block_rows);
            w.matrix("anchor", &r.anchor);
            match &r.remainder {
                Some(rem) => {
                    w.kv("remainder", "yes");
                    spsd_body(w, "remainder.", rem);
                }
                None => w.kv("remainder", "no"),
            }
        }
        Representation::Multilevel(r) => {
            let (m, n) = r.pattern.block_dims();
            w.kv("levels", r.pattern.level_count());
            w.kv("block_dims", format!("{m} {n}"));
            for (t, lp) in r.pattern.levels().iter().enumerate() {
                w.pattern(&format!("level{t}"), lp);
            }
            w.kv("terms", r.terms.len());
            for (t, lp) in r.pattern.levels().iter().enumerate() {
                let c: Vec<f64> = r.terms.iter().flat_map(|term| term.coeffs[t].iter().copied()).collect();
                w.array(&format!("coeffs{t}"), &[lp.p(), r.terms.len()], &c);
            }
            let ds: Vec<Matrix> = r.terms.iter().map(|t| t.d.clone()).collect();
            w.stack("d", (m, n), &ds);
        }
    }
}

fn spsd_body(w: &mut Writer, prefix: &str, r: &SpsdRep) {
    w.pattern(&format!("{prefix}pattern"), &r.pattern);
    w.matrix(&format!("{prefix}basis"), &r.basis);
    w.stack(&format!("{prefix}blocks"), (r.rank(), r.rank()), &r.blocks);
}

/// Serializes a container; equal inputs give equal bytes.
pub fn container_to_bytes(c: &Container) -> Vec<u8> {
    let mut w = Writer { header: String::new(), names: Vec::new(), payload: Vec::new() };
    w.header.push_str(MAGIC);
    w.header.push('\n');
    w.kv("version", VERSION);
    w.kv("kind", c.rep.kind());
    w.kv("rows", c.rep.rows());
    w.kv("cols", c.rep.cols());
    if let Some(m) = &c.meta.method {
        w.kv("method", m);
    }
    if let Some(s) = c.meta.seed {
        w.kv("seed", s);
    }
    if let Some(s) = &c.meta.source {
        w.kv("source.rows", s.rows);
        w.kv("source.cols", s.cols);
        w.kv("source.nnz", s.nnz);
        w.kv("source.class_entries", s.class_entries);
        w.kv("source.fro", format!("{:e}", s.fro));
        w.kv("source.trace", format!("{:e}", s.trace));
    }
    rep_body(&mut w, &c.rep);
    let names = w.names.join(" ");
    w.kv("arrays", names);
    let mut out = w.header.into_bytes();
    out.pop();
    out.extend_from_slice(SEPARATOR);
    out.extend_from_slice(&w.payload);
    out
}

fn parse_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse(msg.into()))
}

fn extent_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::ExtentInconsistency(msg.into()))
}

struct Array {
    dims: Vec<usize>,
    data: Vec<f64>,
}

struct Reader {
    header: HashMap<String, String>,
    arrays: HashMap<String, Array>,
}

impl Reader {
    fn get(&self, key: &str) -> Result<&str> {
        self.header
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Parse(format!("missing header field {key:?}")))
    }

    fn opt(&self, key: &str) -> Option<&str> {
        self.header.get(key).map(String::as_str)
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.get(key)?;
        v.parse().map_err(|_| Error::Parse(format!("bad value {v:?} for {key:?}")))
    }

    fn nums(&self, key: &str, count: usize) -> Result<Vec<usize>> {
        let v = self.get(key)?;
        let out: Vec<usize> = v
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad value {v:?} for {key:?}"))))
            .collect::<Result<_>>()?;
        if out.len() != count {
            return parse_err(format!("{key:?} needs {count} values"));
        }
        Ok(out)
    }

    fn array(&self, name: &str, ndim: usize) -> Result<&Array> {
        let a = self.arrays.get(name).ok_or_else(|| Error::Parse(format!("missing array {name:?}")))?;
        if a.dims.len() != ndim {
            return extent_err(format!("array {name:?} has {} dimensions, expected {ndim}", a.dims.len()));
        }
        Ok(a)
    }

    fn matrix(&self, name: &str, shape: Option<(usize, usize)>) -> Result<Matrix> {
        let a = self.array(name, 2)?;
        if let Some((r, c)) = shape {
            if a.dims != [r, c] {
                return extent_err(format!("array {name:?} is {:?}, expected [{r}, {c}]", a.dims));
            }
        }
        Ok(Matrix::from_column_slice(a.dims[0], a.dims[1], &a.data))
    }

    fn unstack(&self, name: &str, shape: (usize, usize), count: usize) -> Result<Vec<Matrix>> {
        let a = self.array(name, 3)?;
        if a.dims != [shape.0, shape.1, count] {
            return extent_err(format!(
                "array {name:?} is {:?}, expected [{}, {}, {count}]",
                a.dims, shape.0, shape.1
            ));
        }
        let len = shape.0 * shape.1;
        Ok((0..count)
            .map(|k| Matrix::from_column_slice(shape.0, shape.1, &a.data[k * len..(k + 1) * len]))
            .collect())
    }

    fn factor(&self, name: &str, extent: usize) -> Result<Factor> {
        let v = self.get(name)?;
        let f = if let Some(n) = v.strip_prefix("identity ") {
            Factor::Identity(n.trim().parse().map_err(|_| Error::Parse(format!("bad identity size {v:?}")))?)
        } else if v == "dense" {
            Factor::Dense(self.matrix(name, None)?)
        } else {
            return parse_err(format!("bad factor description {v:?}"));
        };
        if f.extent() != extent {
            return extent_err(format!("factor {name:?} has {} rows, expected {extent}", f.extent()));
        }
        Ok(f)
    }

    fn pattern(&self, prefix: &str) -> Result<BlockPattern> {
        let structure: StructureClass = self.get(&format!("{prefix}.structure"))?.parse()?;
        let g = self.nums(&format!("{prefix}.grid"), 4)?;
        let p: usize = self.num(&format!("{prefix}.classes"))?;
        let mut classes = Vec::with_capacity(p);
        for k in 0..p {
            let key = format!("{prefix}.class.{k}");
            let positions = self
                .get(&key)?
                .split_whitespace()
                .map(|t| {
                    let (i, j) = t.split_once(',').ok_or_else(|| Error::Parse(format!("bad position {t:?}")))?;
                    let bad = || Error::Parse(format!("bad position {t:?}"));
                    Ok((i.parse().map_err(|_| bad())?, j.parse().map_err(|_| bad())?))
                })
                .collect::<Result<Vec<(usize, usize)>>>()?;
            classes.push(positions);
        }
        BlockPattern::new(g[0], g[1], g[2], g[3], classes, structure)
            .map_err(|e| Error::Parse(format!("invalid pattern {prefix:?}: {e}")))
    }

    fn spsd(&self, prefix: &str) -> Result<SpsdRep> {
        let pattern = self.pattern(&format!("{prefix}pattern"))?;
        let (m, _) = pattern.block_dims();
        let basis = self.matrix(&format!("{prefix}basis"), None)?;
        if basis.nrows() != m {
            return extent_err(format!("basis has {} rows, blocks have {m}", basis.nrows()));
        }
        let r = basis.ncols();
        let blocks = self.unstack(&format!("{prefix}blocks"), (r, r), pattern.p())?;
        Ok(SpsdRep { pattern, basis, blocks })
    }
}

fn read_u64(payload: &[u8], pos: &mut usize) -> Result<u64> {
    let bytes = payload
        .get(*pos..*pos + 8)
        .ok_or_else(|| Error::ExtentInconsistency("truncated payload".into()))?;
    *pos += 8;
    Ok(u64::from_le_bytes(bytes.try_into().expect("8 bytes")))
}

fn read_arrays(names: &[&str], payload: &[u8]) -> Result<HashMap<String, Array>> {
    let mut pos = 0;
    let mut out = HashMap::new();
    for name in names {
        let ndim = read_u64(payload, &mut pos)?;
        if ndim > MAX_NDIM {
            return extent_err(format!("array {name:?} claims {ndim} dimensions"));
        }
        let mut dims = Vec::with_capacity(ndim as usize);
        let mut len: u64 = 1;
        for _ in 0..ndim {
            let d = read_u64(payload, &mut pos)?;
            len = len
                .checked_mul(d)
                .ok_or_else(|| Error::ExtentInconsistency(format!("array {name:?} extents overflow")))?;
            dims.push(d as usize);
        }
        let bytes = len
            .checked_mul(8)
            .filter(|&b| b <= (payload.len() - pos) as u64)
            .ok_or_else(|| {
                Error::ExtentInconsistency(format!(
                    "array {name:?} with extents {dims:?} needs more than the {} remaining bytes",
                    payload.len() - pos
                ))
            })? as usize;
        let data = payload[pos..pos + bytes]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        pos += bytes;
        if out.insert(name.to_string(), Array { dims, data }).is_some() {
            return parse_err(format!("duplicate array {name:?}"));
        }
    }
    if pos != payload.len() {
        return extent_err(format!("{} trailing payload bytes", payload.len() - pos));
    }
    Ok(out)
}

pub fn container_from_bytes(bytes: &[u8]) -> Result<Container> {
    let split = bytes
        .windows(SEPARATOR.len())
        .position(|w| w == SEPARATOR)
        .ok_or_else(|| Error::Parse("missing header separator".into()))?;
    let header = std::str::from_utf8(&bytes[..split]).map_err(|_| Error::Parse("header is not UTF-8".into()))?;
    let payload = &bytes[split + SEPARATOR.len()..];
    let mut lines = header.lines();
    if lines.next() != Some(MAGIC) {
        return parse_err("not a kronblock container");
    }
    let mut map = HashMap::new();
    for line in lines {
        let (k, v) = line.split_once(": ").or_else(|| line.strip_suffix(':').map(|k| (k, ""))).ok_or_else(|| {
            Error::Parse(format!("bad header line {line:?}"))
        })?;
        map.insert(k.to_string(), v.to_string());
    }
    let version = map.get("version").ok_or_else(|| Error::Parse("missing version".into()))?;
    if version.parse::<u32>().ok() != Some(VERSION) {
        return Err(Error::Version(version.clone()));
    }
    let names: Vec<&str> = map.get("arrays").map(|s| s.split_whitespace().collect()).unwrap_or_default();
    let arrays = read_arrays(&names, payload)?;
    let r = Reader { header: map.clone(), arrays };

    let rep = match r.get("kind")? {
        "kron_sum" => {
            let pattern = r.pattern("pattern")?;
            let t: usize = r.num("terms")?;
            let c = r.matrix("coeffs", Some((pattern.p(), t)))?;
            let ds = r.unstack("d", pattern.block_dims(), t)?;
            let terms =
                ds.into_iter().enumerate().map(|(j, d)| KronTerm { coeffs: c.column(j).iter().copied().collect(), d });
            Representation::KronSum(KronSumRep::new(pattern, terms.collect())?)
        }
        "blr" => {
            let pattern = r.pattern("pattern")?;
            let (m, n) = pattern.block_dims();
            let left = r.factor("left", m)?;
            let right = r.factor("right", n)?;
            let middle = r.unstack("middle", (left.rank(), right.rank()), pattern.p())?;
            Representation::Blr(BlockLowRankRep::new(pattern, left, middle, right)?)
        }
        "tucker_raw" => {
            let pattern = r.pattern("pattern")?;
            let (m, n) = pattern.block_dims();
            let extents = [m, pattern.p(), n];
            let factors = (0..3).map(|k| r.factor(&format!("factor{k}"), extents[k])).collect::<Result<Vec<_>>>()?;
            let core = r.array("core", 3)?;
            let core = Tensor::from_vec(&core.dims, core.data.clone())?;
            let tucker = TuckerRep::new(core, factors).map_err(|e| Error::ExtentInconsistency(e.to_string()))?;
            Representation::Tucker { pattern, tucker }
        }
        "spsd" => Representation::Spsd(r.spsd("")?),
        "spd" => {
            let block_rows: usize = r.num("block_rows")?;
            let anchor = r.matrix("anchor", None)?;
            let remainder = match r.get("remainder")? {
                "yes" => Some(r.spsd("remainder.")?),
                "no" => None,
                v => return parse_err(format!("bad remainder flag {v:?}")),
            };
            if let Some(rem) = &remainder {
                if rem.pattern.block_rows() != block_rows || rem.basis.nrows() != anchor.nrows() {
                    return extent_err("remainder does not match the anchor");
                }
            }
            Representation::Spd(SpdRep { block_rows, anchor, remainder })
        }
        "multilevel" => {
            let levels: usize = r.num("levels")?;
            let bd = r.nums("block_dims", 2)?;
            let pats = (0..levels).map(|t| r.pattern(&format!("level{t}"))).collect::<Result<Vec<_>>>()?;
            let pattern = MultilevelPattern::new(pats, bd[0], bd[1])?;
            let nt: usize = r.num("terms")?;
            let cs = pattern
                .levels()
                .iter()
                .enumerate()
                .map(|(t, lp)| r.matrix(&format!("coeffs{t}"), Some((lp.p(), nt))))
                .collect::<Result<Vec<_>>>()?;
            let ds = r.unstack("d", (bd[0], bd[1]), nt)?;
            let terms = ds
                .into_iter()
                .enumerate()
                .map(|(j, d)| MlKronTerm { coeffs: cs.iter().map(|c| c.column(j).iter().copied().collect()).collect(), d })
                .collect();
            Representation::Multilevel(MlKronSumRep { pattern, terms })
        }
        k => return parse_err(format!("unknown representation kind {k:?}")),
    };
    if r.num::<usize>("rows")? != rep.rows() || r.num::<usize>("cols")? != rep.cols() {
        return extent_err("declared size does not match the representation");
    }
    let source = if r.opt("source.rows").is_some() {
        Some(SourceInfo {
            rows: r.num("source.rows")?,
            cols: r.num("source.cols")?,
            nnz: r.num("source.nnz")?,
            class_entries: r.num("source.class_entries")?,
            fro: r.num("source.fro")?,
            trace: r.num("source.trace")?,
        })
    } else {
        None
    };
    let meta = Metadata {
        method: r.opt("method").map(str::to_string),
        seed: r.opt("seed").map(|_| r.num("seed")).transpose()?,
        source,
    };
    Ok(Container { meta, rep })
}

pub fn container_write(path: &Path, c: &Container) -> Result<()> {
    super::write_atomic(path, &container_to_bytes(c))
}

pub fn container_read(path: &Path) -> Result<Container> {
    container_from_bytes(&std::fs::read(path)?)
}
