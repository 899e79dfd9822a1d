//! Command-line front end: detect the pattern, map to a tensor, compress and
//! map back.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::applications::{report_metrics, Metrics, SourceInfo};
use crate::decompositions::tucker::{mode_singular_values, rank_for_budget};
use crate::decompositions::{
    cp_als, project, randomized_mode_basis, tucker_partial, CpOptions, Factor, ModeSpec, SharedSource,
    SketchConfig, TuckerRep,
};
use crate::error::{Error, Result};
use crate::io::{container_read, container_write, mm_read, mm_write, mm_write_dense, read_vector, write_vector};
use crate::io::{Container, Metadata};
use crate::pattern::{
    blocks_to_tensor, check_dense_guard, detect_pattern, extract_blocks, BlockMatrix, BlockPattern, StructureClass,
};
use crate::psd::{spd_compress, spsd_compress};
use crate::reconstruction::{blr_from_kruskal, blr_from_tucker, kron_sum_from_kruskal, kron_sum_from_tucker, CpSplit};
use crate::representation::Representation;
use crate::tensor::Tensor;

#[derive(Parser, Debug)]
#[command(name = "kronblock", version, about = "Compress block-structured matrices through tensor decompositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Blocking {
    /// Rows per block.
    #[arg(long = "block-rows", value_name = "M")]
    m: usize,
    /// Columns per block.
    #[arg(long = "block-cols", value_name = "N")]
    n: usize,
    /// `detect`, or one of diagonal, banded:B[:sym], toeplitz[:sym], hankel, general.
    #[arg(long, default_value = "detect")]
    pattern: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the block pattern and the singular-value decay of each tensor mode.
    Analyze {
        matrix: PathBuf,
        #[command(flatten)]
        blocking: Blocking,
        /// Print every singular value as `mode<TAB>index<TAB>value`.
        #[arg(long)]
        table: bool,
    },
    /// Compress a Matrix Market file into a container.
    Compress {
        matrix: PathBuf,
        #[command(flatten)]
        blocking: Blocking,
        #[arg(long, value_enum, default_value_t = Method::Hosvd)]
        method: Method,
        /// Tucker ranks for the three modes.
        #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with_all = ["rank", "tol"])]
        ranks: Option<Vec<usize>>,
        #[arg(long, conflicts_with = "tol")]
        rank: Option<usize>,
        /// Relative Frobenius tolerance; picks the smallest admissible ranks.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum)]
        output: Option<OutputKind>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Gaussian-sketched mode bases.
        #[arg(long)]
        randomized: bool,
        /// Sketch size per sketched mode (default twice the rank).
        #[arg(long, requires = "randomized")]
        sketch_size: Option<usize>,
        /// Container to write.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Write the represented matrix as Matrix Market.
    Reconstruct {
        container: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Array format instead of coordinate.
        #[arg(long)]
        dense: bool,
    },
    /// Multiply the represented matrix by a vector file.
    Matvec {
        container: PathBuf,
        vector: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Print the metrics of a container.
    Report {
        container: PathBuf,
        /// Original matrix, for the Frobenius error.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Hosvd,
    Cp,
    Mode2,
    Spsd,
    Spd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputKind {
    #[value(name = "kron_sum")]
    KronSum,
    Blr,
    Tucker,
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli.command, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut impl Write) -> Result<()> {
    match cmd {
        Command::Analyze { matrix, blocking, table } => analyze(&matrix, &blocking, table, out),
        Command::Compress { matrix, blocking, method, ranks, rank, tol, output, seed, randomized, sketch_size, out: path } => {
            let opts = CompressOptions { method, ranks, rank, tol, output, seed, randomized, sketch_size };
            compress(&matrix, &blocking, &opts, &path, out)
        }
        Command::Reconstruct { container, out: path, dense } => {
            let c = container_read(&container)?;
            check_dense_guard(c.rep.rows(), c.rep.cols())?;
            let bm = c.rep.to_block_matrix()?;
            if dense {
                mm_write_dense(&path, &bm.to_dense()?)
            } else {
                mm_write(&path, &bm.to_coo())
            }
        }
        Command::Matvec { container, vector, out: path } => {
            let c = container_read(&container)?;
            let x = read_vector(&vector)?;
            write_vector(&path, &c.rep.matvec(&x)?)
        }
        Command::Report { container, matrix } => {
            let c = container_read(&container)?;
            let a = match &matrix {
                Some(p) => {
                    let (m, n) = c.rep.block_dims();
                    Some(BlockMatrix::from_coo(&mm_read(p)?, m, n)?)
                }
                None => None,
            };
            let source = match (&c.meta.source, &a) {
                (Some(s), _) => *s,
                (None, Some(a)) => SourceInfo::from_blocks(a, 0),
                (None, None) => SourceInfo::default(),
            };
            let m = report_metrics(&source, &c.rep, a.as_ref())?;
            let _ = writeln!(out, "kind: {}", c.rep.kind());
            let _ = writeln!(out, "rows: {}", c.rep.rows());
            let _ = writeln!(out, "cols: {}", c.rep.cols());
            if let Some(method) = &c.meta.method {
                let _ = writeln!(out, "method: {method}");
            }
            print_metrics(&m, out);
            Ok(())
        }
    }
}

fn load(path: &PathBuf, b: &Blocking) -> Result<(BlockMatrix, BlockPattern, Vec<crate::tensor::Matrix>)> {
    let a = BlockMatrix::from_coo(&mm_read(path)?, b.m, b.n)?;
    if b.pattern == "detect" {
        let (p, blocks) = detect_pattern(&a, 0.0)?;
        return Ok((a, p, blocks));
    }
    let structure: StructureClass = b.pattern.parse()?;
    let p = BlockPattern::build(structure, a.block_rows(), a.block_cols(), b.m, b.n)?;
    let blocks = extract_blocks(&a, &p, 0.0)?;
    Ok((a, p, blocks))
}

fn analyze(path: &PathBuf, b: &Blocking, table: bool, out: &mut impl Write) -> Result<()> {
    let (_, p, blocks) = load(path, b)?;
    let t = blocks_to_tensor(&p, &blocks)?;
    let sv = mode_singular_values(&t)?;
    if table {
        let _ = writeln!(out, "mode\tindex\tvalue");
        for (k, s) in sv.iter().enumerate() {
            for (i, v) in s.iter().enumerate() {
                let _ = writeln!(out, "{}\t{}\t{v:e}", k + 1, i + 1);
            }
        }
        return Ok(());
    }
    let (m, n) = p.block_dims();
    let _ = writeln!(out, "structure: {}", p.structure());
    let _ = writeln!(out, "grid: {} x {}", p.block_rows(), p.block_cols());
    let _ = writeln!(out, "blocks: {m} x {n}");
    let _ = writeln!(out, "classes: {}", p.p());
    let mut hist = std::collections::BTreeMap::new();
    for e in p.etas() {
        *hist.entry(e).or_insert(0usize) += 1;
    }
    let hist: Vec<String> = hist.iter().map(|(e, c)| format!("{e}:{c}")).collect();
    let _ = writeln!(out, "eta histogram (eta:count): {}", hist.join(" "));
    let _ = writeln!(out, "tensor: {:?}", t.dims());
    for (k, s) in sv.iter().enumerate() {
        let lead = s.first().copied().unwrap_or(0.0);
        let shown: Vec<String> = s.iter().take(10).map(|v| format!("{:.3e}", v / lead.max(f64::MIN_POSITIVE))).collect();
        let _ = writeln!(
            out,
            "mode {} relative singular values ({} total): {}{}",
            k + 1,
            s.len(),
            shown.join(" "),
            if s.len() > 10 { " ..." } else { "" }
        );
    }
    Ok(())
}

struct CompressOptions {
    method: Method,
    ranks: Option<Vec<usize>>,
    rank: Option<usize>,
    tol: Option<f64>,
    output: Option<OutputKind>,
    seed: u64,
    randomized: bool,
    sketch_size: Option<usize>,
}

/// Per-mode ranks: explicit, or from the tolerance with the squared budget
/// `tol² ‖T‖²` split equally over the compressed modes.
fn select_ranks(t: &Tensor, o: &CompressOptions, compressed: &[usize]) -> Result<Vec<usize>> {
    let dims = t.dims();
    if let Some(tol) = o.tol {
        if !(tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {tol} must be nonnegative")));
        }
        let sv = mode_singular_values(t)?;
        let budget = tol * tol * t.frobenius_norm().powi(2) / compressed.len() as f64;
        return Ok(compressed.iter().map(|&k| rank_for_budget(&sv[k], budget).min(dims[k])).collect());
    }
    if let Some(r) = &o.ranks {
        if r.len() != compressed.len() {
            return Err(Error::InvalidArgument(format!("--ranks needs {} values", compressed.len())));
        }
        return Ok(r.clone());
    }
    match o.rank {
        Some(r) => Ok(vec![r; compressed.len()]),
        None => Err(Error::InvalidArgument("one of --ranks, --rank or --tol is required".into())),
    }
}

fn sketched_tucker(t: &Tensor, modes: &[usize], ranks: &[usize], o: &CompressOptions) -> Result<TuckerRep> {
    if !o.randomized {
        let mut spec = vec![ModeSpec::Identity; 3];
        for (&k, &r) in modes.iter().zip(ranks) {
            spec[k] = ModeSpec::Rank(r);
        }
        return tucker_partial(t, &spec, SharedSource::Designated);
    }
    let mut factors: Vec<Factor> = t.dims().iter().map(|&d| Factor::Identity(d)).collect();
    for (&k, &r) in modes.iter().zip(ranks) {
        let size = o.sketch_size.unwrap_or(2 * r);
        let cfg = SketchConfig::uniform(t.dims(), k, size, o.seed.wrapping_add(k as u64));
        factors[k] = Factor::Dense(randomized_mode_basis(t, k, r, &cfg)?);
    }
    project(t, factors)
}

fn compress(path: &PathBuf, b: &Blocking, o: &CompressOptions, dest: &PathBuf, out: &mut impl Write) -> Result<()> {
    let (a, p, blocks) = load(path, b)?;
    let source = SourceInfo::from_blocks(&a, p.p());
    let wants = |kinds: &[OutputKind]| -> Result<()> {
        match o.output {
            Some(k) if !kinds.contains(&k) => Err(Error::InvalidArgument(format!(
                "method {:?} cannot produce output {:?}",
                o.method, k
            ))),
            _ => Ok(()),
        }
    };
    let (rep, ranks_note) = match o.method {
        Method::Hosvd | Method::Mode2 => {
            let t = blocks_to_tensor(&p, &blocks)?;
            let modes: &[usize] = if o.method == Method::Hosvd { &[0, 1, 2] } else { &[1] };
            let ranks = select_ranks(&t, o, modes)?;
            let tk = sketched_tucker(&t, modes, &ranks, o)?;
            let rep = match o.output.unwrap_or(OutputKind::KronSum) {
                OutputKind::KronSum => kron_sum_from_tucker(&tk, &p)?.into(),
                OutputKind::Blr => blr_from_tucker(&tk, &p)?.into(),
                OutputKind::Tucker => Representation::Tucker { pattern: p.clone(), tucker: tk },
            };
            (rep, format!("{ranks:?}"))
        }
        Method::Cp => {
            wants(&[OutputKind::KronSum, OutputKind::Blr])?;
            let r = o.rank.ok_or_else(|| Error::InvalidArgument("--method cp needs --rank".into()))?;
            let t = blocks_to_tensor(&p, &blocks)?;
            let res = cp_als(&t, r, &CpOptions { seed: o.seed, ..CpOptions::default() })?;
            let _ = writeln!(out, "cp_fit: {:e}", res.fit);
            let _ = writeln!(out, "cp_iterations: {}", res.iterations);
            let rep = match o.output {
                Some(OutputKind::Blr) => blr_from_kruskal(&res.kruskal, &p)?.into(),
                _ => kron_sum_from_kruskal(&res.kruskal, &p, CpSplit::Identity)?.into(),
            };
            (rep, format!("[{r}]"))
        }
        Method::Spsd | Method::Spd => {
            wants(&[OutputKind::Blr])?;
            if o.randomized {
                return Err(Error::InvalidArgument("--randomized applies to hosvd and mode2".into()));
            }
            let r = if o.method == Method::Spsd {
                match o.tol {
                    // the shared basis truncates modes 1 and 3 at once
                    Some(_) => select_ranks(&blocks_to_tensor(&p, &blocks)?, o, &[0, 2])?[0],
                    None => o.rank.ok_or_else(|| Error::InvalidArgument("--method spsd needs --rank or --tol".into()))?,
                }
            } else {
                o.rank.ok_or_else(|| Error::InvalidArgument("--method spd needs --rank".into()))?
            };
            let rep: Representation = if o.method == Method::Spsd {
                let s = spsd_compress(&a, &p, r)?;
                if o.output == Some(OutputKind::Blr) { s.to_blr()?.into() } else { s.into() }
            } else {
                if o.output.is_some() {
                    return Err(Error::InvalidArgument("--method spd always writes an spd container".into()));
                }
                spd_compress(&a, &p, r)?.into()
            };
            (rep, format!("[{r}]"))
        }
    };
    let metrics = report_metrics(&source, &rep, Some(&a))?;
    let method = format!("{:?}", o.method).to_lowercase();
    let c = Container { meta: Metadata { method: Some(method), seed: Some(o.seed), source: Some(source) }, rep };
    container_write(dest, &c)?;
    let _ = writeln!(out, "pattern: {} (p = {})", p.structure(), p.p());
    let _ = writeln!(out, "ranks: {ranks_note}");
    let _ = writeln!(out, "kind: {}", c.rep.kind());
    print_metrics(&metrics, out);
    Ok(())
}

fn print_metrics(m: &Metrics, out: &mut impl Write) {
    let _ = writeln!(out, "terms: {}", m.terms);
    let _ = writeln!(out, "storage: {}", m.storage);
    let _ = writeln!(out, "storage_ratio: {:e}", m.storage_ratio);
    if let Some(e) = m.relerr_fro {
        let _ = writeln!(out, "relerr_fro: {e:e}");
    }
    if let Some(e) = m.relerr_trace {
        let _ = writeln!(out, "relerr_trace: {e:e}");
    }
}
