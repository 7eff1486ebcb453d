//! Command-line front end: table reproduction, refinement driver and mesh
//! certification.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checker::{certify, Verdict};
use crate::hanging::min_lambda_hanging;
use crate::io::{format_lambda, load_mesh, save_mesh, write_table_csv, write_vtk, TableRow};
use crate::mesh::{ElementId, Mesh};
use crate::polybasis::Shape;
use crate::refine::{refine, RefineError};
use crate::weights::{min_lambda_table, GenerationSet, GeometryCase, Strategy};

pub const EXIT_STABLE: i32 = 0;
pub const EXIT_NOT_CERTIFIED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

pub const THREADS_ENV: &str = "H1STAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "h1stab",
    version,
    about = "H1-stability certification of the L2 projection on adaptive meshes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimal eigenvalues over all admissible weight configurations
    Tables(TablesArgs),
    /// Refine a mesh with Q-R, Q-RG or Q-RB
    Refine(RefineArgs),
    /// Certify a mesh for given p and mu
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Square,
    Triangle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeometryArg {
    Affine,
    General,
    Qrb,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long, value_enum, default_value = "square")]
    pub shape: ShapeArg,
    #[arg(long, value_enum, default_value = "affine")]
    pub geometry: GeometryArg,
    /// bound on the bilinear parameters for `--geometry general`
    #[arg(long, default_value_t = 0.25)]
    pub c: f64,
    /// comma-separated grading parameters
    #[arg(long, default_value = "1,2,3,4", value_parser = parse_mu_list)]
    pub mu: MuList,
    /// degrees, e.g. `1..10`, `3` or `1,2,5`
    #[arg(long, value_parser = parse_degrees)]
    pub p: Option<Degrees>,
    /// number of hanging nodes on the element (0, 1 or 2)
    #[arg(long, default_value_t = 0)]
    pub hanging: usize,
    /// generation set; defaults to the one matching shape and geometry
    #[arg(long)]
    pub strategy: Option<Strategy>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub input: Option<PathBuf>,
    /// initial grid `RxC` or `RxC:skew`
    #[arg(long)]
    pub grid: Option<Grid>,
    #[arg(long)]
    pub strategy: Strategy,
    /// `random:<fraction>`, `ids:<list>`, `corner` or `corner:<0..3>`
    #[arg(long)]
    pub marks: Marks,
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub vtk: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuList(pub Vec<f64>);

#[derive(Clone, Debug, PartialEq)]
pub struct Degrees(pub Vec<usize>);

fn parse_mu_list(s: &str) -> Result<MuList, String> {
    let mus = s
        .split(',')
        .map(|t| match t.trim().parse::<f64>() {
            Ok(mu) if mu.is_finite() && mu > 0.0 => Ok(mu),
            _ => Err(format!("invalid mu '{t}'")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MuList(mus))
}

fn parse_degrees(s: &str) -> Result<Degrees, String> {
    let bad = || format!("invalid degree range '{s}'");
    let ps: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if ps.is_empty() || ps.contains(&0) {
        return Err(bad());
    }
    Ok(Degrees(ps))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub skew: f64,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid grid '{s}', expected RxC or RxC:skew");
        let (dims, skew) = match s.split_once(':') {
            Some((d, k)) => (d, k.parse::<f64>().map_err(|_| bad())?),
            None => (s, 0.0),
        };
        let (r, c) = dims.split_once(['x', 'X']).ok_or_else(bad)?;
        let rows: usize = r.parse().map_err(|_| bad())?;
        let cols: usize = c.parse().map_err(|_| bad())?;
        if rows == 0 || cols == 0 || !skew.is_finite() {
            return Err(bad());
        }
        Ok(Grid { rows, cols, skew })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Marks {
    Random(f64),
    Ids(Vec<ElementId>),
    /// index into lower-left, lower-right, upper-right, upper-left
    Corner(usize),
}

impl FromStr for Marks {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid marks '{s}'");
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        match (head, tail) {
            ("random", Some(f)) => match f.parse::<f64>() {
                Ok(f) if (0.0..=1.0).contains(&f) => Ok(Marks::Random(f)),
                _ => Err(bad()),
            },
            ("ids", Some(list)) if list.trim().is_empty() => Ok(Marks::Ids(Vec::new())),
            ("ids", Some(list)) => list
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()
                .map(Marks::Ids),
            ("corner", None) => Ok(Marks::Corner(0)),
            ("corner", Some(k)) => match k.parse::<usize>() {
                Ok(k) if k < 4 => Ok(Marks::Corner(k)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl Marks {
    /// Elements to refine in the current step.
    pub fn select(&self, mesh: &Mesh, rng: &mut ChaCha8Rng) -> Vec<ElementId> {
        let active = mesh.active_elements();
        match self {
            Marks::Random(f) => active.into_iter().filter(|_| rng.gen_bool(*f)).collect(),
            Marks::Ids(ids) => ids.clone(),
            Marks::Corner(k) => {
                let pts = active.iter().flat_map(|&e| mesh.points(e));
                let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
                for p in pts {
                    for d in 0..2 {
                        lo[d] = lo[d].min(p[d]);
                        hi[d] = hi[d].max(p[d]);
                    }
                }
                let target = match k {
                    0 => lo,
                    1 => [hi[0], lo[1]],
                    2 => hi,
                    _ => [lo[0], hi[1]],
                };
                let d2 = |p: [f64; 2]| (p[0] - target[0]).powi(2) + (p[1] - target[1]).powi(2);
                let dist = |e: ElementId| mesh.points(e).into_iter().map(d2).fold(f64::INFINITY, f64::min);
                let best = active.iter().map(|&e| dist(e)).fold(f64::INFINITY, f64::min);
                active.into_iter().filter(|&e| dist(e) <= best).collect()
            }
        }
    }
}

/// Caps the global rayon pool from `H1STAB_THREADS`.
pub fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = match v.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return Err(format!("{THREADS_ENV} must be a positive integer, got '{v}'")),
    };
    // a pool may already exist when running inside a test harness
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_STABLE };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_USAGE;
    }
    let result = match cli.command {
        Command::Tables(a) => cmd_tables(&a, out),
        Command::Refine(a) => cmd_refine(&a, out),
        Command::Check(a) => cmd_check(&a, out),
    };
    match result {
        Ok(code) => code,
        Err((code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

type CmdResult = Result<i32, (i32, String)>;

fn usage<E: std::fmt::Display>(e: E) -> (i32, String) {
    (EXIT_USAGE, e.to_string())
}

fn default_set(shape: ShapeArg, geometry: GeometryArg) -> GenerationSet {
    match (shape, geometry) {
        (ShapeArg::Triangle, _) => GenerationSet::for_strategy(Strategy::Triangle),
        (ShapeArg::Square, GeometryArg::Qrb) => GenerationSet::for_strategy(Strategy::Qrb),
        (ShapeArg::Square, _) => {
            GenerationSet::for_strategy(Strategy::Qr).union(&GenerationSet::for_strategy(Strategy::Qrg))
        }
    }
}

pub fn cmd_tables(a: &TablesArgs, out: &mut dyn Write) -> CmdResult {
    if a.hanging > 2 {
        return Err(usage("--hanging must be 0, 1 or 2"));
    }
    if a.hanging > 0 && (a.shape != ShapeArg::Square || a.geometry != GeometryArg::Affine) {
        return Err(usage("--hanging requires --shape square --geometry affine"));
    }
    if a.hanging > 0 && a.strategy.is_some_and(|s| s != Strategy::Qr) {
        return Err(usage("hanging-node tables use the Q-R generation set"));
    }
    if a.shape == ShapeArg::Triangle && a.geometry != GeometryArg::Affine {
        return Err(usage("triangles only support --geometry affine"));
    }
    if a.shape == ShapeArg::Triangle && a.strategy.is_some_and(|s| s != Strategy::Triangle) {
        return Err(usage("triangles only support --strategy triangle"));
    }
    if a.shape == ShapeArg::Square && a.strategy == Some(Strategy::Triangle) {
        return Err(usage("--strategy triangle requires --shape triangle"));
    }
    if a.geometry == GeometryArg::General && !(a.c.is_finite() && a.c >= 0.0) {
        return Err(usage("--c must be a non-negative number"));
    }
    let max_p = match (a.hanging, a.shape) {
        (1 | 2, _) => 5,
        (_, ShapeArg::Triangle) => 12,
        _ => 10,
    };
    let degrees = a.p.clone().map(|d| d.0).unwrap_or_else(|| (1..=max_p).collect());
    if let Some(&p) = degrees.iter().find(|&&p| p > max_p) {
        return Err(usage(format!("p = {p} exceeds the supported maximum {max_p}")));
    }
    let shape = match a.shape {
        ShapeArg::Square => Shape::Square,
        ShapeArg::Triangle => Shape::Triangle,
    };
    let geometry = match a.geometry {
        GeometryArg::Affine => GeometryCase::Affine,
        GeometryArg::General => GeometryCase::GeneralQuad { c: a.c },
        GeometryArg::Qrb => GeometryCase::QrbQuad,
    };
    let set = a
        .strategy
        .map(GenerationSet::for_strategy)
        .unwrap_or_else(|| default_set(a.shape, a.geometry));

    let mut rows = Vec::new();
    for &p in &degrees {
        for &mu in &a.mu.0 {
            let lambda_min = if a.hanging > 0 {
                min_lambda_hanging::<f64>(p, a.hanging, mu).map_err(usage)?.0
            } else {
                min_lambda_table::<f64>(shape, p, &set, mu, geometry)
                    .map_err(usage)?
                    .lambda_min
            };
            rows.push(TableRow { mu, p, lambda_min });
        }
    }

    let w = out;
    let io = |e: std::io::Error| usage(e);
    write!(w, "{:>3}", "p").map_err(io)?;
    for mu in &a.mu.0 {
        write!(w, " {:>20}", format!("mu={mu}")).map_err(io)?;
    }
    writeln!(w).map_err(io)?;
    for chunk in rows.chunks(a.mu.0.len()) {
        write!(w, "{:>3}", chunk[0].p).map_err(io)?;
        for r in chunk {
            write!(w, " {:>20}", format_lambda(r.lambda_min)).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    if let Some(path) = &a.csv {
        let file = File::create(path).map_err(usage)?;
        write_table_csv(&rows, BufWriter::new(file)).map_err(usage)?;
    }
    Ok(EXIT_STABLE)
}

pub fn cmd_refine(a: &RefineArgs, out: &mut dyn Write) -> CmdResult {
    let mut mesh = match (&a.input, a.grid) {
        (Some(path), _) => load_mesh(path).map_err(usage)?,
        (None, Some(g)) => Mesh::make_initial(g.rows, g.cols, g.skew),
        (None, None) => return Err(usage("one of --input or --grid is required")),
    };
    if a.strategy == Strategy::Triangle {
        return Err(usage("refinement strategies are qr, qrg and qrb"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for step in 0..a.steps {
        let marked = a.marks.select(&mesh, &mut rng);
        mesh = refine(&mesh, a.strategy, &marked).map_err(|e| match e {
            RefineError::CapExceeded(_) | RefineError::Unmatched { .. } => (EXIT_CAP, e.to_string()),
            other => usage(other),
        })?;
        let _ = writeln!(
            out,
            "step {}: {} marked, {} active elements",
            step + 1,
            marked.len(),
            mesh.active_elements().len()
        );
    }
    save_mesh(&mesh, &a.output).map_err(usage)?;
    if let Some(path) = &a.vtk {
        let file = File::create(path).map_err(usage)?;
        let mut w = BufWriter::new(file);
        write_vtk(&mesh, &mut w).and_then(|_| w.flush()).map_err(usage)?;
    }
    Ok(EXIT_STABLE)
}

pub fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> CmdResult {
    if !(a.mu.is_finite() && a.mu > 0.0) {
        return Err(usage("--mu must be positive"));
    }
    let mesh = load_mesh(&a.input).map_err(usage)?;
    let report = certify(&mesh, a.p, a.mu).map_err(usage)?;
    let io = |e: std::io::Error| usage(e);
    writeln!(out, "verdict: {:?}", report.verdict).map_err(io)?;
    writeln!(out, "p = {}, mu = {}", report.p, report.mu).map_err(io)?;
    writeln!(out, "active elements: {}", report.per_element.len()).map_err(io)?;
    writeln!(out, "distinct pencils: {}", report.distinct_pencils).map_err(io)?;
    writeln!(out, "min lambda: {}", format_lambda(report.min_lambda)).map_err(io)?;
    if let Some(e) = report.worst_element {
        writeln!(out, "worst element: {e}").map_err(io)?;
    }
    writeln!(
        out,
        "grading bound: max excess {} <= C_mu {}: {}",
        report.mu_bound.max_excess, report.mu_bound.c_mu, report.mu_bound.passed
    )
    .map_err(io)?;
    for note in &report.notes {
        writeln!(out, "note: {note}").map_err(io)?;
    }
    if let Some(path) = &a.report {
        let json = serde_json::to_string_pretty(&report).map_err(usage)?;
        std::fs::write(path, json).map_err(usage)?;
    }
    Ok(match report.verdict {
        Verdict::Stable => EXIT_STABLE,
        Verdict::NotCertified => EXIT_NOT_CERTIFIED,
    })
}
