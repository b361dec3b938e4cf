//! `shull` command line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on numerical failures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use shull::basis::Route;
use shull::fekete::Method;
use shull::solver::study::Kind;
use shull::solver::Family;
use shull::{Error, Space};

#[derive(Parser, Debug)]
#[command(name = "shull", version, about = "Spectral hull interpolation, quadrature and solvers on polygons")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convex partition of a polygon (Hertel-Mehlhorn).
    Partition(PartitionArgs),
    /// Interior candidate points.
    Candidates(CandidatesArgs),
    /// Exact monomial moments.
    Moments(MomentsArgs),
    /// Gauss quadrature rule on a polygon.
    Quad(QuadArgs),
    /// Approximate Fekete points and weights.
    Fekete(FeketeArgs),
    /// Nodal, modal or orthonormal basis values.
    Basis(BasisArgs),
    /// Tabulate bases on master hulls.
    Tabulate(TabulateArgs),
    /// Lebesgue bounds, estimates and L2 operator norms.
    Lebesgue(LebesgueArgs),
    /// Interpolation and filtering errors for a test function.
    Interp(InterpArgs),
    /// Solve the acoustics benchmark on a square mesh.
    Solve(SolveArgs),
    /// Convergence study over degrees and families.
    Study(StudyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CandKind {
    Fill,
    Random,
    Chebyshev,
    Relaxed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SpaceArg {
    #[value(name = "P")]
    P,
    #[value(name = "Q")]
    Q,
}

impl From<SpaceArg> for Space {
    fn from(s: SpaceArg) -> Space {
        match s {
            SpaceArg::P => Space::P,
            SpaceArg::Q => Space::Q,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Qr,
    Omp,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Qr => Method::Qr,
            MethodArg::Omp => Method::Omp,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PrecondArg {
    Svd,
    Qr,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RouteArg {
    Direct,
    Reusable,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Route {
        match r {
            RouteArg::Direct => Route::Direct,
            RouteArg::Reusable => Route::Reusable,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BasisKind {
    Nodal,
    Modal,
    Orthonormal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NodeKind {
    Fekete,
    Equispaced,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Function {
    /// cos(3πx) cos(3πy)
    Cos3,
    /// sin(2πx) sin(2πy)
    Sin2,
    /// cos(4π sqrt(x² + y²))
    Radial4,
    /// 1 / (1 + 25 (x² + y²))
    Runge,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Dls,
    Dg,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Dls => Kind::Dls,
            KindArg::Dg => Kind::Dg,
        }
    }
}

#[derive(Args, Debug)]
pub struct PartitionArgs {
    /// Polygon file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Start vertex, 1-based.
    #[arg(long, default_value_t = 1)]
    pub start: usize,
    /// Output file with the pieces; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Candidate generation shared by several commands.
#[derive(Args, Debug, Clone)]
pub struct CandArgs {
    #[arg(long, value_enum, default_value_t = CandKind::Fill)]
    pub candidates: CandKind,
    /// Candidate count as a multiple of N.
    #[arg(long, default_value_t = 10.0)]
    pub oversample: f64,
    /// Chebyshev grid size per axis; accepts any count >= N.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Explicit candidate file (x,y CSV, physical coordinates).
    #[arg(long)]
    pub candidates_file: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct CandidatesArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = CandKind::Fill)]
    pub kind: CandKind,
    /// Number of points.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    /// Lattice spacing for the fill pattern (overrides --count).
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub iterations: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SpaceArg::P)]
    pub space: SpaceArg,
    #[arg(long)]
    pub degree: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct QuadArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Exactness degree.
    #[arg(long)]
    pub degree: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FeketeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SpaceArg::P)]
    pub space: SpaceArg,
    #[arg(long)]
    pub degree: u32,
    #[arg(long, value_enum, default_value_t = MethodArg::Qr)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = PrecondArg::Svd)]
    pub precond: PrecondArg,
    /// Preconditioning passes.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[command(flatten)]
    pub cand: CandArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BasisArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SpaceArg::P)]
    pub space: SpaceArg,
    #[arg(long)]
    pub degree: u32,
    #[arg(long, value_enum, default_value_t = RouteArg::Direct)]
    pub route: RouteArg,
    #[arg(long, value_enum, default_value_t = BasisKind::Nodal)]
    pub kind: BasisKind,
    /// Number of modes for modal and orthonormal output (default all).
    #[arg(long)]
    pub km: Option<usize>,
    /// Evaluation points (x,y CSV); the nodes if omitted.
    #[arg(long)]
    pub at: Option<PathBuf>,
    #[command(flatten)]
    pub cand: CandArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TabulateArgs {
    /// Master hull side counts, e.g. 3..8 or 4,6.
    #[arg(long, value_parser = parse_list, default_value = "3..8")]
    pub sides: List,
    /// Tabulate this polygon instead of master hulls.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SpaceArg::P)]
    pub space: SpaceArg,
    #[arg(long)]
    pub degree: u32,
    #[arg(long, value_enum, default_value_t = RouteArg::Direct)]
    pub route: RouteArg,
    #[command(flatten)]
    pub cand: CandArgs,
    /// Output directory.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct LebesgueArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SpaceArg::P)]
    pub space: SpaceArg,
    /// Degrees, e.g. 1..10.
    #[arg(long, value_parser = parse_list)]
    pub degree: List,
    #[arg(long, value_enum, default_value_t = NodeKind::Fekete)]
    pub nodes: NodeKind,
    /// Sample points for the estimates.
    #[arg(long, default_value_t = 4000)]
    pub samples: usize,
    #[command(flatten)]
    pub cand: CandArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InterpArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SpaceArg::P)]
    pub space: SpaceArg,
    #[arg(long, value_parser = parse_list)]
    pub degree: List,
    #[arg(long, value_enum, default_value_t = Function::Cos3)]
    pub function: Function,
    /// Retained modes, e.g. 200,360,400 (default all).
    #[arg(long, value_parser = parse_list)]
    pub km: Option<List>,
    #[arg(long, default_value_t = 4000)]
    pub samples: usize,
    #[command(flatten)]
    pub cand: CandArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1.0)]
    pub rho0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    /// Jump penalty of the least-squares functional.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Time step (default 1e-12 for dls, CFL-limited for dg).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Explicit steps for dg.
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Square mesh, e.g. 4x4.
    #[arg(long, value_parser = parse_mesh, default_value = "4x4")]
    pub mesh: usize,
    /// Relative residual tolerance of the linear solve.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Dls)]
    pub kind: KindArg,
    #[arg(long, value_parser = parse_family, default_value = "hull-Q")]
    pub family: Family,
    #[arg(long)]
    pub degree: u32,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Dls)]
    pub kind: KindArg,
    /// Comma separated families (default all).
    #[arg(long, value_parser = parse_family, value_delimiter = ',')]
    pub family: Vec<Family>,
    /// Degrees, e.g. 1..8.
    #[arg(long, value_parser = parse_list, default_value = "1..8")]
    pub p: List,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parsed integer list.
#[derive(Clone, Debug)]
pub struct List(pub Vec<u32>);

/// `a..b` (inclusive), `a,b,c` or a single value.
fn parse_list(s: &str) -> Result<List, String> {
    let bad = || format!("invalid list '{s}' (expected a..b, a,b,c or a)");
    if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok(List((a..=b).collect()));
    }
    s.split(',').map(|t| t.trim().parse::<u32>().map_err(|_| bad())).collect::<Result<_, _>>().map(List)
}

fn parse_mesh(s: &str) -> Result<usize, String> {
    let (a, b) = s.split_once('x').ok_or_else(|| format!("invalid mesh '{s}' (expected NxN)"))?;
    let a: usize = a.parse().map_err(|_| format!("invalid mesh '{s}'"))?;
    let b: usize = b.parse().map_err(|_| format!("invalid mesh '{s}'"))?;
    if a != b || a == 0 {
        return Err(format!("mesh '{s}' must be square and non-empty"));
    }
    Ok(a)
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

fn init_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("SHULL_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("SHULL_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let res = init_threads().and_then(|_| match cli.command {
        Command::Partition(a) => commands::partition(&a),
        Command::Candidates(a) => commands::candidates(&a),
        Command::Moments(a) => commands::moments(&a),
        Command::Quad(a) => commands::quad(&a),
        Command::Fekete(a) => commands::fekete(&a),
        Command::Basis(a) => commands::basis(&a),
        Command::Tabulate(a) => commands::tabulate(&a),
        Command::Lebesgue(a) => commands::lebesgue(&a),
        Command::Interp(a) => commands::interp(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Study(a) => commands::study(&a),
    });
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
