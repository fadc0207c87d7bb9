//! `pcurve`: solve, validate and tabulate principal curves from the shell.
//!
//! Exit codes: 0 success, 1 input or I/O error, 2 inadmissible stop of the
//! solver (partial trace written), 3 validation failed.

mod commands;
mod values;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// A comma separated number list, parsed as one value.
type List = Vec<f64>;

#[derive(Parser, Debug)]
#[command(name = "pcurve", version, about = "Principal curves of uniform distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the curvature dynamics from an initial point and direction.
    Solve(SolveArgs),
    /// Check a trace against a domain: residuals, Voronoi barycenters, energy.
    Validate(ValidateArgs),
    /// Principal pitch search and admissibility for helices in a cylinder.
    Helix(HelixArgs),
    /// Closed curve in the unit square from eight quadrant pieces.
    SquareCompose(SquareArgs),
    /// Write an analytic reference curve as a trace.
    Curve(CurveArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SolverFlags {
    /// Maximal arclength.
    #[arg(long, default_value_t = 10.0)]
    pub length: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    #[arg(long, default_value_t = 0.05)]
    pub max_step: f64,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Domain JSON file.
    #[arg(long)]
    pub domain: PathBuf,
    /// Start point, comma separated.
    #[arg(long, value_parser = values::parse_list, allow_hyphen_values = true)]
    pub x0: Option<List>,
    /// Initial spherical angles (`pi/2` style tokens allowed).
    #[arg(long, value_parser = values::parse_list, allow_hyphen_values = true, conflicts_with = "tangent")]
    pub zeta0: Option<List>,
    /// Initial tangent direction (normalized).
    #[arg(long, value_parser = values::parse_list, allow_hyphen_values = true)]
    pub tangent: Option<List>,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Prism only: start vertically and stop where the tangent is vertical
    /// again; the stop height closes the prism.
    #[arg(long)]
    pub until_vertical: bool,
    /// Prism only: start at the base centroid moved this far along the
    /// major principal axis (replaces --x0).
    #[arg(long, allow_hyphen_values = true)]
    pub prism_axis_offset: Option<f64>,
    /// JSON list of `{"name", "x0", "zeta0" | "tangent"}` runs, one thread each.
    #[arg(long, conflicts_with_all = ["x0", "zeta0", "tangent", "prism_axis_offset"])]
    pub sweep: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// File stem of the trace.
    #[arg(long, default_value = "trace")]
    pub name: String,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// Trace CSV; a JSON sidecar next to it may supply truncation and range.
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 32)]
    pub nodes: usize,
    /// Number of arclengths for residuals and admissibility.
    #[arg(long, default_value_t = 64)]
    pub n_s: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 0.01)]
    pub barycenter_tol: f64,
    /// Arclength window `lo,hi` for the checks.
    #[arg(long, value_parser = values::parse_pair)]
    pub range: Option<(f64, f64)>,
    /// Cut `lo,hi` of the unbounded axis for sampling.
    #[arg(long, value_parser = values::parse_pair, allow_hyphen_values = true)]
    pub truncation: Option<(f64, f64)>,
    /// Run the Monte-Carlo loops on one thread.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "report")]
    pub name: String,
}

#[derive(Args, Debug)]
pub struct HelixArgs {
    /// Helix radii to tabulate.
    #[arg(long, value_parser = values::parse_list, default_value = "0.05,0.1,0.2,0.25,0.4,0.6,0.66")]
    pub a: List,
    /// Cylinder radius.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Turns written per trace; checks use the middle turn.
    #[arg(long, default_value_t = 3.0)]
    pub turns: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SquareArgs {
    /// Start `(x₁, 0)` with a vertical tangent.
    #[arg(long, default_value_t = 1.0)]
    pub x0: f64,
    /// Truncate at this crossing (1-based) of the diagonal angle.
    #[arg(long, default_value_t = 1)]
    pub crossing: usize,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[command(subcommand)]
    pub kind: CurveKind,
    /// Number of sampled pieces.
    #[arg(long, default_value_t = 2048, global = true)]
    pub pieces: usize,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "curve", global = true)]
    pub name: String,
}

#[derive(Subcommand, Debug)]
pub enum CurveKind {
    /// Quarter circle about the origin in the first quadrant.
    Arc {
        #[arg(long, value_parser = values::parse_scalar)]
        radius: f64,
    },
    /// `x₂ = c x₁²` on `[from, to]`.
    Parabola {
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
    },
    Segment {
        #[arg(long, value_parser = values::parse_list, allow_hyphen_values = true)]
        from: List,
        #[arg(long, value_parser = values::parse_list, allow_hyphen_values = true)]
        to: List,
    },
    /// Helix of radius `a` and pitch `b` in the cylinder of radius `r`.
    Helix {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 3.0)]
        turns: f64,
    },
}

/// Outcome of a successful command run.
pub enum Status {
    Ok,
    InadmissibleStop,
    ValidationFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Validate(a) => commands::validate(&a),
        Command::Helix(a) => commands::helix(&a),
        Command::SquareCompose(a) => commands::square_compose(&a),
        Command::Curve(a) => commands::curve(&a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::InadmissibleStop) => ExitCode::from(2),
        Ok(Status::ValidationFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
