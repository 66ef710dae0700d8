//! `durer-forge`: convex caps, pseudo-edge unfoldings and overlap witnesses from the
//! command line. Reports are JSON on stdout; diagnostics go to stderr.

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

/// Process exit status of a finished command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Inconclusive,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or input files; exit code 1.
    Input(String),
    /// The computation ran but could not decide; exit code 2.
    Inconclusive(String),
    /// Exit code 3.
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Inconclusive(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Inconclusive(m) | CliError::Internal(m) => m,
        }
    }
}

pub type CliResult = Result<Outcome, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "durer-forge",
    version,
    about = "Convex caps, pseudo-edge unfoldings and overlap witnesses",
    after_help = "SUBDIVISION is a subdivision file or the name of a bundled fixture: triangle84, square1, strip2, hook2."
)]
struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Forest {
    /// JSON object mapping each interior vertex id to its parent id.
    #[arg(long, value_name = "FILE", conflicts_with = "seed")]
    forest: Option<PathBuf>,
    /// Sample a uniform random cut forest with this seed instead.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct CapInput {
    /// Mesh JSON written by `solve-cap`.
    #[arg(long, value_name = "FILE")]
    mesh: PathBuf,
    #[arg(long, value_name = "SUBDIVISION")]
    subdivision: String,
    /// Graph JSON written by `pseudo-edges`; checked against the recomputed graph.
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the structural invariants of a subdivision.
    Validate {
        subdivision: String,
        #[arg(long, default_value = "1e-6")]
        eps: String,
    },
    /// Exact certificate that no cut forest of the subdivision is monotone.
    Certificate {
        subdivision: String,
        #[arg(long, default_value = "1e-6")]
        eps: String,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Solve the convex cap with total curvature β spread by the vertex weights.
    SolveCap {
        #[arg(long, value_name = "SUBDIVISION")]
        spec: String,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value = "1e-6")]
        eps: String,
        /// Mesh JSON, or OBJ when the name ends in `.obj`.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Induce the pseudo-edge graph on a solved cap.
    PseudoEdges {
        #[arg(long, value_name = "FILE")]
        mesh: PathBuf,
        #[arg(long, value_name = "SUBDIVISION")]
        subdivision: String,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Search for a monotone cut forest.
    Forests {
        #[arg(long, value_name = "SUBDIVISION")]
        subdivision: String,
        /// Enumerate every forest when the graph is small enough.
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,
        #[arg(long, value_name = "N")]
        samples: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Cut a cap along a forest and develop it into the plane.
    Unfold {
        #[command(flatten)]
        cap: CapInput,
        #[command(flatten)]
        forest: Forest,
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Build the overlap witness at a vertex whose monotonicity condition fails.
    Witness {
        #[command(flatten)]
        cap: CapInput,
        #[command(flatten)]
        forest: Forest,
        /// Vertex id; defaults to the strongest violation with a valid witness.
        #[arg(long)]
        vertex: Option<String>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Place four copies of a triangular cap on a regular tetrahedron.
    Assemble {
        #[arg(long, value_name = "FILE")]
        cap: PathBuf,
        /// Also build the global pseudo-edge graph.
        #[arg(long, value_name = "SUBDIVISION")]
        subdivision: Option<String>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run every stage and write the final report.
    Reproduce {
        #[arg(long, default_value = "triangle84")]
        subdivision: String,
        #[arg(long, default_value = "1e-6")]
        eps: String,
        #[arg(long, default_value_t = 0.05)]
        beta: f64,
        #[arg(long, default_value_t = 1e-4)]
        beta_min: f64,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 20)]
        forests: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        svg_dir: Option<PathBuf>,
    },
    /// Draw the development of a cut cap as SVG.
    ExportSvg {
        #[command(flatten)]
        cap: CapInput,
        #[command(flatten)]
        forest: Forest,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Write a cap, or the assembled polyhedron, as Wavefront OBJ.
    ExportObj {
        #[arg(long, value_name = "FILE")]
        mesh: PathBuf,
        /// Close the cap with a fan over its boundary polygon.
        #[arg(long, conflicts_with = "assembled")]
        with_base: bool,
        /// Export the polyhedron built from four copies of the cap.
        #[arg(long)]
        assembled: bool,
        /// Fail unless every edge is shared by two consistently oriented faces.
        #[arg(long)]
        require_closed: bool,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

/// `DURER_FORGE_SEED` wins over the flag.
fn seed_override(flag: Option<u64>) -> Result<Option<u64>, CliError> {
    match std::env::var("DURER_FORGE_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Input(format!("DURER_FORGE_SEED={v} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

fn run(cli: Cli) -> CliResult {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Input("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Validate { subdivision, eps } => commands::validate(&subdivision, &eps),
        Command::Certificate { subdivision, eps, out } => commands::certificate(&subdivision, &eps, out.as_deref()),
        Command::SolveCap { spec, beta, tol, eps, out } => commands::solve_cap_cmd(&spec, beta, tol, &eps, out.as_deref()),
        Command::PseudoEdges { mesh, subdivision, out } => commands::pseudo_edges(&mesh, &subdivision, out.as_deref()),
        Command::Forests { subdivision, exhaustive, samples, seed, out } => {
            let seed = seed_override(Some(seed))?.unwrap_or(seed);
            commands::forests(&subdivision, exhaustive, samples, seed, out.as_deref())
        }
        Command::Unfold { cap, forest, svg, out } => {
            let seed = seed_override(forest.seed)?;
            commands::unfold(&cap, forest.forest.as_deref(), seed, svg.as_deref(), out.as_deref())
        }
        Command::Witness { cap, forest, vertex, out } => {
            let seed = seed_override(forest.seed)?;
            commands::witness(&cap, forest.forest.as_deref(), seed, vertex.as_deref(), out.as_deref())
        }
        Command::Assemble { cap, subdivision, out } => commands::assemble(&cap, subdivision.as_deref(), out.as_deref()),
        Command::Reproduce { subdivision, eps, beta, beta_min, trees, forests, samples, seed, tol, report, svg_dir } => {
            let seed = seed_override(Some(seed))?.unwrap_or(seed);
            let cfg = commands::ReproduceArgs { eps, beta, beta_min, trees, forests, samples, seed, tol };
            commands::reproduce(&subdivision, &cfg, report.as_deref(), svg_dir.as_deref())
        }
        Command::ExportSvg { cap, forest, out } => {
            let seed = seed_override(forest.seed)?;
            commands::export_svg(&cap, forest.forest.as_deref(), seed, &out)
        }
        Command::ExportObj { mesh, with_base, assembled, require_closed, out } => {
            commands::export_obj(&mesh, with_base, assembled, require_closed, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(Outcome::Success)) => ExitCode::SUCCESS,
        Ok(Ok(Outcome::Inconclusive)) => ExitCode::from(2),
        Ok(Err(e)) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
        Err(_) => ExitCode::from(3),
    }
}
