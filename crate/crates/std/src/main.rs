use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use treedim::config::DEFAULT_CAP_POINTS;
use treedim::{run, Command, Format, RunConfig};

/// Congruence quotients of groups acting on rooted trees.
#[derive(Parser)]
#[command(name = "treedim", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Spec file or fixture name (repeatable).
    #[arg(long, global = true, env = "TREEDIM_SPEC", value_delimiter = ',')]
    spec: Vec<String>,
    /// Largest level n.
    #[arg(long, global = true, env = "TREEDIM_LEVELS", default_value_t = 6)]
    levels: usize,
    /// Branching window k (also the outer level for `rist`).
    #[arg(long, global = true, env = "TREEDIM_WINDOW", default_value_t = 1)]
    window: usize,
    /// Largest number of leaves m^n a quotient may act on.
    #[arg(long, global = true, env = "TREEDIM_CAP_POINTS", default_value_t = DEFAULT_CAP_POINTS)]
    cap_points: u64,
    /// Tolerance of the convergence diagnostic.
    #[arg(long, global = true, env = "TREEDIM_TOL", default_value_t = 0.02)]
    tol: f64,
    #[arg(long, global = true, env = "TREEDIM_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Output format (default: csv for `dim`, json otherwise).
    #[arg(long, global = true, env = "TREEDIM_FORMAT", value_enum)]
    format: Option<Format>,
    /// Output file, written atomically (default: stdout).
    #[arg(long, global = true, env = "TREEDIM_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dimension ratios log|pi_n(G)| / log|pi_n(W_H)|.
    Dim,
    /// Abelianization indices, the easy bound and the perfectness scan.
    Abel,
    /// Orbit classification and counting bounds.
    Orbits,
    /// Rigid stabilizers at level --window inside pi_n.
    Rist {
        /// Also report rist of this vertex, e.g. "12".
        #[arg(long)]
        vertex: Option<String>,
    },
    /// Structure checks of G_K = <H, D_m(K)>.
    VerifyGk {
        /// Generator of H in cycle notation (repeatable).
        #[arg(long = "H", required = true)]
        h: Vec<String>,
        /// Spec file or fixture name of K.
        #[arg(long = "K")]
        k: String,
    },
    /// Invariant suite over the fixtures (or the given specs).
    Check,
    /// Orders of pi_n only.
    Quotient,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, default_format) = match cli.command {
        Cmd::Dim => (Command::Dim, Format::Csv),
        Cmd::Abel => (Command::Abel, Format::Json),
        Cmd::Orbits => (Command::Orbits, Format::Json),
        Cmd::Rist { vertex } => (Command::Rist { vertex }, Format::Json),
        Cmd::VerifyGk { h, k } => (Command::VerifyGk { h, k }, Format::Json),
        Cmd::Check => (Command::Check, Format::Json),
        Cmd::Quotient => (Command::Quotient, Format::Json),
    };
    let c = cli.common;
    let cfg = RunConfig {
        specs: c.spec,
        command,
        levels: c.levels,
        window: c.window,
        cap_points: c.cap_points,
        tolerance: c.tol,
        cache_dir: c.cache_dir,
        format: c.format.unwrap_or(default_format),
        out: c.out,
    };
    let outcome = run(&cfg);
    for e in &outcome.report.errors {
        eprintln!("treedim: {e}");
    }
    match treedim::run::emit(&cfg, &outcome) {
        Ok(Some(text)) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("treedim: writing output: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(outcome.code as u8)
}
