//! Batch front-end: runs the core computations, manages the profile
//! cache, and emits plot-ready CSV/JSON tables.

mod cache;
mod commands;
mod verify;

use clap::{Parser, Subcommand, ValueEnum};
use qcdel_core::Error;
use std::path::PathBuf;

/// 17 significant digits, '.' decimal, locale-free; the one float format
/// used in every table so outputs are byte-reproducible.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Necksize argument: a number or "cyl" for the cylinder eps_n.
#[derive(Debug, Clone, Copy)]
pub enum EpsArg {
    Value(f64),
    Cylinder,
}

impl std::str::FromStr for EpsArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "cyl" {
            return Ok(EpsArg::Cylinder);
        }
        s.parse::<f64>().map(EpsArg::Value).map_err(|e| format!("{e} (or use \"cyl\")"))
    }
}

impl EpsArg {
    pub fn resolve(self, params: &qcdel_core::DimensionParams) -> f64 {
        match self {
            EpsArg::Value(v) => v,
            EpsArg::Cylinder => params.eps_n,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(name = "qcdel-cli", about = "Delaunay / Q-curvature ODE laboratory", version)]
struct Cli {
    /// Cache directory override; defaults to $QCDEL_CACHE_DIR, then the
    /// platform data directory.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct one Delaunay profile; print a summary row, optionally
    /// write the profile JSON.
    Delaunay {
        #[arg(long)]
        n: i64,
        #[arg(long)]
        eps: EpsArg,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        /// Also write the full profile JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Period and energy over a necksize grid.
    EnergyTable {
        #[arg(long)]
        n: i64,
        /// Grid endpoints as fractions of eps_n.
        #[arg(long, default_value_t = 0.4)]
        frac_min: f64,
        #[arg(long, default_value_t = 0.99)]
        frac_max: f64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Indicial roots per spherical-harmonic degree.
    Indicial {
        #[arg(long)]
        n: i64,
        #[arg(long)]
        eps: EpsArg,
        #[arg(long, default_value_t = 3)]
        k_max: u32,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
    },
    /// Quasi-periodic eigenvalue curves over a phase grid.
    Bands {
        #[arg(long)]
        n: i64,
        #[arg(long)]
        eps: EpsArg,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 9)]
        phi_grid: usize,
        #[arg(long, default_value_t = 8)]
        m_max: usize,
        #[arg(long, default_value_t = qcdel_core::bands::DEFAULT_M)]
        truncation: usize,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Expansion-error curve of the translated family with fitted rate.
    Expansion {
        #[arg(long)]
        n: i64,
        #[arg(long)]
        eps: EpsArg,
        #[arg(long, default_value_t = 0.1)]
        a_mag: f64,
        #[arg(long, default_value_t = 2.0)]
        t0: f64,
        #[arg(long, default_value_t = 8.0)]
        t1: f64,
        #[arg(long, default_value_t = 25)]
        nt: usize,
        #[arg(long, default_value_t = 41)]
        ns: usize,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
    },
    /// Run the invariant suite; one PASS/FAIL line per check.
    Verify {
        #[arg(long)]
        n: i64,
        /// Skip the slowest convergence checks.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
    },
}

/// Exit codes: 0 success, 1 argument error, 2 numerical failure,
/// 3 post-validation failure.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidDimension(_)
        | Error::InvalidArgument(_)
        | Error::EpsilonOutOfRange { .. } => 1,
        Error::InvariantViolation(_) | Error::Schema(_) | Error::Checksum { .. } => 3,
        _ => 2,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version are normal exits; bad flags are code 1.
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let dir = cli.cache_dir.unwrap_or_else(cache::cache_dir);
    let result = match cli.command {
        Command::Delaunay { n, eps, tol, out } => commands::delaunay(&dir, n, eps, tol, out),
        Command::EnergyTable { n, frac_min, frac_max, count, tol, format } => {
            commands::energy_table(&dir, n, frac_min, frac_max, count, tol, format)
        }
        Command::Indicial { n, eps, k_max, tol } => commands::indicial(&dir, n, eps, k_max, tol),
        Command::Bands { n, eps, k, phi_grid, m_max, truncation, tol, format } => {
            commands::bands(&dir, n, eps, k, phi_grid, m_max, truncation, tol, format)
        }
        Command::Expansion { n, eps, a_mag, t0, t1, nt, ns, tol } => {
            commands::expansion(&dir, n, eps, a_mag, t0, t1, nt, ns, tol)
        }
        Command::Verify { n, quick, tol } => {
            match verify::run(&dir, n, quick, tol) {
                Ok(true) => Ok(()),
                Ok(false) => {
                    std::process::exit(3);
                }
                Err(e) => Err(e),
            }
        }
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
