use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crgeo::commands::{self, DomainSpec, YamabeConfig};
use crgeo::suites::Suite;
use crgeo::{CliError, Result};

/// Pseudohermitian geometry on the Heisenberg group.
#[derive(Parser, Debug)]
#[command(name = "crgeo", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run verification suites and print a PASS/FAIL table.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Replace every residual bound with this value.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write a JSON-lines report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build a surface from Weierstrass data and write a mesh.
    Surface {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long, default_value = "32x32")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
        /// Per-point residual CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Mean curvature field of a T-tangent surface in H₁.
    Curvature {
        /// `cylinder:R` or `plane:BETA`.
        #[arg(long, default_value = "cylinder:1")]
        domain: DomainSpec,
        #[arg(long, default_value = "16x8")]
        grid: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lifted boundary curvature or null-space probe on the circle bundle.
    Fefferman {
        /// `cylinder:R`, `halfspace:N` or `nullspace`.
        #[arg(long, default_value = "cylinder:1")]
        domain: DomainSpec,
        #[arg(long, default_value = "8x8")]
        grid: String,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimize the boundary Yamabe quotient on an annular cylinder.
    Yamabe {
        #[arg(long, default_value_t = 0.5)]
        r0: f64,
        #[arg(long, default_value_t = 1.0)]
        r1: f64,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        /// `NρxNαxNt`; repeat or separate with commas for a refinement study.
        #[arg(long, value_delimiter = ',', default_value = "16x8x8")]
        grid: Vec<String>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        /// Solution CSV.
        #[arg(long)]
        out: PathBuf,
        /// Convergence CSV.
        #[arg(long)]
        log: PathBuf,
        /// Residual summary CSV, one row per grid.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn run(cmd: Cmd) -> Result<(String, bool)> {
    match cmd {
        Cmd::Verify { suite, tol, seed, report } => commands::run_verify(suite, tol, seed, report.as_deref()),
        Cmd::Surface { phi, grid, out, report } => commands::run_surface(&phi, &grid, &out, report.as_deref()).map(|s| (s, true)),
        Cmd::Curvature { domain, grid, tol, out } => commands::run_curvature(domain, &grid, tol, &out).map(|s| (s, true)),
        Cmd::Fefferman { domain, grid, tol, out } => commands::run_fefferman(domain, &grid, tol, &out).map(|s| (s, true)),
        Cmd::Yamabe { r0, r1, length, grid, tol, max_iters, out, log, report } => {
            let grids = grid
                .iter()
                .map(|g| commands::parse_grid(g, 3).map(|v| [v[0], v[1], v[2]]))
                .collect::<Result<Vec<_>>>()?;
            let cfg = YamabeConfig { r0, r1, length, grids, tol, max_iters, out, log, report };
            commands::run_yamabe(&cfg).map(|s| (s, true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok((text, ok)) => {
            print!("{text}");
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(e) => {
            if let CliError::Failed(_) = e {
                println!("{e}");
            }
            eprintln!("crgeo: {}", match &e {
                CliError::Failed(_) => "failed".to_string(),
                other => other.to_string(),
            });
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
