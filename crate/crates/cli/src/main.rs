//! Command-line driver: scenario files, collision operators, advice and runs.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "speclag",
    version,
    about = "Spectral-Lagrangian Boltzmann solver"
)]
struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, env = "SPECLAG_JOBS")]
    jobs: Option<usize>,
    /// Mark the run as a reference run; uses one thread unless --jobs is set.
    #[arg(long, global = true, env = "SPECLAG_DETERMINISTIC")]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

/// Config file plus the overrides most often changed from the command line.
#[derive(Debug, Clone, Args)]
pub struct Setup {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Replace the configured scenario by a registry name with default parameters.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "half-width")]
    pub half_width: Option<f64>,
    #[arg(long = "g-tr")]
    pub g_tr: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a scenario on the grid and write it as a field file.
    Init {
        #[command(flatten)]
        setup: Setup,
        /// Field file to write.
        #[arg(short, long, required_unless_present = "print_config")]
        out: Option<PathBuf>,
        /// Print the fully resolved configuration as TOML and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Spectral collision operator of a scenario or field file.
    Collide {
        #[command(flatten)]
        setup: Setup,
        /// Field file to use instead of the scenario.
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Collision operator by direct quadrature (small grids only).
    Oracle {
        #[command(flatten)]
        setup: Setup,
        #[arg(short, long)]
        out: PathBuf,
        /// Evaluate once per node speed; valid for isotropic scenarios.
        #[arg(long)]
        isotropic: bool,
        #[arg(long, default_value_t = 8)]
        radial_nodes: usize,
        #[arg(long, default_value_t = 16)]
        polar: usize,
        #[arg(long, default_value_t = 32)]
        azimuth: usize,
    },
    /// Weighting function along a ray in xi, as CSV.
    KernelProbe {
        #[arg(long = "g-tr", default_value_t = 8.0)]
        g_tr: f64,
        #[arg(long, default_value_t = 1.0 / (4.0 * std::f64::consts::PI))]
        b_tilde: f64,
        /// Fixed second argument, `x,y,z`.
        #[arg(long, default_value = "2,0,0", value_parser = commands::parse_vec3)]
        zeta: [f64; 3],
        /// Ray direction, `x,y,z`; normalized.
        #[arg(long, default_value = "1,0,0", value_parser = commands::parse_vec3)]
        direction: [f64; 3],
        #[arg(long, default_value_t = 10.0)]
        xi_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// CSV file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Maxwellian envelope and truncation speed recommendation.
    Advise {
        #[command(flatten)]
        setup: Setup,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Time integration with moment logging and field snapshots.
    Evolve {
        #[command(flatten)]
        setup: Setup,
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run acceptance criteria by name or number; all when none are given.
    Validate {
        criteria: Vec<String>,
        /// Conservation criterion at N = 48 instead of the N = 32 smoke size.
        #[arg(long)]
        full: bool,
        /// Write the reports as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    ValidationFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = if cli.deterministic {
        Some(cli.jobs.unwrap_or(1))
    } else {
        cli.jobs
    };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = commands::Context {
        jobs: rayon::current_num_threads(),
        deterministic: cli.deterministic,
    };
    let result = match cli.command {
        Command::Init {
            setup,
            out,
            print_config,
        } => commands::init(&ctx, &setup, out.as_deref(), print_config),
        Command::Collide { setup, input, out } => {
            commands::collide(&ctx, &setup, input.as_deref(), &out)
        }
        Command::Oracle {
            setup,
            out,
            isotropic,
            radial_nodes,
            polar,
            azimuth,
        } => commands::oracle(&ctx, &setup, &out, isotropic, radial_nodes, polar, azimuth),
        Command::KernelProbe {
            g_tr,
            b_tilde,
            zeta,
            direction,
            xi_max,
            points,
            out,
        } => commands::kernel_probe(
            g_tr,
            b_tilde,
            zeta,
            direction,
            xi_max,
            points,
            out.as_deref(),
        ),
        Command::Advise { setup, out } => commands::advise(&ctx, &setup, out.as_deref()),
        Command::Evolve { setup, input, out } => {
            commands::evolve(&ctx, &setup, input.as_deref(), &out)
        }
        Command::Validate {
            criteria,
            full,
            json,
        } => commands::validate(&criteria, full, json.as_deref()),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::ValidationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
