//! `mobeq` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input or failed check, 2 internal error.

mod commands;

use std::net::IpAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "mobeq", version, about = "Traveler-equilibrium engine for multi-modal city mobility games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Table,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check a city file (and optionally a controls file) without solving.
    Validate {
        /// City file, or the key of a bundled city (boston, lugano, kyiv).
        city: String,
        #[arg(long)]
        controls: Option<PathBuf>,
    },
    /// Solve one scenario and print its report.
    Solve {
        city: String,
        #[arg(long)]
        controls: Option<PathBuf>,
        /// Also solve the full LP and print the objective gap.
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a sequence of controls files as one session and save it.
    Run {
        city: String,
        /// Controls file per iteration, in order.
        #[arg(long = "controls", required = true)]
        controls: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-solve every iteration of a saved session and compare KPIs.
    Replay {
        session: PathBuf,
        /// Largest accepted absolute KPI deviation.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// KPI differences between two iterations of a saved session (b - a).
    Compare {
        session: PathBuf,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        #[arg(long, value_enum, default_value = "table")]
        format: TableFormat,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "MOBEQ_ADDR", default_value = "127.0.0.1")]
        addr: IpAddr,
        #[arg(long, env = "MOBEQ_PORT", default_value_t = 8080)]
        port: u16,
        /// Persist uploaded cities and sessions here.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Static front end served at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { city, controls } => commands::validate(&city, controls.as_deref()),
        Command::Solve {
            city,
            controls,
            oracle,
            format,
            out,
        } => commands::solve(&city, controls.as_deref(), oracle, format, out.as_deref()),
        Command::Run { city, controls, out } => commands::run(&city, &controls, &out),
        Command::Replay { session, tolerance } => commands::replay(&session, tolerance),
        Command::Compare {
            session,
            a,
            b,
            format,
        } => commands::compare(&session, a, b, format),
        Command::Serve {
            addr,
            port,
            data_dir,
            static_dir,
        } => commands::serve(addr, port, data_dir, static_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
