//! Command-line front end; all logic lives in `npqueue::cli`.

use clap::{Parser, Subcommand};
use npqueue::cli::{self, ValidateOpts};
use npqueue::output::OutputFormat;
use npqueue::{Error, ModelParams};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "npqueue",
    version,
    about = "Queue-length distributions for the two-level non-preemptive M/M/c priority queue"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wait-conditional low-priority marginal f_lo(0..=nmax).
    Marginal {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value_t = 200)]
        nmax: usize,
        /// Engine: qr (recurrence) or ri (integral series).
        #[arg(long, default_value = "ri")]
        method: String,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wait-conditional joint PMF f(n, m) in long form.
    Joint {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value_t = 100)]
        nmax: usize,
        #[arg(long, default_value_t = 100)]
        mmax: usize,
        /// Engine: qr, ri, or cheb (reconstruction surface).
        #[arg(long, default_value = "qr")]
        method: String,
        /// Apply the map f <- max(0, 1 + log10(f/f_max)/20).
        #[arg(long)]
        logmap: bool,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tail-law overlay: f_lo, its asymptote, and the relative error.
    Asymptote {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        nu: f64,
        /// First queue length in the emitted range.
        #[arg(long, default_value_t = 1)]
        nmin: usize,
        #[arg(long, default_value_t = 1000)]
        nmax: usize,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case agreement battery over a parameter grid.
    Validate {
        /// Comma-separated traffic intensities (default: the full grid).
        #[arg(long)]
        r: Option<String>,
        /// Comma-separated high-priority fractions (default: 0.05..=0.95).
        #[arg(long)]
        nu: Option<String>,
        /// Comma-separated subset of agg,xhi,xlo,nn,qr,oracle,mc.
        #[arg(long, default_value = "agg,xhi,xlo,nn")]
        tests: String,
        /// Engines for the agreement tests.
        #[arg(long, default_value = "qr,ri")]
        method: String,
        #[arg(long, default_value_t = 1000)]
        nlim: usize,
        /// Probability floor; omitted = per-test defaults (1e-20; xhi 1e-30).
        #[arg(long)]
        plim: Option<f64>,
        #[arg(long, default_value = "json")]
        format: String,
        /// Monte-Carlo seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Monte-Carlo event count.
        #[arg(long, default_value_t = 1_000_000)]
        events: u64,
        /// Server count for the Monte-Carlo test.
        #[arg(long, default_value_t = 1)]
        servers: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(args: Args) -> npqueue::Result<bool> {
    match args.command {
        Command::Marginal { r, nu, nmax, method, format, out } => {
            let params = ModelParams::new(r, nu)?;
            cli::run_marginal(&params, nmax, &method, format.parse()?, out.as_deref())?;
            Ok(true)
        }
        Command::Joint { r, nu, nmax, mmax, method, logmap, format, out } => {
            let params = ModelParams::new(r, nu)?;
            cli::run_joint(&params, nmax, mmax, &method, logmap, format.parse()?, out.as_deref())?;
            Ok(true)
        }
        Command::Asymptote { r, nu, nmin, nmax, format, out } => {
            let params = ModelParams::new(r, nu)?;
            cli::run_asymptote(&params, nmin, nmax, format.parse()?, out.as_deref())?;
            Ok(true)
        }
        Command::Validate {
            r,
            nu,
            tests,
            method,
            nlim,
            plim,
            format,
            seed,
            events,
            servers,
            out,
        } => {
            let defaults = ValidateOpts::default();
            let format: OutputFormat = format.parse()?;
            let opts = ValidateOpts {
                rs: r.as_deref().map(cli::parse_float_list).transpose()?.unwrap_or(defaults.rs),
                nus: nu.as_deref().map(cli::parse_float_list).transpose()?.unwrap_or(defaults.nus),
                tests: cli::parse_tests(&tests)?,
                methods: cli::parse_methods(&method)?,
                n_lim: nlim,
                p_lim: plim,
                seed,
                events,
                servers,
            };
            cli::run_validate(&opts, format, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("npqueue: validation failed (at least one record below threshold)");
            ExitCode::from(1)
        }
        Err(err @ (Error::Domain(_) | Error::Degenerate(_) | Error::MissingServerCount)) => {
            eprintln!("npqueue: {err}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("npqueue: {err}");
            ExitCode::from(1)
        }
    }
}
