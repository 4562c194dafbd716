//! `cbs sweep` writes averaged observables on a parameter grid as CSV;
//! `cbs verify` runs the verification checks.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cbs_core::average::AverageMode;
use cbs_core::channels::Channel;
use cbs_core::sweep::{linspace, resolve_jobs, run_sweep, saturation_grid, write_csv, DriveAxis, Preset, SweepError, JOBS_ENV};
use cbs_core::verify::{select, VerifyOptions};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "cbs", version, about = "Coherent backscattering from two driven atoms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Averaged intensities and enhancement factors on a grid, as CSV.
    Sweep(SweepArgs),
    /// Run the verification checks; exit 1 if any fails.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Phase,
    Radial,
}

#[derive(Args)]
struct SweepArgs {
    /// Start from a named grid; other flags override it.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Channels (hparh, linperplin, hperph, linparlin, scalar).
    #[arg(long, value_delimiter = ',')]
    channel: Vec<Channel>,
    #[arg(long)]
    s_min: Option<f64>,
    #[arg(long)]
    s_max: Option<f64>,
    #[arg(long)]
    s_points: Option<usize>,
    /// Logarithmic saturation grid (linear otherwise).
    #[arg(long)]
    s_log: bool,
    /// Rabi frequencies in units of γ, instead of a saturation grid.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["s_min", "s_max", "s_points", "s_log"])]
    rabi: Vec<f64>,
    /// Detunings in units of γ.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    delta: Vec<f64>,
    /// Largest detection angle from backscattering, in radians.
    #[arg(long)]
    theta_max: Option<f64>,
    #[arg(long, default_value_t = 1)]
    theta_points: usize,
    /// Mean interatomic distance times k.
    #[arg(long)]
    kl: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Gauss-Legendre nodes in cos(theta); the same number of azimuthal nodes.
    #[arg(long)]
    nodes_angular: Option<usize>,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = JOBS_ENV)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated check numbers, names or tags.
    #[arg(long)]
    only: Option<String>,
    /// Imbalance between the two exchange directions (negative control).
    #[arg(long, default_value_t = 0.0)]
    asymmetry: f64,
    /// Print every comparison.
    #[arg(long, short)]
    verbose: bool,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("cbs: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn sweep(args: SweepArgs) -> ExitCode {
    let preset = args.preset.map(|p| match p {
        PresetArg::Fig2 => Preset::Fig2,
        PresetArg::Fig3 => Preset::Fig3,
        PresetArg::Fig4 => Preset::Fig4,
        PresetArg::Fig5 => Preset::Fig5,
    });
    let mut spec = preset.unwrap_or(Preset::Fig2).spec();
    spec.label = preset.map_or("custom", Preset::name).to_string();
    if !args.channel.is_empty() {
        spec.channels = args.channel.clone();
    }
    if !args.rabi.is_empty() {
        spec.drive = DriveAxis::Rabi(args.rabi.clone());
    } else if args.s_min.is_some() || args.s_max.is_some() || args.s_points.is_some() || args.s_log {
        let grid = saturation_grid(
            args.s_min.unwrap_or(1e-2),
            args.s_max.unwrap_or(1e2),
            args.s_points.unwrap_or(41),
            args.s_log,
        );
        match grid {
            Ok(g) => spec.drive = DriveAxis::Saturation(g),
            Err(e) => return usage(e),
        }
    }
    if !args.delta.is_empty() {
        spec.deltas = args.delta.clone();
    }
    if let Some(max) = args.theta_max {
        if args.theta_points == 0 {
            return usage("--theta-points must be at least 1");
        }
        spec.average.thetas = linspace(0.0, max, args.theta_points);
    }
    if let Some(kl) = args.kl {
        spec.average.kl = kl;
    }
    if let Some(mode) = args.mode {
        spec.average.mode = match mode {
            ModeArg::Phase => AverageMode::Phase,
            ModeArg::Radial => AverageMode::Radial,
        };
    }
    if let Some(n) = args.nodes_angular {
        spec.average.angular_nodes = n;
    }
    if let Err(e) = spec.validate() {
        return usage(e);
    }

    let points = match run_sweep(&spec, resolve_jobs(args.jobs)) {
        Ok(p) => p,
        Err(e @ SweepError::Spec(_)) => return usage(e),
        Err(e) => {
            eprintln!("cbs: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    };
    let written = match &args.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            write_csv(&mut w, &spec, &points)?;
            w.flush()
        }),
        None => {
            let mut w = io::stdout().lock();
            write_csv(&mut w, &spec, &points).and_then(|()| w.flush())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cbs: writing output: {e}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

fn verify(args: VerifyArgs) -> ExitCode {
    let checks = select(args.only.as_deref());
    if checks.is_empty() {
        return usage(format!("no check matches {:?}", args.only.unwrap_or_default()));
    }
    let opts = VerifyOptions { asymmetry: args.asymmetry, ..Default::default() };
    let mut failed = 0;
    for check in &checks {
        let report = check.run(&opts);
        println!("{}", report.line());
        if args.verbose || !report.passed {
            for d in &report.details {
                println!("      {d}");
            }
        }
        failed += usize::from(!report.passed);
    }
    println!("verify: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Verify(args) => verify(args),
    }
}
