use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use merid_cli::commands::Command;
use merid_cli::config::FlagOverrides;
use merid_cli::error::{CliError, CliResult};
use merid_cli::{execute, thread_count};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// decoherence parameters (γ, a, Λ) per source at one diameter
    Rates,
    /// coherence length ξ(t) and its maximum
    Coherence,
    /// d-versus-D feasibility diagram over a diameter sweep
    Diagram,
    /// simulated interference pattern and visibility per model stack
    Interfere,
    /// optomechanical bounds t1_OM(D) and χ_max(D)
    Optomech,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Rates => Command::Rates,
            Cmd::Coherence => Command::Coherence,
            Cmd::Diagram => Command::Diagram,
            Cmd::Interfere => Command::Interfere,
            Cmd::Optomech => Command::Optomech,
        }
    }
}

/// Decoherence, coherence-length, feasibility, interference and optomechanics
/// calculations for double-slit experiments with levitated nanospheres.
///
/// Flags take nm, Torr and K. Config files and --set use SI keys.
#[derive(Parser, Debug)]
#[command(name = "merid", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// flat JSON object of SI keys, or a previous run's manifest.json
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// override one configuration key (SI units)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, value_name = "DIR", default_value = "merid-out")]
    out: PathBuf,
    /// comma-separated: none, air, bb, csl, csl:adler=<mult>, qg, dp, dp-micro:r0=<nm>, k
    #[arg(long, value_name = "LIST")]
    models: Option<String>,
    #[arg(long = "d-nm", value_name = "X")]
    d_nm: Option<f64>,
    #[arg(long = "diameter-nm", value_name = "X")]
    diameter_nm: Option<f64>,
    #[arg(long = "pressure-torr", value_name = "X")]
    pressure_torr: Option<f64>,
    #[arg(long = "tint-k", value_name = "X")]
    tint_k: Option<f64>,
    #[arg(long, value_name = "X")]
    chi: Option<f64>,
}

fn run(cli: Cli) -> CliResult<()> {
    let flags = FlagOverrides {
        set: cli.set,
        models: cli.models,
        d_nm: cli.d_nm,
        diameter_nm: cli.diameter_nm,
        pressure_torr: cli.pressure_torr,
        tint_k: cli.tint_k,
        chi: cli.chi,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    let (paths, summary) =
        pool.install(|| execute(cli.command.into(), cli.config.as_deref(), &flags, &cli.out))?;
    for line in summary {
        println!("{line}");
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("merid: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
