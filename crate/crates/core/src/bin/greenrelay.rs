use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use greenrelay::experiments::{self, RunOptions, Table};
use greenrelay::scenario::Scenario;
use greenrelay::{Error, Result};

/// Cognitive relaying with opportunistic harvesting: closed forms, Monte Carlo
/// checks and sensing-time optimization.
#[derive(Parser, Debug)]
#[command(name = "greenrelay", version)]
struct Cli {
    /// Scenario file (TOML) applied on top of the defaults or preset.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Start from a named preset (fig3, fig4, fig6, fig7, fig8, table1).
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Override one key, e.g. `--set links.d_p1=0.6` or `--set "secondary.lambda=5 dB"`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    #[arg(long, global = true, value_name = "N")]
    trials: Option<u64>,

    /// CSV destination; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Skip Monte Carlo columns.
    #[arg(long, global = true)]
    no_mc: bool,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reproduce a figure or the sensing-time table.
    Figure {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(experiments::FIGURES))]
        name: String,
    },
    /// Compare every closed form with its simulation; exits 1 if any |z| > 4.
    Validate,
    /// Minimize frame energy subject to a data target.
    Optimize {
        /// Data target in bits per frame (overrides timing.d_star).
        #[arg(long, value_name = "BITS")]
        d_star: Option<f64>,
    },
    /// Detection probability.
    Detect,
    /// Outage probability.
    Outage,
    /// Average harvested power per node.
    Harvest,
    /// Frame energy and consumption gain.
    Energy,
}

fn overrides(cli: &Cli) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for item in &cli.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("`--set {item}` is not KEY=VALUE")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(seed) = cli.seed {
        out.push(("run.seed".into(), seed.to_string()));
    }
    if let Some(trials) = cli.trials {
        out.push(("run.trials".into(), trials.to_string()));
    }
    if let Command::Optimize { d_star: Some(d) } = &cli.command {
        out.push(("timing.d_star".into(), format!("{d:e}")));
    }
    Ok(out)
}

fn emit(table: &Table, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => table.write_csv(BufWriter::new(File::create(path)?)),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write_csv(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let config = cli.config.as_ref().map(std::fs::read_to_string).transpose()?;
    let preset = match &cli.command {
        Command::Figure { name } => Some(name.as_str()),
        _ => cli.preset.as_deref(),
    };
    let scenario = Scenario::build(preset, config.as_deref(), &overrides(cli)?)?;
    let opts = RunOptions::from_scenario(&scenario, !cli.no_mc);
    let table = match &cli.command {
        Command::Figure { name } => experiments::figure(name, &scenario, opts)?,
        Command::Validate => experiments::validate(&scenario, opts)?,
        Command::Optimize { .. } => experiments::optimize(&scenario)?,
        Command::Detect => experiments::detect(&scenario, opts)?,
        Command::Outage => experiments::outage(&scenario, opts)?,
        Command::Harvest => experiments::harvest(&scenario, opts)?,
        Command::Energy => experiments::energy(&scenario, opts)?,
    };
    emit(&table, cli.out.as_ref())?;
    if matches!(cli.command, Command::Validate) {
        return Ok(experiments::all_passed(&table));
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed: at least one |z| exceeds {}", experiments::VALIDATE_Z);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
