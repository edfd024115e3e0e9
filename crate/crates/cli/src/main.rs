//! `claimsim` command-line tool.
//!
//! ```bash
//! claimsim simulate --preset default --seed 7 --out run1
//! claimsim report --in run1
//! claimsim triangle --in run1 --factor 4 --kind cum
//! claimsim chainladder --triangle run1/triangle.csv
//! claimsim depend --in run1
//! ```

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use claimsim::aggregation::{build_triangle, past_triangle, reaggregate, OutOfBoundsMode, TriangleKind};
use claimsim::chainladder::{fit_chain_ladder, project, Grouping};
use claimsim::scenario::output::{
    check_outputs, dependency_for, read_config, read_triangle, report_for, write_dependency_table,
    write_reserve_report, write_triangle,
};
use claimsim::scenario::{
    emit_outputs, load_config, preset, read_dataset, write_dataset, Scenario, ScenarioConfig,
};
use claimsim::{Error, Result};

#[derive(Parser)]
#[command(name = "claimsim", version, about = "Individual claim simulator and chain-ladder checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Cap,
    Tail,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Incr,
    Cum,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write datasets plus reports.
    #[command(group(ArgGroup::new("source").required(true).args(["config", "preset"])))]
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = ["default", "simple"])]
        preset: Option<String>,
        /// Overrides the master seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the reserve report for a simulated dataset.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// Occurrence-period groups, e.g. "1-10,11-20,21".
        #[arg(long)]
        grouping: Option<String>,
    },
    /// Print a triangle built from a simulated dataset.
    Triangle {
        #[arg(long = "in")]
        input: PathBuf,
        /// Periods per coarse period (4 turns quarters into years).
        #[arg(long, default_value_t = 1)]
        factor: usize,
        #[arg(long, value_enum, default_value_t = Mode::Cap)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Kind::Incr)]
        kind: Kind,
        /// Include future payment periods (the full square).
        #[arg(long)]
        full: bool,
    },
    /// Chain-ladder factors and reserves for a triangle CSV.
    Chainladder {
        #[arg(long)]
        triangle: PathBuf,
    },
    /// Print the payment-size dependency table.
    Depend {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_source(config: Option<&Path>, name: Option<&str>) -> Result<ScenarioConfig> {
    match (config, name) {
        (Some(path), _) => load_config(path),
        (None, Some(name)) => preset(name),
        (None, None) => Err(Error::Argument("one of --config or --preset is required".into())),
    }
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    match cli.command {
        Command::Simulate {
            config,
            preset,
            seed,
            out,
            threads,
        } => {
            let mut config = load_source(config.as_deref(), preset.as_deref())?;
            if let Some(seed) = seed {
                config.global.master_seed = seed;
            }
            let start = Instant::now();
            let dataset = Scenario::from_config(&config)?.simulate(None, threads)?;
            let elapsed = start.elapsed().as_secs_f64();
            let manifest = write_dataset(&out, &dataset, &config, elapsed)?;
            emit_outputs(&out, &dataset, &config)?;
            writeln!(
                stdout.lock(),
                "{} claims, {} payments, seed {} -> {}",
                manifest.claims_rows,
                manifest.payments_rows,
                manifest.master_seed,
                out.display()
            )?;
        }
        Command::Report { input, grouping } => {
            let config = read_config(&input)?;
            let dataset = read_dataset(&input)?;
            check_outputs(&input)?;
            let grouping = grouping.map(|g| g.parse::<Grouping>()).transpose()?;
            let report = report_for(&dataset, &config, grouping.as_ref())?;
            write_reserve_report(stdout.lock(), &report, config.output.monetary_unit)?;
        }
        Command::Triangle {
            input,
            factor,
            mode,
            kind,
            full,
        } => {
            let config = read_config(&input)?;
            let dataset = read_dataset(&input)?;
            let periods = config.global.periods;
            let tri = if full {
                let mode = match mode {
                    Mode::Cap => OutOfBoundsMode::Cap,
                    Mode::Tail => OutOfBoundsMode::Tail,
                };
                build_triangle(&dataset.payments, periods, mode, TriangleKind::Incremental)?
            } else {
                past_triangle(&dataset.payments, periods, TriangleKind::Incremental)?
            };
            let kind = match kind {
                Kind::Incr => TriangleKind::Incremental,
                Kind::Cum => TriangleKind::Cumulative,
            };
            write_triangle(stdout.lock(), &reaggregate(&tri, factor)?.with_kind(kind))?;
        }
        Command::Chainladder { triangle } => {
            let tri = read_triangle(&triangle)?;
            let factors = fit_chain_ladder(&tri)?;
            let projection = project(&tri, &factors)?;
            let mut out = stdout.lock();
            writeln!(out, "period,latest,factor_to_next,ultimate,reserve")?;
            for i in 0..tri.size() {
                let f = factors.factors.get(i).map_or(String::new(), f64::to_string);
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    i + 1,
                    projection.latest[i],
                    f,
                    projection.ultimates[i],
                    projection.reserves[i]
                )?;
            }
            writeln!(out, "Total,,,,{}", projection.total_reserve())?;
        }
        Command::Depend { input } => {
            let config = read_config(&input)?;
            let dataset = read_dataset(&input)?;
            write_dependency_table(stdout.lock(), &dependency_for(&dataset, &config)?, config.output.monetary_unit)?;
        }
    }
    Ok(())
}
