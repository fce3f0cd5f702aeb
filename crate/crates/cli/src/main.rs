//! `slidelock`: configuration-driven runner for the epidemic lockdown
//! control simulator. Subcommands map one-to-one onto the library's
//! scenario engine; every output is a plottable CSV.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use slidelock::config::ScenarioConfig;
use slidelock::error::{Error, Result};
use slidelock::export::{
    write_metrics_csv, write_replay_csv, write_single_metrics_csv, write_trajectory_csv,
};
use slidelock::signal::{ingest_csv, replay_control, scale_to_infected, smooth_and_differentiate};
use slidelock::sweep::{run_grid, run_sweep, vaccination_scenarios, SweepRow};

#[derive(Parser)]
#[command(
    name = "slidelock",
    version,
    about = "Closed-loop lockdown control simulation for SEIR/SAIR/SEAIR epidemics"
)]
struct Cli {
    /// Worker threads for sweeps and grids (default: all cores).
    /// Results are independent of this setting.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Accepted for interface stability; every run is deterministic, so
    /// this flag is reserved and currently unused.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario; writes trajectory.csv, metrics.csv, and the
    /// effective config.
    Simulate {
        /// Scenario TOML file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the sweep in the config's [sweep] section; writes sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scenario per vaccination rate; writes vaccination.csv.
    Vaccinate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated daily rates (population fraction per day);
        /// overrides the config's [vaccinate] rates.
        #[arg(long, value_delimiter = ',')]
        rates: Option<Vec<f64>>,
    },
    /// Replay the switching law on a measured `date,count` series;
    /// writes replay.csv.
    Replay {
        #[arg(long)]
        config: PathBuf,
        /// Input CSV with ISO-8601 dates.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)?;
    let config = ScenarioConfig::from_toml_str(&text)?;
    for warning in config.warnings() {
        eprintln!("warning: {warning}");
    }
    Ok(config)
}

fn write_effective_config(config: &ScenarioConfig, out: &Path) -> Result<()> {
    fs::write(out.join("effective_config.toml"), config.to_toml_string()?)?;
    Ok(())
}

fn report_cell_failures(rows: &[SweepRow<f64>]) -> Result<()> {
    let failures: Vec<&SweepRow<f64>> = rows.iter().filter(|r| r.error.is_some()).collect();
    if failures.is_empty() {
        return Ok(());
    }
    for row in &failures {
        eprintln!(
            "cell {:?} failed: {}",
            row.values,
            row.error.as_deref().unwrap_or("unknown")
        );
    }
    Err(Error::Numerical {
        time: f64::NAN,
        detail: format!("{} sweep cell(s) failed; partial output written", failures.len()),
    })
}

fn cmd_simulate(config_path: &Path, out: &Path) -> Result<()> {
    let config = load_config(config_path)?;
    let scenario = config.to_scenario()?;
    fs::create_dir_all(out)?;
    let (traj, metrics) = scenario.run_with_metrics()?;
    if metrics.insufficient_switches {
        eprintln!("warning: fewer than two switch events after the transient cutoff");
    }
    write_trajectory_csv(
        BufWriter::new(fs::File::create(out.join("trajectory.csv"))?),
        &traj,
    )?;
    write_single_metrics_csv(
        BufWriter::new(fs::File::create(out.join("metrics.csv"))?),
        &metrics,
    )?;
    write_effective_config(&config.effective(), out)?;
    Ok(())
}

fn cmd_sweep(config_path: &Path, out: &Path) -> Result<()> {
    let config = load_config(config_path)?;
    let base = config.to_scenario()?;
    fs::create_dir_all(out)?;

    let (axis_names, rows): (Vec<&str>, Vec<SweepRow<f64>>) =
        if let Some(spec) = config.sweep_spec()? {
            (vec![spec.axis.name()], run_sweep(&base, &spec)?)
        } else if let Some(grid) = config.sweep.as_ref().and_then(|s| s.grid.as_ref()) {
            (
                vec!["gamma", "epsilon"],
                run_grid(
                    &base,
                    (grid.gamma.min, grid.gamma.max),
                    (grid.epsilon.min, grid.epsilon.max),
                    grid.count,
                )?,
            )
        } else {
            return Err(Error::validation("sweep", "config has no [sweep] section"));
        };

    write_metrics_csv(
        BufWriter::new(fs::File::create(out.join("sweep.csv"))?),
        &axis_names,
        &rows,
    )?;
    write_effective_config(&config.effective(), out)?;
    report_cell_failures(&rows)
}

fn cmd_vaccinate(config_path: &Path, out: &Path, rates: Option<Vec<f64>>) -> Result<()> {
    let config = load_config(config_path)?;
    let base = config.to_scenario()?;
    let rates = rates
        .or_else(|| config.vaccinate.as_ref().map(|v| v.rates.clone()))
        .ok_or_else(|| {
            Error::validation("rates", "give --rates or a [vaccinate] section in the config")
        })?;
    let schedule = config.vaccination().ok_or_else(|| {
        Error::validation("vaccination", "vaccinate needs a [vaccination] schedule")
    })?;
    fs::create_dir_all(out)?;

    let outcomes = vaccination_scenarios(&base, &schedule, &rates)?;
    let rows: Vec<SweepRow<f64>> = outcomes
        .into_iter()
        .map(|o| SweepRow {
            values: vec![("vaccination_rate", o.rate)],
            report: o.report,
            error: o.error,
        })
        .collect();
    write_metrics_csv(
        BufWriter::new(fs::File::create(out.join("vaccination.csv"))?),
        &["vaccination_rate"],
        &rows,
    )?;
    write_effective_config(&config.effective(), out)?;
    report_cell_failures(&rows)
}

fn cmd_replay(config_path: &Path, data: &Path, out: &Path) -> Result<()> {
    let config = load_config(config_path)?;
    let replay = config
        .replay
        .as_ref()
        .ok_or_else(|| Error::validation("replay", "config has no [replay] section"))?;
    let kind = config.series_kind()?;
    fs::create_dir_all(out)?;

    let series = ingest_csv(fs::File::open(data)?, kind, replay.population)?;
    if !series.interpolated.is_empty() {
        eprintln!(
            "warning: {} missing day(s) filled by linear interpolation",
            series.interpolated.len()
        );
    }
    let fractions = scale_to_infected(&series, replay.h_factor)?;
    let signal = smooth_and_differentiate(&fractions, replay.window, replay.degree)?;
    let mut controller = config.controller();
    controller.mu = 0.0;
    if let Some(phi) = replay.phi {
        controller.phi = phi;
    }
    let steps = replay_control(&signal, &controller)?;
    write_replay_csv(
        BufWriter::new(fs::File::create(out.join("replay.csv"))?),
        series.start_date,
        &signal,
        &steps,
    )?;
    write_effective_config(&config.effective(), out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate { config, out } => cmd_simulate(config, out),
        Command::Sweep { config, out } => cmd_sweep(config, out),
        Command::Vaccinate { config, out, rates } => {
            cmd_vaccinate(config, out, rates.clone())
        }
        Command::Replay { config, data, out } => cmd_replay(config, data, out),
    }
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1, // bad usage is a validation failure
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build();
    let pool = match pool {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
