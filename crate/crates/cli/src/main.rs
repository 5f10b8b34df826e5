use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lds_cpd::config::FileConfig;
use lds_cpd::harness::{run_experiment, write_outputs, ExperimentConfig};
use lds_cpd::{run_detector, simulate, Trajectory};

#[derive(Parser)]
#[command(
    name = "lds-cpd",
    version,
    about = "Online change-point detection for linear dynamical systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured system and write the trajectory as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the detector over a trajectory CSV.
    Detect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte Carlo experiment and write tables, figure data and bounds.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the UAV experiment with its default settings.
    ReproduceUav {
        #[arg(long, default_value_t = 2023)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
        Command::Detect { config, traj, out } => cmd_detect(&config, &traj, &out),
        Command::Experiment { config, out_dir } => FileConfig::load(&config)
            .and_then(|c| c.experiment_config())
            .map_err(Into::into)
            .and_then(|cfg| cmd_experiment(&cfg, &out_dir)),
        Command::ReproduceUav { seed, out_dir } => {
            cmd_experiment(&ExperimentConfig::uav_defaults(seed), &out_dir)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_simulate(config: &Path, out: &Path) -> CliResult {
    let cfg = FileConfig::load(config)?;
    let (schedule, noise) = cfg.schedule_and_noise()?;
    let (horizon, x0) = cfg.simulation(schedule.state_dim())?;
    let traj = simulate(&schedule, &noise, horizon, &x0)?;
    traj.write_csv(BufWriter::new(File::create(out)?))?;
    Ok(())
}

fn cmd_detect(config: &Path, traj: &Path, out: &Path) -> CliResult {
    let cfg = FileConfig::load(config)?.detector_config()?;
    let traj = Trajectory::read_csv(File::open(traj)?)?;
    let report = run_detector(&traj, &cfg)?;
    report.write_csv(BufWriter::new(File::create(out)?))?;
    let flags = report.flagged();
    println!(
        "{} steps monitored, {} flagged: {:?}",
        report.records.len(),
        flags.len(),
        flags
    );
    Ok(())
}

fn cmd_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult {
    let report = run_experiment(cfg)?;
    write_outputs(cfg, &report, out_dir)?;
    print!("{}", lds_cpd::harness::emit_table(&report).text);
    Ok(())
}
