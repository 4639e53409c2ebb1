//! `fdm-pon-sim <command> --config <path> --out <dir>`
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 when the
//! simulation itself fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use fdm_pon::config::Config;
use fdm_pon::exec::{self, Execution};
use fdm_pon::experiment;
use fdm_pon::Error;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    SensitivitySweep,
    ChannelSweep,
    LockDemo,
    Spectrum,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::SensitivitySweep => "sensitivity-sweep",
            Command::ChannelSweep => "channel-sweep",
            Command::LockDemo => "lock-demo",
            Command::Spectrum => "spectrum",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fdm-pon-sim", version = env!("FDM_PON_BUILD_ID"), about = "FDM multipoint-to-point optical access simulator")]
struct Cli {
    command: Command,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Root seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Built-in preset, overriding the config's `preset` key.
    #[arg(long)]
    preset: Option<String>,
    /// Worker threads for sweep jobs. 1 runs sequentially; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Serialize)]
struct RunManifest {
    command: String,
    config_path: String,
    schema_version: u32,
    preset: Option<String>,
    seed: u64,
    build_id: String,
    output_dir: String,
    workers: usize,
    runtime_seconds: f64,
    files: Vec<String>,
    warnings: Vec<String>,
}

enum Failure {
    Config(String),
    Simulation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidSpec(_) | Error::InvalidChannel(_) => Failure::Config(e.to_string()),
            other => Failure::Simulation(other.to_string()),
        }
    }
}

fn run_command(cmd: Command, cfg: &Config, out: &Path, mode: Execution) -> Result<(Vec<String>, Vec<String>), Error> {
    match cmd {
        Command::SensitivitySweep => {
            let r = experiment::sensitivity_sweep(cfg, mode)?;
            for s in &r.sensitivities {
                println!("channel {:>3}  BER {:.1e}  sensitivity {:8.3} dBm", s.channel_id, s.threshold, s.sensitivity);
            }
            Ok((experiment::write_sensitivity_sweep(&r, out)?, r.warnings))
        }
        Command::ChannelSweep => {
            let r = experiment::channel_sweep(cfg, mode)?;
            for s in &r.summary {
                println!(
                    "{:<15} BER {:.1e}  mean {:8.3} dBm (linear {:8.3} dBm)  best ch {} {:.3}  worst ch {} {:.3}  spread {:.3} dB",
                    s.variant,
                    s.threshold,
                    s.mean_dbm,
                    s.linear_mean_dbm,
                    s.best_channel,
                    s.best_dbm,
                    s.worst_channel,
                    s.worst_dbm,
                    s.spread_db()
                );
            }
            println!(
                "capacity: {} channels, raw {:.3} Gb/s, net {:.3} Gb/s",
                r.capacity.n_channels,
                r.capacity.aggregate_raw / 1e9,
                r.capacity.aggregate_net / 1e9
            );
            Ok((experiment::write_channel_sweep(&r, out)?, r.warnings))
        }
        Command::LockDemo => {
            let runs = experiment::lock_demo(cfg, mode)?;
            let mut warnings = Vec::new();
            for r in &runs {
                let s = &r.state;
                println!(
                    "detuning {:>6.3} GHz: settled on {} (target {}), locked {}, settle {}",
                    r.detuning / 1e9,
                    s.settled_channel,
                    s.target_channel,
                    s.locked,
                    s.settle_time.map(|t| format!("{:.3} ms", t * 1e3)).unwrap_or_else(|| "-".into())
                );
                if r.mislock {
                    warnings.push(format!(
                        "detuning {} Hz: mislock on channel {} instead of {}",
                        r.detuning, s.settled_channel, s.target_channel
                    ));
                }
            }
            Ok((experiment::write_lock_demo(&runs, out)?, warnings))
        }
        Command::Spectrum => {
            let r = experiment::spectrum(cfg)?;
            Ok((experiment::write_spectrum(&r, out)?, Vec::new()))
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let start = Instant::now();
    let mut cfg = Config::load(&cli.config, cli.preset.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| Failure::Simulation(format!("cannot create {}: {e}", cli.out.display())))?;
    let mode = if cli.workers == 1 { Execution::Sequential } else { Execution::Parallel };
    let (mut files, warnings) = exec::with_workers(cli.workers, || run_command(cli.command, &cfg, &cli.out, mode))?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    std::fs::write(cli.out.join("config.resolved.toml"), cfg.to_toml_string()?)
        .map_err(|e| Failure::Simulation(e.to_string()))?;
    files.push("config.resolved.toml".into());
    files.push("manifest.json".into());
    let manifest = RunManifest {
        command: cli.command.name().into(),
        config_path: cli.config.display().to_string(),
        schema_version: cfg.schema_version,
        preset: cfg.preset.clone(),
        seed: cfg.seed,
        build_id: env!("FDM_PON_BUILD_ID").into(),
        output_dir: cli.out.display().to_string(),
        workers: cli.workers,
        runtime_seconds: start.elapsed().as_secs_f64(),
        files,
        warnings,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Simulation(e.to_string()))?;
    std::fs::write(cli.out.join("manifest.json"), json + "\n").map_err(|e| Failure::Simulation(e.to_string()))?;
    println!("wrote {} files to {} in {:.1} s", manifest.files.len(), cli.out.display(), manifest.runtime_seconds);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Simulation(m)) => {
            eprintln!("simulation error: {m}");
            ExitCode::from(3)
        }
    }
}
