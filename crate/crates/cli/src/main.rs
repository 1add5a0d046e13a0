use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use cyclotactor::harness::{analyze_trace, calibrate, latency_report, run_scenario, GestureScript, Trace};
use cyclotactor::synth::{spectrogram, write_wav};
use cyclotactor::{CalibrationTable, DeviceConfig, Error};

#[derive(Parser)]
#[command(name = "cyclotactor", version, about = "Closed-loop tactile I/O simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure rigid and loose reference amplitudes across nearness.
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Grid points; defaults to `calibration_points` from the config.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Run a gesture script through the loop.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        gesture: PathBuf,
        /// Without a table the rigidity column carries raw amplitude.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        wav: Option<PathBuf>,
        /// Magnitude spectrogram CSV (1024-sample Hann window, hop 256).
        #[arg(long)]
        spectrogram: Option<PathBuf>,
    },
    /// Rigidity peaks and nearness/pitch correlation of a trace.
    Analyze {
        #[arg(long)]
        trace: PathBuf,
        /// Needed for the warm-up length and rates when not the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check the latency and vibrotactile bandwidth budget; exits 1 on any FAIL.
    Latency {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Serve live sessions over WebSocket at ws://HOST:PORT/ws.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

const EXIT_CONSTRAINT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_FAULT: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::SimulationFault { .. }
            | Error::OverTemperature { .. }
            | Error::Calibration { .. }
            | Error::ModelDirection { .. }
            | Error::DegenerateCalibration { .. },
        ) => EXIT_FAULT,
        _ => EXIT_USAGE,
    }
}

fn load_config(path: Option<&Path>) -> Result<DeviceConfig> {
    match path {
        None => Ok(DeviceConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let cfg = DeviceConfig::parse(&text)?;
            Ok(cfg)
        }
    }
}

fn load_table(path: Option<&Path>) -> Result<Option<CalibrationTable>> {
    path.map(|p| -> Result<CalibrationTable> {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        Ok(CalibrationTable::from_csv(&text)?)
    })
    .transpose()
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Calibrate { config, out, points } => {
            let cfg = load_config(config.as_deref())?;
            let table = calibrate(&cfg, points.unwrap_or(cfg.calibration_points as usize))?;
            fs::write(&out, table.to_csv()).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("wrote {} calibration points to {}", table.len(), out.display());
        }
        Command::Run { config, gesture, table, seed, trace, wav, spectrogram: spec_out } => {
            let cfg = load_config(config.as_deref())?;
            let text = fs::read_to_string(&gesture).with_context(|| format!("reading {}", gesture.display()))?;
            let script = GestureScript::parse(&text, cfg.sensor_range_mm)?;
            let table = load_table(table.as_deref())?;
            if table.is_none() {
                eprintln!("no calibration table: rigidity column holds raw amplitude (mm)");
            }
            let (tr, audio) = run_scenario(&cfg, &script, table, seed)?;
            if let Some(p) = trace {
                fs::write(&p, tr.to_csv()).with_context(|| format!("writing {}", p.display()))?;
            }
            if let Some(p) = wav {
                write_wav(&p, &audio, cfg.audio_rate_hz as u32)?;
            }
            if let Some(p) = spec_out {
                let s = spectrogram(&audio, cfg.audio_rate_hz, 1024, 256)?;
                fs::write(&p, s.to_csv()).with_context(|| format!("writing {}", p.display()))?;
            }
            eprintln!("{} trace rows, {} audio samples", tr.len(), audio.len());
        }
        Command::Analyze { trace, config } => {
            let cfg = load_config(config.as_deref())?;
            let text = fs::read_to_string(&trace).with_context(|| format!("reading {}", trace.display()))?;
            let tr = Trace::from_csv(&text, cfg.nearness_window()?, cfg.sensor_rate_hz, cfg.audio_rate_hz)?;
            let f = analyze_trace(&tr)?;
            println!("rows {}", tr.len());
            println!("peaks {}", f.peaks.len());
            for p in &f.peaks {
                println!("peak t={:.4} s rigidity={:.4}", p.time, p.value);
            }
            match f.sweep_correlation {
                Some(c) => println!("sweep_correlation {c:.6}"),
                None => println!("sweep_correlation undefined"),
            }
        }
        Command::Latency { config } => {
            let cfg = load_config(config.as_deref())?;
            let report = latency_report(&cfg);
            print!("{report}");
            if !report.all_pass() {
                return Ok(EXIT_CONSTRAINT);
            }
        }
        Command::Serve { config, table, port, host } => {
            let cfg = load_config(config.as_deref())?;
            let table = load_table(table.as_deref())?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .with_context(|| format!("binding {host}:{port}"))?;
                eprintln!("serving on ws://{}/ws", listener.local_addr()?);
                cyclotactor::service::serve(listener, cfg, table).await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
