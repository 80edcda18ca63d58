use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use oma_cli::commands::{campaign, read_frequency_table};
use oma_cli::{
    cmd_logdec, cmd_peaks, cmd_report, cmd_scale, cmd_simulate, cmd_spectrum, cmd_ssi,
    load_scenario,
};
use oma_cli::{AnalysisConfig, Settings};
use oma_core::decay::DecayTarget;
use oma_core::similitude::{round_to, LabeledFrequency};
use oma_core::simulator::{lillebaelt_default, Scenario};
use oma_core::spectral::Window;

#[derive(Parser)]
#[command(
    name = "oma",
    version,
    about = "Modal analysis of scale-model vibration records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Noise seed for simulate (overrides the scenario file).
    #[arg(long)]
    seed: Option<u64>,
    /// Analysis band in Hz.
    #[arg(long, value_name = "LO,HI", value_parser = parse_pair)]
    band: Option<[f64; 2]>,
    /// Model orders of the SSI sweep.
    #[arg(long, value_name = "MIN,MAX,STEP", value_parser = parse_orders)]
    orders: Option<[usize; 3]>,
    /// Periods between the two peaks of the log decrement.
    #[arg(long)]
    n_periods: Option<u32>,
    /// Geometry scale factor; the frequency factor is 1/sqrt(fl).
    #[arg(long, conflicts_with = "ff")]
    fl: Option<f64>,
    /// Frequency scale factor used as given.
    #[arg(long)]
    ff: Option<f64>,
    /// JSON file whose entries override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn settings(&self, extra: AnalysisConfig) -> Result<Settings> {
        let flags = AnalysisConfig {
            band: self.band,
            orders: self.orders,
            n_periods: self.n_periods,
            fl: self.fl,
            ff: self.ff,
            seed: self.seed,
            ..extra
        };
        let file = self
            .config
            .as_deref()
            .map(AnalysisConfig::load)
            .transpose()?;
        Settings::resolve(flags, file)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// One drop test on the reference model.
    Impulse,
    /// One servo test on the reference model.
    Servo,
    /// Six drop tests and one servo test per reference mode.
    Campaign,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    Rectangular,
    Hann,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic records.
    Simulate {
        /// Scenario JSON file.
        #[arg(long, conflicts_with = "preset")]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Drop position (impulse preset) in m.
        #[arg(long)]
        position: Option<f64>,
        /// Drive frequency (servo preset) in Hz.
        #[arg(long)]
        drive_frequency: Option<f64>,
        /// Record duration (impulse preset) in s.
        #[arg(long)]
        duration: Option<f64>,
        /// File name stem of the record.
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Amplitude spectra of records.
    Spectrum {
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum)]
        window: Option<WindowArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Spectral peaks and their statistics over several records.
    Peaks {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        prominence: Option<f64>,
        #[arg(long)]
        max_peaks: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Stochastic subspace identification with a stabilization diagram.
    Ssi {
        inputs: Vec<PathBuf>,
        /// Analyse the whole record even if it has a free-decay part.
        #[arg(long)]
        whole_record: bool,
        #[arg(long)]
        hankel_rows: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Damping by logarithmic decrement over a set of repeated records.
    Logdec {
        inputs: Vec<PathBuf>,
        /// Target mode, e.g. f_b1=2.263; defaults to the mode nearest the drive frequency.
        #[arg(long, value_name = "LABEL=HZ", value_parser = parse_labeled)]
        target: Option<LabeledFrequency>,
        #[command(flatten)]
        common: Common,
    },
    /// Convert model frequencies to full scale.
    Scale {
        /// Model frequency, repeatable.
        #[arg(long = "freq", value_name = "LABEL=HZ", value_parser = parse_labeled)]
        frequencies: Vec<LabeledFrequency>,
        /// Frequency table with label and mean_hz columns.
        #[arg(long, conflicts_with = "frequencies")]
        table: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Full analysis of a directory of records.
    Report {
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    v.try_into().map_err(|_| "expected LO,HI".to_string())
}

fn parse_orders(s: &str) -> Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    v.try_into()
        .map_err(|_| "expected MIN,MAX,STEP".to_string())
}

fn parse_labeled(s: &str) -> Result<LabeledFrequency, String> {
    let (label, f) = s.split_once('=').ok_or("expected LABEL=HZ")?;
    let f: f64 = f.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(LabeledFrequency::new(label.trim(), f))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate {
            scenario,
            preset,
            position,
            drive_frequency,
            duration,
            name,
            common,
        } => {
            let seed_override = common.settings(AnalysisConfig::default())?.seed;
            let jobs: Vec<(String, Scenario)> = match (scenario, preset) {
                (Some(path), _) => {
                    let mut s = load_scenario(&path)?;
                    if common.seed.is_some() {
                        s.seed = seed_override;
                    }
                    let stem = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    vec![(name.unwrap_or(stem), s)]
                }
                (None, Some(Preset::Impulse)) => {
                    let x = position.unwrap_or(0.4 * lillebaelt_default().model.span_length);
                    let s = Scenario::reference_impulse(x, duration.unwrap_or(90.0), seed_override);
                    vec![(name.unwrap_or_else(|| "impulse".into()), s)]
                }
                (None, Some(Preset::Servo)) => {
                    let f = drive_frequency.ok_or_else(|| {
                        anyhow!("--drive-frequency is required for the servo preset")
                    })?;
                    vec![(
                        name.unwrap_or_else(|| "servo".into()),
                        Scenario::reference_servo(f, seed_override),
                    )]
                }
                (None, Some(Preset::Campaign)) => campaign(seed_override),
                (None, None) => bail!("give --scenario PATH or --preset"),
            };
            for (name, s) in jobs {
                let path = cmd_simulate(&s, &common.out, &name)?;
                println!("{}", path.display());
            }
            Ok(true)
        }
        Command::Spectrum {
            inputs,
            window,
            common,
        } => {
            let window = window.map(|w| match w {
                WindowArg::Rectangular => Window::Rectangular,
                WindowArg::Hann => Window::Hann,
            });
            let settings = common.settings(AnalysisConfig {
                window,
                ..Default::default()
            })?;
            for p in cmd_spectrum(&inputs, &common.out, &settings)? {
                println!("{}", p.display());
            }
            Ok(true)
        }
        Command::Peaks {
            inputs,
            prominence,
            max_peaks,
            common,
        } => {
            let settings = common.settings(AnalysisConfig {
                prominence,
                max_peaks,
                ..Default::default()
            })?;
            let stats = cmd_peaks(&inputs, &common.out, &settings)?;
            for m in &stats.modes {
                match (m.mean, m.std_dev) {
                    (Some(mean), Some(sd)) => println!(
                        "{:<8} {:.3} Hz  std {:.3} Hz  n {}",
                        m.label, mean, sd, m.count
                    ),
                    _ => println!("{:<8} not found", m.label),
                }
            }
            let complete = stats.missing().next().is_none();
            Ok(complete)
        }
        Command::Ssi {
            inputs,
            whole_record,
            hankel_rows,
            common,
        } => {
            let settings = common.settings(AnalysisConfig {
                hankel_rows,
                ..Default::default()
            })?;
            for (path, o) in
                inputs
                    .iter()
                    .zip(cmd_ssi(&inputs, &common.out, &settings, whole_record)?)
            {
                println!("{}", path.display());
                for m in &o.modes.modes {
                    println!(
                        "  {:.3} Hz  zeta {:.2} %  support {}",
                        m.frequency,
                        100.0 * m.damping_ratio,
                        m.support
                    );
                }
            }
            Ok(true)
        }
        Command::Logdec {
            inputs,
            target,
            common,
        } => {
            let settings = common.settings(AnalysisConfig::default())?;
            let target = target.map(|t| DecayTarget::new(t.label, t.frequency));
            let est = cmd_logdec(&inputs, &common.out, &settings, target)?;
            for c in &est.per_channel {
                println!(
                    "{:<8} Lambda {:.5}  zeta {:.3} %",
                    c.channel,
                    c.decrement,
                    100.0 * c.zeta
                );
            }
            for r in &est.rejected {
                eprintln!("skipped {}: {}", r.channel, r.reason);
            }
            println!(
                "{} mean zeta {:.3} %",
                est.mode_label,
                100.0 * est.mean_zeta
            );
            Ok(true)
        }
        Command::Scale {
            frequencies,
            table,
            common,
        } => {
            let settings = common.settings(AnalysisConfig::default())?;
            let freqs = match table {
                Some(t) => Some(read_frequency_table(&t)?),
                None if !frequencies.is_empty() => Some(frequencies),
                None => None,
            };
            let rows = cmd_scale(freqs, &common.out, &settings)?;
            println!(
                "F_f = {} (1/sqrt(F_l) = {:.6})",
                settings.law.frequency_factor,
                settings.law.derived_factor()
            );
            for r in &rows {
                let reference = r
                    .reference_hz
                    .map(|f| format!("{f:.3}"))
                    .unwrap_or_else(|| "-".into());
                println!(
                    "{:<8} {:.3} Hz -> {:.3} Hz  reference {reference}",
                    r.label,
                    r.model_hz,
                    round_to(r.full_scale_hz, 3)
                );
            }
            Ok(true)
        }
        Command::Report { dir, common } => {
            let settings = common.settings(AnalysisConfig::default())?;
            let summary = cmd_report(&dir, &common.out, &settings)
                .with_context(|| format!("report on {}", dir.display()))?;
            for note in &summary.skipped {
                eprintln!("skipped {note}");
            }
            for (what, why) in &summary.failures {
                eprintln!("failed: {what}: {why}");
            }
            println!("{}", common.out.join("report.txt").display());
            Ok(summary.ok())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
