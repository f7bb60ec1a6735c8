use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cpi_lab::engine::ScanKind;
use cpi_lab::materials::MaterialRegistry;
use cpi_lab::scanio::{self, OutputOptions, RunSummary, ScenarioConfig};
use cpi_lab::{Error, Result};

/// Chirped-pulse interferometry simulator and scan analysis.
#[derive(Parser)]
#[command(name = "cpi-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every mode listed in a scenario.
    Simulate(RunArgs),
    /// Artifact visibility against operating wavelength.
    Sweep(RunArgs),
    /// Sum-frequency spectrogram and its filtered scan.
    Spectrogram(RunArgs),
    /// Detect and report features of a scan CSV.
    Analyze {
        scan: PathBuf,
        #[command(flatten)]
        out: OutArgs,
        /// Scan kind for files without a header (CPI, WLI, QOCT).
        #[arg(long)]
        kind: Option<String>,
        #[arg(long = "lambda0-nm")]
        lambda0_nm: Option<f64>,
    },
    /// Material catalogue.
    Materials {
        #[command(subcommand)]
        command: MaterialsCommand,
    },
}

#[derive(Subcommand)]
enum MaterialsCommand {
    List,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario name.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    scenario: Option<String>,
    /// Scenario config file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
    /// Override the operating wavelength.
    #[arg(long = "lambda0-nm")]
    lambda0_nm: Option<f64>,
}

impl OutArgs {
    fn options(&self) -> OutputOptions {
        OutputOptions {
            out_dir: self.out.clone(),
            plot: self.plot,
        }
    }
}

impl RunArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let cfg = match (&self.scenario, &self.config) {
            (Some(name), _) => scanio::preset(name)?,
            (None, Some(path)) => ScenarioConfig::from_path(path)?,
            (None, None) => unreachable!("clap requires one of the two"),
        };
        match self.lambda0_nm {
            Some(l) => {
                let cfg = cfg.with_lambda0(l);
                cfg.validate()?;
                Ok(cfg)
            }
            None => Ok(cfg),
        }
    }
}

fn print(summary: &RunSummary) {
    for line in &summary.lines {
        println!("{line}");
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => print(&scanio::simulate(&a.load()?, &a.out.options())?),
        Command::Sweep(a) => print(&scanio::sweep(&a.load()?, &a.out.options())?),
        Command::Spectrogram(a) => print(&scanio::spectrogram(&a.load()?, &a.out.options())?),
        Command::Analyze {
            scan,
            out,
            kind,
            lambda0_nm,
        } => {
            let kind = kind
                .map(|k| {
                    ScanKind::parse(&k)
                        .ok_or_else(|| Error::Config {
                            path: "--kind".into(),
                            message: format!("unknown scan kind `{k}`"),
                        })
                })
                .transpose()?;
            print(&scanio::analyze(&scan, kind, lambda0_nm, &out.options())?)
        }
        Command::Materials {
            command: MaterialsCommand::List,
        } => {
            for m in MaterialRegistry::builtin().iter() {
                let (lo, hi) = m.validity_um();
                println!("{:<14} {:>6.3}-{:<6.3} um", m.name(), lo, hi);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            let detail: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("error: {}", detail.join(" ").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
