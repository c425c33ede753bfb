use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use framedisc::config::{ExperimentConfig, Overrides};
use framedisc::run::{emit_constants, run_discretize, run_selector_bench};
use framedisc_core::discretize::Mode;

#[derive(Parser)]
#[command(
    name = "framedisc",
    version,
    about = "Uniform discretization of continuous frames"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Fixed separation radius (skips the adaptive sweep).
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Worker threads for selector benchmarks (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on a config.
    Discretize,
    /// Random-family sweep of the binary selector.
    SelectorBench,
    /// Closed-form constants for a config.
    Constants,
    /// Run a built-in demo config.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Theory,
    Practical,
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoName {
    Gabor,
    Wavelet,
    Exponential,
    Sinc,
}

impl DemoName {
    fn as_str(self) -> &'static str {
        match self {
            DemoName::Gabor => "gabor",
            DemoName::Wavelet => "wavelet",
            DemoName::Exponential => "exponential",
            DemoName::Sinc => "sinc",
        }
    }
}

fn load(cli: &Cli, demo: Option<DemoName>) -> Result<ExperimentConfig> {
    let mut cfg = match (demo, &cli.config) {
        (Some(d), None) => ExperimentConfig::demo(d.as_str())?,
        (_, Some(path)) => ExperimentConfig::load(path)?,
        (None, None) => bail!("--config is required"),
    };
    cfg.apply(&Overrides {
        seed: cli.seed,
        mode: cli.mode.map(|m| match m {
            ModeArg::Theory => Mode::Theory,
            ModeArg::Practical => Mode::Practical,
        }),
        epsilon: cli.epsilon,
        r: cli.r,
        out: cli.out.as_ref().map(|p| p.display().to_string()),
    })?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    let (cfg, artifacts, default_out) = match &cli.command {
        Command::Discretize => {
            let cfg = load(cli, None)?;
            let a = run_discretize(&cfg)?;
            (cfg, a, "out".to_string())
        }
        Command::SelectorBench => {
            let cfg = match &cli.config {
                Some(_) => load(cli, None)?,
                None => load(cli, Some(DemoName::Exponential))?,
            };
            let a = run_selector_bench(&cfg, cli.workers)?;
            (cfg, a, "out/selector-bench".to_string())
        }
        Command::Constants => {
            let cfg = load(cli, None)?;
            let a = emit_constants(&cfg)?;
            (cfg, a, "out/constants".to_string())
        }
        Command::Demo { name } => {
            let cfg = load(cli, Some(*name))?;
            let a = run_discretize(&cfg)?;
            (cfg, a, format!("out/{}", name.as_str()))
        }
    };
    let dir = PathBuf::from(cfg.output.clone().unwrap_or(default_out));
    artifacts.write(&dir)?;
    print!("{}", artifacts.summary);
    println!("artifacts: {}", dir.display());
    Ok(artifacts.verdict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
