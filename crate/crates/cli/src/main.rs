use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nxcsf::harness::{run_experiment, summarize, Endpoint, ExperimentConfig, HarnessError, SummaryTable};

/// Spiking neural XCSF experiments.
#[derive(Parser)]
#[command(name = "nxcsf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replicate of an experiment.
    Run(RunArgs),
    /// Parse and range-check a config file.
    Validate { config: PathBuf },
    /// Endpoint means, deviations and Welch tests over metrics files.
    Summarize {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// Second group to compare against.
        #[arg(long, num_args = 1..)]
        against: Vec<PathBuf>,
    },
    /// `run` with per-trial TCS decision logs switched on.
    Trace(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `out/<config name>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    replicates: Option<u32>,
}

fn load(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        HarnessError::Config(nxcsf::harness::ConfigError { origin: path.display().to_string(), msg: e.to_string() })
    })?;
    Ok(ExperimentConfig::parse_with_env(&text, std::env::vars())?)
}

fn run(args: RunArgs, trace: bool) -> Result<(), HarnessError> {
    let mut cfg = load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(k) = args.replicates {
        cfg.replicates = k;
    }
    cfg.trace |= trace;
    cfg.validate()?;
    let out = args.out.unwrap_or_else(|| {
        let stem = args.config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
        Path::new("out").join(stem)
    });
    let outcomes = run_experiment(&cfg, &out)?;
    println!("replicate\tseed\tfinal_exploit_moves\tfinal_exploit_formations\tstable_at");
    for (i, o) in outcomes.iter().enumerate() {
        let last = o.rows.last();
        let show = |v: Option<f64>| v.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        println!(
            "{i}\t{}\t{}\t{}\t{}",
            o.seed,
            show(last.and_then(|r| r.exploit_moves)),
            show(last.and_then(|r| r.exploit_formations)),
            o.stable_at.map(|t| t.to_string()).unwrap_or_else(|| "-".into())
        );
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn endpoints(paths: &[PathBuf]) -> Result<Vec<Endpoint>, HarnessError> {
    paths.iter().map(|p| Endpoint::read(p)).collect()
}

fn main() -> ExitCode {
    // usage errors count as configuration errors
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a, false),
        Command::Trace(a) => run(a, true),
        Command::Validate { config } => load(&config).map(|c| {
            println!(
                "ok: env {} mode {} agent {}, {} explore + {} exploit trials, {} replicates",
                c.env, c.mode, c.agent, c.explore_trials, c.exploit_trials, c.replicates
            );
        }),
        Command::Summarize { csv, against } => (|| {
            let a = endpoints(&csv)?;
            let b = if against.is_empty() { None } else { Some(endpoints(&against)?) };
            print!("{}", SummaryTable(&summarize(&a, b.as_deref())));
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
