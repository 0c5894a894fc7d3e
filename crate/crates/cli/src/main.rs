mod config;
mod examples;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;

#[derive(Parser)]
#[command(
    name = "sto-lab",
    version,
    about = "Experiments on self-consistent transfer operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Worker threads (defaults to all cores).
        #[arg(long, env = "STO_LAB_THREADS")]
        threads: Option<usize>,
        /// Output directory, overriding the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// List the shipped example configs.
    ListExamples,
}

const USAGE: u8 = 2;
const NUMERIC: u8 = 1;

fn load(path: &PathBuf) -> Result<Config, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Config::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn set_threads(threads: Option<usize>) -> Result<(), String> {
    let Some(k) = threads else { return Ok(()) };
    if k == 0 {
        return Err("--threads must be at least 1".into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| e.to_string())?;
    Ok(())
}

fn run(config: PathBuf, threads: Option<usize>, out_dir: Option<PathBuf>) -> ExitCode {
    let cfg = match set_threads(threads).and_then(|_| load(&config)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE);
        }
    };
    println!("{} ({})", cfg.id, cfg.experiment.name());
    let outcome = run::execute(&cfg);
    for line in &outcome.lines {
        println!("  {line}");
    }
    for (name, ok) in &outcome.flags {
        println!("  [{}] {name}", if *ok { "pass" } else { "FAIL" });
    }
    if let Some(e) = &outcome.error {
        println!("  error: {e}");
    }
    let dir = out_dir.unwrap_or_else(|| cfg.output_dir.clone());
    match run::write_report(&cfg, &outcome, &dir) {
        Ok(d) => println!("  report: {}", d.display()),
        Err(e) => {
            eprintln!("error: writing report: {e}");
            return ExitCode::from(NUMERIC);
        }
    }
    if outcome.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(NUMERIC)
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            threads,
            out,
        } => run(config, threads, out),
        Command::Validate { config } => match load(&config) {
            Ok(c) => {
                println!(
                    "{}: ok ({} experiment)",
                    config.display(),
                    c.experiment.name()
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(USAGE)
            }
        },
        Command::ListExamples => {
            for ex in examples::EXAMPLES {
                let description = Config::parse(ex.text)
                    .map(|c| c.description)
                    .unwrap_or_default();
                let note = if ex.passes {
                    ""
                } else {
                    " [exits 1: documents a negative finding]"
                };
                println!("{}{note}\n    {description}", ex.path);
            }
            ExitCode::SUCCESS
        }
    }
}
