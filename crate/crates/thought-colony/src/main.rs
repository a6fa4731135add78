use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use thought_colony::cli::{self, RunOptions, RunOutcome};

#[derive(Parser)]
#[command(name = "thought-colony", version, about = "Colony search over trees of reasoning steps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the engine on the task described by a config file
    Run {
        /// Path to the run configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Override the colony RNG seed from the config
        #[arg(long)]
        seed: Option<u64>,
        /// Ask the generator for a final answer from the best chain
        #[arg(long)]
        answer: bool,
        /// Base directory for relative output paths
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run a JSON manifest of synthetic benchmark specs
    Bench {
        /// Path to the manifest (JSON list of spec entries)
        manifest: PathBuf,
        /// Seeds per entry
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        /// Directory for summary.csv and summary.json
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Pretty-print a result file, or export it as a DOT graph
    Inspect {
        /// Path to a result.json written by `run`
        result: PathBuf,
        /// Emit DOT with edge widths proportional to pheromone level
        #[arg(long)]
        dot: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), cli::CliError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            answer,
            out_dir,
        } => {
            let artifacts = cli::cmd_run(
                &config,
                &RunOptions {
                    seed,
                    answer,
                    out_dir,
                },
            )?;
            match &artifacts.doc.outcome {
                RunOutcome::Single(single) => {
                    println!(
                        "converged={} iterations={} best_quality={:.4} calls={}",
                        single.run.converged,
                        single.run.iterations_run,
                        single
                            .run
                            .history
                            .last()
                            .map(|m| m.best_quality)
                            .unwrap_or(f64::NAN),
                        single.calls.total
                    );
                    println!("best chain:");
                    for (i, step) in single.run.best_chain.iter().enumerate() {
                        println!("  {}. {step}", i + 1);
                    }
                    if let Some(answer) = &single.answer {
                        println!("answer: {answer}");
                    }
                }
                RunOutcome::Dataset(dataset) => {
                    println!("items={}", dataset.items.len());
                    if let Some(rate) = dataset.exact_match_rate {
                        println!("exact_match_rate={rate:.3}");
                    }
                }
            }
            println!("metrics: {}", artifacts.metrics_path.display());
            println!("result:  {}", artifacts.result_path.display());
            Ok(())
        }
        Command::Bench {
            manifest,
            repeats,
            out_dir,
        } => {
            let summary = cli::cmd_bench(&manifest, repeats, out_dir)?;
            println!(
                "{:<28} {:>9} {:>10} {:>12} {:>14}",
                "name", "recovery", "converged", "median_iter", "concentration"
            );
            for row in &summary.rows {
                println!(
                    "{:<28} {:>9.2} {:>10.2} {:>12.1} {:>14.2}",
                    row.name,
                    row.recovery_rate,
                    row.converged_rate,
                    row.median_iterations,
                    row.mean_concentration
                );
            }
            println!("summary: {}", summary.csv_path.display());
            Ok(())
        }
        Command::Inspect { result, dot } => {
            print!("{}", cli::cmd_inspect(&result, dot)?);
            Ok(())
        }
    }
}
