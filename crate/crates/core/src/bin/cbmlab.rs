use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cbmlab::cli::{fixtures, run_path, write_outputs, RunOptions, Status};

#[derive(Parser)]
#[command(name = "cbmlab", version, about = "Scenario runner for variations of Bergman kernels")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or a built-in one given as `fixture:NAME`.
    Run {
        scenario: String,
        /// Multiply every tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Override the grid size (square side or line point count).
        #[arg(long)]
        grid: Option<usize>,
        /// Leave timings out of the report, making it byte-reproducible.
        #[arg(long)]
        no_timings: bool,
        /// Directory for the report and CSV.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the built-in fixture catalog.
    ListFixtures,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match args.command {
        Command::ListFixtures => {
            print!("{}", fixtures::table());
            ExitCode::SUCCESS
        }
        Command::Run {
            scenario,
            tol_scale,
            grid,
            no_timings,
            out,
        } => {
            let opts = RunOptions {
                tol_scale,
                grid,
                timings: !no_timings,
            };
            let result = run_path(&scenario, opts)
                .and_then(|(outcome, stem)| write_outputs(&outcome, &out, &stem).map(|w| (outcome, w)));
            match result {
                Ok((outcome, written)) => {
                    for v in &outcome.report.verdicts {
                        let tag = match v.status {
                            Status::Pass => "pass",
                            Status::Fail => "FAIL",
                            Status::Skipped => "skip",
                        };
                        println!("{tag:4}  {:28}  {}", v.name, v.detail);
                    }
                    for p in written {
                        println!("wrote {}", p.display());
                    }
                    if outcome.report.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("cbmlab: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
