use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use percolab_cli::plan::{Experiment, ExperimentPlan};
use percolab_cli::{run_path, run_plan, Overrides};

#[derive(Parser)]
#[command(name = "percolab", version, about = "Site percolation experiments")]
struct Cli {
    /// More log output; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a plan file, or every `.plan` file of a directory in name order.
    Run {
        plan: PathBuf,
        /// Replace the seed of every plan.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; changes timing only.
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Validate plans without running them.
    Check { plan: PathBuf },
    /// Print the exponent table for a range of dimensions.
    Exponents {
        #[arg(long, default_value_t = 2)]
        from: u32,
        #[arg(long, default_value_t = 5)]
        to: u32,
        /// Also write CSV/JSON into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    ExitCode::from(run(cli.command) as u8)
}

fn run(command: Command) -> i32 {
    match command {
        Command::Run { plan, seed, workers, out } => {
            let (outcomes, code) = run_path(&plan, &out, Overrides { seed, workers });
            for outcome in outcomes {
                match outcome {
                    Ok(r) => println!("{}: {:?}: {}", r.name, r.status, r.summary),
                    Err(e) => eprintln!("error: {e}"),
                }
            }
            code
        }
        Command::Check { plan } => match percolab_cli::load_plans(&plan, Overrides::default()) {
            Ok(plans) => {
                for p in plans {
                    println!("{}: {} ok", p.name, p.kind());
                }
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Command::Exponents { from, to, out } => {
            let text = format!("kind = exponents\nname = exponents\nfrom = {from}\nto = {to}\n");
            let plan = match ExperimentPlan::parse(&text, "exponents") {
                Ok(plan) => plan,
                Err(e) => {
                    eprintln!("error: {e}");
                    return e.exit_code();
                }
            };
            debug_assert!(matches!(plan.experiment, Experiment::Exponents { .. }));
            let dir = out.clone().unwrap_or_else(std::env::temp_dir);
            match run_plan(&plan, &dir) {
                Ok(report) => {
                    match std::fs::read_to_string(&report.files[0]) {
                        Ok(csv) => print!("{csv}"),
                        Err(e) => {
                            eprintln!("error: {e}");
                            return 1;
                        }
                    }
                    if out.is_none() {
                        for f in &report.files {
                            let _ = std::fs::remove_file(f);
                        }
                    }
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
    }
}
