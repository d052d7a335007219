use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use convoy::harness::{batch, load_scenario, run_to_dir, HarnessError};

#[derive(Parser)]
#[command(name = "convoy", version, about = "Closed-loop vision-guided leader-follower simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write telemetry.csv and summary.txt.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's noise seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write every camera frame as PPM under <out>/frames.
        #[arg(long)]
        dump_frames: bool,
        /// Override the number of control steps per camera frame.
        #[arg(long)]
        frame_stride: Option<usize>,
    },
    /// Run every *.scn file in a directory in parallel.
    Batch {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(e: &HarnessError) -> u8 {
    match e {
        HarnessError::Scenario(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            dump_frames,
            frame_stride,
        } => {
            let result = load_scenario(&scenario).map_err(HarnessError::from).and_then(|mut sc| {
                if let Some(s) = seed {
                    sc.run.seed = s;
                }
                if let Some(k) = frame_stride {
                    if k == 0 {
                        return Err(HarnessError::Scenario(convoy::harness::ScenarioError::Validation(
                            "frame_stride must be >= 1".into(),
                        )));
                    }
                    sc.run.frame_stride = k;
                }
                run_to_dir(&sc, &out, dump_frames)
            });
            match result {
                Ok(summary) => {
                    print!("{}", summary.to_text());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", scenario.display());
                    ExitCode::from(exit_code(&e))
                }
            }
        }
        Command::Batch { dir, out } => {
            let results = match batch(&dir, &out) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {}: {e}", dir.display());
                    return ExitCode::from(2);
                }
            };
            let mut worst = 0;
            for (path, res) in results {
                match res {
                    Ok(s) => println!(
                        "{}: converged_at = {}, frames_occluded = {}",
                        path.display(),
                        s.converged_at.map_or("none".into(), |t| format!("{t:.2}")),
                        s.frames_occluded()
                    ),
                    Err(e) => {
                        eprintln!("error: {}: {e}", path.display());
                        worst = worst.max(exit_code(&e));
                    }
                }
            }
            ExitCode::from(worst)
        }
    }
}
