use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use matchdecomp::bench::{self, summary, CompareTolerance, Overrides, Profile};
use matchdecomp::Error;

/// Decompose weighted graphs into sparse convex combinations of matchings.
#[derive(Parser, Debug)]
#[command(name = "matchdecomp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the instance corpus described by the profile.
    Generate(Common),
    /// Run every method on every instance and write the summary table.
    Run(Common),
    /// Write benchmark reports and plot data from stored results.
    Report(Common),
    /// Compare two summary tables; exits with 1 on any regression.
    Compare {
        before: PathBuf,
        after: PathBuf,
        /// Write the diff table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Decomposition-length increase tolerated per entry.
        #[arg(long, default_value_t = 0)]
        length_tolerance: usize,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Profile file (TOML); defaults to complete graphs on 6 to 9 nodes.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Base seed for engine runs.
    #[arg(long)]
    seed: Option<u64>,
    /// Keep only the method with this label or sampler name (fcfw, random, anneal, qaoa).
    #[arg(long)]
    method: Option<String>,
    /// Target approximation error.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Sampled matchings per iteration; 0 runs plain Frank-Wolfe only.
    #[arg(long)]
    d: Option<usize>,
    /// Bitstrings drawn per sampling call.
    #[arg(long)]
    shots: Option<usize>,
    /// Fixed QAOA angles as `gamma,beta` (skips the angle search).
    #[arg(long, value_name = "G,B", value_parser = parse_pair, allow_hyphen_values = true)]
    fixed_params: Option<(f64, f64)>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `gamma,beta`, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

const EXIT_PARTIAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn load_profile(c: &Common) -> Result<Profile, Error> {
    let mut profile = match &c.profile {
        Some(path) => Profile::load(path)?,
        None => Profile::default_profile(),
    };
    profile.apply(&Overrides {
        out: c.out.clone(),
        jobs: c.jobs,
        seed: c.seed,
        method: c.method.clone(),
        epsilon: c.epsilon,
        d: c.d,
        shots: c.shots,
        fixed_params: c.fixed_params,
    })?;
    Ok(profile)
}

fn fail(code: u8, e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(c) => {
            let profile = match load_profile(&c) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            match bench::cmd_generate(&profile) {
                Ok(paths) => {
                    println!("wrote {} instances to {}", paths.len(), profile.output.join("instances").display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_CONFIG, &e),
            }
        }
        Command::Run(c) => {
            let profile = match load_profile(&c) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            match bench::cmd_run(&profile) {
                Ok(run) => {
                    print!("{}", run.table.to_csv());
                    println!("summary written to {}", run.summary_path.display());
                    for (id, method, message) in &run.failures {
                        eprintln!("run failed: {id} / {method}: {message}");
                    }
                    if run.failures.is_empty() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_PARTIAL)
                    }
                }
                Err(e) => fail(EXIT_CONFIG, &e),
            }
        }
        Command::Report(c) => {
            let profile = match load_profile(&c) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            match bench::cmd_report(&profile) {
                Ok(reports) => {
                    println!("problem,method,length,final_error,successful,total_seconds");
                    for r in &reports {
                        println!(
                            "{},{},{},{:e},{},{:.3}",
                            r.problem,
                            r.method,
                            r.best_objective,
                            r.final_error,
                            r.run_counts.successful,
                            r.runtimes.total_seconds
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_CONFIG, &e),
            }
        }
        Command::Compare {
            before,
            after,
            out,
            length_tolerance,
        } => {
            let tol = CompareTolerance {
                length: length_tolerance,
                ..Default::default()
            };
            match bench::cmd_compare(&before, &after, &tol) {
                Ok(rows) => {
                    let text = summary::diff_to_csv(&rows);
                    match out {
                        Some(path) => {
                            if let Err(e) = std::fs::write(&path, &text) {
                                eprintln!("error: {}: {e}", path.display());
                                return ExitCode::from(EXIT_CONFIG);
                            }
                        }
                        None => print!("{text}"),
                    }
                    if summary::has_regression(&rows) {
                        ExitCode::from(EXIT_PARTIAL)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => fail(EXIT_CONFIG, &e),
            }
        }
    }
}
