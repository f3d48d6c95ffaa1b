use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use tapf_core::bench::{run_family, run_mode, Family, Mode};
use tapf_core::flow::export_ilp;
use tapf_core::generators::GenSpec;
use tapf_core::{validate_solution, Outcome, Solution, SolveConfig, TapfInstance};

const EXIT_VIOLATIONS: u8 = 1;
const EXIT_INVALID_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "tapf", version, about = "Team target assignment and path finding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "cbm")]
        mode: Mode,
        /// Seed of the random assignment in mapf-random-assign mode.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        max_t: Option<usize>,
        /// Write the solution here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print NA instead of the wall time.
        #[arg(long)]
        no_timing: bool,
    },
    /// Run a benchmark family and print CSV.
    Bench {
        #[arg(long)]
        family: PathBuf,
        /// Per-instance limit in seconds; the family file takes precedence.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        max_t: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print NA in the time column so output is reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Check a solution file against an instance.
    Validate { instance: PathBuf, solution: PathBuf },
    /// Generate an instance from a `key = value` spec file.
    Generate {
        spec: PathBuf,
        /// Overrides the seed in the spec file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the multi-commodity flow model for horizon T in LP format.
    ExportIlp {
        instance: PathBuf,
        #[arg(long = "t", short = 't')]
        horizon: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID_INPUT,
            message: message.into(),
        }
    }
}

fn exit_code(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Solution => 0,
        Outcome::NoSolution => 4,
        Outcome::Timeout => 5,
        Outcome::HorizonCap => 6,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<TapfInstance, Failure> {
    TapfInstance::parse(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn seconds(s: Option<f64>) -> Result<Option<Duration>, Failure> {
    s.map(|x| Duration::try_from_secs_f64(x).map_err(|e| Failure::input(format!("--time-limit: {e}"))))
        .transpose()
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve {
            instance,
            mode,
            seed,
            time_limit,
            max_t,
            out,
            no_timing,
        } => {
            let inst = read_instance(&instance)?;
            let config = SolveConfig {
                time_limit: seconds(time_limit)?,
                max_t,
                ..SolveConfig::default()
            };
            let r = run_mode(&inst, mode, seed, &config).map_err(|e| Failure::input(e.to_string()))?;
            let mut report = format!("outcome: {}\n", r.outcome.as_str());
            if let Some(sol) = &r.solution {
                let costs: Vec<String> = sol.team_costs().iter().map(|c| c.to_string()).collect();
                report.push_str(&format!("makespan: {}\nteam_costs: {}\n", sol.makespan(), costs.join(" ")));
            }
            report.push_str(&format!("hl_nodes: {}\nll_calls: {}\n", r.hl_nodes, r.ll_calls));
            if no_timing {
                report.push_str("time_s: NA\n");
            } else {
                report.push_str(&format!("time_s: {:.6}\n", r.time.as_secs_f64()));
            }
            match (&r.solution, &out) {
                (Some(sol), Some(p)) => {
                    print!("{report}");
                    emit(Some(p), &sol.to_text())?;
                }
                (Some(sol), None) => print!("{report}\n{}", sol.to_text()),
                (None, _) => print!("{report}"),
            }
            Ok(exit_code(r.outcome))
        }
        Command::Bench {
            family,
            time_limit,
            max_t,
            out,
            no_timing,
        } => {
            let fam = Family::parse(&read(&family)?)
                .map_err(|e| Failure::input(format!("{}: {e}", family.display())))?;
            let base = SolveConfig {
                time_limit: seconds(time_limit)?,
                max_t,
                ..SolveConfig::default()
            };
            let output = run_family(&fam, &base);
            for run in &output.runs {
                if let Err(e) = &run.result {
                    eprintln!(
                        "{} agents={} team_size={} seed={}: {e}",
                        run.mode, run.agents, run.team_size, run.seed
                    );
                }
            }
            for p in &output.problems {
                eprintln!("{p}");
            }
            emit(out.as_deref(), &output.to_csv(!no_timing))?;
            Ok(if output.problems.is_empty() { 0 } else { EXIT_VIOLATIONS })
        }
        Command::Validate { instance, solution } => {
            let inst = read_instance(&instance)?;
            let sol = Solution::parse(&read(&solution)?)
                .map_err(|e| Failure::input(format!("{}: {e}", solution.display())))?;
            match validate_solution(&inst, &sol) {
                Ok(()) => {
                    println!("ok: makespan {}", sol.makespan());
                    Ok(0)
                }
                Err(violations) => {
                    for v in &violations {
                        println!("{v}");
                    }
                    Ok(EXIT_VIOLATIONS)
                }
            }
        }
        Command::Generate { spec, seed, out } => {
            let mut gen = GenSpec::parse(&read(&spec)?)
                .map_err(|e| Failure::input(format!("{}: {e}", spec.display())))?;
            if let Some(s) = seed {
                gen = gen.with_seed(s);
            }
            let inst = gen.generate().map_err(|e| Failure::input(e.to_string()))?;
            emit(out.as_deref(), &inst.to_text())?;
            Ok(0)
        }
        Command::ExportIlp {
            instance,
            horizon,
            out,
        } => {
            let inst = read_instance(&instance)?;
            let violations = inst.validate();
            if !violations.is_empty() {
                let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                return Err(Failure::input(text.join("; ")));
            }
            emit(out.as_deref(), &export_ilp(&inst, horizon))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
