use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use antipodal::problem::{eval_report, parse_point, parse_problem, sweep, sweep_csv, Problem, RunReport};
use antipodal::solver::{solve_circle, solve_multistart, verify, MultistartOptions};

const EXIT_NOT_CONVERGED: u8 = 1;
const EXIT_INPUT: u8 = 2;

/// Grid size for the bracketing search on S^1.
const CIRCLE_GRID: usize = 256;

#[derive(Parser)]
#[command(name = "antipodal", version, about = "Antipodal gap certificates over convex bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate ψ, φ, φ(-u) and the odd gap at one point.
    Eval {
        file: PathBuf,
        /// Sphere point, n+1 comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
    },
    /// Tabulate ψ, φ and the gap on S^1 as CSV.
    Sweep {
        file: PathBuf,
        #[arg(long, default_value_t = 3600)]
        steps: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a certificate.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 64)]
        starts: usize,
        /// Overrides the seed in the problem file.
        #[arg(long)]
        seed: Option<u64>,
        /// Simplex iterations per start.
        #[arg(long, default_value_t = 2000)]
        max_iter: usize,
    },
    /// Recompute the certificate at a given point.
    Verify {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn load(file: &PathBuf) -> Result<Problem, ExitCode> {
    parse_problem(file).map_err(input_error)
}

fn print_json<T: serde::Serialize>(value: &T) -> ExitCode {
    let mut out = std::io::stdout().lock();
    match serde_json::to_writer_pretty(&mut out, value) {
        Ok(()) => {
            let _ = writeln!(out);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn report(result: antipodal::Result<antipodal::Certificate>, problem: &Problem, start: Instant) -> ExitCode {
    match result {
        Ok(cert) => {
            let converged = cert.converged;
            if !converged {
                eprintln!(
                    "not converged: residual {:e} above tolerance {:e}",
                    cert.residual, cert.tolerance
                );
            }
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let code = print_json(&RunReport::new(cert, problem, ms));
            if code == ExitCode::SUCCESS && !converged {
                ExitCode::from(EXIT_NOT_CONVERGED)
            } else {
                code
            }
        }
        Err(e) => input_error(e),
    }
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    Ok(match cli.command {
        Command::Eval { file, point } => {
            let problem = load(&file)?;
            let p = parse_point(&point, problem.instance.n()).map_err(input_error)?;
            match eval_report(&problem, &p) {
                Ok(r) => print_json(&r),
                Err(e) => input_error(e),
            }
        }
        Command::Sweep { file, steps, out } => {
            let problem = load(&file)?;
            let rows = sweep(&problem.instance, steps).map_err(input_error)?;
            let csv = sweep_csv(&rows);
            match out {
                Some(path) => {
                    std::fs::write(&path, csv).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
                    eprintln!("wrote {} rows to {}", rows.len(), path.display());
                }
                None => print!("{csv}"),
            }
            ExitCode::SUCCESS
        }
        Command::Solve {
            file,
            tol,
            starts,
            seed,
            max_iter,
        } => {
            let problem = load(&file)?;
            let start = Instant::now();
            let inst = &problem.instance;
            let result = if inst.n() == 1 && inst.is_exact() {
                solve_circle(inst, CIRCLE_GRID, tol)
            } else {
                let opts = MultistartOptions {
                    starts,
                    seed: seed.unwrap_or(problem.seed),
                    tol,
                    max_iter,
                };
                solve_multistart(inst, opts)
            };
            report(result, &problem, start)
        }
        Command::Verify { file, point, tol } => {
            let problem = load(&file)?;
            let p = parse_point(&point, problem.instance.n()).map_err(input_error)?;
            let start = Instant::now();
            report(verify(&problem.instance, &p, tol), &problem, start)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    run(cli).unwrap_or_else(|code| code)
}
