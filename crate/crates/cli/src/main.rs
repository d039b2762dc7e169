//! Royalty allocation over streaming matrices: divide subscription revenue
//! among artists with claims-rule methods, generate random instances, and
//! verify that the index and claims-rule formulations agree.

mod csv_io;
mod error;
mod methods;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use streamclaims::{derive_seed, generate_random_problem, verify_many, VerifyOptions};

use crate::error::CliError;
use crate::methods::Method;
use crate::report::{Format, TrialReport};

#[derive(Parser)]
#[command(name = "streamclaims", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Divide the revenue of a streams CSV among its artists
    Allocate {
        /// Streams CSV: header `artist,<user>,...`, integer counts
        #[arg(long)]
        input: PathBuf,
        /// pro-rata | user-centric | shapley | two-stage:<first>,<second>
        /// (prop|cea) | weighted:<weights-csv>
        #[arg(long, default_value = "pro-rata")]
        method: String,
        /// Subscription price paid by each user
        #[arg(long, default_value_t = 1.0)]
        price: f64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Check the index/claims-rule identities; nonzero exit on any failure
    Verify {
        /// Streams CSV to verify (conflicts with --trials)
        #[arg(long, conflicts_with_all = ["trials", "artists", "users", "max_streams"])]
        input: Option<PathBuf>,
        /// Number of random instances to verify
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        artists: usize,
        #[arg(long, default_value_t = 6)]
        users: usize,
        #[arg(long, default_value_t = 20)]
        max_streams: u64,
        /// Componentwise tolerance for the identity checks
        #[arg(long = "tol", default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Write a seeded random streams CSV
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        artists: usize,
        #[arg(long, default_value_t = 6)]
        users: usize,
        #[arg(long, default_value_t = 20)]
        max_streams: u64,
        /// Output path
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Allocate {
            input,
            method,
            price,
            format,
        } => {
            let problem = csv_io::parse_streams_csv(&input)?.with_price(price)?;
            let parsed = Method::parse(&method)?;
            let outcome = methods::allocate(&problem, &parsed)?;
            print!(
                "{}",
                report::allocate_report(&problem, &method, &outcome, format)
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            input,
            trials,
            seed,
            artists,
            users,
            max_streams,
            tolerance,
            format,
        } => {
            let options = VerifyOptions { tolerance, seed };
            let trial_reports = match (input, trials) {
                (Some(path), None) => {
                    let problem = csv_io::parse_streams_csv(&path)?;
                    let reports = verify_many(std::slice::from_ref(&problem), &options);
                    vec![TrialReport {
                        trial: 0,
                        instance_seed: None,
                        report: reports.into_iter().next().expect("one report"),
                    }]
                }
                (None, Some(trials)) => {
                    let seeds: Vec<u64> = (0..trials).map(|k| derive_seed(seed, k)).collect();
                    let problems = seeds
                        .iter()
                        .map(|&s| generate_random_problem(s, artists, users, max_streams))
                        .collect::<Result<Vec<_>, _>>()?;
                    let reports = verify_many(&problems, &options);
                    seeds
                        .into_iter()
                        .zip(reports)
                        .enumerate()
                        .map(|(k, (instance_seed, report))| TrialReport {
                            trial: k as u64,
                            instance_seed: Some(instance_seed),
                            report,
                        })
                        .collect()
                }
                (None, None) => {
                    return Err(CliError::Invalid(
                        "verify needs either --input <csv> or --trials <n>".into(),
                    ))
                }
                (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
            };
            print!(
                "{}",
                report::verify_report(&trial_reports, tolerance, seed, format)
            );
            let all_passed = trial_reports.iter().all(|t| t.report.all_passed());
            Ok(if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Gen {
            seed,
            artists,
            users,
            max_streams,
            out,
        } => {
            let problem = generate_random_problem(seed, artists, users, max_streams)?;
            let csv = csv_io::format_streams_csv(&problem);
            fs::write(&out, csv).map_err(CliError::io(format!("writing {}", out.display())))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
