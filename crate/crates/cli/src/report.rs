//! Report emission. JSON keeps full double precision and a stable key
//! order (struct field order); tables print 6-decimal fixed point with
//! artists in input order; CSV rows use the shortest exact float form.

use serde::Serialize;

use streamclaims::{EquivalenceReport, StreamingProblem, TwoStageBreakdown};

use crate::methods::AllocationOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Serialize)]
struct RewardRow<'a> {
    artist: &'a str,
    reward: f64,
}

#[derive(Serialize)]
struct StageRow<'a> {
    user: &'a str,
    award: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    award_level: Option<f64>,
}

#[derive(Serialize)]
struct BreakdownJson<'a> {
    first_stage: Vec<StageRow<'a>>,
    awards: Vec<AwardRow<'a>>,
}

#[derive(Serialize)]
struct AwardRow<'a> {
    artist: &'a str,
    by_user: Vec<f64>,
}

#[derive(Serialize)]
struct AllocateJson<'a> {
    method: &'a str,
    price_per_user: f64,
    total: f64,
    rewards: Vec<RewardRow<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    breakdown: Option<BreakdownJson<'a>>,
}

fn breakdown_json<'a>(
    problem: &'a StreamingProblem,
    breakdown: &TwoStageBreakdown,
) -> BreakdownJson<'a> {
    let first_stage = problem
        .users()
        .iter()
        .enumerate()
        .map(|(j, user)| StageRow {
            user,
            award: breakdown.first_stage().amounts()[j],
            award_level: breakdown.award_levels()[j],
        })
        .collect();
    let awards = problem
        .artists()
        .iter()
        .enumerate()
        .map(|(i, artist)| AwardRow {
            artist,
            by_user: (0..problem.user_count())
                .map(|j| breakdown.award(i, j))
                .collect(),
        })
        .collect();
    BreakdownJson {
        first_stage,
        awards,
    }
}

fn label_width<'a>(labels: impl Iterator<Item = &'a str>, floor: usize) -> usize {
    labels.map(str::len).fold(floor, usize::max)
}

pub fn allocate_report(
    problem: &StreamingProblem,
    method: &str,
    outcome: &AllocationOutcome,
    format: Format,
) -> String {
    match format {
        Format::Json => {
            let body = AllocateJson {
                method,
                price_per_user: problem.price_per_user(),
                total: problem.revenue(),
                rewards: problem
                    .artists()
                    .iter()
                    .zip(&outcome.rewards)
                    .map(|(artist, &reward)| RewardRow { artist, reward })
                    .collect(),
                breakdown: outcome
                    .breakdown
                    .as_ref()
                    .map(|b| breakdown_json(problem, b)),
            };
            let mut text = serde_json::to_string_pretty(&body).expect("report serializes");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut out = String::from("artist,reward\n");
            for (artist, &reward) in problem.artists().iter().zip(&outcome.rewards) {
                out.push_str(&format!("{artist},{reward}\n"));
            }
            out.push_str(&format!("total,{}\n", problem.revenue()));
            out
        }
        Format::Table => {
            let mut out = String::new();
            let width = label_width(
                problem.artists().iter().map(String::as_str),
                "artist".len().max("total".len()),
            );
            if let Some(breakdown) = &outcome.breakdown {
                let user_width =
                    label_width(problem.users().iter().map(String::as_str), "user".len());
                out.push_str("first stage\n");
                out.push_str(&format!(
                    "{:user_width$}  {:>12}  {:>12}\n",
                    "user", "award", "level"
                ));
                for (j, user) in problem.users().iter().enumerate() {
                    let award = breakdown.first_stage().amounts()[j];
                    match breakdown.award_levels()[j] {
                        Some(level) => out.push_str(&format!(
                            "{user:user_width$}  {award:>12.6}  {level:>12.6}\n"
                        )),
                        None => out
                            .push_str(&format!("{user:user_width$}  {award:>12.6}  {:>12}\n", "-")),
                    }
                }
                out.push('\n');
                out.push_str("awards by user\n");
                out.push_str(&format!("{:width$}", "artist"));
                for user in problem.users() {
                    out.push_str(&format!("  {user:>12}"));
                }
                out.push('\n');
                for (i, artist) in problem.artists().iter().enumerate() {
                    out.push_str(&format!("{artist:width$}"));
                    for j in 0..problem.user_count() {
                        out.push_str(&format!("  {:>12.6}", breakdown.award(i, j)));
                    }
                    out.push('\n');
                }
                out.push('\n');
            }
            out.push_str(&format!("{:width$}  {:>12}\n", "artist", "reward"));
            for (artist, &reward) in problem.artists().iter().zip(&outcome.rewards) {
                out.push_str(&format!("{artist:width$}  {reward:>12.6}\n"));
            }
            out.push_str(&format!(
                "{:width$}  {:>12.6}\n",
                "total",
                problem.revenue()
            ));
            out
        }
    }
}

#[derive(Serialize)]
pub struct TrialReport {
    pub trial: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_seed: Option<u64>,
    #[serde(flatten)]
    pub report: EquivalenceReport,
}

#[derive(Serialize)]
struct VerifySummary {
    instances: usize,
    checks: usize,
    passed: usize,
    failed: usize,
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    tolerance: f64,
    seed: u64,
    reports: &'a [TrialReport],
    summary: VerifySummary,
}

pub fn verify_report(trials: &[TrialReport], tolerance: f64, seed: u64, format: Format) -> String {
    let checks: usize = trials.iter().map(|t| t.report.summary.total).sum();
    let passed: usize = trials.iter().map(|t| t.report.summary.passed).sum();
    let summary = VerifySummary {
        instances: trials.len(),
        checks,
        passed,
        failed: checks - passed,
    };
    match format {
        Format::Json => {
            let body = VerifyJson {
                tolerance,
                seed,
                reports: trials,
                summary,
            };
            let mut text = serde_json::to_string_pretty(&body).expect("report serializes");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut out = String::from("trial,check,instance,max_deviation,tolerance,passed\n");
            for trial in trials {
                for check in &trial.report.checks {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        trial.trial,
                        check.name,
                        check.instance,
                        check.max_deviation,
                        check.tolerance,
                        check.passed
                    ));
                }
            }
            out.push_str(&format!(
                "# {} instances, {} checks, {} failed\n",
                summary.instances, summary.checks, summary.failed
            ));
            out
        }
        Format::Table => {
            let mut out = String::new();
            for trial in trials {
                let seed_note = trial
                    .instance_seed
                    .map(|s| format!(" instance-seed={s}"))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "instance {} ({}{}): {}/{} checks passed\n",
                    trial.trial,
                    trial.report.instance,
                    seed_note,
                    trial.report.summary.passed,
                    trial.report.summary.total,
                ));
                for check in &trial.report.checks {
                    if !check.passed {
                        out.push_str(&format!(
                            "  FAIL {} deviation={:e} tolerance={:e}{}\n",
                            check.name,
                            check.max_deviation,
                            check.tolerance,
                            check
                                .detail
                                .as_deref()
                                .map(|d| format!(" ({d})"))
                                .unwrap_or_default()
                        ));
                    }
                }
            }
            out.push_str(&format!(
                "summary: {} instances, {} checks, {} failed\n",
                summary.instances, summary.checks, summary.failed
            ));
            out
        }
    }
}
