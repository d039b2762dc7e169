//! Method selection: names accepted by `allocate --method` and dispatch
//! into the library.

use std::path::PathBuf;

use streamclaims::{
    pro_rata_rewards, shapley_rewards, to_multi_issue, two_stage, user_centric_rewards,
    weighted_index_rewards, ClaimsRule, ConstrainedEqualAwards, IssueRuleMap, Proportional,
    StreamingProblem, TwoStageBreakdown, WeightSystem,
};

use crate::csv_io::parse_weights_csv;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageRule {
    Prop,
    Cea,
}

impl StageRule {
    fn parse(token: &str) -> Result<Self, CliError> {
        match token {
            "prop" => Ok(Self::Prop),
            "cea" => Ok(Self::Cea),
            other => Err(CliError::Invalid(format!(
                "unknown stage rule {other:?}; expected prop or cea"
            ))),
        }
    }

    fn as_rule(self) -> &'static dyn ClaimsRule {
        match self {
            Self::Prop => &Proportional,
            Self::Cea => &ConstrainedEqualAwards,
        }
    }

    fn issue_map(self) -> IssueRuleMap {
        match self {
            Self::Prop => IssueRuleMap::uniform(Proportional),
            Self::Cea => IssueRuleMap::uniform(ConstrainedEqualAwards),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Method {
    ProRata,
    UserCentric,
    Shapley,
    TwoStage { first: StageRule, second: StageRule },
    Weighted { weights: PathBuf },
}

impl Method {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        if let Some(stages) = name.strip_prefix("two-stage:") {
            let (first, second) = stages.split_once(',').ok_or_else(|| {
                CliError::Invalid(format!(
                    "two-stage method needs two rules, e.g. two-stage:prop,cea; got {name:?}"
                ))
            })?;
            return Ok(Self::TwoStage {
                first: StageRule::parse(first)?,
                second: StageRule::parse(second)?,
            });
        }
        if let Some(path) = name.strip_prefix("weighted:") {
            if path.is_empty() {
                return Err(CliError::Invalid(
                    "weighted method needs a weights file, e.g. weighted:weights.csv".into(),
                ));
            }
            return Ok(Self::Weighted {
                weights: PathBuf::from(path),
            });
        }
        match name {
            "pro-rata" => Ok(Self::ProRata),
            "user-centric" => Ok(Self::UserCentric),
            "shapley" => Ok(Self::Shapley),
            other => Err(CliError::Invalid(format!(
                "unknown method {other:?}; expected pro-rata, user-centric, shapley, \
                 two-stage:<first>,<second> (prop|cea) or weighted:<weights-csv>"
            ))),
        }
    }
}

pub struct AllocationOutcome {
    pub rewards: Vec<f64>,
    pub breakdown: Option<TwoStageBreakdown>,
}

pub fn allocate(
    problem: &StreamingProblem,
    method: &Method,
) -> Result<AllocationOutcome, CliError> {
    let outcome = match method {
        Method::ProRata => AllocationOutcome {
            rewards: pro_rata_rewards(problem)?.into_amounts(),
            breakdown: None,
        },
        Method::UserCentric => AllocationOutcome {
            rewards: user_centric_rewards(problem).into_amounts(),
            breakdown: None,
        },
        Method::Shapley => AllocationOutcome {
            rewards: shapley_rewards(problem).into_amounts(),
            breakdown: None,
        },
        Method::TwoStage { first, second } => {
            let bridged = to_multi_issue(problem)?;
            let breakdown = two_stage(&bridged, first.as_rule(), &second.issue_map())?;
            AllocationOutcome {
                rewards: breakdown.total().amounts().to_vec(),
                breakdown: Some(breakdown),
            }
        }
        Method::Weighted { weights } => {
            let table = parse_weights_csv(weights, problem)?;
            let system = WeightSystem::per_user("weights-file", table)?;
            AllocationOutcome {
                rewards: weighted_index_rewards(problem, &system)?.into_amounts(),
                breakdown: None,
            }
        }
    };
    Ok(outcome)
}
