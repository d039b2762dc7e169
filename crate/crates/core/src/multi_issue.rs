//! Multi-issue claims problems, the weighted proportional rule over them,
//! and the two-stage composition of unidimensional rules.
//!
//! The literature's generic multi-issue rule is any map into agent
//! vectors, without requiring that awards exhaust the endowment. Every
//! rule shipped here is efficient, and [`two_stage`] checks conservation
//! at both stages.

use std::sync::Arc;

use crate::claims::{conservation_tol, Allocation, ClaimsProblem, ClaimsRule};
use crate::error::{Error, Result};
use crate::par;

/// A claims matrix over agents and issues with one common endowment.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIssueClaimsProblem {
    agents: Vec<String>,
    issues: Vec<String>,
    claims: Vec<f64>, // row-major, agents x issues
    endowment: f64,
}

impl MultiIssueClaimsProblem {
    pub fn new(
        agents: Vec<String>,
        issues: Vec<String>,
        rows: Vec<Vec<f64>>,
        endowment: f64,
    ) -> Result<Self> {
        if agents.is_empty() || issues.is_empty() {
            return Err(Error::Validation(
                "at least one agent and one issue are required".into(),
            ));
        }
        if rows.len() != agents.len() {
            return Err(Error::Validation(format!(
                "{} claim rows for {} agents",
                rows.len(),
                agents.len()
            )));
        }
        let mut claims = Vec::with_capacity(agents.len() * issues.len());
        for (agent, row) in agents.iter().zip(&rows) {
            if row.len() != issues.len() {
                return Err(Error::Validation(format!(
                    "row of {agent} has {} entries for {} issues",
                    row.len(),
                    issues.len()
                )));
            }
            for &entry in row {
                if !entry.is_finite() || entry < 0.0 {
                    return Err(Error::Validation(format!(
                        "claim of {agent} must be nonnegative and finite, got {entry}"
                    )));
                }
            }
            claims.extend_from_slice(row);
        }
        if !endowment.is_finite() || endowment < 0.0 {
            return Err(Error::Validation(format!(
                "endowment must be nonnegative and finite, got {endowment}"
            )));
        }
        let total: f64 = claims.iter().sum();
        if total + conservation_tol(endowment) < endowment {
            return Err(Error::Validation(format!(
                "claims total {total} cannot cover the endowment {endowment}"
            )));
        }
        Ok(Self {
            agents,
            issues,
            claims,
            endowment,
        })
    }

    /// Builds a problem with agents and issues labelled `1..=n` / `1..=k`.
    pub fn from_rows(rows: Vec<Vec<f64>>, endowment: f64) -> Result<Self> {
        let agents = (1..=rows.len()).map(|i| i.to_string()).collect();
        let issue_count = rows.first().map_or(0, Vec::len);
        let issues = (1..=issue_count).map(|j| j.to_string()).collect();
        Self::new(agents, issues, rows, endowment)
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn issues(&self) -> &[String] {
        &self.issues
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn issue_count(&self) -> usize {
        self.issues.len()
    }

    pub fn endowment(&self) -> f64 {
        self.endowment
    }

    pub fn claim(&self, agent: usize, issue: usize) -> f64 {
        self.claims[agent * self.issues.len() + issue]
    }

    pub fn agent_row(&self, agent: usize) -> &[f64] {
        let k = self.issues.len();
        &self.claims[agent * k..(agent + 1) * k]
    }

    pub fn issue_column(&self, issue: usize) -> Vec<f64> {
        (0..self.agents.len())
            .map(|i| self.claim(i, issue))
            .collect()
    }

    /// Per-issue claim totals (the column sums).
    pub fn issue_totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.issues.len()];
        for i in 0..self.agents.len() {
            for (j, total) in totals.iter_mut().enumerate() {
                *total += self.claim(i, j);
            }
        }
        totals
    }
}

type IssueWeightFn = Arc<dyn Fn(&[f64], f64) -> Result<Vec<f64>> + Send + Sync>;

/// Assigns a probability distribution over the issues, as a function of the
/// issue totals and the endowment only. It deliberately cannot see the full
/// claims matrix.
#[derive(Clone)]
pub struct IssueWeightFunction {
    name: String,
    eval: IssueWeightFn,
}

impl IssueWeightFunction {
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64], f64) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Evaluates and validates that the output is a probability
    /// distribution over the issues (within a 1e-9 slack).
    pub fn evaluate(&self, issue_totals: &[f64], endowment: f64) -> Result<Vec<f64>> {
        let weights = (self.eval)(issue_totals, endowment)?;
        if weights.len() != issue_totals.len() {
            return Err(Error::InvalidWeightFunction {
                name: self.name.clone(),
                reason: format!(
                    "{} weights for {} issues",
                    weights.len(),
                    issue_totals.len()
                ),
            });
        }
        let mut sum = 0.0;
        for &w in &weights {
            if !w.is_finite() || !(-1e-9..=1.0 + 1e-9).contains(&w) {
                return Err(Error::InvalidWeightFunction {
                    name: self.name.clone(),
                    reason: format!("weight {w} is outside [0, 1]"),
                });
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeightFunction {
                name: self.name.clone(),
                reason: format!("weights sum to {sum}, not 1"),
            });
        }
        Ok(weights)
    }
}

impl std::fmt::Debug for IssueWeightFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IssueWeightFunction")
            .field("name", &self.name)
            .finish()
    }
}

/// `P^w`: each issue's slice of the endowment is fixed by the weight
/// function, then split within the issue proportionally to claims.
///
/// Every issue must have a positive claims total.
pub fn multi_issue_weighted_proportional(
    problem: &MultiIssueClaimsProblem,
    weights: &IssueWeightFunction,
) -> Result<Allocation> {
    let totals = problem.issue_totals();
    for (j, &total) in totals.iter().enumerate() {
        if total == 0.0 {
            return Err(Error::ZeroIssueTotal {
                issue: problem.issues()[j].clone(),
            });
        }
    }
    let endowment = problem.endowment();
    let issue_weights = weights.evaluate(&totals, endowment)?;
    let amounts = par::map_indexed(problem.agent_count(), |i| {
        let mut amount = 0.0;
        for (j, (&total, &weight)) in totals.iter().zip(&issue_weights).enumerate() {
            amount += problem.claim(i, j) / total * weight * endowment;
        }
        amount
    });
    Allocation::new(amounts, endowment)
}

/// The second-stage rules of a two-stage division, one per issue.
#[derive(Clone)]
pub struct IssueRuleMap {
    inner: IssueRuleMapInner,
}

#[derive(Clone)]
enum IssueRuleMapInner {
    Uniform(Arc<dyn ClaimsRule>),
    PerIssue(Vec<Arc<dyn ClaimsRule>>),
}

impl IssueRuleMap {
    /// The common case: the same rule for every issue.
    pub fn uniform<R: ClaimsRule + 'static>(rule: R) -> Self {
        Self {
            inner: IssueRuleMapInner::Uniform(Arc::new(rule)),
        }
    }

    pub fn per_issue(rules: Vec<Arc<dyn ClaimsRule>>) -> Self {
        Self {
            inner: IssueRuleMapInner::PerIssue(rules),
        }
    }

    pub fn rule_for(&self, issue: usize) -> Result<&dyn ClaimsRule> {
        match &self.inner {
            IssueRuleMapInner::Uniform(rule) => Ok(rule.as_ref()),
            IssueRuleMapInner::PerIssue(rules) => rules
                .get(issue)
                .map(Arc::as_ref)
                .ok_or_else(|| Error::Validation(format!("no rule for issue index {issue}"))),
        }
    }

    pub fn describe(&self) -> String {
        match &self.inner {
            IssueRuleMapInner::Uniform(rule) => rule.name().to_string(),
            IssueRuleMapInner::PerIssue(rules) => format!("per-issue({})", rules.len()),
        }
    }
}

impl std::fmt::Debug for IssueRuleMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "IssueRuleMap({})", self.describe())
    }
}

/// Everything a two-stage division produced: the split over issues, the
/// per-issue awards, the equal-award level of each issue's rule when it has
/// one, and the per-agent totals.
#[derive(Debug, Clone)]
pub struct TwoStageBreakdown {
    first_stage: Allocation,
    issue_awards: Vec<Vec<f64>>, // [issue][agent]
    award_levels: Vec<Option<f64>>,
    total: Allocation,
}

impl TwoStageBreakdown {
    /// The division of the endowment among the issues.
    pub fn first_stage(&self) -> &Allocation {
        &self.first_stage
    }

    /// Awards of one issue, aligned with the agent list.
    pub fn issue_awards(&self, issue: usize) -> &[f64] {
        &self.issue_awards[issue]
    }

    pub fn award(&self, agent: usize, issue: usize) -> f64 {
        self.issue_awards[issue][agent]
    }

    /// Per-issue equal-award levels, for second-stage rules that have one.
    pub fn award_levels(&self) -> &[Option<f64>] {
        &self.award_levels
    }

    /// Per-agent totals across all issues.
    pub fn total(&self) -> &Allocation {
        &self.total
    }
}

/// Splits the endowment among the issues with `first_stage`, then splits
/// each issue's award among the agents with that issue's rule.
pub fn two_stage(
    problem: &MultiIssueClaimsProblem,
    first_stage: &dyn ClaimsRule,
    second_stage: &IssueRuleMap,
) -> Result<TwoStageBreakdown> {
    let totals = problem.issue_totals();
    let endowment = problem.endowment();
    let issue_problem = ClaimsProblem::new(problem.issues().to_vec(), totals.clone(), endowment)?;
    let first = first_stage.apply(&issue_problem)?;

    let per_issue = par::try_map_indexed(problem.issue_count(), |j| {
        let award = first.amounts()[j];
        let column_total = totals[j];
        if award > column_total + conservation_tol(column_total.max(award)) {
            return Err(Error::StageInfeasible {
                issue: problem.issues()[j].clone(),
                award,
                column_total,
            });
        }
        let sub_problem =
            ClaimsProblem::new(problem.agents().to_vec(), problem.issue_column(j), award)?;
        let rule = second_stage.rule_for(j)?;
        let level = rule.award_level(&sub_problem);
        let allocation = rule.apply(&sub_problem)?;
        Ok((allocation.into_amounts(), level))
    })?;

    let (issue_awards, award_levels): (Vec<_>, Vec<_>) = per_issue.into_iter().unzip();
    let amounts = par::map_indexed(problem.agent_count(), |i| {
        issue_awards.iter().map(|column| column[i]).sum()
    });
    let total = Allocation::new(amounts, endowment)?;
    Ok(TwoStageBreakdown {
        first_stage: first,
        issue_awards,
        award_levels,
        total,
    })
}
