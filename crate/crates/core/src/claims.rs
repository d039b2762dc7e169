//! Unidimensional claims problems and the award rules over them.
//!
//! A claims problem divides an endowment among agents whose claims sum to at
//! least the endowment. Every shipped rule is efficient: its awards sum to
//! the endowment. The rules here are closed-form and anonymous, so no
//! tie-breaking is ever involved.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Relative tolerance for conservation and feasibility comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Absolute slack allowed on a quantity of magnitude `scale`.
pub(crate) fn conservation_tol(scale: f64) -> f64 {
    DEFAULT_TOLERANCE * scale.abs().max(1.0)
}

/// An endowment to be divided among agents with claims on it.
///
/// Invariants: one claim per agent, every claim and the endowment are
/// nonnegative and finite, and the claims cover the endowment.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimsProblem {
    agents: Vec<String>,
    claims: Vec<f64>,
    endowment: f64,
}

impl ClaimsProblem {
    pub fn new(agents: Vec<String>, claims: Vec<f64>, endowment: f64) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::Validation("at least one agent is required".into()));
        }
        if agents.len() != claims.len() {
            return Err(Error::Validation(format!(
                "{} agents but {} claims",
                agents.len(),
                claims.len()
            )));
        }
        for (agent, &claim) in agents.iter().zip(&claims) {
            if !claim.is_finite() || claim < 0.0 {
                return Err(Error::Validation(format!(
                    "claim of {agent} must be nonnegative and finite, got {claim}"
                )));
            }
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
            claims,
            endowment,
        })
    }

    /// Builds a problem with agents labelled `1..=n`.
    pub fn from_claims(claims: Vec<f64>, endowment: f64) -> Result<Self> {
        let agents = (1..=claims.len()).map(|i| i.to_string()).collect();
        Self::new(agents, claims, endowment)
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn claims(&self) -> &[f64] {
        &self.claims
    }

    pub fn endowment(&self) -> f64 {
        self.endowment
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn total_claims(&self) -> f64 {
        self.claims.iter().sum()
    }
}

/// Per-agent awards, aligned with the agent list of the generating problem.
///
/// Construction checks that the awards sum to the endowment within
/// `1e-9 * max(1, endowment)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    amounts: Vec<f64>,
}

impl Allocation {
    pub fn new(amounts: Vec<f64>, endowment: f64) -> Result<Self> {
        let total: f64 = amounts.iter().sum();
        if (total - endowment).abs() > conservation_tol(endowment) {
            return Err(Error::Validation(format!(
                "awards sum to {total}, expected the endowment {endowment}"
            )));
        }
        Ok(Self { amounts })
    }

    pub fn amounts(&self) -> &[f64] {
        &self.amounts
    }

    pub fn into_amounts(self) -> Vec<f64> {
        self.amounts
    }

    pub fn total(&self) -> f64 {
        self.amounts.iter().sum()
    }
}

/// A claims rule: a named, efficient mapping from problems to allocations.
pub trait ClaimsRule: Send + Sync {
    fn name(&self) -> &str;

    fn apply(&self, problem: &ClaimsProblem) -> Result<Allocation>;

    /// The common award level for rules that equalize awards (the water
    /// level of [`ConstrainedEqualAwards`]); `None` for everything else.
    fn award_level(&self, _problem: &ClaimsProblem) -> Option<f64> {
        None
    }
}

/// Awards proportionally to claims. Zero total claims force a zero
/// endowment, in which case everyone gets nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct Proportional;

impl ClaimsRule for Proportional {
    fn name(&self) -> &str {
        "proportional"
    }

    fn apply(&self, problem: &ClaimsProblem) -> Result<Allocation> {
        let total = problem.total_claims();
        let endowment = problem.endowment();
        let amounts = if total == 0.0 {
            vec![0.0; problem.len()]
        } else {
            problem
                .claims()
                .iter()
                .map(|&c| c / total * endowment)
                .collect()
        };
        Allocation::new(amounts, endowment)
    }
}

/// Awards proportionally to weighted claims, with strictly positive weights.
#[derive(Debug, Clone)]
pub struct WeightedProportional {
    weights: Vec<f64>,
}

impl WeightedProportional {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::NonPositiveWeight {
                    subject: format!("agent {}", i + 1),
                    value: w,
                });
            }
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl ClaimsRule for WeightedProportional {
    fn name(&self) -> &str {
        "weighted-proportional"
    }

    fn apply(&self, problem: &ClaimsProblem) -> Result<Allocation> {
        if self.weights.len() != problem.len() {
            return Err(Error::Validation(format!(
                "{} weights for {} agents",
                self.weights.len(),
                problem.len()
            )));
        }
        let endowment = problem.endowment();
        let weighted_total: f64 = self
            .weights
            .iter()
            .zip(problem.claims())
            .map(|(&w, &c)| w * c)
            .sum();
        if weighted_total == 0.0 {
            if endowment > 0.0 {
                return Err(Error::ZeroWeightedClaims);
            }
            return Allocation::new(vec![0.0; problem.len()], endowment);
        }
        let amounts = self
            .weights
            .iter()
            .zip(problem.claims())
            .map(|(&w, &c)| w * c / weighted_total * endowment)
            .collect();
        Allocation::new(amounts, endowment)
    }
}

/// Equalizes awards as much as possible, capping each at its claim.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstrainedEqualAwards;

impl ClaimsRule for ConstrainedEqualAwards {
    fn name(&self) -> &str {
        "cea"
    }

    fn apply(&self, problem: &ClaimsProblem) -> Result<Allocation> {
        let level = cea_lambda(problem.claims(), problem.endowment())?;
        let amounts = problem.claims().iter().map(|&c| c.min(level)).collect();
        Allocation::new(amounts, problem.endowment())
    }

    fn award_level(&self, problem: &ClaimsProblem) -> Option<f64> {
        cea_lambda(problem.claims(), problem.endowment()).ok()
    }
}

type RuleFn = Arc<dyn Fn(&ClaimsProblem) -> Result<Allocation> + Send + Sync>;

/// A claims rule built from a closure, for rules induced by other objects.
#[derive(Clone)]
pub struct FnRule {
    name: String,
    func: RuleFn,
}

impl FnRule {
    pub fn new<F>(name: impl Into<String>, func: F) -> Self
    where
        F: Fn(&ClaimsProblem) -> Result<Allocation> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            func: Arc::new(func),
        }
    }
}

impl std::fmt::Debug for FnRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnRule").field("name", &self.name).finish()
    }
}

impl ClaimsRule for FnRule {
    fn name(&self) -> &str {
        &self.name
    }

    fn apply(&self, problem: &ClaimsProblem) -> Result<Allocation> {
        (self.func)(problem)
    }
}

pub fn proportional(problem: &ClaimsProblem) -> Result<Allocation> {
    Proportional.apply(problem)
}

pub fn weighted_proportional(problem: &ClaimsProblem, weights: &[f64]) -> Result<Allocation> {
    WeightedProportional::new(weights.to_vec())?.apply(problem)
}

pub fn cea(problem: &ClaimsProblem) -> Result<Allocation> {
    ConstrainedEqualAwards.apply(problem)
}

/// The water level `level` with `sum(min(level, c_i)) = endowment`.
///
/// Exact water-filling over the ascending-sorted claims: walk the sorted
/// prefix, capping each claim in turn, until the residual endowment spread
/// over the remaining agents falls below the next claim. Deterministic, no
/// iteration tolerance.
pub fn cea_lambda(claims: &[f64], endowment: f64) -> Result<f64> {
    if claims.is_empty() {
        return Err(Error::Validation("at least one claim is required".into()));
    }
    for &c in claims {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::Validation(format!(
                "claims must be nonnegative and finite, got {c}"
            )));
        }
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

    let mut sorted = claims.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut remaining = endowment;
    for (idx, &claim) in sorted.iter().enumerate() {
        let level = remaining / (n - idx) as f64;
        if level <= claim {
            return Ok(level);
        }
        remaining -= claim;
    }
    // Only reachable when the endowment exhausts the claims (within the
    // feasibility slack): every claim is honored in full.
    Ok(*sorted.last().expect("claims are nonempty"))
}

/// How a rule behaved on a batch of instances, with a witness per failure.
#[derive(Debug, Clone)]
pub struct PropertyWitness {
    pub instance: usize,
    pub agent: usize,
    pub problem: ClaimsProblem,
    pub amount: f64,
}

#[derive(Debug, Clone)]
pub struct PropertyCheck {
    passed: bool,
    witness: Option<PropertyWitness>,
}

impl PropertyCheck {
    fn pass() -> Self {
        Self {
            passed: true,
            witness: None,
        }
    }

    fn fail_once(&mut self, witness: PropertyWitness) {
        if self.passed {
            self.passed = false;
            self.witness = Some(witness);
        }
    }

    pub fn passed(&self) -> bool {
        self.passed
    }

    pub fn witness(&self) -> Option<&PropertyWitness> {
        self.witness.as_ref()
    }
}

/// Existential evidence over the supplied instances only; a pass is not a
/// proof that the rule satisfies the property everywhere.
#[derive(Debug, Clone)]
pub struct RulePropertyReport {
    pub rule: String,
    pub nonnegativity: PropertyCheck,
    pub dummy: PropertyCheck,
    pub positivity: PropertyCheck,
    pub claim_boundedness: PropertyCheck,
    pub evaluation_errors: Vec<String>,
}

impl RulePropertyReport {
    /// True when the three load-bearing properties hold and every instance
    /// evaluated cleanly. Claim-boundedness is informational and excluded.
    pub fn all_passed(&self) -> bool {
        self.nonnegativity.passed()
            && self.dummy.passed()
            && self.positivity.passed()
            && self.evaluation_errors.is_empty()
    }
}

/// Evaluates the rule on each instance and records, per agent:
/// awards are nonnegative; zero claims get zero awards (dummy); positive
/// claims get positive awards when there is something to divide
/// (positivity); and no award exceeds its claim (boundedness,
/// informational).
pub fn probe_rule_properties(
    rule: &dyn ClaimsRule,
    instances: &[ClaimsProblem],
) -> RulePropertyReport {
    let mut report = RulePropertyReport {
        rule: rule.name().to_string(),
        nonnegativity: PropertyCheck::pass(),
        dummy: PropertyCheck::pass(),
        positivity: PropertyCheck::pass(),
        claim_boundedness: PropertyCheck::pass(),
        evaluation_errors: Vec::new(),
    };
    for (index, problem) in instances.iter().enumerate() {
        let allocation = match rule.apply(problem) {
            Ok(allocation) => allocation,
            Err(err) => {
                report
                    .evaluation_errors
                    .push(format!("instance {index}: {err}"));
                continue;
            }
        };
        for (agent, (&amount, &claim)) in allocation
            .amounts()
            .iter()
            .zip(problem.claims())
            .enumerate()
        {
            let witness = || PropertyWitness {
                instance: index,
                agent,
                problem: problem.clone(),
                amount,
            };
            if amount < 0.0 {
                report.nonnegativity.fail_once(witness());
            }
            if claim == 0.0 && amount != 0.0 {
                report.dummy.fail_once(witness());
            }
            if problem.endowment() > 0.0 && claim > 0.0 && amount <= 0.0 {
                report.positivity.fail_once(witness());
            }
            if amount > claim + conservation_tol(claim) {
                report.claim_boundedness.fail_once(witness());
            }
        }
    }
    report
}
