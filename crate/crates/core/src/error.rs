use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced while building problems or evaluating rules and indices.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    /// Weighted proportional division is undefined when the weighted claims
    /// vanish but there is still money to hand out.
    #[error("weighted claims sum to zero while the endowment is positive")]
    ZeroWeightedClaims,

    #[error("weight for {subject} must be positive and finite, got {value}")]
    NonPositiveWeight { subject: String, value: f64 },

    #[error("issue {issue} has zero total claims")]
    ZeroIssueTotal { issue: String },

    #[error("issue weight function {name}: {reason}")]
    InvalidWeightFunction { name: String, reason: String },

    #[error(
        "first stage awards {award} to issue {issue}, exceeding its claims total {column_total}"
    )]
    StageInfeasible {
        issue: String,
        award: f64,
        column_total: f64,
    },

    #[error("index sums to zero; rewards are undefined")]
    ZeroIndex,

    #[error("probability system {name} on user {user}: {reason}")]
    InvalidProbabilitySystem {
        name: String,
        user: String,
        reason: String,
    },

    #[error("rule {rule} violates {property} on {instance}")]
    PropertyViolation {
        rule: String,
        property: String,
        instance: String,
    },

    #[error("rule {rule} awards nothing to {subject} despite a positive claim")]
    PositivityViolation { rule: String, subject: String },

    #[error("invalid reallocation pair: {0}")]
    InvalidReallocation(String),

    #[error("claims vector is not a nonnegative integer vector: {0}")]
    NonIntegerClaims(String),
}
