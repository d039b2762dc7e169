//! Streaming royalty allocation built on claims-problem machinery.
//!
//! The crate has four layers:
//!
//! - [`claims`]: unidimensional claims problems and the proportional,
//!   weighted proportional and constrained-equal-awards rules, plus a
//!   property probe over rule behavior.
//! - [`multi_issue`]: claims matrices over agents and issues, the weighted
//!   proportional rule driven by an issue weight function, and two-stage
//!   divisions composed from unidimensional rules.
//! - [`streaming`]: artists x users play-count matrices and the reward
//!   methods over them — pro-rata, user-centric, Shapley, and the weighted
//!   and probabilistic index families.
//! - [`bridge`]: the conversion from streaming problems to multi-issue
//!   claims problems, the constructions mapping each index family to a
//!   family of claims rules (and back), and a verification harness that
//!   checks the resulting identities numerically.
//!
//! All computations are pure functions over immutable values. With the
//! default `parallel` feature, independent work (per issue, per artist,
//! per instance) runs on rayon; results are bit-identical to the
//! sequential fallback because nothing reduces floating-point values
//! across parallel tasks.
//!
//! ```
//! use streamclaims::{
//!     pro_rata_rewards, shapley_rewards, user_centric_rewards, verify_equivalences,
//!     StreamingProblem, VerifyOptions,
//! };
//!
//! // Two users: the first plays artists 1 and 2, the second only artist 3.
//! let problem = StreamingProblem::from_rows(vec![
//!     vec![10, 0],
//!     vec![20, 0],
//!     vec![0, 70],
//! ])?;
//!
//! assert_eq!(pro_rata_rewards(&problem)?.amounts(), &[0.2, 0.4, 1.4]);
//! assert_eq!(shapley_rewards(&problem).amounts(), &[0.5, 0.5, 1.0]);
//! let user_centric = user_centric_rewards(&problem);
//! assert!((user_centric.amounts()[0] - 1.0 / 3.0).abs() < 1e-12);
//!
//! // Every method doubles as a claims rule on the converted problem;
//! // the harness confirms the routes agree on this instance.
//! let report = verify_equivalences(&problem, &VerifyOptions::default());
//! assert!(report.all_passed());
//! # Ok::<(), streamclaims::Error>(())
//! ```

pub mod bridge;
pub mod claims;
pub mod error;
pub mod generate;
pub mod multi_issue;
mod par;
pub mod streaming;

pub use bridge::{
    induced_claims_rules, max_deviation, probability_system_from_rules, prorata_weight_function,
    reallocation_proofness_probe, seeded_issue_weights, to_multi_issue,
    total_streams_weight_function, usercentric_weight_function, verify_equivalences, verify_many,
    weight_system_from_first_stage, CheckRecord, CheckSummary, EquivalenceReport,
    ReallocationProbe, VerifyOptions, ROUND_TRIP_TOLERANCE,
};
pub use claims::{
    cea, cea_lambda, probe_rule_properties, proportional, weighted_proportional, Allocation,
    ClaimsProblem, ClaimsRule, ConstrainedEqualAwards, FnRule, PropertyCheck, PropertyWitness,
    Proportional, RulePropertyReport, WeightedProportional, DEFAULT_TOLERANCE,
};
pub use error::{Error, Result};
pub use generate::{derive_seed, generate_random_problem, generate_with_rng};
pub use multi_issue::{
    multi_issue_weighted_proportional, two_stage, IssueRuleMap, IssueWeightFunction,
    MultiIssueClaimsProblem, TwoStageBreakdown,
};
pub use streaming::{
    pro_rata_rewards, probabilistic_index_rewards, rewards_from_index, shapley_rewards,
    stream_stats, user_centric_rewards, weighted_index_rewards, ProbabilitySystem, RewardVector,
    StreamStats, StreamingProblem, WeightSystem,
};
