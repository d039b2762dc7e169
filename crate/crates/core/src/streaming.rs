//! Streaming problems: an artists x users play-count matrix, the reward
//! indices over it, and the weighted and probabilistic index families.
//!
//! Each user pays `price_per_user` (default 1), so the revenue to divide is
//! `users * price`. An index scores artists; rewards normalize the index to
//! the revenue, so any positive rescaling of an index yields the same
//! rewards.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::generate::hash_words;
use crate::par;

/// Play counts per (artist, user). Entries are integers; every user must
/// have streamed something (positive column sums).
#[derive(Debug, Clone, PartialEq)]
pub struct StreamingProblem {
    artists: Vec<String>,
    users: Vec<String>,
    streams: Vec<u64>, // row-major, artists x users
    price_per_user: f64,
}

fn validate_labels(kind: &str, labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::Validation(format!(
            "at least one {kind} is required"
        )));
    }
    let mut seen = std::collections::HashSet::new();
    for label in labels {
        if label.is_empty() {
            return Err(Error::Validation(format!("empty {kind} id")));
        }
        if label.contains([',', '\n', '\r']) {
            return Err(Error::Validation(format!(
                "{kind} id {label:?} contains a delimiter character"
            )));
        }
        if !seen.insert(label) {
            return Err(Error::Validation(format!("duplicate {kind} id {label}")));
        }
    }
    Ok(())
}

impl StreamingProblem {
    pub fn new(artists: Vec<String>, users: Vec<String>, rows: Vec<Vec<u64>>) -> Result<Self> {
        validate_labels("artist", &artists)?;
        validate_labels("user", &users)?;
        if rows.len() != artists.len() {
            return Err(Error::Validation(format!(
                "{} stream rows for {} artists",
                rows.len(),
                artists.len()
            )));
        }
        let mut streams = Vec::with_capacity(artists.len() * users.len());
        for (artist, row) in artists.iter().zip(&rows) {
            if row.len() != users.len() {
                return Err(Error::Validation(format!(
                    "row of {artist} has {} entries for {} users",
                    row.len(),
                    users.len()
                )));
            }
            streams.extend_from_slice(row);
        }
        for (j, user) in users.iter().enumerate() {
            let column_sum: u64 = (0..artists.len())
                .map(|i| streams[i * users.len() + j])
                .sum();
            if column_sum == 0 {
                return Err(Error::Validation(format!(
                    "user {user} has no streams; every user must have streamed some content"
                )));
            }
        }
        Ok(Self {
            artists,
            users,
            streams,
            price_per_user: 1.0,
        })
    }

    /// Builds a problem with artists and users labelled `1..=n` / `1..=m`.
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let artists = (1..=rows.len()).map(|i| i.to_string()).collect();
        let user_count = rows.first().map_or(0, Vec::len);
        let users = (1..=user_count).map(|j| j.to_string()).collect();
        Self::new(artists, users, rows)
    }

    pub fn with_price(mut self, price_per_user: f64) -> Result<Self> {
        if !price_per_user.is_finite() || price_per_user <= 0.0 {
            return Err(Error::Validation(format!(
                "price per user must be positive and finite, got {price_per_user}"
            )));
        }
        self.price_per_user = price_per_user;
        Ok(self)
    }

    pub fn artists(&self) -> &[String] {
        &self.artists
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn artist_count(&self) -> usize {
        self.artists.len()
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn stream(&self, artist: usize, user: usize) -> u64 {
        self.streams[artist * self.users.len() + user]
    }

    pub fn artist_row(&self, artist: usize) -> &[u64] {
        let m = self.users.len();
        &self.streams[artist * m..(artist + 1) * m]
    }

    pub fn user_column(&self, user: usize) -> Vec<u64> {
        (0..self.artists.len())
            .map(|i| self.stream(i, user))
            .collect()
    }

    pub fn price_per_user(&self) -> f64 {
        self.price_per_user
    }

    /// Total revenue to divide: `users * price_per_user`.
    pub fn revenue(&self) -> f64 {
        self.users.len() as f64 * self.price_per_user
    }
}

/// Row and column totals plus the fan/listing incidence of the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamStats {
    /// Total streams per artist.
    pub artist_totals: Vec<u64>,
    /// Total streams per user; positive by the problem invariant.
    pub user_totals: Vec<u64>,
    /// Per artist: indices of the users who streamed them.
    pub fans: Vec<Vec<usize>>,
    /// Per user: indices of the artists they streamed.
    pub listings: Vec<Vec<usize>>,
}

pub fn stream_stats(problem: &StreamingProblem) -> StreamStats {
    let n = problem.artist_count();
    let m = problem.user_count();
    let mut artist_totals = vec![0u64; n];
    let mut user_totals = vec![0u64; m];
    let mut fans = vec![Vec::new(); n];
    let mut listings = vec![Vec::new(); m];
    for i in 0..n {
        for j in 0..m {
            let count = problem.stream(i, j);
            artist_totals[i] += count;
            user_totals[j] += count;
            if count > 0 {
                fans[i].push(j);
                listings[j].push(i);
            }
        }
    }
    StreamStats {
        artist_totals,
        user_totals,
        fans,
        listings,
    }
}

/// Per-artist money amounts summing to the revenue.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardVector {
    amounts: Vec<f64>,
}

impl RewardVector {
    fn new(amounts: Vec<f64>) -> Self {
        Self { amounts }
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

/// Normalizes a nonnegative index with positive total to the revenue.
pub fn rewards_from_index(problem: &StreamingProblem, index: &[f64]) -> Result<RewardVector> {
    if index.len() != problem.artist_count() {
        return Err(Error::Validation(format!(
            "index has {} entries for {} artists",
            index.len(),
            problem.artist_count()
        )));
    }
    for &value in index {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Validation(format!(
                "index entries must be nonnegative and finite, got {value}"
            )));
        }
    }
    let total: f64 = index.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroIndex);
    }
    let revenue = problem.revenue();
    let amounts = index.iter().map(|&v| v / total * revenue).collect();
    Ok(RewardVector::new(amounts))
}

/// Splits the revenue proportionally to each artist's total streams.
pub fn pro_rata_rewards(problem: &StreamingProblem) -> Result<RewardVector> {
    let index: Vec<f64> = par::map_indexed(problem.artist_count(), |i| {
        problem.artist_row(i).iter().sum::<u64>() as f64
    });
    rewards_from_index(problem, &index)
}

/// Splits each user's payment among their streamed artists proportionally
/// to plays. The per-artist sums already total the revenue.
pub fn user_centric_rewards(problem: &StreamingProblem) -> RewardVector {
    let m = problem.user_count();
    let user_totals: Vec<f64> = (0..m)
        .map(|j| problem.user_column(j).iter().sum::<u64>() as f64)
        .collect();
    let price = problem.price_per_user();
    let amounts = par::map_indexed(problem.artist_count(), |i| {
        let row = problem.artist_row(i);
        let mut share = 0.0;
        for (j, &count) in row.iter().enumerate() {
            share += count as f64 / user_totals[j];
        }
        price * share
    });
    RewardVector::new(amounts)
}

/// Splits each user's payment equally among the artists they streamed.
pub fn shapley_rewards(problem: &StreamingProblem) -> RewardVector {
    let m = problem.user_count();
    let listing_sizes: Vec<f64> = (0..m)
        .map(|j| {
            problem
                .user_column(j)
                .iter()
                .filter(|&&count| count > 0)
                .count() as f64
        })
        .collect();
    let price = problem.price_per_user();
    let amounts = par::map_indexed(problem.artist_count(), |i| {
        let row = problem.artist_row(i);
        let mut share = 0.0;
        for (j, &count) in row.iter().enumerate() {
            if count > 0 {
                share += 1.0 / listing_sizes[j];
            }
        }
        price * share
    });
    RewardVector::new(amounts)
}

/// A strictly positive per-user weight on streams. The weight may depend on
/// the user and their whole play vector; restricted forms (per-user
/// constants, or functions of the play total only) are carried explicitly
/// so constructions that need them can recover the underlying table.
#[derive(Clone)]
pub struct WeightSystem {
    name: String,
    form: WeightForm,
}

/// A weight as a function of the user and their total play count.
pub type TotalStreamsFn = Arc<dyn Fn(usize, u64) -> f64 + Send + Sync>;

type StreamWeightFn = Arc<dyn Fn(usize, &[u64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum WeightForm {
    General(StreamWeightFn),
    PerUser(Arc<Vec<f64>>),
    TotalStreams(TotalStreamsFn),
}

impl WeightSystem {
    pub fn from_fn<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(usize, &[u64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            form: WeightForm::General(Arc::new(eval)),
        }
    }

    /// A user-weighted system: one constant per user, validated upfront.
    pub fn per_user(name: impl Into<String>, weights: Vec<f64>) -> Result<Self> {
        let name = name.into();
        for (j, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::NonPositiveWeight {
                    subject: format!("user index {j}"),
                    value: w,
                });
            }
        }
        Ok(Self {
            name,
            form: WeightForm::PerUser(Arc::new(weights)),
        })
    }

    /// A total-streams system: the weight depends only on the user and
    /// their total play count.
    pub fn total_streams<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(usize, u64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            form: WeightForm::TotalStreams(Arc::new(eval)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_user_weighted(&self) -> bool {
        matches!(self.form, WeightForm::PerUser(_))
    }

    /// The underlying (user, total) -> weight map, when this system is in
    /// total-streams form. Per-user constants qualify trivially.
    pub fn total_streams_form(&self) -> Option<TotalStreamsFn> {
        match &self.form {
            WeightForm::TotalStreams(eval) => Some(Arc::clone(eval)),
            WeightForm::PerUser(table) => {
                let table = Arc::clone(table);
                // Out-of-range users surface as NaN, which every caller
                // rejects through the positive-weight validation.
                Some(Arc::new(move |user, _total| {
                    table.get(user).copied().unwrap_or(f64::NAN)
                }))
            }
            WeightForm::General(_) => None,
        }
    }

    /// Weights are validated lazily at each evaluation; the domain is
    /// infinite, so upfront validation is impossible for callables.
    pub fn evaluate(&self, user: usize, streams: &[u64]) -> Result<f64> {
        let weight = match &self.form {
            WeightForm::General(eval) => eval(user, streams),
            WeightForm::PerUser(table) => *table.get(user).ok_or_else(|| {
                Error::Validation(format!(
                    "weight table has {} users, asked for index {user}",
                    table.len()
                ))
            })?,
            WeightForm::TotalStreams(eval) => eval(user, streams.iter().sum()),
        };
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::NonPositiveWeight {
                subject: format!("user index {user}"),
                value: weight,
            });
        }
        Ok(weight)
    }
}

impl std::fmt::Debug for WeightSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightSystem")
            .field("name", &self.name)
            .finish()
    }
}

/// Rewards of the weighted index: each user's plays scaled by their weight,
/// summed per artist, then normalized to the revenue.
pub fn weighted_index_rewards(
    problem: &StreamingProblem,
    weights: &WeightSystem,
) -> Result<RewardVector> {
    let user_weights = par::try_map_indexed(problem.user_count(), |j| {
        weights.evaluate(j, &problem.user_column(j))
    })?;
    let index: Vec<f64> = par::map_indexed(problem.artist_count(), |i| {
        let row = problem.artist_row(i);
        let mut value = 0.0;
        for (j, &count) in row.iter().enumerate() {
            value += user_weights[j] * count as f64;
        }
        value
    });
    rewards_from_index(problem, &index)
}

/// A per-user probability distribution over the artists they streamed.
/// Outputs must lie in [0, 1], sum to 1, and put no mass on artists the
/// user never played.
type DistributionFn = Arc<dyn Fn(usize, &[u64]) -> Result<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
pub struct ProbabilitySystem {
    name: String,
    eval: DistributionFn,
}

impl ProbabilitySystem {
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(usize, &[u64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    /// Mass proportional to plays (the user-centric split).
    pub fn proportional() -> Self {
        Self::new("proportional", |_, streams: &[u64]| {
            let total: u64 = streams.iter().sum();
            if total == 0 {
                return Err(Error::Validation(
                    "probability system is undefined on an all-zero stream vector".into(),
                ));
            }
            Ok(streams
                .iter()
                .map(|&count| count as f64 / total as f64)
                .collect())
        })
    }

    /// Equal mass on every streamed artist (the Shapley split).
    pub fn uniform_on_support() -> Self {
        Self::new("uniform-on-support", |_, streams: &[u64]| {
            let support = streams.iter().filter(|&&count| count > 0).count();
            if support == 0 {
                return Err(Error::Validation(
                    "probability system is undefined on an all-zero stream vector".into(),
                ));
            }
            Ok(streams
                .iter()
                .map(|&count| if count > 0 { 1.0 / support as f64 } else { 0.0 })
                .collect())
        })
    }

    /// All mass on the lowest-index streamed artist.
    pub fn first_streamed() -> Self {
        Self::new("first-streamed", |_, streams: &[u64]| {
            let first = streams.iter().position(|&count| count > 0).ok_or_else(|| {
                Error::Validation(
                    "probability system is undefined on an all-zero stream vector".into(),
                )
            })?;
            let mut dist = vec![0.0; streams.len()];
            dist[first] = 1.0;
            Ok(dist)
        })
    }

    /// A deterministic pseudo-random system: the distribution over the
    /// support is drawn from a generator keyed by (seed, user, streams), so
    /// it is a genuine function of its arguments.
    pub fn seeded(seed: u64) -> Self {
        Self::new(format!("seeded-{seed}"), move |user, streams: &[u64]| {
            let support: Vec<usize> = streams
                .iter()
                .enumerate()
                .filter(|(_, &count)| count > 0)
                .map(|(i, _)| i)
                .collect();
            if support.is_empty() {
                return Err(Error::Validation(
                    "probability system is undefined on an all-zero stream vector".into(),
                ));
            }
            let key = hash_words(
                seed,
                std::iter::once(user as u64 + 1).chain(streams.iter().copied()),
            );
            let mut rng = ChaCha8Rng::seed_from_u64(key);
            let raw: Vec<f64> = support.iter().map(|_| rng.random_range(0.1..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            let mut dist = vec![0.0; streams.len()];
            for (&i, &value) in support.iter().zip(&raw) {
                dist[i] = value / sum;
            }
            Ok(dist)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Evaluates and validates the distribution invariants, naming the
    /// offending user on failure.
    pub fn evaluate(&self, user: usize, streams: &[u64]) -> Result<Vec<f64>> {
        let dist = (self.eval)(user, streams)?;
        let fail = |reason: String| Error::InvalidProbabilitySystem {
            name: self.name.clone(),
            user: format!("index {user}"),
            reason,
        };
        if dist.len() != streams.len() {
            return Err(fail(format!(
                "{} components for {} artists",
                dist.len(),
                streams.len()
            )));
        }
        let mut sum = 0.0;
        for (&p, &count) in dist.iter().zip(streams) {
            if !p.is_finite() || !(0.0..=1.0 + 1e-9).contains(&p) {
                return Err(fail(format!("component {p} is outside [0, 1]")));
            }
            if count == 0 && p != 0.0 {
                return Err(fail(format!(
                    "positive mass {p} on an artist with zero streams"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(fail(format!("components sum to {sum}, not 1")));
        }
        Ok(dist)
    }
}

impl std::fmt::Debug for ProbabilitySystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProbabilitySystem")
            .field("name", &self.name)
            .finish()
    }
}

/// Rewards of the probabilistic index: each user's payment is spread over
/// their streamed artists according to the system. The index sums to the
/// user count, so rewards are the index scaled by the price.
pub fn probabilistic_index_rewards(
    problem: &StreamingProblem,
    system: &ProbabilitySystem,
) -> Result<RewardVector> {
    let distributions = par::try_map_indexed(problem.user_count(), |j| {
        system.evaluate(j, &problem.user_column(j))
    })?;
    let price = problem.price_per_user();
    let amounts = par::map_indexed(problem.artist_count(), |i| {
        let mut share = 0.0;
        for dist in &distributions {
            share += dist[i];
        }
        price * share
    });
    Ok(RewardVector::new(amounts))
}
