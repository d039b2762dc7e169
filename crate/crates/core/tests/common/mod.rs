//! Shared fixtures and independent oracles for the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use streamclaims::{derive_seed, generate_with_rng, StreamingProblem};

/// Root-finding oracle for the constrained-equal-awards water level,
/// independent of the production water-filling path: bisect
/// `f(level) = sum(min(level, c_i)) - endowment` down to a 1e-12 bracket.
pub fn bisection_cea_lambda(claims: &[f64], endowment: f64) -> f64 {
    let residual =
        |level: f64| -> f64 { claims.iter().map(|&c| c.min(level)).sum::<f64>() - endowment };
    let max_claim = claims.iter().cloned().fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, max_claim);
    if residual(hi) <= 0.0 {
        // Claims are exhausted (or exactly cover the endowment); the level
        // saturates at the largest claim.
        return hi;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The 3-artist, 2-user worked example: the first user splits plays 10/20
/// across the first two artists, the second user plays only the third.
pub fn three_artists_two_users() -> StreamingProblem {
    StreamingProblem::from_rows(vec![vec![10, 0], vec![20, 0], vec![0, 70]]).unwrap()
}

/// The 2-artist, 3-user worked example with a heavily skewed third user.
pub fn two_artists_three_users() -> StreamingProblem {
    StreamingProblem::from_rows(vec![vec![1, 1, 1], vec![1, 1, 95]]).unwrap()
}

pub fn assert_close(actual: &[f64], expected: &[f64], tolerance: f64) {
    assert_eq!(
        actual.len(),
        expected.len(),
        "length mismatch: {actual:?} vs {expected:?}"
    );
    for (i, (&a, &e)) in actual.iter().zip(expected).enumerate() {
        assert!(
            (a - e).abs() <= tolerance,
            "component {i}: {a} vs {e} (tolerance {tolerance}, actual {actual:?}, expected {expected:?})"
        );
    }
}

/// Deterministic per-trial RNG.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, trial))
}

/// A random instance with dimensions sampled up to the given bounds.
pub fn random_instance(
    seed: u64,
    trial: u64,
    max_artists: usize,
    max_users: usize,
    max_streams: u64,
) -> StreamingProblem {
    let mut rng = trial_rng(seed, trial);
    let artists = rng.random_range(1..=max_artists);
    let users = rng.random_range(1..=max_users);
    generate_with_rng(&mut rng, artists, users, max_streams).unwrap()
}

/// A reallocation pair: a random instance, a coalition, and a second
/// instance where the coalition's streams are redistributed user by user
/// (preserving the coalition's per-user totals; rows outside are kept).
pub fn random_reallocation_pair(
    seed: u64,
    trial: u64,
) -> (StreamingProblem, StreamingProblem, Vec<usize>) {
    let mut rng = trial_rng(seed, trial);
    let artists = rng.random_range(1..=6);
    let users = rng.random_range(1..=6);
    let base = generate_with_rng(&mut rng, artists, users, 20).unwrap();

    let size = rng.random_range(1..=artists);
    let mut members: Vec<usize> = (0..artists).collect();
    for i in 0..size {
        let pick = rng.random_range(i..artists);
        members.swap(i, pick);
    }
    let mut coalition: Vec<usize> = members[..size].to_vec();
    coalition.sort_unstable();

    let mut rows: Vec<Vec<u64>> = (0..artists).map(|i| base.artist_row(i).to_vec()).collect();
    // Indexing is clearer than iterators here: each column touches several rows.
    #[allow(clippy::needless_range_loop)]
    for user in 0..users {
        let total: u64 = coalition.iter().map(|&i| rows[i][user]).sum();
        for &i in &coalition {
            rows[i][user] = 0;
        }
        for _ in 0..total {
            let target = coalition[rng.random_range(0..coalition.len())];
            rows[target][user] += 1;
        }
    }
    let reallocated =
        StreamingProblem::new(base.artists().to_vec(), base.users().to_vec(), rows).unwrap();
    (base, reallocated, coalition)
}
