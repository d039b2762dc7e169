//! Seeded random instance generation.
//!
//! Everything here is deterministic for a fixed seed: instances derive from
//! a ChaCha stream, and trial seeds derive from a base seed with a mixing
//! function, so trials can run in parallel and still merge reproducibly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::streaming::StreamingProblem;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A well-mixed per-index seed from a base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Folds a word sequence into a single seed.
pub(crate) fn hash_words(seed: u64, words: impl IntoIterator<Item = u64>) -> u64 {
    let mut state = splitmix64(seed ^ 0xA076_1D64_78BD_642F);
    for word in words {
        state = splitmix64(state ^ word.wrapping_add(0x9E37_79B9_7F4A_7C15));
    }
    state
}

/// A random problem with entries uniform in `0..=max_streams`; columns are
/// resampled until every user has streamed something. Artists are labelled
/// `a1..aN` and users `u1..uM`.
pub fn generate_random_problem(
    seed: u64,
    artists: usize,
    users: usize,
    max_streams: u64,
) -> Result<StreamingProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with_rng(&mut rng, artists, users, max_streams)
}

/// Same as [`generate_random_problem`], drawing from a caller-owned stream.
pub fn generate_with_rng(
    rng: &mut impl Rng,
    artists: usize,
    users: usize,
    max_streams: u64,
) -> Result<StreamingProblem> {
    if artists == 0 || users == 0 {
        return Err(Error::Validation(
            "at least one artist and one user are required".into(),
        ));
    }
    if max_streams == 0 {
        return Err(Error::Validation("max streams must be at least 1".into()));
    }
    let mut rows = vec![vec![0u64; users]; artists];
    for user in 0..users {
        loop {
            let mut column_sum = 0u64;
            for row in rows.iter_mut() {
                let count = rng.random_range(0..=max_streams);
                row[user] = count;
                column_sum += count;
            }
            if column_sum > 0 {
                break;
            }
        }
    }
    let artist_ids = (1..=artists).map(|i| format!("a{i}")).collect();
    let user_ids = (1..=users).map(|j| format!("u{j}")).collect();
    StreamingProblem::new(artist_ids, user_ids, rows)
}
