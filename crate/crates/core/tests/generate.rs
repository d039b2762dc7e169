mod common;

use streamclaims::{derive_seed, generate_random_problem, stream_stats};

#[test]
fn same_seed_reproduces_the_matrix() {
    let a = generate_random_problem(42, 5, 7, 20).unwrap();
    let b = generate_random_problem(42, 5, 7, 20).unwrap();
    assert_eq!(a, b);

    let c = generate_random_problem(43, 5, 7, 20).unwrap();
    assert_ne!(a, c);
}

#[test]
fn every_user_streams_something() {
    for seed in 0..200 {
        let problem = generate_random_problem(seed, 1, 6, 3).unwrap();
        let stats = stream_stats(&problem);
        assert!(stats.user_totals.iter().all(|&total| total > 0));
        // Single artist: the whole matrix is one row, so the artist holds
        // every stream.
        assert_eq!(
            stats.artist_totals[0],
            stats.user_totals.iter().sum::<u64>()
        );
    }
}

#[test]
fn total_streams_cover_the_user_count() {
    for seed in 0..200 {
        let problem = generate_random_problem(derive_seed(7, seed), 4, 9, 5).unwrap();
        let stats = stream_stats(&problem);
        let grand: u64 = stats.artist_totals.iter().sum();
        assert!(grand >= problem.user_count() as u64);
    }
}

#[test]
fn entries_respect_the_bound() {
    let problem = generate_random_problem(17, 6, 6, 4).unwrap();
    for i in 0..problem.artist_count() {
        assert!(problem.artist_row(i).iter().all(|&count| count <= 4));
    }
}
