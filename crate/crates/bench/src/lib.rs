//! Shared inputs for the pipeline benchmarks.

use specfactor::numtheory::sieve;

/// Natural logs of the first `count` primes.
pub fn log_prime_targets(count: usize) -> Vec<f64> {
    sieve(count)
        .expect("benchmark sizes stay under the sieve cap")
        .into_iter()
        .map(|p| (p as f64).ln())
        .collect()
}
