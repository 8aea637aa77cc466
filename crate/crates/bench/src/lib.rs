//! Shared inputs for the benchmarks.

use nevkit::bounds::{case_seed, random_case, VerificationCase, DEFAULT_TOL};

/// Seed used for every benchmark case.
pub const BENCH_SEED: u64 = 2024;

/// The first `n` cases of the seeded suite.
pub fn suite_cases(n: usize) -> Vec<VerificationCase> {
    (0..n).map(|i| random_case(case_seed(BENCH_SEED, i), DEFAULT_TOL)).collect()
}

/// First suite case whose integrator carries a Cantor part.
pub fn cantor_case() -> VerificationCase {
    (0..)
        .map(|i| random_case(case_seed(BENCH_SEED, i), DEFAULT_TOL))
        .find(|c| c.integrator.cantor().is_some())
        .expect("the generator adds Cantor parts half of the time")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_are_reproducible() {
        assert_eq!(suite_cases(3), suite_cases(3));
        assert!(cantor_case().integrator.cantor().is_some());
    }
}
