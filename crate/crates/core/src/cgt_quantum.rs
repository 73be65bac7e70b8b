//! Quantum combinatorial group testing, simulated through the exact outcome
//! law of a single coherent query.
//!
//! A phase query on `S` followed by a Hadamard measurement of the `S`
//! register leaves amplitude `1 - 2^{1-m}` on `y = 0` and `-2^{1-m}` on every
//! other `y` supported on the `m` one-positions of `x` inside `S`; all other
//! outcomes have amplitude zero. [`measurement_sample`] draws from that law
//! exactly, so an index reported by a query is always a true one.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::oracles::CgtOracle;
use crate::BitString;

/// `P(y = 0) = (1 - 2^{1-m})²` for `m` ones inside the queried set.
pub fn zero_outcome_probability(m: u32) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let a = 1.0 - (1.0 - m as f64).exp2();
    a * a
}

/// Probability of each individual nonzero outcome, `2^{2-2m}`.
pub fn nonzero_outcome_probability(m: u32) -> f64 {
    if m == 0 {
        return 0.0;
    }
    (2.0 - 2.0 * m as f64).exp2()
}

/// Outcome law over the `2^m` patterns on the support, indexed by pattern
/// (bit `j` of the index is position `support[j]`).
pub fn outcome_distribution(m: u32) -> Result<Vec<f64>> {
    if m > 24 {
        return Err(param(format!("outcome table for m = {m} is too large")));
    }
    let mut p = vec![nonzero_outcome_probability(m); 1 << m];
    p[0] = zero_outcome_probability(m);
    Ok(p)
}

/// Draws the measured string over `[n]` for a query whose set meets the
/// hidden ones exactly at `support`.
///
/// Exact for every `m`: the amplitude square `(2^{m-1} - 1)²` of the zero
/// outcome against `4^{m-1}` is realised as "neither of two independent
/// `(m-1)`-bit words is all ones"; otherwise the outcome is uniform over the
/// nonzero patterns.
pub fn measurement_sample<R: Rng + ?Sized>(n: usize, support: &[usize], rng: &mut R) -> Result<BitString> {
    let mut y = BitString::zeros(n);
    let m = support.len();
    if let Some(&bad) = support.iter().find(|&&i| i >= n) {
        return Err(param(format!("support index {bad} out of range for length {n}")));
    }
    if m == 0 {
        return Ok(y);
    }
    let all_ones = |rng: &mut R| (0..m - 1).all(|_| rng.random::<bool>());
    let first = all_ones(rng);
    let second = all_ones(rng);
    if !(first || second) {
        return Ok(y);
    }
    let pattern = loop {
        let p = BitString::random(m, rng);
        if !p.is_zero() {
            break p;
        }
    };
    for j in pattern.iter_ones() {
        y.set(support[j], true);
    }
    Ok(y)
}

/// Solves CGT with the promise `|x| ≤ 1` using one query on `[n]`.
pub fn cgt_k1<R: Rng + ?Sized>(oracle: &mut CgtOracle, rng: &mut R) -> Result<BitString> {
    let all = BitString::ones(oracle.n());
    oracle.phase_query(&all, rng)
}

/// Progress of the general solver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CgtState {
    pub n: usize,
    pub k_bound: usize,
    /// Confirmed one-positions `I`.
    pub found: BitString,
    pub k_remaining: usize,
}

impl CgtState {
    pub fn new(n: usize, k_bound: usize) -> Self {
        Self {
            n,
            k_bound,
            found: BitString::zeros(n),
            k_remaining: k_bound,
        }
    }
}

/// One guess: query a random subset of `[n] \ I` keeping each position with
/// probability `1/k_guess`, and add the measured support to `I`.
/// Returns the newly found positions.
pub fn cgt_subroutine<R: Rng + ?Sized>(
    oracle: &mut CgtOracle,
    state: &mut CgtState,
    k_guess: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if k_guess == 0 {
        return Err(param("guess must be at least 1"));
    }
    let subset = sample_subset(&state.found, k_guess, rng)?;
    let y = oracle.phase_query(&subset, rng)?;
    let fresh: Vec<usize> = y.iter_ones().collect();
    state.found = state.found.or(&y);
    state.k_remaining = state.k_remaining.saturating_sub(fresh.len());
    Ok(fresh)
}

/// Positions outside `exclude`, each kept independently with probability `1/k_guess`.
fn sample_subset<R: Rng + ?Sized>(exclude: &BitString, k_guess: usize, rng: &mut R) -> Result<BitString> {
    let n = exclude.len();
    if k_guess == 1 {
        return Ok(exclude.complement());
    }
    let gaps = Geometric::new(1.0 / k_guess as f64).map_err(|e| param(e.to_string()))?;
    let mut subset = BitString::zeros(n);
    let mut i = gaps.sample(rng);
    while i < n as u64 {
        if !exclude.get(i as usize) {
            subset.set(i as usize, true);
        }
        i += 1 + gaps.sample(rng);
    }
    Ok(subset)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Abort with [`Error::QueryCap`] once this many queries are charged.
    pub query_cap: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { query_cap: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CgtRun {
    pub estimate: BitString,
    /// Full passes over the guess ladder, the final partial one included.
    pub cycles: u64,
}

/// Las Vegas solver for `|x| ≤ k`.
///
/// Verification queries on `[n] \ I` are issued once at the start and after
/// every guess that found something; the run ends when one returns 0. Each
/// cycle walks the guesses `1, 2, 4, …` up to the next power of two above
/// the number of ones still expected.
pub fn cgt_solve<R: Rng + ?Sized>(
    oracle: &mut CgtOracle,
    k: usize,
    rng: &mut R,
    options: SolveOptions,
) -> Result<CgtRun> {
    let n = oracle.n();
    let mut state = CgtState::new(n, k);
    let mut cycles = 0;
    if !oracle.verify(&state.found.complement())? {
        return Ok(CgtRun {
            estimate: state.found,
            cycles,
        });
    }
    loop {
        cycles += 1;
        let top = state.k_remaining.max(1).next_power_of_two();
        let mut guess = 1;
        while guess <= top {
            let fresh = cgt_subroutine(oracle, &mut state, guess, rng)?;
            if !fresh.is_empty() && !oracle.verify(&state.found.complement())? {
                return Ok(CgtRun {
                    estimate: state.found,
                    cycles,
                });
            }
            if oracle.ledger().total() >= options.query_cap {
                return Err(Error::QueryCap { cap: options.query_cap });
            }
            guess *= 2;
        }
    }
}
