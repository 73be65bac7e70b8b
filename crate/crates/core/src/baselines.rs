//! Classical reference algorithms and counting lower bounds.

use serde::{Deserialize, Serialize};

use crate::combinatorics::binom;
use crate::error::{param, Result};
use crate::oracles::{CgtOracle, WildcardOracle, WildcardQuery};
use crate::BitString;

fn interval(n: usize, lo: usize, hi: usize) -> BitString {
    BitString::from_indices(n, lo..hi).expect("interval within range")
}

/// Adaptive CGT by repeated binary search for the leftmost unresolved one.
///
/// Probes the suffix after the last found one; on a positive answer halves
/// the suffix by prefix queries until a single position remains. Stops once
/// `k` ones are known or a probe comes back empty, so at most
/// `k(⌈log₂ n⌉ + 1) + 1` queries.
pub fn cgt_classical(oracle: &mut CgtOracle, k: usize) -> Result<BitString> {
    let n = oracle.n();
    let mut found = BitString::zeros(n);
    let mut start = 0;
    let mut count = 0;
    while count < k && start < n {
        if !oracle.query(&interval(n, start, n))? {
            break;
        }
        let (mut lo, mut hi) = (start, n);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if oracle.query(&interval(n, lo, mid))? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        found.set(lo, true);
        count += 1;
        start = lo + 1;
    }
    Ok(found)
}

/// Reads every bit with a singleton query; exactly `n` queries.
pub fn classical_wildcards(oracle: &mut WildcardOracle) -> Result<BitString> {
    let n = oracle.n();
    let mut x = BitString::zeros(n);
    for i in 0..n {
        let zero = oracle.query(&WildcardQuery::from_assignments(n, [(i, false)])?)?;
        x.set(i, !zero);
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: u64,
    pub k: u64,
    /// `log₂ C(n,k)`: each classical CGT answer is one bit.
    pub classical_cgt_lb: f64,
    pub classical_wildcards_lb: f64,
    pub quantum_sww_lb: f64,
}

pub fn info_bounds(n: u64, k: u64) -> Result<BoundReport> {
    if k > n {
        return Err(param(format!("k = {k} exceeds n = {n}")));
    }
    Ok(BoundReport {
        n,
        k,
        classical_cgt_lb: binom(n, k).ln_abs() / std::f64::consts::LN_2,
        classical_wildcards_lb: n as f64,
        quantum_sww_lb: (n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::binom_big;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn classical_cgt_examples() {
        let mut o = CgtOracle::new(BitString::zeros(1024));
        assert!(cgt_classical(&mut o, 4).unwrap().is_zero());
        assert_eq!(o.ledger().total(), 1);

        for i in [0, 1, 511, 1023] {
            let x = BitString::from_indices(1024, [i]).unwrap();
            let mut o = CgtOracle::new(x.clone());
            assert_eq!(cgt_classical(&mut o, 1).unwrap(), x);
            assert!(o.ledger().total() <= 11);
        }
    }

    #[test]
    fn classical_cgt_respects_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for trial in 0..100 {
            let k = 16;
            let w = if trial % 2 == 0 { k } else { trial % k };
            let x = BitString::random_with_weight(1024, w, &mut rng).unwrap();
            let mut o = CgtOracle::new(x.clone());
            assert_eq!(cgt_classical(&mut o, k).unwrap(), x);
            assert!(o.ledger().total() <= 16 * 11 + 1);
        }
    }

    #[test]
    fn classical_wildcards_reads_everything() {
        let mut o = WildcardOracle::new(BitString::ones(20));
        assert_eq!(classical_wildcards(&mut o).unwrap(), BitString::ones(20));
        assert_eq!(o.ledger().wildcard, 20);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = BitString::random(64, &mut rng);
        let mut o = WildcardOracle::new(x.clone());
        assert_eq!(classical_wildcards(&mut o).unwrap(), x);
        assert_eq!(o.ledger().total(), 64);
    }

    #[test]
    fn bounds() {
        assert_eq!(info_bounds(50, 0).unwrap().classical_cgt_lb, 0.0);
        let r = info_bounds(1024, 16).unwrap();
        let exact = binom_big(1024, 16);
        let exact_log2 = exact.bits() as f64 - 1.0
            + ((&exact >> (exact.bits() - 53)).to_string().parse::<f64>().unwrap() / 2f64.powi(52)).log2();
        assert!((r.classical_cgt_lb - exact_log2).abs() < 1e-9);
        for n in 1..=300u64 {
            for k in 1..=n / 2 {
                let b = info_bounds(n, k).unwrap();
                assert!(b.classical_cgt_lb >= k as f64 * (n as f64 / k as f64).log2() - 1e-9);
                assert!(b.classical_cgt_lb <= n as f64);
            }
        }
        assert!(info_bounds(3, 4).is_err());
    }
}
