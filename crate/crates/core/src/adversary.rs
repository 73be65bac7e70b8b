//! The weighted adversary bound for search with wildcards, by enumeration.
//!
//! Weights: `w(x, y) = 1` when `d(x, y) = 1`, so `wt(x) = n`, and
//! `w'(x, y, q) = w(x, y)`. A query `q = (S, t)` answers 1 on `x` iff
//! `x_S = t`. For each `x` and `q`, `v(x, q)` counts the neighbours of `x`
//! on which `q` answers differently; the bound is the minimum of
//! `√(wt(x) wt(y) / (v(x,q) v(y,q)))` over neighbours whose answers differ.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::BitString;

/// Largest `n` the `6^n`-sized enumeration accepts.
pub const ADVERSARY_MAX_N: usize = 10;

/// `v(x, q)` by the case split: `|S|` if `q` accepts `x`, 1 if exactly one
/// position of `S` disagrees with `t`, else 0.
fn v_by_cases(x: u32, s: u32, t: u32) -> u32 {
    match ((x ^ t) & s).count_ones() {
        0 => s.count_ones(),
        1 => 1,
        _ => 0,
    }
}

/// `w(x, y)`: 1 on Hamming neighbours.
fn weight(x: u32, y: u32) -> u32 {
    ((x ^ y).count_ones() == 1) as u32
}

/// `w'(x, y, q)`, taken equal to `w(x, y)` for every query.
fn w_prime(x: u32, y: u32) -> u32 {
    weight(x, y)
}

fn accepts(x: u32, s: u32, t: u32) -> bool {
    (x ^ t) & s == 0
}

/// `v(x, q)` by counting neighbours with a different answer.
fn v_by_count(n: usize, x: u32, s: u32, t: u32) -> u32 {
    let a = accepts(x, s, t);
    (0..n).filter(|&i| accepts(x ^ (1 << i), s, t) != a).count() as u32
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub x: BitString,
    pub y: BitString,
    pub subset: BitString,
    pub pattern: BitString,
    pub v_x: u32,
    pub v_y: u32,
    pub accepts_x: bool,
    pub accepts_y: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryReport {
    pub n: usize,
    pub bound: f64,
    pub argmin_witness: Witness,
    /// Number of `(x, y, q)` triples attaining the minimum.
    pub minimizers: u64,
    /// Whether every minimizing triple queries all of `[n]` and is accepted
    /// on one side.
    pub minimizers_full_and_accepting: bool,
    /// Triples with `w > 0` and differing answers.
    pub pairs_checked: u64,
    /// Triples where the case split and the direct count of `v` disagree.
    pub v_mismatches: u64,
    /// Triples violating `w'(x,y,q) w'(y,x,q) ≥ w(x,y)²` or symmetry.
    pub weight_violations: u64,
}

/// Partial result over some queries; merged associatively.
#[derive(Debug, Clone)]
struct Partial {
    /// Largest `v(x,q) v(y,q)`, i.e. smallest ratio, with its witness key.
    best: Option<(u64, (u32, u32, u32, u32))>,
    minimizers: u64,
    full_and_accepting: bool,
    pairs: u64,
    v_mismatches: u64,
    weight_violations: u64,
}

impl Partial {
    fn empty() -> Self {
        Self {
            best: None,
            minimizers: 0,
            full_and_accepting: true,
            pairs: 0,
            v_mismatches: 0,
            weight_violations: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.pairs += other.pairs;
        self.v_mismatches += other.v_mismatches;
        self.weight_violations += other.weight_violations;
        match (self.best, other.best) {
            (_, None) => {}
            (None, Some(_)) => {
                self.best = other.best;
                self.minimizers = other.minimizers;
                self.full_and_accepting = other.full_and_accepting;
            }
            (Some((p, key)), Some((q, okey))) => {
                if q > p || (q == p && okey < key) {
                    self.best = Some((q, okey));
                }
                if q > p {
                    self.minimizers = other.minimizers;
                    self.full_and_accepting = other.full_and_accepting;
                } else if q == p {
                    self.minimizers += other.minimizers;
                    self.full_and_accepting &= other.full_and_accepting;
                }
            }
        }
        self
    }
}

fn scan_subset(n: usize, s: u32) -> Partial {
    let mut part = Partial::empty();
    let full = s.count_ones() as usize == n;
    let mut t = 0u32;
    loop {
        for x in 0..1u32 << n {
            let vx = v_by_cases(x, s, t);
            if vx != v_by_count(n, x, s, t) {
                part.v_mismatches += 1;
            }
            let ax = accepts(x, s, t);
            for i in 0..n {
                let y = x ^ (1 << i);
                let ay = accepts(y, s, t);
                if ax == ay {
                    continue;
                }
                let vy = v_by_cases(y, s, t);
                if vx == 0 || vy == 0 {
                    continue;
                }
                part.pairs += 1;
                let (w_xy, w_yx) = (w_prime(x, y), w_prime(y, x));
                if w_xy != w_yx || w_xy * w_yx < weight(x, y).pow(2) {
                    part.weight_violations += 1;
                }
                let prod = vx as u64 * vy as u64;
                let key = (s, t, x, y);
                let hit = full && (ax || ay);
                match part.best {
                    Some((p, k)) if prod == p => {
                        part.minimizers += 1;
                        part.full_and_accepting &= hit;
                        if key < k {
                            part.best = Some((prod, key));
                        }
                    }
                    Some((p, _)) if prod < p => {}
                    _ => {
                        part.best = Some((prod, key));
                        part.minimizers = 1;
                        part.full_and_accepting = hit;
                    }
                }
            }
        }
        if t == s {
            break;
        }
        t = (t.wrapping_sub(s)) & s;
    }
    part
}

/// Evaluates the bound over all `3^n` queries and `2^n` inputs.
pub fn adversary_report(n: usize) -> Result<AdversaryReport> {
    if n == 0 {
        return Err(param("adversary bound needs n >= 1"));
    }
    if n > ADVERSARY_MAX_N {
        return Err(param(format!("enumeration limited to n <= {ADVERSARY_MAX_N}, got {n}")));
    }
    let total = (0..1u32 << n)
        .into_par_iter()
        .map(|s| scan_subset(n, s))
        .reduce(Partial::empty, Partial::merge);
    let (prod, (s, t, x, y)) = total
        .best
        .ok_or_else(|| Error::Consistency("no pair with differing answers".into()))?;
    let bits = |v: u32| BitString::from_u64(n, v as u64);
    Ok(AdversaryReport {
        n,
        bound: n as f64 / (prod as f64).sqrt(),
        argmin_witness: Witness {
            x: bits(x),
            y: bits(y),
            subset: bits(s),
            pattern: bits(t),
            v_x: v_by_cases(x, s, t),
            v_y: v_by_cases(y, s, t),
            accepts_x: accepts(x, s, t),
            accepts_y: accepts(y, s, t),
        },
        minimizers: total.minimizers,
        minimizers_full_and_accepting: total.full_and_accepting,
        pairs_checked: total.pairs,
        v_mismatches: total.v_mismatches,
        weight_violations: total.weight_violations,
    })
}

pub fn adversary_bound(n: usize) -> Result<f64> {
    Ok(adversary_report(n)?.bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(adversary_bound(1).unwrap(), 1.0);
        assert_eq!(adversary_bound(4).unwrap(), 2.0);
        for n in 2..=7 {
            let r = adversary_report(n).unwrap();
            assert!((r.bound - (n as f64).sqrt()).abs() <= 1e-12);
            assert_eq!(r.v_mismatches, 0);
            assert_eq!(r.weight_violations, 0);
            assert!(r.minimizers_full_and_accepting);
            assert_eq!(r.argmin_witness.subset, BitString::ones(n));
        }
    }

    #[test]
    fn counts_match_closed_form() {
        // Each accepted (x, q) pairs with |S| neighbours: Σ_S 2^{|S|} 2^{n-|S|} |S| ordered both ways.
        let n = 5;
        let r = adversary_report(n).unwrap();
        let expected: u64 = (0..=n as u64)
            .map(|s| crate::combinatorics::binom_exact(n as u64, s).unwrap() as u64 * (1 << n) * s * 2)
            .sum();
        assert_eq!(r.pairs_checked, expected);
    }

    #[test]
    fn rejects_out_of_budget() {
        assert!(adversary_report(0).is_err());
        assert!(adversary_report(11).is_err());
    }

    #[test]
    fn submask_walk_covers_all_patterns() {
        let s = 0b1011u32;
        let mut seen = vec![];
        let mut t = 0u32;
        loop {
            seen.push(t);
            if t == s {
                break;
            }
            t = t.wrapping_sub(s) & s;
        }
        seen.sort();
        assert_eq!(seen, [0, 1, 2, 3, 8, 9, 10, 11]);
    }
}
