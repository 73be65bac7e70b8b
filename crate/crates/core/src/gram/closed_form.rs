//! Distance-resolved entries of `√G` from the Krawtchouk closed form
//!
//! `r_d = 2^{-(n+k)/2} C(n,d)^{-1} Σ_z K_d^n(z) √(C(n,z) C(k,z))`.
//!
//! The sum alternates in sign. Every entry is first evaluated in scaled
//! `f64` with Neumaier summation; entries whose cancellation estimate breaks
//! the precision budget are recomputed in certified fixed point, where the
//! square roots are integer square roots and the only error is a one-unit
//! truncation per term.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{big_mantissa_exp, binom_row_big, ldexp, KrawtchoukRows};

const EPS: f64 = f64::EPSILON;

/// Probability mass below which an entry is irrelevant to every statistic we
/// report, so an uncertified relative error is not worth an alarm.
const NEGLIGIBLE_MASS: f64 = 1e-40;

/// How hard to try before flagging an entry of `√G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    /// Largest acceptable relative error bound on a single `r_d`.
    pub budget: f64,
    /// Recompute failing entries in fixed point instead of flagging them.
    pub escalate: bool,
    /// Cap on fixed-point precision, in bits.
    pub max_bits: u64,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            budget: 1e-10,
            escalate: true,
            max_bits: 8192,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Float,
    FixedPoint { bits: u64 },
}

/// One entry `r_d` of `√G` with its numerical pedigree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqrtGramEntry {
    pub d: u64,
    pub value: f64,
    /// `Σ|terms| / |Σ terms|` of the floating-point evaluation.
    pub cancellation: f64,
    /// Bound on `|computed - exact| / |exact|` for the returned value.
    pub rel_error_bound: f64,
    /// Bound on `|computed - exact|`; meaningful also when `exact = 0`.
    pub abs_error_bound: f64,
    pub route: Route,
    /// Set when `rel_error_bound` exceeds the budget and the entry's mass is
    /// not negligible.
    pub alarm: bool,
}

/// Shared per-`(n, k)` data for evaluating many `r_d`.
pub(crate) struct ClosedFormEvaluator {
    n: u64,
    k: u64,
    policy: PrecisionPolicy,
    /// `u_z = 2^{-(n+k)/2} √(C(n,z) C(k,z))` in `f64`, `z = 0..=k`.
    weights: Vec<f64>,
    choose_n: Vec<BigUint>,
    choose_k: Vec<BigUint>,
    /// `C(n,z) C(k,z)`, built on first escalation.
    products: Option<Vec<BigUint>>,
    rows: KrawtchoukRows,
    exhausted: bool,
}

impl ClosedFormEvaluator {
    pub(crate) fn new(n: u64, k: u64, policy: PrecisionPolicy) -> Self {
        debug_assert!(k <= n);
        let choose_n = binom_row_big(n);
        let choose_k = binom_row_big(k);
        let shift = (n + k) as i64;
        let weights = (0..=k as usize)
            .map(|z| {
                let (m1, e1) = big_mantissa_exp(&choose_n[z]);
                let (m2, e2) = big_mantissa_exp(&choose_k[z]);
                let e = e1 + e2 - shift;
                let odd = e.rem_euclid(2);
                ldexp((m1 * m2 * if odd == 1 { 2.0 } else { 1.0 }).sqrt(), e.div_euclid(2))
            })
            .collect();
        Self {
            n,
            k,
            policy,
            weights,
            choose_n,
            choose_k,
            products: None,
            rows: KrawtchoukRows::new(n, k),
            exhausted: false,
        }
    }

    /// `C(n,d) r²` from the exact binomial, so the weight adds no
    /// `lgamma`-sized error for large `n`.
    pub(crate) fn mass(&self, d: u64, value: f64) -> f64 {
        if value == 0.0 {
            return 0.0;
        }
        let (m, e) = big_mantissa_exp(&self.choose_n[d as usize]);
        let (vm, ve) = libm::frexp(value);
        ldexp(m * vm * vm, e + 2 * ve as i64)
    }

    /// Degree of the Krawtchouk row the next call to [`Self::next_entry`] uses.
    pub(crate) fn next_d(&self) -> u64 {
        self.rows.degree()
    }

    /// Evaluates `r_d` for the current degree and advances; `None` past `d = n`.
    pub(crate) fn next_entry(&mut self) -> Option<SqrtGramEntry> {
        if self.exhausted {
            return None;
        }
        let d = self.rows.degree();
        let entry = self.evaluate_current(d);
        self.exhausted = !self.rows.advance();
        Some(entry)
    }

    fn evaluate_current(&mut self, d: u64) -> SqrtGramEntry {
        let kvals = self.rows.current();
        let (m_c, e_c) = big_mantissa_exp(&self.choose_n[d as usize]);

        let mut sum = NeumaierSum::default();
        let mut abs_sum = 0.0;
        for (u, kv) in self.weights.iter().zip(kvals) {
            if kv.is_zero() || *u == 0.0 {
                continue;
            }
            let (mk, ek) = big_mantissa_exp(kv.magnitude());
            let mut t = ldexp(u * mk / m_c, ek - e_c);
            if kv.sign() == Sign::Minus {
                t = -t;
            }
            sum.add(t);
            abs_sum += t.abs();
        }
        let value = sum.total();
        let cancellation = if value == 0.0 {
            f64::INFINITY
        } else {
            abs_sum / value.abs()
        };
        let rel_error_bound = 8.0 * EPS * cancellation + 2.0 * EPS;

        let mut entry = SqrtGramEntry {
            d,
            value,
            cancellation,
            rel_error_bound,
            abs_error_bound: 8.0 * EPS * abs_sum + 2.0 * EPS * value.abs(),
            route: Route::Float,
            alarm: false,
        };
        if rel_error_bound <= self.policy.budget {
            return entry;
        }
        if self.policy.escalate {
            let start_bits = 64 + cancellation.log2().clamp(0.0, 4096.0).ceil() as u64 + 32;
            entry = self.fixed_point(d, start_bits, cancellation);
        }
        entry.alarm = entry.rel_error_bound > self.policy.budget
            && !self.negligible(d, entry.value.abs() + entry.abs_error_bound);
        entry
    }

    fn negligible(&self, d: u64, magnitude_bound: f64) -> bool {
        let weight = crate::combinatorics::binom(self.n, d);
        (weight * crate::LogReal::from_f64(magnitude_bound * magnitude_bound)).to_f64() < NEGLIGIBLE_MASS
    }

    fn fixed_point(&mut self, d: u64, start_bits: u64, cancellation: f64) -> SqrtGramEntry {
        if self.products.is_none() {
            self.products = Some(self.choose_n.iter().zip(&self.choose_k).map(|(a, b)| a * b).collect());
        }
        let products = self.products.as_ref().expect("built above");
        let top_bits = products.iter().map(|p| p.bits()).max().unwrap_or(1);
        let kvals = self.rows.current();
        let abs_k: BigUint = kvals.iter().map(|k| k.magnitude().clone()).sum();

        let mut bits = start_bits.max(96);
        loop {
            // Q_z = floor(√(W_z) · 2^s), with s chosen so the largest Q_z has `bits` bits.
            let s = bits as i64 - top_bits.div_ceil(2) as i64;
            let mut acc = BigInt::zero();
            for (w, kv) in products.iter().zip(kvals) {
                if kv.is_zero() {
                    continue;
                }
                let scaled = if s >= 0 {
                    w << (2 * s as u64)
                } else {
                    w >> (2 * (-s) as u64)
                };
                let q = BigInt::from(scaled.sqrt());
                acc += kv * q;
            }
            // |exact·2^s - acc| < Σ|K_d(z)|: each truncated root is off by less than one unit.
            let err_units = &abs_k;
            let certified = !acc.is_zero() && err_units < acc.magnitude();
            let rel = if certified {
                ratio(err_units, &(acc.magnitude() - err_units)) + 4.0 * EPS
            } else {
                f64::INFINITY
            };
            let value = self.unscale(d, s, &acc);
            let abs_error_bound = self.unscale(d, s, &BigInt::from(err_units.clone())) + 4.0 * EPS * value.abs();
            let done = rel <= self.policy.budget
                || bits >= self.policy.max_bits
                || self.negligible(d, value.abs() + abs_error_bound);
            if done {
                return SqrtGramEntry {
                    d,
                    value,
                    cancellation,
                    rel_error_bound: rel,
                    abs_error_bound,
                    route: Route::FixedPoint { bits },
                    alarm: false,
                };
            }
            bits = (bits * 2).min(self.policy.max_bits);
        }
    }

    /// `acc · 2^{-s} · 2^{-(n+k)/2} / C(n,d)` in `f64`.
    fn unscale(&self, d: u64, s: i64, acc: &BigInt) -> f64 {
        if acc.is_zero() {
            return 0.0;
        }
        let (m_s, e_s) = big_mantissa_exp(acc.magnitude());
        let (m_c, e_c) = big_mantissa_exp(&self.choose_n[d as usize]);
        let half = (self.n + self.k) as i64;
        let mut m = m_s / m_c;
        if half % 2 == 1 {
            m *= std::f64::consts::FRAC_1_SQRT_2;
        }
        let v = ldexp(m, e_s - s - half / 2 - e_c);
        if acc.is_negative() {
            -v
        } else {
            v
        }
    }
}

fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    let (mn, en) = big_mantissa_exp(num);
    let (md, ed) = big_mantissa_exp(den);
    ldexp(mn / md, en - ed)
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_digits() {
        let mut s = NeumaierSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.total(), 2.0);
    }
}
