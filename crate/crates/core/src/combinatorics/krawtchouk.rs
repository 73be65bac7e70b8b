use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::binomial::binom_big;
use crate::error::{param, Result};

/// `K_k^n(x)` for `0 ≤ k, x ≤ n`, by the three-term recurrence in `k`:
/// `(k+1) K_{k+1}(x) = (n - 2x) K_k(x) - (n - k + 1) K_{k-1}(x)`.
pub fn krawtchouk(n: u64, k: u64, x: u64) -> Result<BigInt> {
    check_domain(n, k, x)?;
    Ok(krawtchouk_by_degree(n, x, k).pop().expect("nonempty"))
}

/// Direct alternating sum `Σ_i (-1)^i C(x, i) C(n-x, k-i)`.
pub fn krawtchouk_direct(n: u64, k: u64, x: u64) -> Result<BigInt> {
    check_domain(n, k, x)?;
    let mut acc = BigInt::zero();
    for i in 0..=k.min(x) {
        let term = BigInt::from(binom_big(x, i) * binom_big(n - x, k - i));
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// `K_0^n(x), …, K_{kmax}^n(x)` at one point `x`.
pub fn krawtchouk_by_degree(n: u64, x: u64, kmax: u64) -> Vec<BigInt> {
    assert!(x <= n && kmax <= n);
    let mut out = Vec::with_capacity(kmax as usize + 1);
    let mut prev = BigInt::zero();
    let mut cur = BigInt::one();
    let slope = BigInt::from(n as i64 - 2 * x as i64);
    for k in 0..=kmax {
        out.push(cur.clone());
        if k == kmax {
            break;
        }
        let next = (&slope * &cur - BigInt::from(n - k + 1) * &prev) / BigInt::from(k + 1);
        prev = std::mem::replace(&mut cur, next);
    }
    out
}

/// Streams the polynomials `K_d^n(·)` degree by degree, each evaluated on
/// `x = 0..=xmax`.
///
/// Each step applies the recurrence pointwise, so degree `d` costs
/// `O(xmax)` integer operations on values bounded by `C(n, d)`.
#[derive(Debug, Clone)]
pub struct KrawtchoukRows {
    n: u64,
    degree: u64,
    prev: Vec<BigInt>,
    cur: Vec<BigInt>,
}

impl KrawtchoukRows {
    pub fn new(n: u64, xmax: u64) -> Self {
        assert!(xmax <= n);
        let len = xmax as usize + 1;
        Self {
            n,
            degree: 0,
            prev: vec![BigInt::zero(); len],
            cur: vec![BigInt::one(); len],
        }
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    /// Values of the current degree.
    pub fn current(&self) -> &[BigInt] {
        &self.cur
    }

    /// Advances to the next degree; `false` once degree `n` has been passed.
    pub fn advance(&mut self) -> bool {
        if self.degree >= self.n {
            return false;
        }
        let d = self.degree;
        let n = self.n;
        let back = BigInt::from(n - d + 1);
        let denom = BigInt::from(d + 1);
        let next: Vec<BigInt> = self
            .cur
            .iter()
            .zip(&self.prev)
            .enumerate()
            .map(|(x, (c, p))| {
                let slope = BigInt::from(n as i64 - 2 * x as i64);
                (slope * c - &back * p) / &denom
            })
            .collect();
        self.prev = std::mem::replace(&mut self.cur, next);
        self.degree += 1;
        true
    }
}

/// All values `K_k^n(x)`, `0 ≤ k, x ≤ n`, as exact integers.
#[derive(Debug, Clone, PartialEq)]
pub struct KrawtchoukTable {
    n: u64,
    // row-major by degree k
    values: Vec<BigInt>,
}

impl KrawtchoukTable {
    pub fn new(n: u64) -> Self {
        let mut rows = KrawtchoukRows::new(n, n);
        let mut values = Vec::with_capacity(((n + 1) * (n + 1)) as usize);
        loop {
            values.extend_from_slice(rows.current());
            if !rows.advance() {
                break;
            }
        }
        Self { n, values }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn get(&self, k: u64, x: u64) -> &BigInt {
        assert!(k <= self.n && x <= self.n, "Krawtchouk index out of range");
        &self.values[(k * (self.n + 1) + x) as usize]
    }
}

fn check_domain(n: u64, k: u64, x: u64) -> Result<()> {
    if k > n || x > n {
        return Err(param(format!("Krawtchouk K_{k}^{n}({x}) needs k, x <= n")));
    }
    Ok(())
}
