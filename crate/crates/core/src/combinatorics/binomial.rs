use std::cmp::Ordering;
use std::f64::consts::LN_2;
use std::ops::{Div, Mul};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Largest `n` served by the exact `u128` binomial path.
pub const EXACT_BINOM_MAX_N: u64 = 64;

/// A real number stored as a sign and the natural log of its magnitude.
///
/// Used for binomials and eigenvalues whose magnitudes overflow `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogReal {
    sign: i8,
    ln_abs: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };
    pub const ONE: LogReal = LogReal { sign: 1, ln_abs: 0.0 };

    /// Builds from a sign and a log-magnitude. A zero sign yields zero.
    pub fn new(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogReal {
                sign: sign.signum(),
                ln_abs,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogReal {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    /// `2^e` for a possibly fractional exponent.
    pub fn pow2(e: f64) -> Self {
        LogReal {
            sign: 1,
            ln_abs: e * LN_2,
        }
    }

    pub fn from_biguint(x: &BigUint) -> Self {
        if x.is_zero() {
            return Self::ZERO;
        }
        let (m, e) = big_mantissa_exp(x);
        LogReal {
            sign: 1,
            ln_abs: m.ln() + e as f64 * LN_2,
        }
    }

    pub fn from_bigint(x: &BigInt) -> Self {
        let mag = Self::from_biguint(x.magnitude());
        match x.sign() {
            Sign::Minus => -mag,
            _ => mag,
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Natural log of `|self|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    pub fn abs(self) -> Self {
        LogReal {
            sign: self.sign.abs(),
            ..self
        }
    }

    /// Square root of a nonnegative value. Panics on a negative input.
    pub fn sqrt(self) -> Self {
        assert!(self.sign >= 0, "sqrt of a negative LogReal");
        LogReal {
            sign: self.sign,
            ln_abs: 0.5 * self.ln_abs,
        }
    }

    pub fn powf(self, p: f64) -> Self {
        assert!(self.sign >= 0, "powf of a negative LogReal");
        if self.sign == 0 {
            return if p == 0.0 { Self::ONE } else { Self::ZERO };
        }
        LogReal {
            sign: 1,
            ln_abs: p * self.ln_abs,
        }
    }

    /// Sum of many nonnegative values via a shifted log-sum-exp.
    pub fn sum_nonneg<I: IntoIterator<Item = LogReal>>(values: I) -> Self {
        let vals: Vec<LogReal> = values.into_iter().filter(|v| !v.is_zero()).collect();
        assert!(vals.iter().all(|v| v.sign > 0), "sum_nonneg given a negative term");
        let Some(max) = vals.iter().map(|v| v.ln_abs).max_by(f64::total_cmp) else {
            return Self::ZERO;
        };
        let s: f64 = vals.iter().map(|v| (v.ln_abs - max).exp()).sum();
        LogReal {
            sign: 1,
            ln_abs: max + s.ln(),
        }
    }
}

/// Sum of two values, computed without leaving log space.
impl std::ops::Add for LogReal {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (small.ln_abs - big.ln_abs).exp();
        if big.sign == small.sign {
            LogReal {
                sign: big.sign,
                ln_abs: big.ln_abs + ratio.ln_1p(),
            }
        } else if ratio == 1.0 {
            Self::ZERO
        } else {
            LogReal {
                sign: big.sign,
                ln_abs: big.ln_abs + (-ratio).ln_1p(),
            }
        }
    }
}

impl std::ops::Neg for LogReal {
    type Output = LogReal;
    fn neg(self) -> LogReal {
        LogReal {
            sign: -self.sign,
            ..self
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        LogReal {
            sign: self.sign * rhs.sign,
            ln_abs: self.ln_abs + rhs.ln_abs,
        }
    }
}

impl Div for LogReal {
    type Output = LogReal;
    fn div(self, rhs: LogReal) -> LogReal {
        assert!(rhs.sign != 0, "division by a zero LogReal");
        if self.sign == 0 {
            return Self::ZERO;
        }
        LogReal {
            sign: self.sign * rhs.sign,
            ln_abs: self.ln_abs - rhs.ln_abs,
        }
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.ln_abs.partial_cmp(&other.ln_abs),
                _ => other.ln_abs.partial_cmp(&self.ln_abs),
            },
            ord => Some(ord),
        }
    }
}

/// `C(n, k)`; zero when `k > n`.
///
/// Values with `n ≤ 64` go through the exact integer path, larger ones
/// through log-gamma.
pub fn binom(n: u64, k: u64) -> LogReal {
    if k > n {
        return LogReal::ZERO;
    }
    match binom_exact(n, k) {
        Some(v) => LogReal::from_f64(v as f64),
        None => binom_lgamma(n, k),
    }
}

/// Exact `C(n, k)` for `n ≤ 64`, `None` above that.
pub fn binom_exact(n: u64, k: u64) -> Option<u128> {
    if n > EXACT_BINOM_MAX_N {
        return None;
    }
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) stays below 2^128 for n ≤ 64, and the division is exact.
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    Some(acc)
}

/// `C(n, k)` via `lgamma`, valid for any size.
pub fn binom_lgamma(n: u64, k: u64) -> LogReal {
    if k > n {
        return LogReal::ZERO;
    }
    if k == 0 || k == n {
        return LogReal::ONE;
    }
    let lg = |x: u64| libm::lgamma(x as f64 + 1.0);
    LogReal::new(1, lg(n) - lg(k) - lg(n - k))
}

/// `C(n, k)` as `f64`; may be `inf` for very large arguments.
pub fn binom_f64(n: u64, k: u64) -> f64 {
    match binom_exact(n, k) {
        Some(v) => v as f64,
        None => binom(n, k).to_f64(),
    }
}

/// Exact `C(n, k)` as an arbitrary-precision integer.
pub fn binom_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, z)` for `z = 0..=n` by the multiplicative recurrence.
pub fn binom_row_big(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut cur = BigUint::one();
    for z in 0..=n {
        row.push(cur.clone());
        if z < n {
            cur *= n - z;
            cur /= z + 1;
        }
    }
    row
}

/// Splits a nonzero integer into `(m, e)` with `x ≈ m · 2^e` and `m ∈ [1, 2)`,
/// `m` correctly rounded from the leading bits.
pub fn big_mantissa_exp(x: &BigUint) -> (f64, i64) {
    assert!(!x.is_zero(), "mantissa of zero");
    let bits = x.bits();
    if bits <= 64 {
        let v = x.iter_u64_digits().next().unwrap_or(0);
        // v as f64 is correctly rounded and may round up to 2^bits.
        let e = bits as i64 - 1;
        let m = v as f64 / 2f64.powi(e as i32);
        return if m >= 2.0 { (m / 2.0, e + 1) } else { (m, e) };
    }
    let shift = bits - 64;
    let top: u64 = (x >> shift).iter_u64_digits().next().unwrap_or(0);
    // Sticky bit so the u64 -> f64 rounding sees whether anything was dropped.
    let dropped = x.trailing_zeros().is_some_and(|tz| tz < shift);
    let top = top | u64::from(dropped);
    let f = top as f64 / 2f64.powi(63);
    if f >= 2.0 {
        (f / 2.0, shift as i64 + 64)
    } else {
        (f, shift as i64 + 63)
    }
}

/// `big` as `f64` scaled by `2^scale`, exact up to one rounding. Underflows to
/// zero and overflows to infinity like `ldexp`.
pub fn big_to_f64_scaled(x: &BigInt, scale: i64) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let (m, e) = big_mantissa_exp(x.magnitude());
    let v = ldexp(m, e + scale);
    if x.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

/// `m · 2^e` without intermediate overflow.
pub fn ldexp(m: f64, e: i64) -> f64 {
    let mut v = m;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
        if v.is_infinite() {
            return v;
        }
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
        if v == 0.0 {
            return v;
        }
    }
    v * 2f64.powi(e as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u64) -> BigUint {
        (1..=n).fold(BigUint::one(), |acc, i| acc * i)
    }

    // Oracle: n! / (k! (n-k)!) in big integers, independent of the
    // multiplicative recurrence used by the implementation.
    fn binom_factorial_oracle(n: u64, k: u64) -> BigUint {
        factorial(n) / (factorial(k) * factorial(n - k))
    }

    #[test]
    fn small_values() {
        assert_eq!(binom_exact(4, 2), Some(6));
        assert_eq!(binom(4, 2).to_f64(), 6.0);
        for n in [0, 1, 7, 64, 500] {
            assert_eq!(binom(n, 0).to_f64(), 1.0);
        }
        assert!(binom(3, 4).is_zero());
        assert_eq!(binom_exact(3, 4), Some(0));
    }

    #[test]
    fn exact_path_matches_factorial_oracle() {
        let expected = binom_factorial_oracle(62, 31);
        assert_eq!(BigUint::from(binom_exact(62, 31).unwrap()), expected);
        assert_eq!(binom_big(62, 31), expected);
        for n in 0..=64 {
            for k in 0..=n {
                assert_eq!(BigUint::from(binom_exact(n, k).unwrap()), binom_factorial_oracle(n, k));
            }
        }
    }

    #[test]
    fn log_path_matches_exact_path() {
        for n in 0..=64u64 {
            for k in 0..=n {
                let exact = binom_exact(n, k).unwrap() as f64;
                let via_log = binom_lgamma(n, k).to_f64();
                let rel = (via_log - exact).abs() / exact;
                assert!(rel <= 1e-12, "C({n},{k}): rel err {rel:e}");
            }
        }
    }

    #[test]
    fn big_row_matches_pointwise() {
        let row = binom_row_big(100);
        for (z, v) in row.iter().enumerate() {
            assert_eq!(*v, binom_big(100, z as u64));
        }
    }

    #[test]
    fn mantissa_exponent_is_accurate() {
        let c = binom_big(4096, 2048);
        let (m, e) = big_mantissa_exp(&c);
        assert!((1.0..2.0).contains(&m));
        let ln_direct = binom_lgamma(4096, 2048).ln_abs();
        let ln_split = m.ln() + e as f64 * LN_2;
        assert!((ln_direct - ln_split).abs() < 1e-10);
        let small = BigUint::from(12345u32);
        let (m, e) = big_mantissa_exp(&small);
        assert_eq!(m * 2f64.powi(e as i32), 12345.0);
        assert_eq!(big_to_f64_scaled(&BigInt::from(-3), 2), -12.0);
    }

    #[test]
    fn logreal_arithmetic() {
        let a = LogReal::from_f64(3.0);
        let b = LogReal::from_f64(-5.0);
        assert!(((a + b).to_f64() + 2.0).abs() < 1e-14);
        assert!(((a * b).to_f64() + 15.0).abs() < 1e-13);
        assert!(((b / a).to_f64() + 5.0 / 3.0).abs() < 1e-15);
        assert!((a + -a).is_zero());
        assert!(LogReal::from_f64(0.0).is_zero());
        assert_eq!(LogReal::new(0, 1.0), LogReal::ZERO);
        assert!(b < a);
        assert!((LogReal::pow2(0.5).to_f64() - 2f64.sqrt()).abs() < 1e-15);
        let s = LogReal::sum_nonneg([1.0, 2.0, 3.0].map(LogReal::from_f64));
        assert!((s.to_f64() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn logreal_round_trip() {
        for x in [1e-300, -2.5, 7.0, 1e300, -1e-5] {
            let back = LogReal::from_f64(x).to_f64();
            assert!(((back - x) / x).abs() <= 1e-12, "{x}");
        }
    }
}
