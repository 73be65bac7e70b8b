use serde::Serialize;

use super::gram_entry;
use crate::combinatorics::{binom_f64, wht_in_place};
use crate::error::{param, Error, Result};

/// Largest `n` the full `2^n` route accepts.
pub const BRUTE_FORCE_MAX_N: u64 = 24;

/// Eigenvalues within this distance of zero are rounding noise. The smallest
/// genuinely nonzero one for `n <= 24` is `2^{n-k}/C(n,k) > 3e-7`.
const EIGEN_NOISE: f64 = 1e-9;

/// `√G` computed as a matrix function over the whole cube `{0,1}^n`.
#[derive(Debug, Clone, Serialize)]
pub struct BruteForcePgm {
    pub n: u64,
    pub k: u64,
    /// `λ(s)` read at `s = 1^w 0^{n-w}`.
    pub eigenvalues_by_weight: Vec<f64>,
    /// `√G_{0y}` read at `y = 1^d 0^{n-d}`.
    pub sqrt_g_by_distance: Vec<f64>,
    /// Largest deviation of `√G_{0y}` from its weight-class representative.
    pub class_spread: f64,
}

impl BruteForcePgm {
    pub fn distance_probabilities(&self) -> Vec<f64> {
        self.sqrt_g_by_distance
            .iter()
            .enumerate()
            .map(|(d, r)| binom_f64(self.n, d as u64) * r * r)
            .collect()
    }

    pub fn expected_distance(&self) -> f64 {
        self.distance_probabilities()
            .iter()
            .enumerate()
            .map(|(d, p)| d as f64 * p)
            .sum()
    }

    pub fn success_probability(&self) -> f64 {
        self.sqrt_g_by_distance[0].powi(2)
    }
}

/// Realizes `√G` directly: the Gram row is transformed to its spectrum, the
/// spectrum is square-rooted entrywise and transformed back.
pub fn brute_force_pgm(n: u64, k: u64) -> Result<BruteForcePgm> {
    if k > n {
        return Err(param(format!("k = {k} exceeds n = {n}")));
    }
    if n > BRUTE_FORCE_MAX_N {
        return Err(param(format!(
            "brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let size = 1usize << n;
    let row: Vec<f64> = (0..=n).map(|d| gram_entry(n, k, d)).collect::<Result<_>>()?;
    let mut v: Vec<f64> = (0..size).map(|x| row[x.count_ones() as usize]).collect();

    wht_in_place(&mut v)?;
    let at_weight = |w: u64| (1usize << w) - 1;
    let eigenvalues_by_weight: Vec<f64> = (0..=n).map(|w| v[at_weight(w)]).collect();
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -EIGEN_NOISE {
        return Err(Error::Consistency(format!(
            "Gram matrix for n = {n}, k = {k} has eigenvalue {min:e}"
        )));
    }

    for x in v.iter_mut() {
        *x = if *x <= EIGEN_NOISE { 0.0 } else { x.sqrt() };
    }
    wht_in_place(&mut v)?;
    let scale = 1.0 / size as f64;
    for x in v.iter_mut() {
        *x *= scale;
    }

    let sqrt_g_by_distance: Vec<f64> = (0..=n).map(|d| v[at_weight(d)]).collect();
    let class_spread = v
        .iter()
        .enumerate()
        .map(|(x, &r)| (r - sqrt_g_by_distance[x.count_ones() as usize]).abs())
        .fold(0.0, f64::max);

    Ok(BruteForcePgm {
        n,
        k,
        eigenvalues_by_weight,
        sqrt_g_by_distance,
        class_spread,
    })
}
