//! Pretty Good Measurement statistics for the subset states
//! `|ψᵏₓ⟩ = C(n,k)^{-1/2} Σ_{|S|=k} |S⟩|x_S⟩`.
//!
//! The Gram matrix `G_xy = C(n - d(x,y), k) / C(n,k)` depends only on
//! `x ⊕ y`, so everything here is indexed by Hamming weight or distance:
//! eigenvalues `λ_w`, entries `r_d` of `√G`, and the PGM outcome law
//! `P(d) = C(n,d) r_d²` of the distance between guess and truth.
//!
//! Two independent routes give the expected distance `D_k`: directly from
//! the `r_d` (alternating Krawtchouk sums, see [`closed_form`]) and through the
//! weight-one Fourier coefficient of the outcome law, whose convolution form
//! only adds nonnegative terms. [`brute_force_pgm`] is the `2^n` oracle for
//! both.

mod brute;
mod closed_form;

use std::f64::consts::LN_2;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use brute::{brute_force_pgm, BruteForcePgm, BRUTE_FORCE_MAX_N};
pub use closed_form::{PrecisionPolicy, Route, SqrtGramEntry};

use crate::combinatorics::{binom, binom_exact, LogReal};
use crate::error::{param, Result};
use closed_form::{ClosedFormEvaluator, NeumaierSum};

/// Spectra up to this size carry every distance `0..=n`.
pub const FULL_ROW_MAX_N: u64 = 64;

/// Larger spectra stop once the undescribed probability mass is below this,
/// on top of the accumulated error bound of the described mass.
pub const TAIL_MASS_EPS: f64 = 1e-14;

fn check_nk(n: u64, k: u64) -> Result<()> {
    if k > n {
        return Err(param(format!("k = {k} exceeds n = {n}")));
    }
    Ok(())
}

/// `⟨ψᵏₓ|ψᵏ_y⟩ = C(n-d, k) / C(n, k)` for `d(x, y) = d`.
pub fn gram_entry(n: u64, k: u64, d: u64) -> Result<f64> {
    check_nk(n, k)?;
    if d > n {
        return Err(param(format!("distance {d} exceeds n = {n}")));
    }
    if d > n - k {
        return Ok(0.0);
    }
    if let (Some(num), Some(den)) = (binom_exact(n - d, k), binom_exact(n, k)) {
        return Ok(num as f64 / den as f64);
    }
    Ok((binom(n - d, k) / binom(n, k)).to_f64())
}

/// Eigenvalue of `G` at any `s` of weight `w`:
/// `λ_w = 2^{n-k} C(n-w, n-k) / C(n, k)`.
pub fn eigenvalue(n: u64, k: u64, w: u64) -> Result<f64> {
    Ok(eigenvalue_log(n, k, w)?.to_f64())
}

pub fn eigenvalue_log(n: u64, k: u64, w: u64) -> Result<LogReal> {
    check_nk(n, k)?;
    if w > n {
        return Err(param(format!("weight {w} exceeds n = {n}")));
    }
    if w > k {
        return Ok(LogReal::ZERO);
    }
    if let (Some(num), Some(den)) = (binom_exact(n - w, n - k), binom_exact(n, k)) {
        let v = 2f64.powi((n - k) as i32) * (num as f64 / den as f64);
        return Ok(LogReal::from_f64(v));
    }
    Ok(LogReal::pow2((n - k) as f64) * binom(n - w, n - k) / binom(n, k))
}

/// Single entry `r_d` of `√G` through the Krawtchouk closed form.
pub fn sqrt_gram_entry(n: u64, k: u64, d: u64, policy: PrecisionPolicy) -> Result<SqrtGramEntry> {
    check_nk(n, k)?;
    if d > n {
        return Err(param(format!("distance {d} exceeds n = {n}")));
    }
    if k == n {
        return Ok(identity_entry(d));
    }
    let mut eval = ClosedFormEvaluator::new(n, k, policy);
    while eval.next_d() < d {
        eval.next_entry();
    }
    Ok(eval.next_entry().expect("d <= n"))
}

fn identity_entry(d: u64) -> SqrtGramEntry {
    SqrtGramEntry {
        d,
        value: if d == 0 { 1.0 } else { 0.0 },
        cancellation: 1.0,
        rel_error_bound: 0.0,
        abs_error_bound: 0.0,
        route: Route::Float,
        alarm: false,
    }
}

/// Per-`(n, k)` eigenvalues and distance-resolved `√G` row.
///
/// Immutable once built; safe to share between simulation workers.
#[derive(Debug, Clone)]
pub struct GramSpectrum {
    n: u64,
    k: u64,
    lambda_by_weight: Vec<f64>,
    entries: Vec<SqrtGramEntry>,
    probs: Vec<f64>,
    tail_mass: f64,
}

impl GramSpectrum {
    pub fn compute(n: u64, k: u64) -> Result<Self> {
        Self::compute_with(n, k, PrecisionPolicy::default())
    }

    pub fn compute_with(n: u64, k: u64, policy: PrecisionPolicy) -> Result<Self> {
        check_nk(n, k)?;
        let lambda_by_weight = (0..=n).map(|w| eigenvalue(n, k, w)).collect::<Result<_>>()?;

        if k == n {
            return Ok(Self {
                n,
                k,
                lambda_by_weight,
                entries: (0..=n).map(identity_entry).collect(),
                probs: (0..=n).map(|d| if d == 0 { 1.0 } else { 0.0 }).collect(),
                tail_mass: 0.0,
            });
        }

        let mut eval = ClosedFormEvaluator::new(n, k, policy);
        let mut entries = Vec::new();
        let mut probs = Vec::new();
        let mut mass = NeumaierSum::default();
        // Bound on |computed mass - exact mass| of the entries seen so far.
        let mut mass_error = 0.0;
        while let Some(entry) = eval.next_entry() {
            let p = eval.mass(entry.d, entry.value);
            let rel = entry.rel_error_bound.min(1.0);
            mass.add(p);
            mass_error += p * (2.0 * rel + rel * rel + 4.0 * f64::EPSILON);
            entries.push(entry);
            probs.push(p);
            if n > FULL_ROW_MAX_N && 1.0 - mass.total() <= TAIL_MASS_EPS + mass_error {
                break;
            }
        }
        let tail_mass = if entries.len() as u64 == n + 1 {
            0.0
        } else {
            (1.0 - mass.total()).max(0.0)
        };
        Ok(Self {
            n,
            k,
            lambda_by_weight,
            entries,
            probs,
            tail_mass,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn lambda_by_weight(&self) -> &[f64] {
        &self.lambda_by_weight
    }

    /// `r_d` for `d = 0..=d_max`; `d_max < n` only for truncated spectra.
    pub fn sqrt_g_by_distance(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn entries(&self) -> &[SqrtGramEntry] {
        &self.entries
    }

    /// Per-distance relative error bounds of the `r_d`.
    pub fn cancellation_estimate(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.rel_error_bound).collect()
    }

    pub fn is_truncated(&self) -> bool {
        (self.entries.len() as u64) < self.n + 1
    }

    /// Entries whose error bound exceeds the precision budget.
    pub fn alarms(&self) -> impl Iterator<Item = &SqrtGramEntry> {
        self.entries.iter().filter(|e| e.alarm)
    }

    pub fn has_alarms(&self) -> bool {
        self.alarms().next().is_some()
    }

    pub fn distance_distribution(&self) -> PgmDistanceDistribution {
        PgmDistanceDistribution::new(self.n, self.k, self.probs.clone(), self.tail_mass)
    }

    /// `D_k = Σ_d d C(n,d) r_d²`.
    pub fn expected_distance_direct(&self) -> f64 {
        self.distance_distribution().mean()
    }

    /// `r_0²`, the probability that the PGM names the input exactly.
    pub fn success_probability(&self) -> f64 {
        self.entries[0].value.powi(2)
    }

    pub fn report(&self) -> Result<SpectrumReport> {
        let dist = self.distance_distribution();
        Ok(SpectrumReport {
            n: self.n,
            k: self.k,
            lambda: self.lambda_by_weight.clone(),
            sqrt_g: self.sqrt_g_by_distance(),
            probs: dist.probs().to_vec(),
            d_direct: dist.mean(),
            d_plancherel: expected_distance_plancherel(self.n, self.k)?,
            p_success: self.success_probability(),
            rel_error_bound: self.cancellation_estimate(),
            truncated: self.is_truncated(),
            alarms: self.alarms().count(),
        })
    }
}

/// Serialized form of a spectrum.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpectrumReport {
    pub n: u64,
    pub k: u64,
    pub lambda: Vec<f64>,
    #[serde(rename = "sqrtG")]
    pub sqrt_g: Vec<f64>,
    #[serde(rename = "P")]
    pub probs: Vec<f64>,
    #[serde(rename = "D_direct")]
    pub d_direct: f64,
    #[serde(rename = "D_plancherel")]
    pub d_plancherel: f64,
    pub p_success: f64,
    pub rel_error_bound: Vec<f64>,
    pub truncated: bool,
    pub alarms: usize,
}

/// Law of `d(x, x̃)` for the PGM guess `x̃`.
#[derive(Debug, Clone)]
pub struct PgmDistanceDistribution {
    n: u64,
    k: u64,
    probs: Vec<f64>,
    tail_mass: f64,
    sampler: WeightedIndex<f64>,
}

impl PgmDistanceDistribution {
    fn new(n: u64, k: u64, probs: Vec<f64>, tail_mass: f64) -> Self {
        let sampler = WeightedIndex::new(&probs).expect("distance law has positive mass");
        Self {
            n,
            k,
            probs,
            tail_mass,
            sampler,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `P(d)` for `d = 0..probs.len()`; longer distances carry `tail_mass`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn total_mass(&self) -> f64 {
        let mut s = NeumaierSum::default();
        self.probs.iter().for_each(|&p| s.add(p));
        s.total()
    }

    pub fn mean(&self) -> f64 {
        let mut s = NeumaierSum::default();
        self.probs.iter().enumerate().for_each(|(d, &p)| s.add(d as f64 * p));
        s.total()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let mut s = NeumaierSum::default();
        self.probs
            .iter()
            .enumerate()
            .for_each(|(d, &p)| s.add((d as f64 - mean).powi(2) * p));
        s.total()
    }

    /// Draws a distance from the law (renormalized over the described range).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.sampler.sample(rng) as u64
    }
}

/// `2^n ĝ(e_i)`, the weight-one Fourier coefficient of the outcome law,
/// as the self-convolution of the `√λ` spectrum:
/// `A = 2^{1-n} Σ_{w<n} C(n-1, w) √(λ_w λ_{w+1})`.
pub fn weight_one_coefficient(n: u64, k: u64) -> Result<f64> {
    check_nk(n, k)?;
    if n == 0 {
        return Err(param("n must be at least 1"));
    }
    if k == n {
        return Ok(1.0);
    }
    let terms = (0..n.min(k)).map(|w| {
        let l0 = eigenvalue_log(n, k, w).expect("in range");
        let l1 = eigenvalue_log(n, k, w + 1).expect("in range");
        binom(n - 1, w) * (l0 * l1).sqrt()
    });
    let sum = LogReal::sum_nonneg(terms);
    Ok((sum * LogReal::new(1, -((n - 1) as f64) * LN_2)).to_f64())
}

/// `D_k = (n/2)(1 - 2^n ĝ(e_i))` by Plancherel; all summands nonnegative.
pub fn expected_distance_plancherel(n: u64, k: u64) -> Result<f64> {
    if k == n {
        check_nk(n, k)?;
        return Ok(0.0);
    }
    let a = weight_one_coefficient(n, k)?;
    Ok(n as f64 / 2.0 * (1.0 - a))
}

/// `r_0² = (2^{-(n+k)/2} Σ_z √(C(n,z) C(k,z)))²`, a sum of positive terms
/// and therefore stable for any `n`.
pub fn success_probability(n: u64, k: u64) -> Result<f64> {
    check_nk(n, k)?;
    if k == n {
        return Ok(1.0);
    }
    if k == 0 {
        return Ok((-(n as f64)).exp2());
    }
    let sum = LogReal::sum_nonneg((0..=k).map(|z| (binom(n, z) * binom(k, z)).sqrt()));
    let r0 = sum * LogReal::pow2(-((n + k) as f64) / 2.0);
    Ok((r0 * r0).to_f64())
}

/// `1 / Σ_y |⟨ψᵏₓ|ψᵏ_y⟩|² = C(n,k)² / Σ_d C(n,d) C(n-d,k)²`, a lower
/// bound on [`success_probability`].
pub fn genlower_bound(n: u64, k: u64) -> Result<f64> {
    check_nk(n, k)?;
    if k == 0 {
        // The denominator is Σ_d C(n,d) = 2^n.
        return Ok((-(n as f64)).exp2());
    }
    let den = LogReal::sum_nonneg((0..=n - k).map(|d| {
        let c = binom(n - d, k);
        binom(n, d) * c * c
    }));
    let num = binom(n, k);
    Ok((num * num / den).to_f64())
}

/// `4 e^{-a²/32}` with `a = (n - k)/√n`, an upper bound on
/// [`success_probability`].
pub fn success_upper_bound(n: u64, k: u64) -> Result<f64> {
    check_nk(n, k)?;
    if n == 0 {
        return Err(param("n must be at least 1"));
    }
    let a = (n - k) as f64 / (n as f64).sqrt();
    Ok(4.0 * (-a * a / 32.0).exp())
}
