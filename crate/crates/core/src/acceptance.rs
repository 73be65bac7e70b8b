//! End-to-end acceptance checks, one function per criterion.
//!
//! Every tolerance, sample size and seed is a named constant below. Each
//! check reports a pass flag and a one-line detail with the measured values,
//! so a failure shows how far off it is.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::adversary_report;
use crate::baselines::cgt_classical;
use crate::cgt_quantum::{cgt_k1, cgt_solve, measurement_sample, outcome_distribution, SolveOptions};
use crate::combinatorics::{binom_f64, wht};
use crate::error::Result;
use crate::gram::{
    brute_force_pgm, eigenvalue, expected_distance_plancherel, genlower_bound, gram_entry, success_probability,
    success_upper_bound, GramSpectrum,
};
use crate::harness::{run_cgt, run_sww, CgtExperiment, CgtSolver, TrialStats};
use crate::oracles::WildcardsViaCgt;
use crate::wildcard_search::SearchPlan;
use crate::BitString;

pub const SPECTRAL_MAX_N: u64 = 12;
pub const SPECTRAL_ABS_TOL: f64 = 1e-8;
pub const SPECTRAL_TIME_LIMIT_SECS: f64 = 60.0;

pub const DELSARTE_MAX_N: u64 = 14;
pub const DELSARTE_ABS_TOL: f64 = 1e-9;
pub const TRACE_REL_TOL: f64 = 1e-6;
/// Larger sizes on which the trace identity is also checked.
pub const TRACE_EXTRA_N: [u64; 4] = [64, 100, 256, 400];

pub const CROSS_METHOD_MAX_N: u64 = 64;
pub const CROSS_METHOD_REL_TOL: f64 = 1e-6;

pub const BOUNDED_BRUTE_MAX_N: u64 = 24;
pub const BOUNDED_SWEEP_MAX_N: u64 = 400;
/// Largest `D` at `k = n - ⌈√n⌉` over the brute-force range, attained at
/// `n = 2, k = 0` where the guess is uniform. Recomputed and compared by
/// [`criterion_4`].
pub const BRUTE_VERIFIED_MAX_D: f64 = 1.0;
pub const BOUNDED_FACTOR: f64 = 2.0;
/// Agreement required between brute-force and closed-form `D` below the cap.
pub const BOUNDED_AGREEMENT_TOL: f64 = 1e-8;

pub const BOUNDS_MAX_N: u64 = 400;
/// Constant `c` in `genlower ≥ 1 - 2a² - c/√n`, fitted on the sweep of
/// [`criterion_5`]: the largest value of `√n (1 - 2a² - genlower)` there is 0.
pub const GENLOWER_FIT_C: f64 = 0.0;

pub const K1_SIZES: [usize; 3] = [10, 100, 4096];
pub const K1_TRIALS: u64 = 1000;

pub const GENERAL_N: usize = 1000;
pub const GENERAL_KS: [usize; 5] = [2, 4, 8, 16, 32];
pub const GENERAL_TRIALS: u64 = 200;
/// `C` in `mean queries ≤ C k log₂(k+1)`; pilot runs over three seeds gave
/// at most 1.63, at `k = 2`.
pub const GENERAL_C: f64 = 2.0;
pub const INDEPENDENCE_K: usize = 8;
pub const INDEPENDENCE_SIZES: [usize; 2] = [100, 10_000];
pub const INDEPENDENCE_TRIALS: u64 = 1000;
pub const INDEPENDENCE_REL_TOL: f64 = 0.15;

pub const LAW_MAX_SET: usize = 16;
pub const LAW_MAX_M: usize = 6;
pub const LAW_EXACT_TOL: f64 = 1e-12;
pub const LAW_SAMPLES: usize = 100_000;
pub const LAW_TV_TOL: f64 = 0.02;

pub const SEARCH_SIZES: [usize; 4] = [64, 256, 1024, 4096];
pub const SEARCH_TRIALS: u64 = 500;
pub const SEARCH_SPREAD_FACTOR: f64 = 2.0;
pub const SEARCH_ERROR_Z: f64 = 3.0;
/// `P(|Z| > 3)` for a standard normal.
pub const SEARCH_STAGE_TAIL: f64 = 0.002_699_796;
/// Chance that an unbiased simulator fails the per-stage count at one `n`.
pub const SEARCH_STAGE_FALSE_ALARM: f64 = 1e-3;

pub const ADVERSARY_SIZES: std::ops::RangeInclusive<usize> = 1..=9;
pub const ADVERSARY_TOL: f64 = 1e-12;

pub const REDUCTION_MAX_K: usize = 8;
/// Padding used for a second pass of the reduction check.
pub const REDUCTION_PADDING: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

fn evaluate(id: u32, name: &str, body: impl FnOnce() -> Result<(bool, String)>) -> CriterionResult {
    let (passed, detail) = body().unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Ids of the criteria implemented here.
pub const CORE_CRITERIA: std::ops::RangeInclusive<u32> = 1..=11;

pub fn run_criterion(id: u32) -> Option<CriterionResult> {
    Some(match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        _ => return None,
    })
}

pub fn run_all() -> Vec<CriterionResult> {
    CORE_CRITERIA.filter_map(run_criterion).collect()
}

fn ceil_sqrt(n: u64) -> u64 {
    let r = n.isqrt();
    if r * r == n {
        r
    } else {
        r + 1
    }
}

/// Closed-form `√G` rows against the brute-force matrix square root.
pub fn criterion_1() -> CriterionResult {
    evaluate(1, "spectral exactness", || {
        let start = Instant::now();
        let mut worst = 0.0f64;
        let mut alarms = 0;
        for n in 0..=SPECTRAL_MAX_N {
            for k in 0..=n {
                let spec = GramSpectrum::compute(n, k)?;
                alarms += spec.alarms().count();
                let brute = brute_force_pgm(n, k)?;
                for (a, b) in spec.sqrt_g_by_distance().iter().zip(&brute.sqrt_g_by_distance) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            worst <= SPECTRAL_ABS_TOL && alarms == 0 && secs <= SPECTRAL_TIME_LIMIT_SECS,
            format!(
                "max |Δr| = {worst:.3e} (tol {SPECTRAL_ABS_TOL:e}), alarms = {alarms}, runtime {}",
                if secs <= SPECTRAL_TIME_LIMIT_SECS {
                    format!("within {SPECTRAL_TIME_LIMIT_SECS}s")
                } else {
                    format!("{secs:.1}s over {SPECTRAL_TIME_LIMIT_SECS}s")
                }
            ),
        ))
    })
}

/// Closed-form eigenvalues against the `2^n`-term character sums, and the trace.
pub fn criterion_2() -> CriterionResult {
    evaluate(2, "eigenvalue identity", || {
        let mut worst = 0.0f64;
        let mut worst_trace = 0.0f64;
        for n in 0..=DELSARTE_MAX_N {
            for k in 0..=n {
                let row: Vec<f64> = (0..=n).map(|d| gram_entry(n, k, d)).collect::<Result<_>>()?;
                for w in 0..=n {
                    let s = (1u64 << w) - 1;
                    let direct: f64 = (0..1u64 << n)
                        .map(|x| {
                            let sign = if (s & x).count_ones().is_multiple_of(2) {
                                1.0
                            } else {
                                -1.0
                            };
                            sign * row[x.count_ones() as usize]
                        })
                        .sum();
                    worst = worst.max((direct - eigenvalue(n, k, w)?).abs());
                }
                worst_trace = worst_trace.max(trace_error(n, k)?);
            }
        }
        for n in TRACE_EXTRA_N {
            for k in 0..=n {
                worst_trace = worst_trace.max(trace_error(n, k)?);
            }
        }
        Ok((
            worst <= DELSARTE_ABS_TOL && worst_trace <= TRACE_REL_TOL,
            format!(
                "max |λ - direct| = {worst:.3e} (tol {DELSARTE_ABS_TOL:e}), \
                 max trace rel err = {worst_trace:.3e} (tol {TRACE_REL_TOL:e})"
            ),
        ))
    })
}

fn trace_error(n: u64, k: u64) -> Result<f64> {
    let mut trace = 0.0;
    for w in 0..=n {
        trace += binom_f64(n, w) * eigenvalue(n, k, w)?;
    }
    Ok((trace / (n as f64).exp2() - 1.0).abs())
}

/// Direct and Plancherel routes to `D_k` near `k = n`.
pub fn criterion_3() -> CriterionResult {
    evaluate(3, "expected distance cross-method", || {
        let mut worst = 0.0f64;
        let mut at = (0, 0);
        let mut nonzero_full = 0;
        for n in 1..=CROSS_METHOD_MAX_N {
            for k in n.saturating_sub(ceil_sqrt(n))..=n {
                let direct = GramSpectrum::compute(n, k)?.expected_distance_direct();
                let planch = expected_distance_plancherel(n, k)?;
                if k == n && (direct != 0.0 || planch != 0.0) {
                    nonzero_full += 1;
                }
                let rel = (direct - planch).abs() / direct.max(1e-15);
                if rel > worst {
                    worst = rel;
                    at = (n, k);
                }
            }
        }
        Ok((
            worst <= CROSS_METHOD_REL_TOL && nonzero_full == 0,
            format!(
                "max rel gap = {worst:.3e} at (n,k) = {at:?} (tol {CROSS_METHOD_REL_TOL:e}), \
                 nonzero D_n = {nonzero_full}"
            ),
        ))
    })
}

/// `D_k` at `k = n - ⌈√n⌉` stays within twice the brute-force maximum.
pub fn criterion_4() -> CriterionResult {
    evaluate(4, "expected distance bounded", || {
        let mut brute_max = 0.0f64;
        let mut disagreement = 0.0f64;
        for n in 1..=BOUNDED_BRUTE_MAX_N {
            let k = n - ceil_sqrt(n);
            let brute = brute_force_pgm(n, k)?.expected_distance();
            let closed = GramSpectrum::compute(n, k)?.expected_distance_direct();
            disagreement = disagreement.max((brute - closed).abs());
            brute_max = brute_max.max(brute);
        }
        let threshold = BOUNDED_FACTOR * BRUTE_VERIFIED_MAX_D;
        let mut sweep_max = 0.0f64;
        let mut at = 0;
        for n in 1..=BOUNDED_SWEEP_MAX_N {
            let d = expected_distance_plancherel(n, n - ceil_sqrt(n))?;
            if d > sweep_max {
                sweep_max = d;
                at = n;
            }
        }
        let recorded_ok = (brute_max - BRUTE_VERIFIED_MAX_D).abs() <= BOUNDED_AGREEMENT_TOL;
        Ok((
            recorded_ok && disagreement <= BOUNDED_AGREEMENT_TOL && sweep_max <= threshold,
            format!(
                "brute max D (n<={BOUNDED_BRUTE_MAX_N}) = {brute_max:.6} (recorded {BRUTE_VERIFIED_MAX_D}), \
                 brute/closed gap = {disagreement:.2e}, sweep max D (n<={BOUNDED_SWEEP_MAX_N}) = \
                 {sweep_max:.6} at n = {at}, threshold = {threshold}"
            ),
        ))
    })
}

/// `genlower ≤ r_0² ≤ 4e^{-a²/32}` on every `(n, k)` of the sweep.
pub fn criterion_5() -> CriterionResult {
    evaluate(5, "success probability bounds", || {
        let mut checked = 0u64;
        let mut lower_violations = 0u64;
        let mut upper_violations = 0u64;
        let mut fit_violations = 0u64;
        for n in 1..=BOUNDS_MAX_N {
            for k in 0..=n {
                let p = success_probability(n, k)?;
                let lo = genlower_bound(n, k)?;
                let hi = success_upper_bound(n, k)?;
                checked += 1;
                lower_violations += (lo > p) as u64;
                upper_violations += (p > hi) as u64;
                let a = (n - k) as f64 / (n as f64).sqrt();
                fit_violations += (lo < 1.0 - 2.0 * a * a - GENLOWER_FIT_C / (n as f64).sqrt()) as u64;
            }
        }
        Ok((
            lower_violations + upper_violations + fit_violations == 0,
            format!(
                "{checked} pairs (n <= {BOUNDS_MAX_N}): lower violations = {lower_violations}, \
                 upper violations = {upper_violations}, \
                 genlower >= 1-2a²-{GENLOWER_FIT_C}/√n violations = {fit_violations}"
            ),
        ))
    })
}

/// One query recovers a planted single one.
pub fn criterion_6() -> CriterionResult {
    evaluate(6, "one-query CGT for k = 1", || {
        let mut parts = Vec::new();
        let mut ok = true;
        for (i, n) in K1_SIZES.into_iter().enumerate() {
            let trials = run_cgt(&CgtExperiment {
                n,
                k: 1,
                weight: Some(1),
                solver: CgtSolver::QuantumSingle,
                trials: K1_TRIALS,
                seed: 600 + i as u64,
                trace: false,
            })?;
            let exact = trials.iter().filter(|t| t.exact).count();
            let one_query = trials.iter().filter(|t| t.queries_total == 1).count();
            ok &= exact as u64 == K1_TRIALS && one_query as u64 == K1_TRIALS;
            parts.push(format!(
                "n={n}: exact {exact}/{K1_TRIALS}, 1-query {one_query}/{K1_TRIALS}"
            ));
        }
        Ok((ok, parts.join("; ")))
    })
}

fn mean_queries(n: usize, k: usize, trials: u64, seed: u64) -> Result<(TrialStats, usize)> {
    let runs = run_cgt(&CgtExperiment {
        n,
        k,
        weight: Some(k),
        solver: CgtSolver::QuantumGeneral,
        trials,
        seed,
        trace: false,
    })?;
    let samples: Vec<f64> = runs.iter().map(|t| t.queries_total as f64).collect();
    Ok((
        TrialStats::from_samples(&samples)?,
        runs.iter().filter(|t| t.exact).count(),
    ))
}

/// The general solver: exact, `O(k log k)` with one constant, independent of `n`.
pub fn criterion_7() -> CriterionResult {
    evaluate(7, "general quantum CGT", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (i, k) in GENERAL_KS.into_iter().enumerate() {
            let (stats, exact) = mean_queries(GENERAL_N, k, GENERAL_TRIALS, 700 + i as u64)?;
            let envelope = GENERAL_C * k as f64 * ((k + 1) as f64).log2();
            ok &= exact as u64 == GENERAL_TRIALS && stats.mean <= envelope;
            parts.push(format!(
                "k={k}: mean {:.2} <= {envelope:.2}, exact {exact}/{GENERAL_TRIALS}",
                stats.mean
            ));
        }
        let (small, e1) = mean_queries(INDEPENDENCE_SIZES[0], INDEPENDENCE_K, INDEPENDENCE_TRIALS, 710)?;
        let (large, e2) = mean_queries(INDEPENDENCE_SIZES[1], INDEPENDENCE_K, INDEPENDENCE_TRIALS, 711)?;
        let rel = (small.mean - large.mean).abs() / small.mean.min(large.mean);
        ok &= rel <= INDEPENDENCE_REL_TOL && (e1 + e2) as u64 == 2 * INDEPENDENCE_TRIALS;
        parts.push(format!(
            "k={INDEPENDENCE_K}: n={} mean {:.2} vs n={} mean {:.2}, rel diff {rel:.3} (tol {INDEPENDENCE_REL_TOL})",
            INDEPENDENCE_SIZES[0], small.mean, INDEPENDENCE_SIZES[1], large.mean
        ));
        Ok((ok, parts.join("; ")))
    })
}

/// Outcome law of a phase query on `s_len` positions whose ones sit at `ones`,
/// by transforming `(-1)^{OR}` and squaring.
fn transformed_law(s_len: usize, ones: u32) -> Result<Vec<f64>> {
    let phases: Vec<f64> = (0..1u32 << s_len)
        .map(|t| if t & ones == 0 { 1.0 } else { -1.0 })
        .collect();
    let scale = (-(s_len as f64)).exp2();
    Ok(wht(&phases)?.iter().map(|a| (a * scale).powi(2)).collect())
}

/// Analytic outcome law against the transform, and the sampler against both.
pub fn criterion_8() -> CriterionResult {
    evaluate(8, "measurement law", || {
        let mut worst = 0.0f64;
        for s_len in 0..=LAW_MAX_SET {
            for m in 0..=s_len.min(LAW_MAX_M) {
                // Ones spread over the set: positions 0, s/m, 2s/m, ...
                let ones: Vec<usize> = (0..m).map(|j| j * s_len / m.max(1)).collect();
                let mask: u32 = ones.iter().map(|&i| 1u32 << i).sum();
                let brute = transformed_law(s_len, mask)?;
                let table = outcome_distribution(m as u32)?;
                for (y, p) in brute.iter().enumerate() {
                    let y = y as u32;
                    let expected = if y & !mask != 0 {
                        0.0
                    } else {
                        let idx = ones.iter().enumerate().fold(0, |a, (j, &i)| a | ((y >> i & 1) << j));
                        table[idx as usize]
                    };
                    worst = worst.max((p - expected).abs());
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(800);
        let mut worst_tv = 0.0f64;
        for m in 1..=LAW_MAX_M {
            let support: Vec<usize> = (0..m).map(|j| 2 * j + 1).collect();
            let mut counts = vec![0u64; 1 << m];
            for _ in 0..LAW_SAMPLES {
                let y = measurement_sample(2 * m + 1, &support, &mut rng)?;
                let idx = support
                    .iter()
                    .enumerate()
                    .fold(0, |a, (j, &i)| a | ((y.get(i) as usize) << j));
                if y.weight() != idx.count_ones() as usize {
                    return Ok((false, format!("sample {y} leaves the support")));
                }
                counts[idx] += 1;
            }
            let law = outcome_distribution(m as u32)?;
            let tv = counts
                .iter()
                .zip(&law)
                .map(|(&c, p)| (c as f64 / LAW_SAMPLES as f64 - p).abs())
                .sum::<f64>()
                / 2.0;
            worst_tv = worst_tv.max(tv);
        }
        Ok((
            worst <= LAW_EXACT_TOL && worst_tv <= LAW_TV_TOL,
            format!(
                "max |analytic - transform| = {worst:.3e} (tol {LAW_EXACT_TOL:e}), \
                 max TV over m<={LAW_MAX_M} at {LAW_SAMPLES} samples = {worst_tv:.4} (tol {LAW_TV_TOL})"
            ),
        ))
    })
}

/// Staged search: exact, `√n log n` scaling, stage-0 cost, error counts.
pub fn criterion_9() -> CriterionResult {
    evaluate(9, "wildcard search", || {
        let mut ok = true;
        let mut parts = Vec::new();
        let mut ratios = Vec::new();
        for (i, n) in SEARCH_SIZES.into_iter().enumerate() {
            let plan = SearchPlan::new(n)?;
            if !plan.alarms().is_empty() {
                return Ok((false, format!("n={n}: precision alarms: {}", plan.alarms().join("; "))));
            }
            let runs = run_sww(&plan, SEARCH_TRIALS, 900 + i as u64, false)?;
            let exact = runs.iter().filter(|r| r.exact).count() as u64;
            let n0 = plan.schedule().initial() as u64;
            let stage0_ok = runs.iter().all(|r| r.stage0_queries == n0);
            let stats = TrialStats::from_samples(&runs.iter().map(|r| r.queries_total as f64).collect::<Vec<_>>())?;
            let ratio = stats.mean / ((n as f64).sqrt() * (n as f64).log2());
            ratios.push(ratio);

            // Pooled over stages: e - D for the stage's own law.
            let expected = plan.expected_errors();
            let residuals: Vec<f64> = runs
                .iter()
                .flat_map(|r| {
                    r.stage_outcomes
                        .iter()
                        .map(|s| s.errors_sampled as f64 - expected[s.stage_index - 1])
                })
                .collect();
            let res = TrialStats::from_samples(&residuals)?;
            let z = if res.std_error() > 0.0 {
                res.mean / res.std_error()
            } else {
                0.0
            };

            // Per stage, against the standard error of the stage's own law.
            let stages = plan.schedule().stages();
            let mut outside = 0;
            for s in 1..=stages {
                let law = plan.law(s);
                let mean = runs
                    .iter()
                    .map(|r| r.stage_outcomes[s - 1].errors_sampled as f64)
                    .sum::<f64>()
                    / SEARCH_TRIALS as f64;
                let se = (law.variance() / SEARCH_TRIALS as f64).sqrt();
                let gap = (mean - law.mean()).abs();
                if gap > SEARCH_ERROR_Z * se && gap > 0.0 {
                    outside += 1;
                }
            }
            let allowed = null_exceedance_quantile(stages);
            ok &= exact == SEARCH_TRIALS && stage0_ok && z.abs() <= SEARCH_ERROR_Z && outside <= allowed;
            parts.push(format!(
                "n={n}: exact {exact}/{SEARCH_TRIALS}, mean {:.1}, ratio {ratio:.4}, stage0 = {n0} ({}), \
                 pooled error z = {z:.2}, stages outside 3 SE = {outside}/{stages} (allowed {allowed})",
                stats.mean,
                if stage0_ok { "ok" } else { "mismatch" }
            ));
        }
        let spread = ratios.iter().cloned().fold(f64::MIN, f64::max) / ratios.iter().cloned().fold(f64::MAX, f64::min);
        ok &= spread <= SEARCH_SPREAD_FACTOR;
        parts.push(format!("ratio spread {spread:.3} (tol {SEARCH_SPREAD_FACTOR})"));
        Ok((ok, parts.join("; ")))
    })
}

/// Largest count `c` with `P(Binomial(stages, p) > c) <= SEARCH_STAGE_FALSE_ALARM`,
/// `p` being the two-sided normal tail beyond [`SEARCH_ERROR_Z`]: how many
/// stages an unbiased simulator may leave outside the band by chance alone.
fn null_exceedance_quantile(stages: usize) -> usize {
    let p = SEARCH_STAGE_TAIL;
    let mut pmf = (1.0 - p).powi(stages as i32);
    let mut cdf = pmf;
    let mut c = 0;
    while 1.0 - cdf > SEARCH_STAGE_FALSE_ALARM && c < stages {
        pmf *= (stages - c) as f64 / (c + 1) as f64 * p / (1.0 - p);
        cdf += pmf;
        c += 1;
    }
    c
}

/// Enumerated adversary bound equals `√n`.
pub fn criterion_10() -> CriterionResult {
    evaluate(10, "adversary bound", || {
        let mut worst = 0.0f64;
        let mut clean = true;
        let mut at4 = f64::NAN;
        for n in ADVERSARY_SIZES {
            let r = adversary_report(n)?;
            worst = worst.max((r.bound - (n as f64).sqrt()).abs());
            clean &= r.v_mismatches == 0 && r.weight_violations == 0;
            if n == 4 {
                at4 = r.bound;
            }
        }
        Ok((
            worst <= ADVERSARY_TOL && at4 == 2.0 && clean,
            format!("max |bound - √n| = {worst:.3e} (tol {ADVERSARY_TOL:e}), n=4 bound = {at4}, weight checks clean = {clean}"),
        ))
    })
}

/// Every wildcard instance with `k ≤ 8` survives the CGT round trip with both solvers.
pub fn criterion_11() -> CriterionResult {
    evaluate(11, "wildcards via CGT", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1100);
        let mut instances = 0u64;
        let mut failures = 0u64;
        for padding in [0, REDUCTION_PADDING] {
            for k in 1..=REDUCTION_MAX_K {
                for zv in 0..1u64 << k {
                    let z = BitString::from_u64(k, zv);
                    for quantum in [false, true] {
                        let mut red = WildcardsViaCgt::new(z.clone(), padding)?;
                        let x = if !quantum {
                            cgt_classical(red.cgt(), k)?
                        } else if k == 1 {
                            cgt_k1(red.cgt(), &mut rng)?
                        } else {
                            cgt_solve(red.cgt(), k, &mut rng, SolveOptions::default())?.estimate
                        };
                        instances += 1;
                        if red.decode(&x).ok().as_ref() != Some(&z) {
                            failures += 1;
                        }
                    }
                }
            }
        }
        Ok((
            failures == 0,
            format!("{instances} solver runs over all z with k <= {REDUCTION_MAX_K}, paddings 0 and {REDUCTION_PADDING}: {failures} failures"),
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_contiguous() {
        for id in CORE_CRITERIA {
            assert!(matches!(id, 1..=11));
        }
        assert!(run_criterion(12).is_none());
        assert!(run_criterion(0).is_none());
    }

    #[test]
    fn stage_quantile() {
        assert_eq!(null_exceedance_quantile(0), 0);
        // P(Bin(11, p) > 0) = 0.029 > 1e-3, P(> 1) = 4e-4.
        assert_eq!(null_exceedance_quantile(11), 1);
        assert!(null_exceedance_quantile(112) >= 2);
        assert!(null_exceedance_quantile(112) <= 4);
    }

    #[test]
    fn display_marks_outcome() {
        let r = evaluate(3, "x", || Ok((false, "why".into())));
        assert_eq!(r.to_string(), "[FAIL]  3 x: why");
        let e = evaluate(4, "y", || Err(crate::Error::Parameter("bad".into())));
        assert!(!e.passed && e.detail.contains("bad"));
    }
}
