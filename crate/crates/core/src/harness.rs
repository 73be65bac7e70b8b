//! Seeded Monte Carlo plumbing shared by the acceptance checks and the CLI.
//!
//! Trial `i` of a run with master seed `s` draws from ChaCha8 seeded with `s`
//! on stream `i`, so its randomness does not depend on how many trials run
//! or in which order workers finish. Results are always returned in trial
//! order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::cgt_classical;
use crate::cgt_quantum::{cgt_k1, cgt_solve, SolveOptions};
use crate::error::{param, Error, Result};
use crate::oracles::{CgtOracle, QueryLedger, WildcardOracle};
use crate::wildcard_search::{simulate_search, SearchPlan, StageOutcome};
use crate::BitString;

/// Independent stream for one trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent trials in parallel, in trial order.
pub fn run_trials<T, F>(master_seed: u64, trials: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| f(t, &mut trial_rng(master_seed, t)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub count: u64,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single sample.
    pub std_dev: f64,
    /// Normal-approximation half-width, `1.96 σ / √count`.
    pub ci95_halfwidth: f64,
}

impl TrialStats {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let count = samples.len() as u64;
        if count == 0 {
            return Err(param("statistics need at least one sample"));
        }
        let mean = samples.iter().sum::<f64>() / count as f64;
        let var = if count > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        let std_dev = var.sqrt();
        Ok(Self {
            count,
            mean,
            std_dev,
            ci95_halfwidth: 1.96 * std_dev / (count as f64).sqrt(),
        })
    }

    pub fn std_error(&self) -> f64 {
        self.std_dev / (self.count as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub wildcard: u64,
    pub cgt: u64,
    pub verification: u64,
}

impl From<&QueryLedger> for QueryCounts {
    fn from(l: &QueryLedger) -> Self {
        Self {
            wildcard: l.wildcard,
            cgt: l.cgt,
            verification: l.verification,
        }
    }
}

/// One CGT trial, quantum or classical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgtTrial {
    pub trial: u64,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub true_weight: usize,
    pub queries_total: u64,
    pub queries_by_kind: QueryCounts,
    /// Guess cycles of the quantum solver; 0 for one-shot and classical runs.
    pub cycles: u64,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CgtSolver {
    /// One query on `[n]`; needs `k <= 1`.
    QuantumSingle,
    QuantumGeneral,
    ClassicalBinarySearch,
}

impl CgtSolver {
    /// The quantum solver suited to `k`.
    pub fn quantum_for(k: usize) -> Self {
        if k <= 1 {
            Self::QuantumSingle
        } else {
            Self::QuantumGeneral
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CgtExperiment {
    pub n: usize,
    pub k: usize,
    /// Hidden weight; `None` draws it uniformly from `0..=k`.
    pub weight: Option<usize>,
    pub solver: CgtSolver,
    pub trials: u64,
    pub seed: u64,
    pub trace: bool,
}

fn ledger(trace: bool) -> QueryLedger {
    if trace {
        QueryLedger::with_trace()
    } else {
        QueryLedger::new()
    }
}

pub fn run_cgt(exp: &CgtExperiment) -> Result<Vec<CgtTrial>> {
    if exp.k > exp.n || exp.weight.is_some_and(|w| w > exp.k) {
        return Err(param(format!(
            "need weight <= k <= n, got weight {:?}, k = {}, n = {}",
            exp.weight, exp.k, exp.n
        )));
    }
    if exp.solver == CgtSolver::QuantumSingle && exp.k > 1 {
        return Err(param("the one-query solver needs k <= 1"));
    }
    run_trials(exp.seed, exp.trials, |trial, rng| {
        use rand::Rng;
        let w = exp.weight.unwrap_or_else(|| rng.random_range(0..=exp.k));
        let x = BitString::random_with_weight(exp.n, w, rng)?;
        let mut oracle = CgtOracle::with_ledger(x.clone(), ledger(exp.trace));
        let (estimate, cycles) = match exp.solver {
            CgtSolver::QuantumSingle => (cgt_k1(&mut oracle, rng)?, 0),
            CgtSolver::QuantumGeneral => {
                let run = cgt_solve(&mut oracle, exp.k, rng, SolveOptions::default())?;
                (run.estimate, run.cycles)
            }
            CgtSolver::ClassicalBinarySearch => (cgt_classical(&mut oracle, exp.k)?, 0),
        };
        let l = oracle.ledger();
        Ok(CgtTrial {
            trial,
            seed: exp.seed,
            n: exp.n,
            k: exp.k,
            true_weight: w,
            queries_total: l.total(),
            queries_by_kind: l.into(),
            cycles,
            exact: estimate == x,
            trace: exp.trace.then(|| l.trace_json_lines()),
        })
    })
}

/// One run of the staged wildcard search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwwTrial {
    pub trial: u64,
    pub seed: u64,
    pub n: usize,
    pub stage0_queries: u64,
    pub stage_outcomes: Vec<StageOutcome>,
    pub queries_total: u64,
    pub queries_by_kind: QueryCounts,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<String>>,
}

pub fn run_sww(plan: &SearchPlan, trials: u64, seed: u64, trace: bool) -> Result<Vec<SwwTrial>> {
    let n = plan.n();
    run_trials(seed, trials, |trial, rng| {
        let x = BitString::random(n, rng);
        let mut oracle = WildcardOracle::with_ledger(x.clone(), ledger(trace));
        let run = simulate_search(&mut oracle, plan, rng)?;
        let l = oracle.ledger();
        let staged: u64 = run.stages.iter().map(|s| s.queries_charged).sum();
        if staged + run.stage0_queries != l.total() {
            return Err(Error::Consistency("stage costs do not add up to the ledger".into()));
        }
        Ok(SwwTrial {
            trial,
            seed,
            n,
            stage0_queries: run.stage0_queries,
            stage_outcomes: run.stages,
            queries_total: l.total(),
            queries_by_kind: l.into(),
            exact: run.estimate == x,
            trace: trace.then(|| l.trace_json_lines()),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_keyed_by_trial() {
        let a: Vec<u64> = run_trials(9, 5, |_, rng| Ok(rng.random())).unwrap();
        let b: Vec<u64> = run_trials(9, 3, |_, rng| Ok(rng.random())).unwrap();
        assert_eq!(a[..3], b[..]);
        assert_ne!(a[0], a[1]);
        let c: Vec<u64> = run_trials(10, 3, |_, rng| Ok(rng.random())).unwrap();
        assert_ne!(a[0], c[0]);
    }

    #[test]
    fn stats() {
        let s = TrialStats::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.std_dev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.ci95_halfwidth - 1.96 * s.std_dev / 2.0).abs() < 1e-15);
        assert_eq!(TrialStats::from_samples(&[7.0]).unwrap().std_dev, 0.0);
        assert!(TrialStats::from_samples(&[]).is_err());
    }

    #[test]
    fn cgt_runs_are_reproducible() {
        let exp = CgtExperiment {
            n: 200,
            k: 6,
            weight: None,
            solver: CgtSolver::QuantumGeneral,
            trials: 20,
            seed: 4,
            trace: true,
        };
        let a = run_cgt(&exp).unwrap();
        assert_eq!(a, run_cgt(&exp).unwrap());
        assert!(a.iter().all(|t| t.exact));
        assert!(a
            .iter()
            .all(|t| t.trace.as_ref().unwrap().len() as u64 == t.queries_total));
    }

    #[test]
    fn sww_runs_recover() {
        let plan = SearchPlan::new(40).unwrap();
        let runs = run_sww(&plan, 10, 1, false).unwrap();
        assert!(runs.iter().all(|r| r.exact && r.trace.is_none()));
    }
}
