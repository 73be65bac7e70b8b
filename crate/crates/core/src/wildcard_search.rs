//! The staged wildcard search.
//!
//! A window of known positions grows from `n_0 ≈ √n` to `n`. At each stage
//! roughly `√n_s` unknown positions join the window, a Pretty Good
//! Measurement on the subset state over the window produces a guess whose
//! distance to the truth follows the exact PGM distance law, and the guess
//! is repaired against the real oracle: one verification query, then one
//! binary search plus re-verification per wrong position.
//!
//! Only the measurement is simulated; every query below goes to the oracle.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::gram::{GramSpectrum, PgmDistanceDistribution, PrecisionPolicy};
use crate::oracles::{WildcardOracle, WildcardQuery};
use crate::BitString;

/// Window sizes `n_0 < n_1 < … < n_l = n` with `n_{i-1} = ⌈n_i - √n_i⌉`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StageSchedule {
    sizes: Vec<usize>,
}

impl StageSchedule {
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn initial(&self) -> usize {
        self.sizes[0]
    }

    /// Number of stages after stage 0.
    pub fn stages(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Consecutive `(n_{s-1}, n_s)` pairs.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sizes.windows(2).map(|w| (w[0], w[1]))
    }
}

/// `⌈√n⌉`.
fn ceil_sqrt(n: usize) -> usize {
    let r = n.isqrt();
    if r * r == n {
        r
    } else {
        r + 1
    }
}

/// `⌈log₂ m⌉` for `m ≥ 1`.
pub fn ceil_log2(m: usize) -> u32 {
    m.next_power_of_two().trailing_zeros()
}

/// Runs the recurrence down from `n` until the size is at most `⌈√n⌉`.
pub fn stage_schedule(n: usize) -> Result<StageSchedule> {
    if n == 0 {
        return Err(param("schedule needs n >= 1"));
    }
    let stop = ceil_sqrt(n);
    let mut sizes = vec![n];
    let mut cur = n;
    while cur > stop {
        // ⌈m - √m⌉ = m - ⌊√m⌋ for integer m.
        cur -= cur.isqrt();
        sizes.push(cur);
    }
    sizes.reverse();
    Ok(StageSchedule { sizes })
}

/// Query `x_S = claim` for the positions listed in `positions`.
fn window_query(n: usize, positions: &[usize], claim: &BitString) -> Result<WildcardQuery> {
    WildcardQuery::from_assignments(n, positions.iter().enumerate().map(|(j, &i)| (i, claim.get(j))))
}

/// Finds a position of `positions` where `claim` (aligned with `positions`)
/// is wrong, given that the whole claim is wrong.
///
/// The list is padded virtually to `2^j`, `j = ⌈log₂|S|⌉`, and halved `j`
/// times by querying the real part of the first half, so the cost is
/// exactly `j` wildcard queries.
pub fn find_mismatch(oracle: &mut WildcardOracle, positions: &[usize], claim: &BitString) -> Result<usize> {
    if claim.len() != positions.len() {
        return Err(param(format!(
            "claim has {} bits for {} positions",
            claim.len(),
            positions.len()
        )));
    }
    if positions.is_empty() {
        return Err(Error::Contract("no mismatch in an empty window".into()));
    }
    let len = positions.len();
    let mut lo = 0;
    let mut size = 1usize << ceil_log2(len);
    while size > 1 {
        let half = size / 2;
        let hi = (lo + half).min(len);
        let part: Vec<usize> = (lo..hi).collect();
        let q = window_query(oracle.n(), &positions[lo..hi], &claim.restrict(&part))?;
        if oracle.query(&q)? {
            lo += half;
            if lo >= len {
                return Err(Error::Contract("claim agrees with the oracle everywhere".into()));
            }
        }
        size = half;
    }
    Ok(positions[lo])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageOutcome {
    pub stage_index: usize,
    pub window: usize,
    pub known: usize,
    pub errors_sampled: usize,
    pub queries_charged: u64,
    pub corrected: bool,
}

/// Queries a stage costs with `errors` wrong positions in a window of `window`.
pub fn stage_cost(window: usize, errors: usize) -> u64 {
    1 + errors as u64 * (ceil_log2(window) as u64 + 1)
}

/// Schedule plus the PGM distance law of every stage, shared by all trials.
#[derive(Debug, Clone)]
pub struct SearchPlan {
    n: usize,
    schedule: StageSchedule,
    laws: Vec<PgmDistanceDistribution>,
    alarms: Vec<String>,
}

impl SearchPlan {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_policy(n, PrecisionPolicy::default())
    }

    /// Builds every stage law; entries of `√G` that miss the precision budget
    /// are kept and listed in [`SearchPlan::alarms`].
    pub fn with_policy(n: usize, policy: PrecisionPolicy) -> Result<Self> {
        let schedule = stage_schedule(n)?;
        let mut alarms = Vec::new();
        let mut laws = Vec::new();
        for (prev, cur) in schedule.steps() {
            let spec = GramSpectrum::compute_with(cur as u64, prev as u64, policy)?;
            for e in spec.alarms() {
                alarms.push(format!(
                    "window {cur}, known {prev}: entry d = {} has relative error bound {:.3e}",
                    e.d, e.rel_error_bound
                ));
            }
            laws.push(spec.distance_distribution());
        }
        Ok(Self {
            n,
            schedule,
            laws,
            alarms,
        })
    }

    pub fn alarms(&self) -> &[String] {
        &self.alarms
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn schedule(&self) -> &StageSchedule {
        &self.schedule
    }

    /// Expected PGM error count per stage.
    pub fn expected_errors(&self) -> Vec<f64> {
        self.laws.iter().map(|l| l.mean()).collect()
    }

    pub fn law(&self, stage_index: usize) -> &PgmDistanceDistribution {
        &self.laws[stage_index - 1]
    }
}

/// What the algorithm knows: the window in order and the values on it.
#[derive(Debug, Clone)]
struct Knowledge {
    window: Vec<usize>,
    values: Vec<bool>,
    /// Positions never queried, in no particular order.
    pool: Vec<usize>,
}

impl Knowledge {
    fn new(n: usize) -> Self {
        Self {
            window: Vec::with_capacity(n),
            values: Vec::with_capacity(n),
            pool: (0..n).collect(),
        }
    }

    fn draw_unqueried<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let j = rng.random_range(0..self.pool.len());
        self.pool.swap_remove(j)
    }
}

/// One growth stage from `known` to `window` positions, then repair.
fn run_stage<R: Rng + ?Sized>(
    oracle: &mut WildcardOracle,
    state: &mut Knowledge,
    stage_index: usize,
    window: usize,
    law: &PgmDistanceDistribution,
    rng: &mut R,
) -> Result<StageOutcome> {
    let known = state.window.len();
    let start = oracle.ledger().total();
    while state.window.len() < window {
        let i = state.draw_unqueried(rng);
        state.window.push(i);
    }
    let errors = law.sample(rng) as usize;
    let mut claim = oracle.measure_pgm(&state.window, known, errors, rng)?;

    let mut rounds = 0;
    while !oracle.verify(&window_query(oracle.n(), &state.window, &claim)?)? {
        let i = find_mismatch(oracle, &state.window, &claim)?;
        let j = state
            .window
            .iter()
            .position(|&p| p == i)
            .expect("mismatch lies in the window");
        claim.flip(j);
        rounds += 1;
        if rounds > errors {
            return Err(Error::Consistency(format!(
                "stage {stage_index} needed more than {errors} repairs"
            )));
        }
    }
    if rounds != errors {
        return Err(Error::Consistency(format!(
            "stage {stage_index} sampled {errors} errors but repaired {rounds}"
        )));
    }
    state.values = (0..window).map(|j| claim.get(j)).collect();
    Ok(StageOutcome {
        stage_index,
        window,
        known,
        errors_sampled: errors,
        queries_charged: oracle.ledger().total() - start,
        corrected: true,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRun {
    pub estimate: BitString,
    pub stage0_queries: u64,
    pub stages: Vec<StageOutcome>,
}

/// Recovers the hidden string: `n_0` singleton queries, then every stage of
/// the plan.
pub fn simulate_search<R: Rng + ?Sized>(
    oracle: &mut WildcardOracle,
    plan: &SearchPlan,
    rng: &mut R,
) -> Result<SearchRun> {
    let n = oracle.n();
    if n != plan.n() {
        return Err(param(format!(
            "plan for n = {} used on an oracle of size {n}",
            plan.n()
        )));
    }
    let mut state = Knowledge::new(n);
    for _ in 0..plan.schedule().initial() {
        let i = state.draw_unqueried(rng);
        let zero = oracle.query(&WildcardQuery::from_assignments(n, [(i, false)])?)?;
        state.window.push(i);
        state.values.push(!zero);
    }
    let stage0_queries = oracle.ledger().total();

    let mut stages = Vec::with_capacity(plan.schedule().stages());
    for (s, (_, window)) in plan.schedule().steps().enumerate() {
        stages.push(run_stage(oracle, &mut state, s + 1, window, plan.law(s + 1), rng)?);
    }

    let mut estimate = BitString::zeros(n);
    for (&i, &b) in state.window.iter().zip(&state.values) {
        estimate.set(i, b);
    }
    Ok(SearchRun {
        estimate,
        stage0_queries,
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::expected_distance_plancherel;
    use crate::oracles::QueryLedger;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alarms_are_recorded_not_fatal() {
        assert!(SearchPlan::new(400).unwrap().alarms().is_empty());
        let strict = PrecisionPolicy {
            budget: 1e-300,
            escalate: false,
            max_bits: 64,
        };
        let plan = SearchPlan::with_policy(400, strict).unwrap();
        assert!(!plan.alarms().is_empty());
        assert_eq!(plan.expected_errors().len(), plan.schedule().stages());
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(stage_schedule(1).unwrap().sizes(), [1]);
        let s = stage_schedule(100).unwrap();
        assert_eq!(*s.sizes().last().unwrap(), 100);
        assert!(s.initial() <= 11);
        for (a, b) in s.steps() {
            assert_eq!(a as f64, (b as f64 - (b as f64).sqrt()).ceil());
        }
        assert!(stage_schedule(0).is_err());
    }

    #[test]
    fn schedule_sweep() {
        for n in 1..=5000usize {
            let s = stage_schedule(n).unwrap();
            assert!(s.initial() <= ceil_sqrt(n) + 1, "n={n}");
            assert!(s.stages() as f64 <= 4.0 * (n as f64).sqrt(), "n={n}");
            assert!(s.sizes().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn single_error_found_in_three_queries() {
        let x: BitString = "10110010".parse().unwrap();
        let positions: Vec<usize> = (0..8).collect();
        for e in 0..8 {
            let mut o = WildcardOracle::new(x.clone());
            let mut claim = x.clone();
            claim.flip(e);
            assert_eq!(find_mismatch(&mut o, &positions, &claim).unwrap(), e);
            assert_eq!(o.ledger().total(), 3);
        }
    }

    #[test]
    fn any_of_several_errors_is_a_true_mismatch() {
        let x: BitString = "0110100111".parse().unwrap();
        let positions: Vec<usize> = (0..10).rev().collect();
        for a in 0..10 {
            for b in a + 1..10 {
                for c in b + 1..10 {
                    let mut o = WildcardOracle::new(x.clone());
                    let mut claim = x.restrict(&positions);
                    [a, b, c].iter().for_each(|&j| claim.flip(j));
                    let i = find_mismatch(&mut o, &positions, &claim).unwrap();
                    let j = positions.iter().position(|&p| p == i).unwrap();
                    assert_ne!(claim.get(j), x.get(i));
                    assert_eq!(o.ledger().total(), 4);
                }
            }
        }
    }

    #[test]
    fn mismatch_edges() {
        let mut o = WildcardOracle::new("1".parse().unwrap());
        assert_eq!(find_mismatch(&mut o, &[0], &"0".parse().unwrap()).unwrap(), 0);
        assert_eq!(o.ledger().total(), 0);
        assert!(matches!(
            find_mismatch(&mut o, &[], &BitString::zeros(0)),
            Err(Error::Contract(_))
        ));
        let mut o = WildcardOracle::new("101".parse().unwrap());
        let r = find_mismatch(&mut o, &[0, 1, 2], &"101".parse().unwrap());
        assert!(matches!(r, Err(Error::Contract(_))));
    }

    #[test]
    fn search_recovers_and_costs_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in [1usize, 2, 5, 17, 64, 150] {
            let plan = SearchPlan::new(n).unwrap();
            for _ in 0..40 {
                let x = BitString::random(n, &mut rng);
                let mut o = WildcardOracle::with_ledger(x.clone(), QueryLedger::with_trace());
                let run = simulate_search(&mut o, &plan, &mut rng).unwrap();
                assert_eq!(run.estimate, x);
                assert_eq!(run.stage0_queries, plan.schedule().initial() as u64);
                let mut total = run.stage0_queries;
                for st in &run.stages {
                    assert_eq!(st.queries_charged, stage_cost(st.window, st.errors_sampled));
                    total += st.queries_charged;
                }
                assert_eq!(total, o.ledger().total());
                assert_eq!(o.ledger().trace.as_ref().unwrap().len() as u64, total);
            }
        }
    }

    #[test]
    fn stage_errors_follow_the_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let plan = SearchPlan::new(16).unwrap();
        let (s, (prev, cur)) = plan.schedule().steps().enumerate().last().unwrap();
        assert_eq!((prev, cur), (12, 16));
        let law = plan.law(s + 1);
        let runs = 10_000;
        let mut sum = 0.0;
        for _ in 0..runs {
            let x = BitString::random(16, &mut rng);
            let mut o = WildcardOracle::new(x.clone());
            let mut st = Knowledge::new(16);
            for i in 0..12 {
                o.query(&WildcardQuery::from_assignments(16, [(i, x.get(i))]).unwrap())
                    .unwrap();
                st.pool.retain(|&p| p != i);
                st.window.push(i);
                st.values.push(x.get(i));
            }
            let out = run_stage(&mut o, &mut st, 1, 16, law, &mut rng).unwrap();
            assert_eq!(out.queries_charged, stage_cost(16, out.errors_sampled));
            sum += out.errors_sampled as f64;
        }
        let mean = sum / runs as f64;
        let se = (law.variance() / runs as f64).sqrt();
        let d = expected_distance_plancherel(16, 12).unwrap();
        assert!((mean - d).abs() <= 3.0 * se, "{mean} vs {d} (se {se})");
    }
}
