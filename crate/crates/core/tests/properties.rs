//! Cross-module properties exercised through the public API.

use proptest::prelude::*;
use qwild::baselines::{cgt_classical, info_bounds};
use qwild::cgt_quantum::{cgt_solve, SolveOptions};
use qwild::combinatorics::binom_f64;
use qwild::gram::GramSpectrum;
use qwild::harness::{run_cgt, run_sww, CgtExperiment, CgtSolver, TrialStats};
use qwild::oracles::{CgtOracle, QueryKind, QueryLedger, WildcardOracle, WildcardQuery, WildcardsViaCgt};
use qwild::wildcard_search::{ceil_log2, stage_cost, SearchPlan};
use qwild::BitString;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pgm_rows_are_normalized(n in 1u64..=200, frac in 0.0f64..=1.0) {
        let k = (frac * n as f64).round() as u64;
        let spec = GramSpectrum::compute(n, k).unwrap();
        let mass: f64 = spec
            .sqrt_g_by_distance()
            .iter()
            .enumerate()
            .map(|(d, r)| binom_f64(n, d as u64) * r * r)
            .sum();
        prop_assert!((mass - 1.0).abs() <= 1e-9, "n={} k={} mass={}", n, k, mass);
    }

    #[test]
    fn each_call_charges_exactly_one(seed in any::<u64>(), calls in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 12;
        let x = BitString::random(n, &mut rng);
        let mut w = WildcardOracle::with_ledger(x.clone(), QueryLedger::with_trace());
        let mut c = CgtOracle::with_ledger(x, QueryLedger::with_trace());
        for i in 0..calls {
            let s = BitString::random(n, &mut rng);
            let before = (w.ledger().total(), c.ledger().total());
            match i % 4 {
                0 => { w.query(&WildcardQuery::new(s.clone(), BitString::random(n, &mut rng).and(&s)).unwrap()).unwrap(); }
                1 => { w.verify(&WildcardQuery::new(s.clone(), BitString::random(n, &mut rng).and(&s)).unwrap()).unwrap(); }
                2 => { c.query(&s).unwrap(); }
                _ => { c.phase_query(&s, &mut rng).unwrap(); }
            }
            let after = (w.ledger().total(), c.ledger().total());
            prop_assert_eq!(after.0 + after.1, before.0 + before.1 + 1);
        }
        let wl = w.ledger();
        prop_assert_eq!(wl.count(QueryKind::Wildcard) + wl.count(QueryKind::Verification), wl.total());
        prop_assert_eq!(wl.trace_json_lines().len() as u64, wl.total());
        prop_assert_eq!(c.ledger().trace_json_lines().len() as u64, c.ledger().total());
    }

    #[test]
    fn quantum_cgt_is_exact(seed in any::<u64>(), n in 1usize..300, kf in 0.0f64..0.2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = ((kf * n as f64) as usize).max(1);
        let w = rng.random_range(0..=k);
        let x = BitString::random_with_weight(n, w, &mut rng).unwrap();
        let mut oracle = CgtOracle::new(x.clone());
        let run = cgt_solve(&mut oracle, k, &mut rng, SolveOptions::default()).unwrap();
        prop_assert_eq!(run.estimate, x);
    }

    #[test]
    fn classical_cgt_respects_its_bound(seed in any::<u64>(), n in 1usize..2000, k in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = k.min(n);
        let x = BitString::random_with_weight(n, rng.random_range(0..=k), &mut rng).unwrap();
        let mut oracle = CgtOracle::new(x.clone());
        prop_assert_eq!(cgt_classical(&mut oracle, k).unwrap(), x);
        let bound = k as u64 * (ceil_log2(n) as u64 + 1) + 1;
        prop_assert!(oracle.ledger().total() <= bound);
    }

    #[test]
    fn reduction_round_trips(seed in any::<u64>(), k in 1usize..24, padding in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = BitString::random(k, &mut rng);
        let mut red = WildcardsViaCgt::new(z.clone(), padding).unwrap();
        let x = cgt_solve(red.cgt(), k, &mut rng, SolveOptions::default()).unwrap().estimate;
        prop_assert_eq!(red.decode(&x).unwrap(), z.clone());

        // Answers agree with a direct wildcard oracle on the complement of z.
        let mut direct = WildcardOracle::new(z.complement());
        for _ in 0..8 {
            let s = BitString::random(k, &mut rng);
            let q = WildcardQuery::new(s.clone(), BitString::random(k, &mut rng).and(&s)).unwrap();
            prop_assert_eq!(red.query_complement(&q).unwrap(), direct.query(&q).unwrap());
        }
    }
}

#[test]
fn stage_costs_match_the_trace() {
    for n in [16, 100, 300] {
        let plan = SearchPlan::new(n).unwrap();
        for run in run_sww(&plan, 40, 5, true).unwrap() {
            assert!(run.exact);
            assert_eq!(run.stage0_queries, plan.schedule().initial() as u64);
            assert_eq!(run.trace.as_ref().unwrap().len() as u64, run.queries_total);
            for s in &run.stage_outcomes {
                assert_eq!(s.queries_charged, stage_cost(s.window, s.errors_sampled));
            }
        }
    }
}

#[test]
fn quantum_beats_the_classical_counting_bound() {
    let (n, k) = (10_000, 4);
    let runs = run_cgt(&CgtExperiment {
        n,
        k,
        weight: Some(k),
        solver: CgtSolver::QuantumGeneral,
        trials: 200,
        seed: 3,
        trace: false,
    })
    .unwrap();
    let mean = TrialStats::from_samples(&runs.iter().map(|t| t.queries_total as f64).collect::<Vec<_>>())
        .unwrap()
        .mean;
    let lb = info_bounds(n as u64, k as u64).unwrap().classical_cgt_lb;
    assert!(mean < lb, "quantum mean {mean} vs classical lower bound {lb}");
}
