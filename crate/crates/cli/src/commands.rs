//! One function per subcommand, each building a [`Document`].

use anyhow::Result;
use serde_json::{json, Map, Value};

use qwild::acceptance::{self, CriterionResult, SPECTRAL_ABS_TOL};
use qwild::adversary::adversary_report;
use qwild::baselines::{cgt_classical, info_bounds};
use qwild::cgt_quantum::{cgt_k1, cgt_solve, SolveOptions};
use qwild::gram::{
    brute_force_pgm, expected_distance_plancherel, genlower_bound, success_upper_bound, GramSpectrum, PrecisionPolicy,
    BRUTE_FORCE_MAX_N,
};
use qwild::harness::{run_cgt, run_sww, run_trials, CgtExperiment, CgtSolver, CgtTrial, TrialStats};
use qwild::oracles::WildcardsViaCgt;
use qwild::wildcard_search::SearchPlan;
use qwild::BitString;

use crate::emit::Document;
use crate::{
    usage, AcceptanceArgs, AdversaryArgs, CgtArgs, Command, GramArgs, ReduceArgs, ReduceSolver, Sizes, SweepArgs,
    SwwArgs,
};

/// Largest length whose `2^k` strings `reduce` enumerates.
pub const REDUCE_EXHAUSTIVE_MAX_K: usize = 16;

/// Result of a subcommand before encoding.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub doc: Document,
    pub summary_line: String,
    /// Precision alarms; fatal only under `--strict`.
    pub warnings: Vec<String>,
    /// Set when the run completed but its checks did not hold.
    pub failure: Option<String>,
}

pub fn dispatch(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Gram(a) => gram(a),
        Command::DkSweep(a) => dk_sweep(a),
        Command::Sww(a) => sww(a),
        Command::Cgt(a) => cgt(a, false),
        Command::CgtClassical(a) => cgt(a, true),
        Command::Adversary(a) => adversary(a),
        Command::Reduce(a) => reduce(a),
        Command::AllAcceptance(a) => all_acceptance(a),
    }
}

impl Sizes {
    pub fn resolve(&self) -> Result<Vec<u64>> {
        match (self.n_min, self.n_max) {
            (Some(lo), Some(hi)) if lo > hi => Err(usage(format!("--n-min {lo} exceeds --n-max {hi}"))),
            (Some(lo), Some(hi)) => Ok((lo..=hi).collect()),
            _ if self.n.is_empty() => Err(usage("give --n or --n-min/--n-max")),
            _ => Ok(self.n.clone()),
        }
    }
}

fn policy(budget: Option<f64>) -> Result<PrecisionPolicy> {
    let mut p = PrecisionPolicy::default();
    if let Some(b) = budget {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(usage(format!("--budget must be a finite number >= 0, got {b}")));
        }
        p.budget = b;
    }
    Ok(p)
}

fn ceil_sqrt(n: u64) -> u64 {
    let r = n.isqrt();
    r + u64::from(r * r < n)
}

fn spectrum_warnings(spec: &GramSpectrum, warnings: &mut Vec<String>) {
    for e in spec.alarms() {
        warnings.push(format!(
            "n={} k={}: entry d = {} has relative error bound {:.3e}",
            spec.n(),
            spec.k(),
            e.d,
            e.rel_error_bound
        ));
    }
}

fn route_gap(direct: f64, plancherel: f64) -> f64 {
    (direct - plancherel).abs() / direct.max(1e-15)
}

fn gram(a: &GramArgs) -> Result<Outcome> {
    let ns = a.sizes.resolve()?;
    let policy = policy(a.budget)?;
    if a.brute_check {
        if let Some(&n) = ns.iter().find(|&&n| n > BRUTE_FORCE_MAX_N) {
            return Err(usage(format!("--brute-check needs n <= {BRUTE_FORCE_MAX_N}, got {n}")));
        }
    }
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut max_gap = 0.0f64;
    let mut brute_all = true;
    for &n in &ns {
        let ks: Vec<u64> = if a.k.is_empty() {
            (0..=n).collect()
        } else {
            a.k.iter().copied().filter(|&k| k <= n).collect()
        };
        for k in ks {
            let spec = GramSpectrum::compute_with(n, k, policy)?;
            spectrum_warnings(&spec, &mut warnings);
            let report = spec.report()?;
            max_gap = max_gap.max(route_gap(report.d_direct, report.d_plancherel));
            let mut rec = serde_json::to_value(&report)?;
            if a.brute_check {
                let brute = brute_force_pgm(n, k)?;
                let diff = report
                    .sqrt_g
                    .iter()
                    .zip(&brute.sqrt_g_by_distance)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                let agrees = diff <= SPECTRAL_ABS_TOL;
                brute_all &= agrees;
                rec["brute_max_abs_diff"] = json!(diff);
                rec["brute_agrees"] = json!(agrees);
            }
            records.push(rec);
        }
    }
    let mut summary = json!({
        "spectra": records.len(),
        "alarms": warnings.len(),
        "max_rel_gap_D": max_gap,
    });
    let mut line = format!(
        "gram: {} spectra, max D route gap {max_gap:.2e}, {} precision alarm(s)",
        records.len(),
        warnings.len()
    );
    if a.brute_check {
        summary["brute_agrees"] = json!(brute_all);
        line.push_str(&format!(", brute-force agreement {brute_all}"));
    }
    let config = json!({
        "n": ns,
        "k": a.k,
        "brute_check": a.brute_check,
        "budget": policy.budget,
        "format": a.output.format,
        "strict": a.output.strict,
    });
    Ok(Outcome {
        doc: Document {
            command: "gram".into(),
            config,
            summary,
            records,
        },
        summary_line: line,
        warnings,
        failure: None,
    })
}

fn dk_sweep(a: &SweepArgs) -> Result<Outcome> {
    let ns = a.sizes.resolve()?;
    let policy = policy(a.budget)?;
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut max_d = (f64::NEG_INFINITY, 0u64, 0u64);
    for &n in &ns {
        let ks: Vec<u64> = if a.k.is_empty() {
            vec![n - ceil_sqrt(n)]
        } else {
            a.k.iter().copied().filter(|&k| k <= n).collect()
        };
        for k in ks {
            let spec = GramSpectrum::compute_with(n, k, policy)?;
            spectrum_warnings(&spec, &mut warnings);
            let direct = spec.expected_distance_direct();
            let plancherel = expected_distance_plancherel(n, k)?;
            if direct > max_d.0 {
                max_d = (direct, n, k);
            }
            records.push(json!({
                "n": n,
                "k": k,
                "a": if n == 0 { 0.0 } else { (n - k) as f64 / (n as f64).sqrt() },
                "D_direct": direct,
                "D_plancherel": plancherel,
                "rel_gap": route_gap(direct, plancherel),
                "p_success": spec.success_probability(),
                "genlower": genlower_bound(n, k)?,
                "success_upper_bound": success_upper_bound(n, k)?,
                "truncated": spec.is_truncated(),
                "alarms": spec.alarms().count(),
            }));
        }
    }
    let summary = json!({
        "points": records.len(),
        "max_D": if records.is_empty() { Value::Null } else { json!(max_d.0) },
        "argmax": {"n": max_d.1, "k": max_d.2},
        "alarms": warnings.len(),
    });
    let line = format!(
        "dk-sweep: {} points, max D = {:.6} at n = {}, k = {}, {} precision alarm(s)",
        records.len(),
        max_d.0,
        max_d.1,
        max_d.2,
        warnings.len()
    );
    let config = json!({
        "n": ns,
        "k": a.k,
        "budget": policy.budget,
        "format": a.output.format,
        "strict": a.output.strict,
    });
    Ok(Outcome {
        doc: Document {
            command: "dk-sweep".into(),
            config,
            summary,
            records,
        },
        summary_line: line,
        warnings,
        failure: None,
    })
}

fn stats_json(stats: &TrialStats) -> Value {
    json!({
        "count": stats.count,
        "mean": stats.mean,
        "std_dev": stats.std_dev,
        "ci95_halfwidth": stats.ci95_halfwidth,
    })
}

fn sww(a: &SwwArgs) -> Result<Outcome> {
    let ns = a.sizes.resolve()?;
    let policy = policy(a.budget)?;
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut by_n = Vec::new();
    let mut parts = Vec::new();
    for &n in &ns {
        let plan = SearchPlan::with_policy(n as usize, policy)?;
        warnings.extend(plan.alarms().iter().map(|w| format!("n={n}: {w}")));
        let runs = run_sww(&plan, a.trials, a.seed, a.trace)?;
        let stats = TrialStats::from_samples(&runs.iter().map(|r| r.queries_total as f64).collect::<Vec<_>>())?;
        let exact = runs.iter().filter(|r| r.exact).count() as f64 / runs.len() as f64;
        let scale = (n as f64).sqrt() * (n as f64).log2();
        by_n.push(json!({
            "n": n,
            "queries": stats_json(&stats),
            "exact_fraction": exact,
            "stages": plan.schedule().stages(),
            "initial_window": plan.schedule().initial(),
            "mean_over_sqrt_n_log2_n": if scale > 0.0 { json!(stats.mean / scale) } else { Value::Null },
        }));
        parts.push(format!(
            "n={n}: mean {:.2} queries, {:.0}% exact",
            stats.mean,
            100.0 * exact
        ));
        for r in runs {
            records.push(serde_json::to_value(&r)?);
        }
    }
    let config = json!({
        "n": ns,
        "trials": a.trials,
        "seed": a.seed,
        "trace": a.trace,
        "budget": policy.budget,
        "format": a.output.format,
        "strict": a.output.strict,
    });
    Ok(Outcome {
        doc: Document {
            command: "sww".into(),
            config,
            summary: json!({ "by_n": by_n }),
            records,
        },
        summary_line: format!("sww: {} over {} trials each", parts.join("; "), a.trials),
        warnings,
        failure: None,
    })
}

fn solver_name(s: CgtSolver) -> &'static str {
    match s {
        CgtSolver::QuantumSingle => "quantum_single",
        CgtSolver::QuantumGeneral => "quantum_general",
        CgtSolver::ClassicalBinarySearch => "classical_binary_search",
    }
}

fn cgt_record(t: &CgtTrial, solver: CgtSolver) -> Result<Value> {
    let mut rec = serde_json::to_value(t)?;
    rec["solver"] = json!(solver_name(solver));
    Ok(rec)
}

fn cgt(a: &CgtArgs, classical: bool) -> Result<Outcome> {
    let command = if classical { "cgt-classical" } else { "cgt" };
    if a.n.is_empty() || a.k.is_empty() {
        return Err(usage(format!("{command} needs --n and --k")));
    }
    let mut records = Vec::new();
    let mut cases = Vec::new();
    let mut parts = Vec::new();
    for &n in &a.n {
        for &k in a.k.iter().filter(|&&k| k <= n) {
            if a.weight.is_some_and(|w| w > k) {
                return Err(usage(format!("--weight {} exceeds k = {k}", a.weight.unwrap_or(0))));
            }
            let solver = if classical {
                CgtSolver::ClassicalBinarySearch
            } else {
                CgtSolver::quantum_for(k)
            };
            let runs = run_cgt(&CgtExperiment {
                n,
                k,
                weight: a.weight,
                solver,
                trials: a.trials,
                seed: a.seed,
                trace: a.trace,
            })?;
            let stats = TrialStats::from_samples(&runs.iter().map(|t| t.queries_total as f64).collect::<Vec<_>>())?;
            let exact = runs.iter().filter(|t| t.exact).count() as f64 / runs.len() as f64;
            let lb = info_bounds(n as u64, k as u64)?.classical_cgt_lb;
            cases.push(json!({
                "n": n,
                "k": k,
                "solver": solver_name(solver),
                "queries": stats_json(&stats),
                "exact_fraction": exact,
                "classical_cgt_lb": lb,
            }));
            parts.push(format!(
                "n={n} k={k}: mean {:.3} queries, {:.0}% exact",
                stats.mean,
                100.0 * exact
            ));
            for t in &runs {
                records.push(cgt_record(t, solver)?);
            }
        }
    }
    let config = json!({
        "n": a.n,
        "k": a.k,
        "weight": a.weight,
        "trials": a.trials,
        "seed": a.seed,
        "trace": a.trace,
        "format": a.output.format,
        "strict": a.output.strict,
    });
    Ok(Outcome {
        doc: Document {
            command: command.into(),
            config,
            summary: json!({ "by_case": cases }),
            records,
        },
        summary_line: format!("{command}: {} over {} trials each", parts.join("; "), a.trials),
        warnings: Vec::new(),
        failure: None,
    })
}

fn adversary(a: &AdversaryArgs) -> Result<Outcome> {
    let ns = a.sizes.resolve()?;
    let mut records = Vec::new();
    let mut parts = Vec::new();
    for &n in &ns {
        let r = adversary_report(n as usize)?;
        parts.push(format!("n={n}: {}", r.bound));
        records.push(serde_json::to_value(&r)?);
    }
    let bounds: Vec<Value> = records
        .iter()
        .map(|r| json!({"n": r["n"], "bound": r["bound"]}))
        .collect();
    Ok(Outcome {
        doc: Document {
            command: "adversary".into(),
            config: json!({"n": ns, "format": a.output.format, "strict": a.output.strict}),
            summary: json!({ "bounds": bounds }),
            records,
        },
        summary_line: format!("adversary: bound {}", parts.join(", ")),
        warnings: Vec::new(),
        failure: None,
    })
}

fn reduce(a: &ReduceArgs) -> Result<Outcome> {
    if a.k.is_empty() {
        return Err(usage("reduce needs --k"));
    }
    if a.k.contains(&0) {
        return Err(usage("reduce needs k >= 1"));
    }
    if a.trials.is_none() {
        if let Some(&k) = a.k.iter().find(|&&k| k > REDUCE_EXHAUSTIVE_MAX_K) {
            return Err(usage(format!(
                "enumerating all strings needs k <= {REDUCE_EXHAUSTIVE_MAX_K}, got {k}; pass --trials"
            )));
        }
    }
    let solvers: &[bool] = match a.solver {
        ReduceSolver::Classical => &[false],
        ReduceSolver::Quantum => &[true],
        ReduceSolver::Both => &[false, true],
    };
    let mut records = Vec::new();
    let mut by_solver: Map<String, Value> = Map::new();
    for &quantum in solvers {
        let name = if quantum { "quantum" } else { "classical" };
        let (mut instances, mut failures, mut queries) = (0u64, 0u64, 0u64);
        for &k in &a.k {
            let count = a.trials.unwrap_or(1 << k);
            let rows = run_trials(a.seed, count, |trial, rng| {
                let z = match a.trials {
                    Some(_) => BitString::random(k, rng),
                    None => BitString::from_u64(k, trial),
                };
                let mut red = WildcardsViaCgt::new(z.clone(), a.padding)?;
                let x = if !quantum {
                    cgt_classical(red.cgt(), k)?
                } else if k == 1 {
                    cgt_k1(red.cgt(), rng)?
                } else {
                    cgt_solve(red.cgt(), k, rng, SolveOptions::default())?.estimate
                };
                let exact = red.decode(&x).ok().as_ref() == Some(&z);
                Ok((trial, z, red.ledger().total(), exact))
            })?;
            for (trial, z, q, exact) in rows {
                instances += 1;
                failures += u64::from(!exact);
                queries += q;
                records.push(json!({
                    "k": k,
                    "padding": a.padding,
                    "solver": name,
                    "trial": trial,
                    "z": z,
                    "queries": q,
                    "exact": exact,
                }));
            }
        }
        by_solver.insert(
            name.into(),
            json!({
                "instances": instances,
                "failures": failures,
                "mean_queries": queries as f64 / instances.max(1) as f64,
            }),
        );
    }
    let failures: u64 = by_solver.values().map(|v| v["failures"].as_u64().unwrap_or(0)).sum();
    let config = json!({
        "k": a.k,
        "padding": a.padding,
        "solver": a.solver,
        "trials": a.trials,
        "seed": a.seed,
        "format": a.output.format,
        "strict": a.output.strict,
    });
    Ok(Outcome {
        summary_line: format!("reduce: {} instances, {failures} failure(s)", records.len()),
        doc: Document {
            command: "reduce".into(),
            config,
            summary: json!({ "failures": failures, "by_solver": by_solver }),
            records,
        },
        warnings: Vec::new(),
        failure: (failures > 0).then(|| format!("{failures} instance(s) decoded to the wrong string")),
    })
}

/// Runs criterion `id`; 12 is the CLI determinism check.
pub fn criterion(id: u32) -> Option<CriterionResult> {
    if id == crate::determinism::DETERMINISM_ID {
        Some(crate::determinism::criterion_12())
    } else {
        acceptance::run_criterion(id)
    }
}

fn all_acceptance(a: &AcceptanceArgs) -> Result<Outcome> {
    let ids: Vec<u32> = if a.only.is_empty() {
        (1..=crate::determinism::DETERMINISM_ID).collect()
    } else {
        a.only.clone()
    };
    let mut records = Vec::new();
    for &id in &ids {
        let r = criterion(id).ok_or_else(|| usage(format!("no criterion {id}")))?;
        records.push(serde_json::to_value(&r)?);
    }
    let passed = records.iter().filter(|r| r["passed"] == json!(true)).count();
    let failed: Vec<String> = records
        .iter()
        .filter(|r| r["passed"] != json!(true))
        .map(|r| r["id"].to_string())
        .collect();
    Ok(Outcome {
        summary_line: format!("all-acceptance: {passed}/{} criteria passed", records.len()),
        doc: Document {
            command: "all-acceptance".into(),
            config: json!({"only": ids, "format": a.output.format, "strict": a.output.strict}),
            summary: json!({"passed": passed, "total": records.len()}),
            records,
        },
        warnings: Vec::new(),
        failure: (!failed.is_empty()).then(|| format!("criteria {} failed", failed.join(", "))),
    })
}
