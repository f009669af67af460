//! End-to-end acceptance criteria. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line; the process fails if any does.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::time::{Duration, Instant};

use common::{fm_feasible, random_ensemble_for, random_entangled, random_system, rng, unit_vector};
use lhv_core::analysis::{
    conjecture_scan, four_ensemble_family, gpr_sweep, three_ensemble_family, triple_directions,
    werner_status, werner_threshold, LpStatus,
};
use lhv_core::assembly::{assemble, marginal_system, MixtureMode};
use lhv_core::builders::{nonorthogonal_pair, three_orthogonal, two_orthogonal};
use lhv_core::lp::{check_feasibility, pinned_value, verify_certificate, verify_witness, Verdict, MARGIN_TOL};
use lhv_core::qubit::{ensemble_average, OverlapTriple, PureState, Vec3, WeightedEnsemble};
use lhv_core::steering::{construct_steering_measurement, construction_residual, reduced_state, steered_ensemble};
use lhv_core::structure::Variable;
use lhv_core::Error;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn infeasible_margin(sys: &lhv_core::system::ConstraintSystem) -> Result<f64, String> {
    let report = check_feasibility(sys).map_err(|e| e.to_string())?;
    match report.verdict {
        Verdict::Infeasible { ref multipliers, .. } => {
            let m = verify_certificate(sys, multipliers).ok_or("certificate has wrong signs")?;
            ensure(m >= MARGIN_TOL, || format!("margin {m:e} below tolerance"))?;
            Ok(m)
        }
        Verdict::Feasible { .. } => Err("reported feasible".into()),
    }
}

fn two_orthogonal_feasible() -> Outcome {
    for alpha in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let s = two_orthogonal(alpha).map_err(|e| e.to_string())?;
        let a = assemble(&s).map_err(|e| e.to_string())?;
        let r = check_feasibility(&a.system).map_err(|e| e.to_string())?;
        ensure(r.is_feasible(), || format!("alpha {alpha} infeasible"))?;

        let mut x = vec![0.0; a.system.num_vars()];
        let set = |x: &mut Vec<f64>, name: &str, v: f64| x[a.system.var_index(name).unwrap()] = v;
        for (name, v) in [
            ("nu@1", alpha / 2.0),
            ("nu@4", alpha / 2.0),
            ("nu@2", (1.0 - alpha) / 2.0),
            ("nu@3", (1.0 - alpha) / 2.0),
            ("x@1", alpha),
            ("y@1", alpha),
            ("X@4", alpha),
            ("Y@4", alpha),
            ("x@2", 1.0 - alpha),
            ("y@3", 1.0 - alpha),
            ("X@3", 1.0 - alpha),
            ("Y@2", 1.0 - alpha),
        ] {
            set(&mut x, name, v);
        }
        let res = verify_witness(&a.system, &x);
        ensure(res <= 1e-12, || format!("explicit model residual {res:e} at alpha {alpha}"))?;
    }
    Ok("5 overlaps feasible; explicit model residual <= 1e-12".into())
}

fn nonorthogonal_pair_infeasible() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut pinned = 0;
    for theta in grid(0.01, FRAC_PI_2 - 0.01, 50) {
        let s = nonorthogonal_pair(theta).map_err(|e| e.to_string())?;
        for deficiency in [false, true] {
            let sys = assemble(&s.clone().with_deficiency(deficiency)).map_err(|e| e.to_string())?.system;
            let m = infeasible_margin(&sys).map_err(|e| format!("theta {theta}, deficiency {deficiency}: {e}"))?;
            worst = worst.min(m);
        }
        let marginal = marginal_system(&s).map_err(|e| e.to_string())?.system;
        if let Some(x5) = pinned_value(&marginal, marginal.var_index("X@5").unwrap()) {
            ensure((x5 + theta.cos()).abs() <= 1e-9, || format!("X5 = {x5} at theta {theta}"))?;
            pinned += 1;
        }
    }
    ensure(pinned == 50, || format!("X5 pinned on only {pinned} of 50 angles"))?;
    Ok(format!("50 angles x 2 modes infeasible, smallest margin {worst:.3e}; X5 = -cos(theta) pinned on all 50"))
}

fn three_orthogonal_cases() -> Outcome {
    let mut worst = f64::INFINITY;
    for alpha in grid(0.02, 0.98, 20) {
        let beta = (1.0 + alpha.sqrt()) / 2.0;
        let t = OverlapTriple::new(alpha, beta, beta).map_err(|e| e.to_string())?;
        let sys = assemble(&three_orthogonal(t).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?.system;
        worst = worst.min(infeasible_margin(&sys).map_err(|e| format!("alpha {alpha}: {e}"))?);
    }
    let pauli = three_orthogonal(OverlapTriple::new(0.5, 0.5, 0.5).unwrap()).map_err(|e| e.to_string())?;
    let a = assemble(&pauli).map_err(|e| e.to_string())?;
    ensure(check_feasibility(&a.system).map_err(|e| e.to_string())?.is_feasible(), || "Pauli triple infeasible".into())?;
    ensure(a.atoms.len() == 8, || format!("{} atoms", a.atoms.len()))?;
    let x: Vec<f64> = a
        .index
        .entries()
        .iter()
        .map(|v| match v {
            Variable::BaseMass(_) => 1.0 / 8.0,
            Variable::StateMass(..) => 1.0 / 4.0,
            Variable::ResponseMass(..) => 0.0,
        })
        .collect();
    let res = verify_witness(&a.system, &x);
    ensure(res <= 1e-12, || format!("uniform model residual {res:e}"))?;
    Ok(format!("20 bisecting triples infeasible (smallest margin {worst:.3e}); Pauli feasible; uniform model residual {res:.1e}"))
}

fn scan_matches_tetrahedron() -> Outcome {
    let report = conjecture_scan(0.05, 1e-6).map_err(|e| e.to_string())?;
    let detail = format!(
        "{} points tested, {} boundary and {} ambiguous skipped",
        report.points_tested, report.skipped_boundary, report.skipped_ambiguous
    );
    ensure(report.mismatches.is_empty(), || format!("{} mismatches ({detail}): {:?}", report.mismatches.len(), report.mismatches))?;
    Ok(format!("0 mismatches; {detail}"))
}

fn gpr_sweep_statuses() -> Outcome {
    let qs: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    for (q, status) in gpr_sweep(&qs).map_err(|e| e.to_string())? {
        let want = if (q - 0.5).abs() < 1e-12 { LpStatus::Feasible } else { LpStatus::Infeasible };
        ensure(status == want, || format!("q {q}: {status:?}"))?;
    }
    Ok("infeasible for q != 0.5, feasible at 0.5".into())
}

fn support_only_infeasible() -> Outcome {
    let mut worst = f64::INFINITY;
    for theta in grid(0.01, FRAC_PI_2 - 0.01, 50) {
        let s = nonorthogonal_pair(theta).map_err(|e| e.to_string())?.with_mixture_mode(MixtureMode::SupportOnly);
        let sys = assemble(&s).map_err(|e| e.to_string())?.system;
        ensure(!sys.rows.iter().any(|r| r.label.starts_with("mix")), || "mixture rows present".into())?;
        worst = worst.min(infeasible_margin(&sys).map_err(|e| format!("theta {theta}: {e}"))?);
    }
    Ok(format!("50 angles infeasible without mixture rows, smallest margin {worst:.3e}"))
}

fn werner_thresholds() -> Outcome {
    let b = 0.75;
    let bisecting = triple_directions(&OverlapTriple::new(0.25, b, b).unwrap()).map_err(|e| e.to_string())?;
    ensure(werner_status(&bisecting, 1.0).map_err(|e| e.to_string())? == LpStatus::Infeasible, || {
        "bisecting configuration feasible at w = 1".into()
    })?;

    let three = three_ensemble_family(&[0.25, 0.1, 0.5, 0.75], 0.1).map_err(|e| e.to_string())?;
    let mut four = four_ensemble_family(12);
    let mut r = rng(17);
    for _ in 0..20 {
        let dirs: Vec<Vec3> = (0..4).map(|_| unit_vector(&mut r)).collect();
        four.push(dirs);
    }
    for dirs in three.iter().chain(&four) {
        ensure(werner_status(dirs, 0.0).map_err(|e| e.to_string())? == LpStatus::Feasible, || {
            format!("{dirs:?} infeasible at w = 0")
        })?;
    }
    // werner_threshold checks monotonicity of every bisection trace.
    let t3 = werner_threshold(&three, 1e-3).map_err(|e| format!("3 bases: {e}"))?;
    let t4 = werner_threshold(&four, 1e-3).map_err(|e| format!("4 bases: {e}"))?;
    let divergent = (t3.threshold - 0.8).abs() > 1e-2 || (t4.threshold - FRAC_1_SQRT_2).abs() > 1e-2;
    let values = format!(
        "3 bases: {:.4} (expected 0.8, {} configs); 4 bases: {:.4} (expected {:.4}, {} configs)",
        t3.threshold,
        three.len(),
        t4.threshold,
        FRAC_1_SQRT_2,
        four.len()
    );
    Ok(if divergent { format!("formulation-divergent; {values}") } else { values })
}

fn steering_round_trip() -> Outcome {
    let mut r = rng(19);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let k = 2 + case % 3;
        let psi = random_entangled(&mut r);
        let e = random_ensemble_for(&psi, k, &mut r);
        let m = construct_steering_measurement(&psi, &e).map_err(|err| format!("case {case}: {err}"))?;
        let (min_eig, completeness) = m.diagnostics();
        ensure(min_eig >= -1e-10 && completeness <= 1e-10, || format!("case {case}: invalid POVM"))?;
        for ((p, st), (q, target)) in steered_ensemble(&psi, &m).iter().zip(e.members()) {
            let (a, b) = (st.bloch(), target.bloch());
            let dev = (0..3).map(|i| (a[i] - b[i]).abs()).fold((p - q).abs(), f64::max);
            worst = worst.max(dev);
        }
        worst = worst.max(construction_residual(&psi, &m, &e));
    }
    ensure(worst <= 1e-8, || format!("worst deviation {worst:e}"))?;

    let mut refused = 0;
    while refused < 200 {
        let psi = random_entangled(&mut r);
        let e = random_ensemble_for(&psi, 2 + refused % 3, &mut r);
        let mut members = e.members().to_vec();
        members[0].1 = PureState::from_direction(unit_vector(&mut r)).unwrap();
        let bad = WeightedEnsemble::new(members).unwrap();
        if reduced_state(&psi).max_deviation(&ensemble_average(&bad)) <= 1e-6 {
            continue;
        }
        match construct_steering_measurement(&psi, &bad) {
            Err(Error::NotSteerable { .. }) => refused += 1,
            other => return Err(format!("perturbed ensemble gave {other:?}")),
        }
    }
    Ok(format!("200 constructions within {worst:.1e}; 200 perturbed ensembles refused"))
}

fn solver_soundness() -> Outcome {
    let mut r = rng(23);
    let (mut feasible, mut infeasible) = (0, 0);
    for case in 0..500 {
        let sys = random_system(&mut r);
        let oracle = fm_feasible(&sys);
        let report = check_feasibility(&sys).map_err(|e| format!("case {case}: {e}"))?;
        match report.verdict {
            Verdict::Feasible { ref witness, .. } => {
                ensure(oracle, || format!("case {case}: oracle says infeasible"))?;
                ensure(verify_witness(&sys, witness) <= 1e-9, || format!("case {case}: witness fails"))?;
                feasible += 1;
            }
            Verdict::Infeasible { ref multipliers, .. } => {
                ensure(!oracle, || format!("case {case}: oracle says feasible"))?;
                let m = verify_certificate(&sys, multipliers);
                ensure(m.is_some_and(|m| m >= MARGIN_TOL), || format!("case {case}: certificate fails"))?;
                infeasible += 1;
            }
        }
    }
    Ok(format!("500 systems agree with exact elimination ({feasible} feasible, {infeasible} infeasible)"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("1 two orthogonal ensembles admit a model", Duration::from_secs(1), two_orthogonal_feasible),
        ("2 non-orthogonal pair contradiction", Duration::from_secs(5), nonorthogonal_pair_infeasible),
        ("3 three orthogonal ensembles", Duration::from_secs(5), three_orthogonal_cases),
        ("4 tetrahedron conjecture scan", Duration::from_secs(300), scan_matches_tetrahedron),
        ("5 partially entangled sweep", Duration::from_secs(2), gpr_sweep_statuses),
        ("6 support-only mode", Duration::from_secs(5), support_only_infeasible),
        ("7 Werner thresholds", Duration::from_secs(600), werner_thresholds),
        ("8 steering construction", Duration::from_secs(10), steering_round_trip),
        ("9 solver soundness", Duration::from_secs(30), solver_soundness),
    ];
    eprintln!("acceptance (SEED={})", common::seed());
    let mut failures = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > budget => Err(format!("{msg}; over budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => eprintln!("PASS criterion {name} [{elapsed:.2?}]: {msg}"),
            Err(msg) => {
                failures += 1;
                eprintln!("FAIL criterion {name} [{elapsed:.2?}]: {msg}");
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
