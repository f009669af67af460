//! Command bodies. Each returns the text for stdout and an exit code; the
//! binary only parses arguments and does the printing.

use std::collections::BTreeMap;
use std::time::Instant;

use lhv_core::analysis::{
    evaluate_point, four_ensemble_family, scan_grid, summarize_scan, three_ensemble_family, validate_scan_params,
    Hull, LpStatus, ScanPoint,
};
use lhv_core::assembly::{assemble, variable_label, Scenario};
use lhv_core::lp::{check_feasibility, Verdict};
use lhv_core::qubit::Vec3;
use lhv_core::steering::{construct_steering_measurement, construction_residual, steered_ensemble, CMatrix};
use lhv_core::structure::atom_table;
use lhv_core::system::{ConstraintSystem, Relation};
use lhv_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{ensemble_from_members, parse_json, InputError, MemberSpec, StateFile};

pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_AMBIGUOUS: i32 = 3;
pub const EXIT_MALFORMED: i32 = 4;

/// What a command wants printed, and how the process should exit.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

impl Outcome {
    fn json(code: i32, value: &impl Serialize) -> Self {
        let mut stdout = serde_json::to_string_pretty(value).expect("reports serialize");
        stdout.push('\n');
        Self { code, stdout }
    }
}

/// Multipliers smaller than this are dropped from printed certificates.
const CERT_PRINT_EPS: f64 = 1e-12;

fn relation_str(r: Relation) -> &'static str {
    match r {
        Relation::Eq => "eq",
        Relation::Le => "le",
        Relation::Ge => "ge",
    }
}

pub fn system_json(sys: &ConstraintSystem) -> Value {
    let rows: Vec<Value> = sys
        .rows
        .iter()
        .map(|row| {
            let coeffs: BTreeMap<&str, f64> = row.coeffs.iter().map(|&(j, a)| (sys.vars[j].as_str(), a)).collect();
            json!({
                "label": row.label,
                "relation": relation_str(row.relation),
                "coeffs": coeffs,
                "rhs": row.rhs,
            })
        })
        .collect();
    json!({ "vars": sys.vars, "lower": sys.lower, "upper": sys.upper, "rows": rows })
}

fn atoms_json(scenario: &Scenario, table: &[Vec<Vec<usize>>]) -> Value {
    let atoms: Vec<Value> = table
        .iter()
        .enumerate()
        .map(|(j, pattern)| {
            let members: Vec<Vec<&str>> = pattern
                .iter()
                .enumerate()
                .map(|(e, ms)| ms.iter().map(|&m| scenario.labels()[e][m].as_str()).collect())
                .collect();
            json!({ "atom": j + 1, "members": members })
        })
        .collect();
    Value::Array(atoms)
}

/// Solves a scenario. Exit 0 feasible, 2 infeasible, 3 otherwise.
pub fn check(scenario: &Scenario, emit_system: bool) -> Outcome {
    let assembly = match assemble(scenario) {
        Ok(a) => a,
        Err(e) => return Outcome::json(EXIT_AMBIGUOUS, &json!({ "status": "error", "error": e.to_string() })),
    };
    let sys = &assembly.system;
    let mut report = serde_json::Map::new();
    let code = match check_feasibility(sys) {
        Ok(r) => {
            let code = match r.verdict {
                Verdict::Feasible { witness, residual } => {
                    let w: serde_json::Map<String, Value> = assembly
                        .index
                        .entries()
                        .iter()
                        .zip(&witness)
                        .map(|(v, &x)| (variable_label(scenario, v), json!(x)))
                        .collect();
                    report.insert("status".into(), json!("feasible"));
                    report.insert("witness".into(), Value::Object(w));
                    report.insert("residual".into(), json!(residual));
                    EXIT_FEASIBLE
                }
                Verdict::Infeasible { multipliers, margin } => {
                    let cert: serde_json::Map<String, Value> = sys
                        .rows
                        .iter()
                        .zip(&multipliers)
                        .filter(|(_, u)| u.abs() > CERT_PRINT_EPS)
                        .map(|(row, &u)| (row.label.clone(), json!(u)))
                        .collect();
                    report.insert("status".into(), json!("infeasible"));
                    report.insert("certificate".into(), Value::Object(cert));
                    report.insert("margin".into(), json!(margin));
                    EXIT_INFEASIBLE
                }
            };
            report.insert("iterations".into(), json!(r.iterations));
            code
        }
        Err(Error::NumericallyAmbiguous { residual, margin }) => {
            report.insert("status".into(), json!("ambiguous"));
            report.insert("residual".into(), json!(residual));
            report.insert("margin".into(), json!(margin));
            EXIT_AMBIGUOUS
        }
        Err(e) => {
            report.insert("status".into(), json!("error"));
            report.insert("error".into(), json!(e.to_string()));
            EXIT_AMBIGUOUS
        }
    };
    report.insert("atoms".into(), atoms_json(scenario, &atom_table(&assembly.atoms)));
    if emit_system {
        report.insert("system".into(), system_json(sys));
    }
    Outcome::json(code, &Value::Object(report))
}

/// Grid coordinates are multiples of the step; trim the float noise so the
/// CSV reads `0.15`, not `0.15000000000000002`.
fn grid_value(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

#[derive(Debug, Clone, Serialize)]
struct CsvRow {
    alpha: f64,
    beta: f64,
    gamma: f64,
    realizable: bool,
    hull: Option<&'static str>,
    lp_status: Option<&'static str>,
    margin: Option<f64>,
}

impl From<&ScanPoint> for CsvRow {
    fn from(p: &ScanPoint) -> Self {
        CsvRow {
            alpha: grid_value(p.triple[0]),
            beta: grid_value(p.triple[1]),
            gamma: grid_value(p.triple[2]),
            realizable: p.realizable,
            hull: p.hull.map(Hull::as_str),
            lp_status: p.lp.map(LpStatus::as_str),
            margin: p.margin,
        }
    }
}

pub struct ScanArgs<'a> {
    pub step: f64,
    pub margin: f64,
    pub out: Option<&'a std::path::Path>,
    /// Worker threads; 0 lets the pool pick.
    pub jobs: usize,
    pub timing: bool,
}

/// Overlap-triple scan over the grid. Exit 0 whenever the scan ran,
/// mismatches included: they are findings, listed in the summary.
pub fn scan(args: &ScanArgs) -> Result<Outcome, InputError> {
    validate_scan_params(args.step, args.margin).map_err(|e| InputError(format!("scan: {e}")))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| InputError(format!("--jobs: {e}")))?;
    let start = Instant::now();
    let grid = scan_grid(args.step);
    let points = match pool.install(|| grid.par_iter().map(|&t| evaluate_point(t, args.margin)).collect()) {
        Ok(p) => p,
        Err(e) => return Ok(Outcome::json(EXIT_AMBIGUOUS, &json!({ "status": "error", "error": e.to_string() }))),
    };
    let mut report = summarize_scan(args.step, args.margin, points);
    report.runtime_secs = start.elapsed().as_secs_f64();

    if let Some(path) = args.out {
        let mut w = csv::Writer::from_path(path).map_err(|e| InputError(format!("--out {}: {e}", path.display())))?;
        for p in &report.points {
            w.serialize(CsvRow::from(p)).map_err(|e| InputError(format!("--out {}: {e}", path.display())))?;
        }
        w.flush().map_err(|e| InputError(format!("--out {}: {e}", path.display())))?;
    }

    let mismatches: Vec<Value> = report
        .mismatches
        .iter()
        .map(|m| {
            json!({
                "alpha": grid_value(m.triple[0]),
                "beta": grid_value(m.triple[1]),
                "gamma": grid_value(m.triple[2]),
                "lp_status": m.lp.as_str(),
                "hull": m.hull.as_str(),
            })
        })
        .collect();
    let mut summary = json!({
        "grid_step": report.grid_step,
        "margin": report.margin,
        "grid_points": report.points.len(),
        "realizable": report.points.iter().filter(|p| p.realizable).count(),
        "points_tested": report.points_tested,
        "skipped_boundary": report.skipped_boundary,
        "skipped_ambiguous": report.skipped_ambiguous,
        "mismatches": mismatches,
    });
    // Wall-clock time would break byte-identical reports, so it is opt-in.
    if args.timing {
        summary["runtime_secs"] = json!(report.runtime_secs);
    }
    Ok(Outcome::json(EXIT_FEASIBLE, &summary))
}

pub struct WernerArgs {
    pub ensembles: usize,
    pub tol: f64,
    /// Grid step of the realizable-triple family (3 bases).
    pub grid_step: f64,
    /// Angles per parametrized family (4 bases).
    pub angles: usize,
    /// Extra random direction 4-tuples (4 bases).
    pub random: usize,
    pub seed: u64,
}

/// Four random directions, drawn uniformly from the sphere.
fn random_four(rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    (0..4)
        .map(|_| loop {
            let v: Vec3 = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 0.1 && n <= 1.0 {
                break [v[0] / n, v[1] / n, v[2] / n];
            }
        })
        .collect()
}

/// The configurations searched for a given number of bases.
pub fn werner_family(args: &WernerArgs) -> Result<Vec<Vec<Vec3>>, InputError> {
    match args.ensembles {
        3 => {
            if !(0.01..=0.25).contains(&args.grid_step) {
                return Err(InputError("--grid-step: must lie in [0.01, 0.25]".into()));
            }
            three_ensemble_family(&[0.25, 0.1, 0.5, 0.75], args.grid_step)
                .map_err(|e| InputError(format!("--grid-step: {e}")))
        }
        4 => {
            let mut family = four_ensemble_family(args.angles);
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            for _ in 0..args.random {
                let dirs = random_four(&mut rng);
                if lhv_core::builders::werner(1.0, &dirs).is_ok() {
                    family.push(dirs);
                }
            }
            Ok(family)
        }
        n => Err(InputError(format!("--ensembles: expected 3 or 4, got {n}"))),
    }
}

/// Smallest Werner visibility at which some configuration loses its model.
pub fn werner(args: &WernerArgs) -> Result<Outcome, InputError> {
    if !(args.tol >= 1e-4) {
        return Err(InputError(format!("--tol: must be at least 1e-4, got {}", args.tol)));
    }
    let family = werner_family(args)?;
    let report = match lhv_core::analysis::werner_threshold(&family, args.tol) {
        Ok(r) => r,
        Err(Error::NoViolationFound) => {
            return Ok(Outcome::json(
                EXIT_AMBIGUOUS,
                &json!({ "status": "no_violation", "configs_searched": family.len() }),
            ))
        }
        Err(e) => return Ok(Outcome::json(EXIT_AMBIGUOUS, &json!({ "status": "error", "error": e.to_string() }))),
    };
    let best = report.best_config();
    let trace: Vec<Value> = best.trace.iter().map(|p| json!({ "w": p.w, "status": p.status.as_str() })).collect();
    Ok(Outcome::json(
        EXIT_FEASIBLE,
        &json!({
            "status": "ok",
            "ensembles": args.ensembles,
            "tol": args.tol,
            "threshold": report.threshold,
            "config": {
                "index": report.best,
                "directions": best.directions,
                "trace": trace,
            },
            "configs_searched": report.configs.len(),
            "configs_pruned": report.configs.iter().filter(|c| c.pruned).count(),
        }),
    ))
}

fn matrix_json(m: &CMatrix) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect();
    json!(rows)
}

/// Builds the measurement on A that prepares the ensemble on B.
pub fn steer(state_text: (&str, &str), ensemble_text: (&str, &str)) -> Result<Outcome, InputError> {
    let state: StateFile = parse_json(state_text.0, state_text.1)?;
    let psi = state.to_state().map_err(|e| InputError(format!("{}: {e}", state_text.0)))?;
    let members: Vec<MemberSpec> = parse_json(ensemble_text.0, ensemble_text.1)?;
    let ensemble = ensemble_from_members(&members).map_err(|e| InputError(format!("{}: {e}", ensemble_text.0)))?;

    let m = match construct_steering_measurement(&psi, &ensemble) {
        Ok(m) => m,
        Err(Error::NotSteerable { max_deviation }) => {
            return Ok(Outcome::json(
                EXIT_INFEASIBLE,
                &json!({ "status": "not_steerable", "max_deviation": max_deviation }),
            ))
        }
        Err(Error::RankDeficient { member, residual }) => {
            return Ok(Outcome::json(
                EXIT_INFEASIBLE,
                &json!({ "status": "rank_deficient", "member": member, "residual": residual }),
            ))
        }
        Err(e) => return Err(InputError(format!("{}: {e}", state_text.0))),
    };
    let (min_eigenvalue, completeness_error) = m.diagnostics();
    let steered: Vec<Value> =
        steered_ensemble(&psi, &m).iter().map(|(p, s)| json!({ "p": p, "bloch": s.bloch() })).collect();
    let elements: Vec<Value> = m.elements().iter().map(matrix_json).collect();
    Ok(Outcome::json(
        EXIT_FEASIBLE,
        &json!({
            "status": "ok",
            "measurement": elements,
            "min_eigenvalue": min_eigenvalue,
            "completeness_error": completeness_error,
            "residual": construction_residual(&psi, &m, &ensemble),
            "steered": steered,
        }),
    ))
}
