//! Experiments built on the feasibility engine: the tetrahedron conjecture
//! scan over overlap triples, Werner visibility thresholds, and the
//! partially entangled sweep.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::assembly::{assemble, Scenario};
use crate::builders::{gpr, three_orthogonal, werner};
use crate::error::{Error, Result};
use crate::lp::{check_feasibility, Verdict};
use crate::qubit::{realizable, states_from_triple, OverlapTriple, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
    Ambiguous,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Feasible => "feasible",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Ambiguous => "ambiguous",
        }
    }
}

/// Solves a scenario, folding numerical ambiguity into a status.
/// Returns the certificate margin for infeasible outcomes.
pub fn solve_status(scenario: &Scenario) -> Result<(LpStatus, Option<f64>)> {
    let assembly = assemble(scenario)?;
    match check_feasibility(&assembly.system) {
        Ok(report) => Ok(match report.verdict {
            Verdict::Feasible { .. } => (LpStatus::Feasible, None),
            Verdict::Infeasible { margin, .. } => (LpStatus::Infeasible, Some(margin)),
        }),
        Err(Error::NumericallyAmbiguous { .. }) | Err(Error::IterationLimit) => Ok((LpStatus::Ambiguous, None)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hull {
    Inside,
    Outside,
    Boundary,
}

impl Hull {
    pub fn as_str(self) -> &'static str {
        match self {
            Hull::Inside => "inside",
            Hull::Outside => "outside",
            Hull::Boundary => "boundary",
        }
    }
}

/// Barycentric coordinates with respect to the vertices
/// (1,0,0), (0,1,0), (0,0,1), (1,1,1).
pub fn barycentric(t: &OverlapTriple) -> [f64; 4] {
    let (a, b, c) = (t.alpha, t.beta, t.gamma);
    let top = (a + b + c - 1.0) / 2.0;
    [a - top, b - top, c - top, top]
}

/// Membership in the tetrahedron spanned by (1,0,0), (0,1,0), (0,0,1), (1,1,1).
pub fn hull_membership(t: &OverlapTriple, margin: f64) -> Hull {
    let coords = barycentric(t);
    if coords.iter().any(|v| v.abs() <= margin) && margin > 0.0 {
        Hull::Boundary
    } else if coords.iter().all(|&v| v >= 0.0) {
        Hull::Inside
    } else {
        Hull::Outside
    }
}

/// One evaluated grid point of a conjecture scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub triple: [f64; 3],
    pub realizable: bool,
    /// `None` for unrealizable triples.
    pub hull: Option<Hull>,
    pub lp: Option<LpStatus>,
    pub margin: Option<f64>,
}

impl ScanPoint {
    /// A disagreement between the solver and the tetrahedron on a point
    /// that counts.
    pub fn is_mismatch(&self) -> bool {
        match (self.hull, self.lp) {
            (Some(Hull::Inside), Some(LpStatus::Infeasible)) => true,
            (Some(Hull::Outside), Some(LpStatus::Feasible)) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub triple: [f64; 3],
    pub lp: LpStatus,
    pub hull: Hull,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub grid_step: f64,
    pub margin: f64,
    pub points_tested: usize,
    pub mismatches: Vec<Mismatch>,
    pub skipped_boundary: usize,
    pub skipped_ambiguous: usize,
    pub runtime_secs: f64,
    pub points: Vec<ScanPoint>,
}

pub fn validate_scan_params(step: f64, margin: f64) -> Result<()> {
    if !(0.01..=0.25).contains(&step) {
        return Err(Error::InvalidInput("step must lie in [0.01, 0.25]"));
    }
    if !(margin >= 1e-6) || !margin.is_finite() {
        return Err(Error::InvalidInput("margin must be at least 1e-6"));
    }
    Ok(())
}

/// Grid triples `(i, j, k)·step` inside the open unit cube, α outermost.
pub fn scan_grid(step: f64) -> Vec<[f64; 3]> {
    let n = ((1.0 - 1e-9) / step).floor() as usize;
    let axis: Vec<f64> = (1..=n).map(|k| k as f64 * step).filter(|&v| v < 1.0).collect();
    let mut out = Vec::with_capacity(axis.len().pow(3));
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Classifies one triple geometrically and, when realizable, by the solver.
pub fn evaluate_point(triple: [f64; 3], margin: f64) -> Result<ScanPoint> {
    let t = OverlapTriple::new(triple[0], triple[1], triple[2])?;
    if !realizable(&t) {
        return Ok(ScanPoint { triple, realizable: false, hull: None, lp: None, margin: None });
    }
    let hull = hull_membership(&t, margin);
    let (lp, m) = match three_orthogonal(t) {
        Ok(s) => solve_status(&s)?,
        // Triples numerically on the realizability edge can fail exact construction.
        Err(Error::NotRealizable) => (LpStatus::Ambiguous, None),
        Err(e) => return Err(e),
    };
    Ok(ScanPoint { triple, realizable: true, hull: Some(hull), lp: Some(lp), margin: m })
}

/// Aggregates evaluated points, given in grid order.
pub fn summarize_scan(step: f64, margin: f64, points: Vec<ScanPoint>) -> ScanReport {
    let mut report = ScanReport {
        grid_step: step,
        margin,
        points_tested: 0,
        mismatches: Vec::new(),
        skipped_boundary: 0,
        skipped_ambiguous: 0,
        runtime_secs: 0.0,
        points: Vec::new(),
    };
    for p in &points {
        match (p.hull, p.lp) {
            (None, _) => {}
            (Some(Hull::Boundary), _) => report.skipped_boundary += 1,
            (_, Some(LpStatus::Ambiguous)) | (_, None) => report.skipped_ambiguous += 1,
            (Some(hull), Some(lp)) => {
                report.points_tested += 1;
                if p.is_mismatch() {
                    report.mismatches.push(Mismatch { triple: p.triple, lp, hull });
                }
            }
        }
    }
    report.points = points;
    report
}

/// Sequential scan; runtime is left at zero for the caller to fill in.
pub fn conjecture_scan(step: f64, margin: f64) -> Result<ScanReport> {
    validate_scan_params(step, margin)?;
    let points = scan_grid(step)
        .into_iter()
        .map(|t| evaluate_point(t, margin))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_scan(step, margin, points))
}

/// One solver call during a threshold bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub w: f64,
    pub status: LpStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigResult {
    pub directions: Vec<Vec3>,
    /// Smallest visibility found infeasible, or `None` if feasible at w = 1
    /// or pruned.
    pub threshold: Option<f64>,
    pub pruned: bool,
    pub trace: Vec<Probe>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WernerReport {
    pub threshold: f64,
    pub best: usize,
    pub configs: Vec<ConfigResult>,
}

impl WernerReport {
    pub fn best_config(&self) -> &ConfigResult {
        &self.configs[self.best]
    }
}

pub fn werner_status(directions: &[Vec3], w: f64) -> Result<LpStatus> {
    Ok(solve_status(&werner(w, directions)?)?.0)
}

/// Checks that no feasible probe lies above an infeasible one.
pub fn check_monotone(trace: &[Probe]) -> Result<()> {
    let lowest_infeasible = trace
        .iter()
        .filter(|p| p.status == LpStatus::Infeasible)
        .map(|p| p.w)
        .fold(f64::INFINITY, f64::min);
    match trace.iter().find(|p| p.status == LpStatus::Feasible && p.w > lowest_infeasible) {
        Some(p) => Err(Error::NonMonotone { infeasible_at: lowest_infeasible, feasible_at: p.w }),
        None => Ok(()),
    }
}

/// Threshold of one configuration by bisection on `[0, upper]`, assuming
/// infeasibility at `upper` has already been probed.
fn bisect(directions: &[Vec3], mut hi: f64, tol: f64, trace: &mut Vec<Probe>) -> Result<f64> {
    let mut lo = 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let status = werner_status(directions, mid)?;
        trace.push(Probe { w: mid, status });
        // Ambiguous probes are treated as violations.
        if status == LpStatus::Feasible {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Smallest Werner visibility at which any configuration's model fails.
/// A configuration already feasible at the current best threshold is
/// skipped, since it cannot improve on it.
pub fn werner_threshold(configs: &[Vec<Vec3>], tol: f64) -> Result<WernerReport> {
    if !(tol >= 1e-4) {
        return Err(Error::InvalidInput("tol must be at least 1e-4"));
    }
    if configs.is_empty() {
        return Err(Error::InvalidInput("no configurations to search"));
    }
    let mut best: Option<(usize, f64)> = None;
    let mut results = Vec::with_capacity(configs.len());
    for (i, dirs) in configs.iter().enumerate() {
        let mut trace = Vec::new();
        let upper = best.map_or(1.0, |(_, b)| b);
        let status = werner_status(dirs, upper)?;
        trace.push(Probe { w: upper, status });
        let (threshold, pruned) = if status == LpStatus::Feasible {
            (None, best.is_some())
        } else {
            (Some(bisect(dirs, upper, tol, &mut trace)?), false)
        };
        check_monotone(&trace)?;
        if let Some(t) = threshold {
            if best.map_or(true, |(_, b)| t < b) {
                best = Some((i, t));
            }
        }
        results.push(ConfigResult { directions: dirs.clone(), threshold, pruned, trace });
    }
    let (best, threshold) = best.ok_or(Error::NoViolationFound)?;
    Ok(WernerReport { threshold, best, configs: results })
}

/// Bloch directions of the first members of three orthogonal ensembles.
pub fn triple_directions(t: &OverlapTriple) -> Result<Vec<Vec3>> {
    let (x, y, z) = states_from_triple(t)?;
    Ok(vec![x.bloch(), y.bloch(), z.bloch()])
}

/// Three-basis configurations: the bisecting family at the given α values,
/// then every realizable interior triple of a grid with the given step.
pub fn three_ensemble_family(alphas: &[f64], grid_step: f64) -> Result<Vec<Vec<Vec3>>> {
    let mut out = Vec::new();
    for &a in alphas {
        let b = (1.0 + a.sqrt()) / 2.0;
        out.push(triple_directions(&OverlapTriple::new(a, b, b)?)?);
    }
    for t in scan_grid(grid_step) {
        let t = OverlapTriple::new(t[0], t[1], t[2])?;
        if realizable(&t) {
            if let Ok(dirs) = triple_directions(&t) {
                if werner(1.0, &dirs).is_ok() {
                    out.push(dirs);
                }
            }
        }
    }
    Ok(out)
}

/// Four directions in the xz-plane at polar angles 0, φ, 2φ, 3φ.
pub fn planar_four(phi: f64) -> Vec<Vec3> {
    (0..4).map(|k| {
        let a = k as f64 * phi;
        [a.sin(), 0.0, a.cos()]
    })
    .collect()
}

/// Four directions at polar angle θ, spaced by quarter turns in azimuth.
pub fn tetrahedral_four(theta: f64) -> Vec<Vec3> {
    (0..4).map(|k| {
        let az = PI / 2.0 * k as f64;
        [theta.sin() * az.cos(), theta.sin() * az.sin(), theta.cos()]
    })
    .collect()
}

/// Planar and tetrahedral four-basis configurations over `steps` angles each.
pub fn four_ensemble_family(steps: usize) -> Vec<Vec<Vec3>> {
    // The equiangular planar tuple goes first so it seeds the pruning bound.
    let mut out = vec![planar_four(PI / 4.0)];
    // Beyond φ = π/2 the planar bases repeat.
    for k in 1..=steps {
        let angle = PI / 2.0 * k as f64 / (steps as f64 + 1.0);
        out.push(planar_four(angle));
        out.push(tetrahedral_four(angle));
    }
    out.retain(|dirs| werner(1.0, dirs).is_ok());
    out
}

pub fn gpr_sweep(q_values: &[f64]) -> Result<Vec<(f64, LpStatus)>> {
    q_values.iter().map(|&q| Ok((q, solve_status(&gpr(q)?)?.0))).collect()
}
