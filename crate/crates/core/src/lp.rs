//! Feasibility of linear systems by phase-one simplex.
//!
//! Every answer comes with something checkable: a witness point for a
//! feasible system, or row multipliers `u` for an infeasible one. With
//! `c = Aᵀu` and `d = bᵀu`, the multipliers prove infeasibility when they
//! respect the row senses (`u ≥ 0` on `≤` rows, `u ≤ 0` on `≥` rows, free on
//! equalities) and the margin `min_{box} cᵀx − d` is positive: every point
//! satisfying the rows has `cᵀx ≤ d`, which no point of the variable box does.
//!
//! Pivoting follows Bland's rule, so degenerate systems terminate. The same
//! tableau code runs over `f64` and over exact rationals.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::system::{ConstraintSystem, Relation};

/// Largest accepted witness violation.
pub const WITNESS_TOL: f64 = 1e-9;
/// Smallest accepted certificate margin, with `max |u| = 1`.
pub const MARGIN_TOL: f64 = 1e-7;
/// Pivot threshold of the floating-point tableau.
const PIVOT_EPS: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    pub max_iterations: usize,
    pub witness_tol: f64,
    pub margin_tol: f64,
    /// Recompute the final basic solution and duals from a fresh factorization.
    pub refine: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self { max_iterations: 50_000, witness_tol: WITNESS_TOL, margin_tol: MARGIN_TOL, refine: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Feasible { witness: Vec<f64>, residual: f64 },
    Infeasible { multipliers: Vec<f64>, margin: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub verdict: Verdict,
    pub iterations: usize,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        matches!(self.verdict, Verdict::Feasible { .. })
    }

    pub fn witness(&self) -> Option<&[f64]> {
        match &self.verdict {
            Verdict::Feasible { witness, .. } => Some(witness),
            Verdict::Infeasible { .. } => None,
        }
    }

    pub fn multipliers(&self) -> Option<&[f64]> {
        match &self.verdict {
            Verdict::Infeasible { multipliers, .. } => Some(multipliers),
            Verdict::Feasible { .. } => None,
        }
    }

    pub fn margin(&self) -> Option<f64> {
        match self.verdict {
            Verdict::Infeasible { margin, .. } => Some(margin),
            Verdict::Feasible { .. } => None,
        }
    }
}

/// Arithmetic needed by the tableau.
pub trait Field:
    Clone
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Field for T where
    T: Clone
        + PartialOrd
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
{
}

/// `A x = b, x ≥ 0, b ≥ 0` derived from a system, with enough bookkeeping
/// to map duals back to the original rows.
struct StandardForm<T> {
    a: Vec<Vec<T>>,
    b: Vec<T>,
    /// Number of shifted structural columns.
    structural: usize,
    /// ±1 applied to make `b ≥ 0`.
    flipped: Vec<bool>,
    /// Original row index, or `None` for rows encoding upper bounds.
    origin: Vec<Option<usize>>,
}

fn standard_form<T: Field>(sys: &ConstraintSystem, conv: &impl Fn(f64) -> T) -> StandardForm<T> {
    let n = sys.num_vars();
    let lo: Vec<T> = sys.lower.iter().map(|&l| conv(l)).collect();
    let mut rows: Vec<(Vec<T>, Relation, T, Option<usize>)> = Vec::new();
    for (i, row) in sys.rows.iter().enumerate() {
        let mut coeffs = vec![T::zero(); n];
        let mut rhs = conv(row.rhs);
        for &(j, a) in &row.coeffs {
            let a = conv(a);
            rhs = rhs - a.clone() * lo[j].clone();
            coeffs[j] = coeffs[j].clone() + a;
        }
        rows.push((coeffs, row.relation, rhs, Some(i)));
    }
    for j in 0..n {
        if let Some(hi) = sys.upper[j] {
            let mut coeffs = vec![T::zero(); n];
            coeffs[j] = T::one();
            rows.push((coeffs, Relation::Le, conv(hi) - lo[j].clone(), None));
        }
    }
    let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let mut a = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    let mut flipped = Vec::with_capacity(rows.len());
    let mut origin = Vec::with_capacity(rows.len());
    let mut next_slack = n;
    for (coeffs, rel, rhs, src) in rows {
        let mut full = coeffs;
        full.resize(n + slacks, T::zero());
        match rel {
            Relation::Eq => {}
            Relation::Le => {
                full[next_slack] = T::one();
                next_slack += 1;
            }
            Relation::Ge => {
                full[next_slack] = -T::one();
                next_slack += 1;
            }
        }
        let flip = rhs < T::zero();
        if flip {
            full = full.into_iter().map(|v| -v).collect();
        }
        b.push(if flip { -rhs } else { rhs });
        a.push(full);
        flipped.push(flip);
        origin.push(src);
    }
    StandardForm { a, b, structural: n, flipped, origin }
}

struct PhaseOne<T> {
    /// Values of all non-artificial columns.
    x: Vec<T>,
    /// Phase-one objective: total artificial mass.
    objective: T,
    /// Duals `y` with `Aᵀy ≤ 0` (up to tolerance) and `bᵀy = objective`.
    duals: Vec<T>,
    basis: Vec<usize>,
    iterations: usize,
}

/// Minimizes the sum of artificials over `A x + s = b`.
fn phase_one<T: Field>(a: &[Vec<T>], b: &[T], eps: &T, max_iterations: usize) -> Result<PhaseOne<T>> {
    let m = a.len();
    let nx = a.first().map_or(0, Vec::len);
    let cols = nx + m;
    let mut t: Vec<Vec<T>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.resize(cols, T::zero());
            r[nx + i] = T::one();
            r
        })
        .collect();
    let mut rhs: Vec<T> = b.to_vec();
    let mut d = vec![T::zero(); cols];
    let mut neg_z = T::zero();
    for i in 0..m {
        for j in 0..nx {
            if !t[i][j].is_zero() {
                d[j] = d[j].clone() - t[i][j].clone();
            }
        }
        neg_z = neg_z - rhs[i].clone();
    }
    let mut basis: Vec<usize> = (nx..cols).collect();
    let neg_eps = -eps.clone();
    let mut iterations = 0;
    loop {
        let Some(enter) = (0..cols).find(|&j| d[j] < neg_eps) else { break };
        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            if t[i][enter] > *eps {
                let ratio = rhs[i].clone() / t[i][enter].clone();
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (!(*best < ratio) && basis[i] < basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // The phase-one objective is bounded below, so a column with no
        // positive entry cannot have negative reduced cost; stop defensively.
        let Some((r, _)) = leave else { break };
        if iterations == max_iterations {
            return Err(Error::IterationLimit);
        }
        iterations += 1;
        let p = t[r][enter].clone();
        for v in t[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / p.clone();
            }
        }
        rhs[r] = rhs[r].clone() / p;
        let pivot_row = t[r].clone();
        let pivot_rhs = rhs[r].clone();
        for i in 0..m {
            if i == r || t[i][enter].is_zero() {
                continue;
            }
            let f = t[i][enter].clone();
            for (k, pv) in pivot_row.iter().enumerate() {
                if !pv.is_zero() {
                    t[i][k] = t[i][k].clone() - f.clone() * pv.clone();
                }
            }
            rhs[i] = rhs[i].clone() - f * pivot_rhs.clone();
        }
        if !d[enter].is_zero() {
            let f = d[enter].clone();
            for (k, pv) in pivot_row.iter().enumerate() {
                if !pv.is_zero() {
                    d[k] = d[k].clone() - f.clone() * pv.clone();
                }
            }
            neg_z = neg_z - f * pivot_rhs;
        }
        basis[r] = enter;
    }
    let mut x = vec![T::zero(); nx];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < nx {
            x[bv] = rhs[i].clone();
        }
    }
    let duals = (0..m).map(|k| T::one() - d[nx + k].clone()).collect();
    Ok(PhaseOne { x, objective: -neg_z, duals, basis, iterations })
}

/// Solves `M z = r` by Gaussian elimination with partial pivoting.
fn solve_dense(mut mat: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &k| mat[i][col].abs().total_cmp(&mat[k][col].abs()))?;
        if mat[p][col].abs() < 1e-14 {
            return None;
        }
        mat.swap(col, p);
        r.swap(col, p);
        for i in col + 1..n {
            let f = mat[i][col] / mat[col][col];
            if f != 0.0 {
                for k in col..n {
                    mat[i][k] -= f * mat[col][k];
                }
                r[i] -= f * r[col];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| mat[i][k] * z[k]).sum();
        z[i] = (r[i] - s) / mat[i][i];
    }
    Some(z)
}

/// Basic solution and duals recomputed from the final basis.
fn refactor(form: &StandardForm<f64>, basis: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
    let m = form.a.len();
    let nx = form.a.first().map_or(0, Vec::len);
    let column = |c: usize, i: usize| if c < nx { form.a[i][c] } else if c - nx == i { 1.0 } else { 0.0 };
    let bmat: Vec<Vec<f64>> = (0..m).map(|i| basis.iter().map(|&c| column(c, i)).collect()).collect();
    let xb = solve_dense(bmat.clone(), form.b.clone())?;
    let bt: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|k| bmat[k][i]).collect()).collect();
    let cb: Vec<f64> = basis.iter().map(|&c| if c >= nx { 1.0 } else { 0.0 }).collect();
    let y = solve_dense(bt, cb)?;
    let mut x = vec![0.0; nx];
    for (i, &c) in basis.iter().enumerate() {
        if c < nx {
            x[c] = xb[i].max(0.0);
        }
    }
    Some((x, y))
}

/// Largest violation of any row or bound.
pub fn verify_witness(sys: &ConstraintSystem, x: &[f64]) -> f64 {
    if x.len() != sys.num_vars() {
        return f64::INFINITY;
    }
    let rows = sys.rows.iter().map(|r| r.violation(x));
    let bounds = x.iter().enumerate().map(|(j, &v)| {
        let below = (sys.lower[j] - v).max(0.0);
        let above = sys.upper[j].map_or(0.0, |hi| (v - hi).max(0.0));
        below.max(above)
    });
    rows.chain(bounds).fold(0.0, f64::max)
}

/// Margin of a candidate certificate, or `None` if its signs do not match
/// the row senses. A positive margin proves infeasibility.
pub fn verify_certificate(sys: &ConstraintSystem, u: &[f64]) -> Option<f64> {
    if u.len() != sys.rows.len() {
        return None;
    }
    let scale = u.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let sign_tol = 1e-12 * scale.max(1.0);
    let mut c = vec![0.0; sys.num_vars()];
    let mut d = 0.0;
    for (row, &ui) in sys.rows.iter().zip(u) {
        let ui = match row.relation {
            Relation::Eq => ui,
            Relation::Le if ui < -sign_tol => return None,
            Relation::Ge if ui > sign_tol => return None,
            Relation::Le => ui.max(0.0),
            Relation::Ge => ui.min(0.0),
        };
        for &(j, a) in &row.coeffs {
            c[j] += ui * a;
        }
        d += ui * row.rhs;
    }
    let mut box_min = 0.0;
    for (j, &cj) in c.iter().enumerate() {
        box_min += if cj >= 0.0 {
            cj * sys.lower[j]
        } else {
            match sys.upper[j] {
                Some(hi) => cj * hi,
                None if cj >= -PIVOT_EPS * scale.max(1.0) => 0.0,
                None => return Some(f64::NEG_INFINITY),
            }
        };
    }
    Some(box_min - d)
}

fn validate(sys: &ConstraintSystem) -> Result<()> {
    let finite = sys.lower.iter().all(|v| v.is_finite())
        && sys.upper.iter().flatten().all(|v| v.is_finite())
        && sys.rows.iter().all(|r| r.rhs.is_finite() && r.coeffs.iter().all(|&(j, a)| a.is_finite() && j < sys.num_vars()));
    if !finite || sys.lower.len() != sys.num_vars() || sys.upper.len() != sys.num_vars() {
        return Err(Error::InvalidInput("system must be finite and well formed"));
    }
    if sys.upper.iter().zip(&sys.lower).any(|(hi, lo)| hi.is_some_and(|h| h < *lo)) {
        return Err(Error::InvalidInput("empty variable box"));
    }
    Ok(())
}

/// Original-row multipliers from phase-one duals, normalized to `max |u| = 1`.
fn multipliers<T: Field>(form: &StandardForm<T>, duals: &[T], rows: usize, to_f64: impl Fn(&T) -> f64) -> Vec<f64> {
    let mut u = vec![0.0; rows];
    for (k, y) in duals.iter().enumerate() {
        if let Some(i) = form.origin[k] {
            let y = to_f64(y);
            u[i] = if form.flipped[k] { y } else { -y };
        }
    }
    let scale = u.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if scale > 0.0 {
        u.iter_mut().for_each(|v| *v /= scale);
    }
    u
}

pub fn check_feasibility(sys: &ConstraintSystem) -> Result<FeasibilityReport> {
    check_feasibility_with(sys, &LpOptions::default())
}

pub fn check_feasibility_with(sys: &ConstraintSystem, opts: &LpOptions) -> Result<FeasibilityReport> {
    validate(sys)?;
    if sys.rows.is_empty() && sys.upper.iter().all(Option::is_none) {
        return Ok(FeasibilityReport {
            verdict: Verdict::Feasible { witness: sys.lower.clone(), residual: 0.0 },
            iterations: 0,
        });
    }
    let form = standard_form(sys, &|v| v);
    let p1 = phase_one(&form.a, &form.b, &PIVOT_EPS, opts.max_iterations)?;
    let unshift = |x: &[f64]| -> Vec<f64> { (0..form.structural).map(|j| sys.lower[j] + x[j]).collect() };

    let mut candidates_x = vec![p1.x.clone()];
    let mut candidates_y = vec![p1.duals.clone()];
    if opts.refine {
        if let Some((x, y)) = refactor(&form, &p1.basis) {
            candidates_x.push(x);
            candidates_y.push(y);
        }
    }

    let mut best_witness: Option<(Vec<f64>, f64)> = None;
    for x in &candidates_x {
        let w = unshift(x);
        let r = verify_witness(sys, &w);
        if best_witness.as_ref().map_or(true, |(_, br)| r < *br) {
            best_witness = Some((w, r));
        }
    }
    let (witness, residual) = best_witness.expect("at least one candidate");
    if residual <= opts.witness_tol {
        return Ok(FeasibilityReport { verdict: Verdict::Feasible { witness, residual }, iterations: p1.iterations });
    }

    let mut best_cert: Option<(Vec<f64>, f64)> = None;
    for y in &candidates_y {
        let u = multipliers(&form, y, sys.rows.len(), |v| *v);
        if let Some(margin) = verify_certificate(sys, &u) {
            if best_cert.as_ref().map_or(true, |(_, bm)| margin > *bm) {
                best_cert = Some((u, margin));
            }
        }
    }
    match best_cert {
        Some((multipliers, margin)) if margin >= opts.margin_tol => Ok(FeasibilityReport {
            verdict: Verdict::Infeasible { multipliers, margin },
            iterations: p1.iterations,
        }),
        other => Err(Error::NumericallyAmbiguous {
            residual: residual.max(p1.objective),
            margin: other.map_or(f64::NEG_INFINITY, |(_, m)| m),
        }),
    }
}

/// Exact verdict over rationals, for systems whose coefficients are read as
/// the exact binary values of their `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactVerdict {
    Feasible { witness: Vec<BigRational> },
    Infeasible { multipliers: Vec<BigRational>, margin: BigRational },
}

fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("validated finite")
}

pub fn check_feasibility_exact(sys: &ConstraintSystem, max_iterations: usize) -> Result<ExactVerdict> {
    validate(sys)?;
    let form = standard_form(sys, &rational);
    let p1 = phase_one(&form.a, &form.b, &BigRational::zero(), max_iterations)?;
    if p1.objective.is_zero() {
        let witness = (0..form.structural).map(|j| rational(sys.lower[j]) + p1.x[j].clone()).collect();
        return Ok(ExactVerdict::Feasible { witness });
    }
    let mut u = vec![BigRational::zero(); sys.rows.len()];
    for (k, y) in p1.duals.iter().enumerate() {
        if let Some(i) = form.origin[k] {
            u[i] = if form.flipped[k] { y.clone() } else { -y.clone() };
        }
    }
    let scale = u.iter().map(|v| v.abs()).fold(BigRational::zero(), |m, v| if v > m { v } else { m });
    if !scale.is_zero() {
        u.iter_mut().for_each(|v| *v = v.clone() / scale.clone());
    }
    let margin = exact_margin(sys, &u).ok_or(Error::NumericallyAmbiguous { residual: 0.0, margin: 0.0 })?;
    Ok(ExactVerdict::Infeasible { multipliers: u, margin })
}

/// Exact counterpart of [`verify_certificate`].
pub fn exact_margin(sys: &ConstraintSystem, u: &[BigRational]) -> Option<BigRational> {
    let mut c = vec![BigRational::zero(); sys.num_vars()];
    let mut d = BigRational::zero();
    for (row, ui) in sys.rows.iter().zip(u) {
        let ok = match row.relation {
            Relation::Eq => true,
            Relation::Le => !ui.is_negative(),
            Relation::Ge => !ui.is_positive(),
        };
        if !ok {
            return None;
        }
        for &(j, a) in &row.coeffs {
            c[j] = c[j].clone() + ui.clone() * rational(a);
        }
        d = d + ui.clone() * rational(row.rhs);
    }
    let mut box_min = BigRational::zero();
    for (j, cj) in c.into_iter().enumerate() {
        if !cj.is_negative() {
            box_min = box_min + cj * rational(sys.lower[j]);
        } else {
            box_min = box_min + cj * rational(sys.upper[j]?);
        }
    }
    let margin = box_min - d;
    margin.is_positive().then_some(margin)
}

/// Converts a rational to the nearest `f64`, via a 2⁻⁶⁰-scaled quotient.
pub fn to_f64(v: &BigRational) -> f64 {
    let (n, d) = (v.numer(), v.denom());
    let bits = n.bits().max(d.bits()) as i64;
    let shift = (bits - 60).max(0) as usize;
    let n2: BigInt = n >> shift;
    let d2: BigInt = d >> shift;
    let nf = bigint_to_f64(&n2);
    let df = bigint_to_f64(&d2);
    if df == 0.0 {
        return if v.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    nf / df
}

fn bigint_to_f64(v: &BigInt) -> f64 {
    let (sign, digits) = v.to_u64_digits();
    let mag = digits.iter().rev().fold(0.0, |acc, &dg| acc * 18446744073709551616.0 + dg as f64);
    if sign == num_bigint::Sign::Minus { -mag } else { mag }
}

/// The value an equality-row system forces on `var`, when its RREF row has
/// no free columns.
pub fn pinned_value(sys: &ConstraintSystem, var: usize) -> Option<f64> {
    let n = sys.num_vars();
    let mut rows: Vec<(Vec<f64>, f64)> = sys
        .rows
        .iter()
        .filter(|r| r.relation == Relation::Eq)
        .map(|r| {
            let mut dense = vec![0.0; n];
            for &(j, a) in &r.coeffs {
                dense[j] += a;
            }
            (dense, r.rhs)
        })
        .collect();
    let tol = 1e-10;
    let mut pivots: Vec<usize> = Vec::new();
    let mut lead = 0;
    for col in 0..n {
        if lead == rows.len() {
            break;
        }
        let best = (lead..rows.len()).max_by(|&a, &b| rows[a].0[col].abs().total_cmp(&rows[b].0[col].abs()))?;
        if rows[best].0[col].abs() < tol {
            continue;
        }
        rows.swap(lead, best);
        let p = rows[lead].0[col];
        rows[lead].0.iter_mut().for_each(|v| *v /= p);
        rows[lead].1 /= p;
        let (pr, prhs) = rows[lead].clone();
        for (i, (r, rhs)) in rows.iter_mut().enumerate() {
            if i != lead && r[col].abs() > 0.0 {
                let f = r[col];
                r.iter_mut().zip(&pr).for_each(|(v, p)| *v -= f * p);
                *rhs -= f * prhs;
            }
        }
        pivots.push(col);
        lead += 1;
    }
    let k = pivots.iter().position(|&c| c == var)?;
    let (row, rhs) = &rows[k];
    let free_clear = (0..n).filter(|c| !pivots.contains(c)).all(|c| row[c].abs() < tol);
    free_clear.then_some(*rhs)
}
