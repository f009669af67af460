//! Helpers shared by the integration tests: a seeded RNG, a generator of
//! small random systems and an exact Fourier–Motzkin feasibility oracle.
#![allow(dead_code)]

use lhv_core::system::{ConstraintSystem, Relation};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn seed() -> u64 {
    std::env::var("SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20_240_611)
}

pub fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed() ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Up to 8 variables, integer or half-integer data, mixed relations and bounds.
pub fn random_system(rng: &mut impl Rng) -> ConstraintSystem {
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=6);
    let mut s = ConstraintSystem::new();
    for j in 0..n {
        let lower = if rng.gen_bool(0.2) { -(rng.gen_range(1..=2) as f64) } else { 0.0 };
        let upper = if rng.gen_bool(0.3) { Some(lower + rng.gen_range(1..=4) as f64 / 2.0) } else { None };
        s.add_bounded_var(format!("v{j}"), lower, upper);
    }
    for i in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                coeffs.push((j, rng.gen_range(-3..=3) as f64));
            }
        }
        let relation = match rng.gen_range(0..3) {
            0 => Relation::Eq,
            1 => Relation::Le,
            _ => Relation::Ge,
        };
        let rhs = rng.gen_range(-6..=8) as f64 / 2.0;
        s.add_row(format!("r{i}"), coeffs, relation, rhs);
    }
    s
}

type Q = BigRational;

fn q(v: f64) -> Q {
    Q::from_float(v).unwrap()
}

/// `a·x ≤ b`, scaled so the largest |coefficient| is one.
fn normalize(mut a: Vec<Q>, mut b: Q) -> (Vec<Q>, Q) {
    let scale = a.iter().map(|v| v.abs()).fold(Q::zero(), |m, v| if v > m { v } else { m });
    if !scale.is_zero() {
        a.iter_mut().for_each(|v| *v = v.clone() / scale.clone());
        b = b / scale;
    }
    (a, b)
}

/// Exact feasibility by substituting away equalities, then Fourier–Motzkin.
pub fn fm_feasible(sys: &ConstraintSystem) -> bool {
    let n = sys.num_vars();
    let mut eqs: Vec<(Vec<Q>, Q)> = Vec::new();
    let mut ineqs: Vec<(Vec<Q>, Q)> = Vec::new();
    for row in &sys.rows {
        let mut a = vec![Q::zero(); n];
        for &(j, c) in &row.coeffs {
            a[j] = a[j].clone() + q(c);
        }
        let b = q(row.rhs);
        match row.relation {
            Relation::Eq => eqs.push((a, b)),
            Relation::Le => ineqs.push((a, b)),
            Relation::Ge => ineqs.push((a.into_iter().map(|v| -v).collect(), -b)),
        }
    }
    for j in 0..n {
        let mut a = vec![Q::zero(); n];
        a[j] = -Q::one();
        ineqs.push((a, -q(sys.lower[j])));
        if let Some(hi) = sys.upper[j] {
            let mut a = vec![Q::zero(); n];
            a[j] = Q::one();
            ineqs.push((a, q(hi)));
        }
    }

    while let Some((a, b)) = eqs.pop() {
        let Some(k) = a.iter().position(|v| !v.is_zero()) else {
            if !b.is_zero() {
                return false;
            }
            continue;
        };
        // x_k = (b − Σ_{j≠k} a_j x_j) / a_k
        let substitute = |row: &mut (Vec<Q>, Q)| {
            let f = row.0[k].clone() / a[k].clone();
            if f.is_zero() {
                return;
            }
            for j in 0..n {
                row.0[j] = row.0[j].clone() - f.clone() * a[j].clone();
            }
            row.1 = row.1.clone() - f * b.clone();
        };
        eqs.iter_mut().for_each(substitute);
        ineqs.iter_mut().for_each(substitute);
    }

    // Each row remembers which starting inequalities it combines. After t
    // eliminations a row built from more than t + 1 of them is redundant
    // (Chernikov), which keeps the elimination small.
    let mut rows: Vec<(Vec<Q>, Q, u64)> = ineqs.into_iter().enumerate().map(|(i, (a, b))| (a, b, 1u64 << i)).collect();
    let mut eliminated = 0u32;
    loop {
        let mut kept: Vec<(Vec<Q>, Q, u64)> = Vec::new();
        for (a, b, h) in rows.drain(..) {
            if a.iter().all(Zero::is_zero) {
                if b.is_negative() {
                    return false;
                }
            } else if h.count_ones() <= eliminated + 1 {
                let (a, b) = normalize(a, b);
                kept.push((a, b, h));
            }
        }
        kept.sort_by(|x, y| (&x.0, &x.1, x.2.count_ones()).cmp(&(&y.0, &y.1, y.2.count_ones())));
        kept.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1);
        if kept.is_empty() {
            return true;
        }
        let var = (0..n)
            .filter(|&j| kept.iter().any(|r| !r.0[j].is_zero()))
            .min_by_key(|&j| {
                let pos = kept.iter().filter(|r| r.0[j].is_positive()).count();
                let neg = kept.iter().filter(|r| r.0[j].is_negative()).count();
                pos * neg
            })
            .expect("some nonzero column");
        let (pos, rest): (Vec<_>, Vec<_>) = kept.into_iter().partition(|r| r.0[var].is_positive());
        let (neg, zero): (Vec<_>, Vec<_>) = rest.into_iter().partition(|r| r.0[var].is_negative());
        rows = zero;
        eliminated += 1;
        for (pa, pb, ph) in &pos {
            for (na, nb, nh) in &neg {
                let h = ph | nh;
                if h.count_ones() > eliminated + 1 {
                    continue;
                }
                let (fp, fnn) = (-na[var].clone(), pa[var].clone());
                let a: Vec<Q> = pa.iter().zip(na).map(|(x, y)| x.clone() * fp.clone() + y.clone() * fnn.clone()).collect();
                rows.push((a, pb.clone() * fp.clone() + nb.clone() * fnn.clone(), h));
            }
        }
    }
}

use lhv_core::qubit::{PureState, WeightedEnsemble};
use lhv_core::steering::{reduced_state, BipartitePureState, CMatrix};
use num_complex::Complex64 as C;

pub type M2 = [[C; 2]; 2];

fn mat_mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn inverse(a: &M2) -> M2 {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]]
}

/// Square root of a positive definite 2×2 matrix: (M + √det·I)/√(tr + 2√det).
fn sqrtm(a: &M2) -> M2 {
    let s = (a[0][0] * a[1][1] - a[0][1] * a[1][0]).re.sqrt();
    let t = (a[0][0].re + a[1][1].re + 2.0 * s).sqrt();
    [[(a[0][0] + s) / t, a[0][1] / t], [a[1][0] / t, (a[1][1] + s) / t]]
}

pub fn unit_vector(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// A two-qubit pure state whose reduced state has both eigenvalues ≥ 0.05.
pub fn random_entangled(rng: &mut impl Rng) -> BipartitePureState {
    loop {
        let rows: Vec<Vec<C>> = (0..2)
            .map(|_| (0..2).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .collect();
        let psi = BipartitePureState::normalized(CMatrix::from_rows(&rows).unwrap()).unwrap();
        if reduced_state(&psi).eigenvalues()[0] >= 0.05 {
            return psi;
        }
    }
}

/// A `k`-member ensemble averaging to the reduced state of `psi`: a random
/// ensemble with average σ, pushed through ρ^{1/2} σ^{-1/2}.
pub fn random_ensemble_for(psi: &BipartitePureState, k: usize, rng: &mut impl Rng) -> WeightedEnsemble {
    let rho = reduced_state(psi).matrix();
    loop {
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let states: Vec<PureState> = (0..k).map(|_| PureState::from_direction(unit_vector(rng)).unwrap()).collect();
        let mut sigma = [[C::new(0.0, 0.0); 2]; 2];
        for (w, s) in raw.iter().zip(&states) {
            let p = s.projector();
            for i in 0..2 {
                for j in 0..2 {
                    sigma[i][j] += p[i][j] * (w / total);
                }
            }
        }
        let det = (sigma[0][0] * sigma[1][1] - sigma[0][1] * sigma[1][0]).re;
        if det < 0.02 {
            continue;
        }
        let t = mat_mul(&sqrtm(&rho), &inverse(&sqrtm(&sigma)));
        let members: Vec<(f64, PureState)> = raw
            .iter()
            .zip(&states)
            .map(|(w, s)| {
                let a = s.amplitudes();
                let v = [t[0][0] * a[0] + t[0][1] * a[1], t[1][0] * a[0] + t[1][1] * a[1]];
                let n2 = v[0].norm_sqr() + v[1].norm_sqr();
                let st = PureState::from_amplitudes(v[0] / n2.sqrt(), v[1] / n2.sqrt()).unwrap();
                (w / total * n2, st)
            })
            .collect();
        let sum: f64 = members.iter().map(|m| m.0).sum();
        let members = members.into_iter().map(|(p, s)| (p / sum, s)).collect();
        return WeightedEnsemble::new(members).unwrap();
    }
}
