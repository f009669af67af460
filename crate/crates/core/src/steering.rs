//! Remote state preparation on a qubit B through measurements on its
//! entangled partner A.
//!
//! Conventions: |ψ⟩ = Σ C[j][k] |j⟩_A |k⟩_B with `C` of shape d_A × 2. Writing
//! `A = Cᵀ` (2 × d_A), the unnormalized state of B after outcome `M` on A is
//! `A Mᵀ A†`, and the reduced state is `ρ_B = A A†`.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::qubit::{ensemble_average, MixedState, WeightedEnsemble};

type C = Complex64;

/// Entrywise tolerance for the steering criterion and postconditions.
pub const STEER_TOL: f64 = 1e-10;
/// Eigenvalues of ρ_B below this are treated as zero.
const RANK_TOL: f64 = 1e-12;

/// A dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("matrix rows must be nonempty and equally long"));
        }
        Ok(Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[C] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn adjoint(&self) -> Self {
        let mut t = self.transpose();
        t.data.iter_mut().for_each(|z| *z = z.conj());
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a -= b);
        out
    }

    pub fn trace(&self) -> C {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of a Hermitian matrix (Jacobi sweeps).
    pub fn min_hermitian_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(self).into_iter().fold(f64::INFINITY, f64::min)
    }

    fn as_2x2(&self) -> [[C; 2]; 2] {
        [[self[(0, 0)], self[(0, 1)]], [self[(1, 0)], self[(1, 1)]]]
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.rows;
    let mut a = m.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r < 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let e = apq / r;
                // U = diag(1, ē) · Givens(θ) on coordinates (p, q); A ← U† A U.
                let cc = C::new(c, 0.0);
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cc - akq * e.conj() * s;
                    a[(k, q)] = akp * s + akq * e.conj() * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cc - aqk * e * s;
                    a[(q, k)] = apk * s + aqk * e * c;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)].re).collect()
}

/// Eigen-decomposition of a 2×2 Hermitian matrix, eigenvalues descending.
fn eigh2(m: &[[C; 2]; 2]) -> ([f64; 2], [[C; 2]; 2]) {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let b = m[0][1];
    let mean = (a + d) / 2.0;
    let half = (a - d) / 2.0;
    let rad = (half * half + b.norm_sqr()).sqrt();
    let l = [mean + rad, mean - rad];
    if b.norm() < 1e-300 {
        let e0 = [C::new(1.0, 0.0), C::new(0.0, 0.0)];
        let e1 = [C::new(0.0, 0.0), C::new(1.0, 0.0)];
        return if a >= d { (l, [e0, e1]) } else { (l, [e1, e0]) };
    }
    // (A − λ I) v = 0 ⇒ v ∝ (b, λ − a) or (λ − d, b*).
    let vec_for = |lam: f64| {
        let v1 = [b, C::new(lam - a, 0.0)];
        let v2 = [C::new(lam - d, 0.0), b.conj()];
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        let s = 1.0 / n.sqrt();
        [v[0] * s, v[1] * s]
    };
    (l, [vec_for(l[0]), vec_for(l[1])])
}

/// A pure state of system A (dimension d_A ≥ 2) and qubit B.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartitePureState {
    coeffs: CMatrix,
}

impl BipartitePureState {
    pub fn new(coeffs: CMatrix) -> Result<Self> {
        if coeffs.cols() != 2 || coeffs.rows() < 2 {
            return Err(Error::InvalidInput("coefficient matrix must be d_A x 2 with d_A >= 2"));
        }
        let n2: f64 = coeffs.data.iter().map(|z| z.norm_sqr()).sum();
        if !n2.is_finite() || (n2.sqrt() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("bipartite state must have unit norm"));
        }
        Ok(Self { coeffs })
    }

    /// Scales an arbitrary nonzero coefficient matrix to unit norm.
    pub fn normalized(mut coeffs: CMatrix) -> Result<Self> {
        let n2: f64 = coeffs.data.iter().map(|z| z.norm_sqr()).sum();
        if !n2.is_finite() || n2 < 1e-300 {
            return Err(Error::InvalidInput("bipartite state must be nonzero"));
        }
        let s = 1.0 / n2.sqrt();
        coeffs.data.iter_mut().for_each(|z| *z *= s);
        Self::new(coeffs)
    }

    /// (|01⟩ − |10⟩)/√2.
    pub fn singlet() -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let mut c = CMatrix::zeros(2, 2);
        c[(0, 1)] = C::new(h, 0.0);
        c[(1, 0)] = C::new(-h, 0.0);
        Self { coeffs: c }
    }

    /// √q|00⟩ + √(1−q)|11⟩.
    pub fn schmidt(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidInput("Schmidt weight must lie in [0, 1]"));
        }
        let mut c = CMatrix::zeros(2, 2);
        c[(0, 0)] = C::new(q.sqrt(), 0.0);
        c[(1, 1)] = C::new((1.0 - q).sqrt(), 0.0);
        Ok(Self { coeffs: c })
    }

    pub fn coeffs(&self) -> &CMatrix {
        &self.coeffs
    }

    pub fn dim_a(&self) -> usize {
        self.coeffs.rows()
    }

    /// `A = Cᵀ`, the map from A-side operators to B-side states.
    fn a_map(&self) -> CMatrix {
        self.coeffs.transpose()
    }

    /// Unnormalized B state `Tr_A[(M ⊗ I)|ψ⟩⟨ψ|]`.
    pub fn conditional_state(&self, m: &CMatrix) -> CMatrix {
        let a = self.a_map();
        a.mul(&m.transpose()).mul(&a.adjoint())
    }
}

/// A POVM on system A.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    elements: Vec<CMatrix>,
}

impl Measurement {
    /// Validates PSD elements that sum to the identity.
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let m = Self { elements };
        let (psd, completeness) = m.diagnostics();
        if m.elements.is_empty() || psd < -1e-10 || completeness > 1e-10 {
            return Err(Error::InvalidInput("measurement elements must be PSD and sum to identity"));
        }
        Ok(m)
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// (smallest eigenvalue over elements, max |Σ Mᵢ − I|).
    pub fn diagnostics(&self) -> (f64, f64) {
        let Some(first) = self.elements.first() else {
            return (0.0, f64::INFINITY);
        };
        let n = first.rows();
        let mut sum = CMatrix::zeros(n, n);
        let mut min_eig = f64::INFINITY;
        for e in &self.elements {
            if e.rows() != n || e.cols() != n {
                return (f64::NEG_INFINITY, f64::INFINITY);
            }
            min_eig = min_eig.min(e.min_hermitian_eigenvalue());
            sum = sum.add(e);
        }
        (min_eig, sum.sub(&CMatrix::identity(n)).max_abs())
    }
}

/// ρ_B = Tr_A |ψ⟩⟨ψ|.
pub fn reduced_state(psi: &BipartitePureState) -> MixedState {
    let rho = psi.conditional_state(&CMatrix::identity(psi.dim_a()));
    MixedState::from_matrix(&rho.as_2x2()).expect("partial trace of a unit vector is a state")
}

/// Whether the ensemble can be prepared on B by measuring A.
pub fn steering_possible(psi: &BipartitePureState, e: &WeightedEnsemble) -> bool {
    reduced_state(psi).max_deviation(&ensemble_average(e)) <= STEER_TOL
}

/// Builds a POVM on A with one element per ensemble member such that outcome
/// `i` leaves B in `pᵢ|φᵢ⟩⟨φᵢ|` (unnormalized).
///
/// With `ρ_B = U S² U†` and `A = U S V†`, element `i` is the transpose of
/// `V S⁻¹ U† σᵢ U S⁻¹ V†`; the projector off the range of `V` is added to
/// the first element to complete the identity.
pub fn construct_steering_measurement(
    psi: &BipartitePureState,
    e: &WeightedEnsemble,
) -> Result<Measurement> {
    let rho = reduced_state(psi);
    let dev = rho.max_deviation(&ensemble_average(e));
    if dev > STEER_TOL {
        return Err(Error::NotSteerable { max_deviation: dev });
    }
    let (lams, vecs) = eigh2(&rho.matrix());
    let rank = lams.iter().filter(|&&l| l > RANK_TOL).count();
    if rank == 0 {
        return Err(Error::InvalidInput("reduced state has no support"));
    }

    // Each member must lie in span(u_0..u_rank).
    for (i, (p, s)) in e.members().iter().enumerate() {
        if *p <= 0.0 || rank == 2 {
            continue;
        }
        let phi = s.amplitudes();
        let u = vecs[0];
        let proj = u[0].conj() * phi[0] + u[1].conj() * phi[1];
        let residual = ((phi[0] - u[0] * proj).norm_sqr() + (phi[1] - u[1] * proj).norm_sqr()).sqrt();
        if residual > STEER_TOL {
            return Err(Error::RankDeficient { member: i, residual });
        }
    }

    let a = psi.a_map();
    let a_dag = a.adjoint();
    let d = psi.dim_a();
    // Columns v_k = A† u_k / s_k.
    let vcols: Vec<Vec<C>> = (0..rank)
        .map(|k| {
            let s = lams[k].sqrt();
            (0..d).map(|j| (a_dag[(j, 0)] * vecs[k][0] + a_dag[(j, 1)] * vecs[k][1]) / s).collect()
        })
        .collect();

    let mut elements = Vec::with_capacity(e.len());
    let mut range_proj = CMatrix::zeros(d, d);
    for k in 0..rank {
        for r in 0..d {
            for c in 0..d {
                range_proj[(r, c)] += vcols[k][r] * vcols[k][c].conj();
            }
        }
    }
    for (p, s) in e.members() {
        let phi = s.amplitudes();
        // w_k = ⟨u_k|φ⟩ √p / s_k, so that N = |n⟩⟨n| with n = Σ_k w_k v_k.
        let mut n = vec![C::new(0.0, 0.0); d];
        for k in 0..rank {
            let w = (vecs[k][0].conj() * phi[0] + vecs[k][1].conj() * phi[1]) * (p.sqrt() / lams[k].sqrt());
            for j in 0..d {
                n[j] += w * vcols[k][j];
            }
        }
        let mut elem = CMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                // Transpose of |n⟩⟨n|.
                elem[(c, r)] = n[r] * n[c].conj();
            }
        }
        elements.push(elem);
    }
    let complement = CMatrix::identity(d).sub(&range_proj).transpose();
    elements[0] = elements[0].add(&complement);
    Ok(Measurement { elements })
}

/// Outcome probabilities and normalized post-measurement states of B.
///
/// Outcomes with zero probability carry the maximally mixed state.
pub fn steered_ensemble(psi: &BipartitePureState, m: &Measurement) -> Vec<(f64, MixedState)> {
    m.elements()
        .iter()
        .map(|elem| {
            let sigma = psi.conditional_state(elem);
            let p = sigma.trace().re;
            if p <= 1e-300 {
                return (0.0, MixedState::maximally_mixed());
            }
            let mut s = sigma.as_2x2();
            for row in s.iter_mut() {
                for z in row.iter_mut() {
                    *z /= p;
                }
            }
            let state = MixedState::from_matrix(&s)
                .or_else(|_| {
                    // Rounding can push |r| a hair above 1 for pure outputs.
                    let b = [2.0 * s[1][0].re, 2.0 * s[1][0].im, s[0][0].re - s[1][1].re];
                    let n = crate::qubit::norm(&b).max(1.0);
                    MixedState::from_bloch(crate::qubit::scale(&b, 1.0 / n))
                })
                .expect("conditional state is a density matrix");
            (p, state)
        })
        .collect()
}

/// Largest entrywise residual of `Tr_A[(Mᵢ⊗I)ψψ†] − pᵢ|φᵢ⟩⟨φᵢ|` over members.
pub fn construction_residual(psi: &BipartitePureState, m: &Measurement, e: &WeightedEnsemble) -> f64 {
    m.elements()
        .iter()
        .zip(e.members())
        .map(|(elem, (p, s))| {
            let sigma = psi.conditional_state(elem);
            let target = s.projector();
            let mut worst: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((sigma[(i, j)] - target[i][j] * *p).norm());
                }
            }
            worst
        })
        .fold(0.0, f64::max)
}
