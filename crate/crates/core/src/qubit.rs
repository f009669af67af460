//! Qubit states on the Bloch sphere.
//!
//! Pure states keep their Bloch vector as the primary representation; the
//! amplitude pair is derived in the canonical gauge (first nonzero amplitude
//! real and nonnegative) whenever it is needed.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Tolerance for unit-norm and probability-sum checks.
pub const STATE_TOL: f64 = 1e-12;
/// Tolerance accepted by constructors before renormalizing.
const CONSTRUCT_TOL: f64 = 1e-9;
/// Gram determinant threshold for overlap-triple realizability.
pub const REALIZABLE_TOL: f64 = 1e-12;

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn neg(a: &Vec3) -> Vec3 {
    [-a[0], -a[1], -a[2]]
}

/// A qubit pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    bloch: Vec3,
    amplitudes: Option<[Complex64; 2]>,
}

impl PureState {
    /// Builds a state from a Bloch vector of unit length (within 1e-9).
    pub fn from_bloch(bloch: Vec3) -> Result<Self> {
        let n = norm(&bloch);
        if !n.is_finite() || (n - 1.0).abs() > CONSTRUCT_TOL {
            return Err(Error::InvalidInput("Bloch vector of a pure state must have unit length"));
        }
        Ok(Self { bloch: scale(&bloch, 1.0 / n), amplitudes: None })
    }

    /// Builds a state pointing along an arbitrary nonzero direction.
    pub fn from_direction(dir: Vec3) -> Result<Self> {
        let n = norm(&dir);
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::InvalidInput("direction must be a finite nonzero vector"));
        }
        Ok(Self { bloch: scale(&dir, 1.0 / n), amplitudes: None })
    }

    /// Builds a state from an amplitude pair; normalizes and fixes the gauge.
    pub fn from_amplitudes(c0: Complex64, c1: Complex64) -> Result<Self> {
        let n2 = c0.norm_sqr() + c1.norm_sqr();
        if !n2.is_finite() || n2 < 1e-300 {
            return Err(Error::InvalidInput("amplitudes must be finite and not both zero"));
        }
        let inv = 1.0 / n2.sqrt();
        let (mut c0, mut c1) = (c0 * inv, c1 * inv);
        let lead = if c0.norm_sqr() > 1e-30 { c0 } else { c1 };
        let phase = lead.conj() / lead.norm();
        c0 *= phase;
        c1 *= phase;
        if c0.norm_sqr() > 1e-30 {
            c0 = Complex64::new(c0.re, 0.0);
        } else {
            c0 = Complex64::new(0.0, 0.0);
            c1 = Complex64::new(c1.re, 0.0);
        }
        let cross = c0.conj() * c1;
        let bloch = [2.0 * cross.re, 2.0 * cross.im, c0.norm_sqr() - c1.norm_sqr()];
        Ok(Self { bloch, amplitudes: Some([c0, c1]) })
    }

    /// The computational basis state |k⟩.
    pub fn basis(k: usize) -> Self {
        if k == 0 {
            Self { bloch: [0.0, 0.0, 1.0], amplitudes: None }
        } else {
            Self { bloch: [0.0, 0.0, -1.0], amplitudes: None }
        }
    }

    pub fn bloch(&self) -> Vec3 {
        self.bloch
    }

    /// Canonical-gauge amplitudes: stored ones if present, else derived.
    pub fn amplitudes(&self) -> [Complex64; 2] {
        if let Some(a) = self.amplitudes {
            return a;
        }
        let [x, y, z] = self.bloch;
        let c0 = ((1.0 + z) / 2.0).max(0.0).sqrt();
        let r1 = ((1.0 - z) / 2.0).max(0.0).sqrt();
        let phi = if x == 0.0 && y == 0.0 { 0.0 } else { y.atan2(x) };
        if c0 == 0.0 {
            return [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        }
        [Complex64::new(c0, 0.0), Complex64::from_polar(r1, phi)]
    }

    /// The orthogonal partner (antipodal Bloch vector).
    pub fn orthogonal(&self) -> Self {
        Self { bloch: neg(&self.bloch), amplitudes: None }
    }

    /// Density matrix |ψ⟩⟨ψ|.
    pub fn projector(&self) -> [[Complex64; 2]; 2] {
        MixedState { bloch: self.bloch }.matrix()
    }
}

/// |⟨s1|s2⟩|², computed as (1 + b1·b2)/2.
pub fn overlap(s1: &PureState, s2: &PureState) -> f64 {
    ((1.0 + dot(&s1.bloch, &s2.bloch)) / 2.0).clamp(0.0, 1.0)
}

/// Complex inner product ⟨s1|s2⟩ of the canonical amplitude forms.
pub fn inner(s1: &PureState, s2: &PureState) -> Complex64 {
    let a = s1.amplitudes();
    let b = s2.amplitudes();
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// A qubit density matrix in Bloch form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedState {
    bloch: Vec3,
}

impl MixedState {
    pub fn from_bloch(bloch: Vec3) -> Result<Self> {
        let n = norm(&bloch);
        if !n.is_finite() || n > 1.0 + CONSTRUCT_TOL {
            return Err(Error::InvalidInput("Bloch vector of a mixed state must have length <= 1"));
        }
        Ok(Self { bloch })
    }

    pub fn maximally_mixed() -> Self {
        Self { bloch: [0.0; 3] }
    }

    /// Reads a Hermitian trace-one 2×2 matrix.
    pub fn from_matrix(m: &[[Complex64; 2]; 2]) -> Result<Self> {
        let tr = m[0][0].re + m[1][1].re;
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("density matrix must have unit trace"));
        }
        let bloch = [2.0 * m[1][0].re, 2.0 * m[1][0].im, m[0][0].re - m[1][1].re];
        Self::from_bloch(bloch)
    }

    pub fn bloch(&self) -> Vec3 {
        self.bloch
    }

    /// (I + r·σ)/2.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let [x, y, z] = self.bloch;
        [
            [Complex64::new((1.0 + z) / 2.0, 0.0), Complex64::new(x / 2.0, -y / 2.0)],
            [Complex64::new(x / 2.0, y / 2.0), Complex64::new((1.0 - z) / 2.0, 0.0)],
        ]
    }

    /// Eigenvalues (1 ± |r|)/2 in descending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let r = norm(&self.bloch);
        [(1.0 + r) / 2.0, (1.0 - r) / 2.0]
    }

    /// Largest entrywise deviation between the two density matrices.
    pub fn max_deviation(&self, other: &MixedState) -> f64 {
        let a = self.matrix();
        let b = other.matrix();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((a[i][j] - b[i][j]).norm());
            }
        }
        worst
    }
}

/// A probability-weighted list of pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEnsemble {
    members: Vec<(f64, PureState)>,
}

impl WeightedEnsemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidInput("ensemble needs at least one member"));
        }
        let mut total = 0.0;
        for (p, _) in &members {
            if !p.is_finite() || *p < 0.0 || *p > 1.0 {
                return Err(Error::InvalidInput("ensemble probabilities must lie in [0, 1]"));
            }
            total += p;
        }
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidInput("ensemble probabilities must sum to 1"));
        }
        Ok(Self { members })
    }

    /// Equal-weight ensemble over the given states.
    pub fn uniform(states: &[PureState]) -> Result<Self> {
        let p = 1.0 / states.len().max(1) as f64;
        Self::new(states.iter().map(|s| (p, *s)).collect())
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn state(&self, i: usize) -> &PureState {
        &self.members[i].1
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.members[i].0
    }

    /// True when every pair of members is orthogonal at tolerance `eps`.
    pub fn is_orthogonal_basis(&self, eps: f64) -> bool {
        let n = self.members.len();
        (0..n).all(|i| (i + 1..n).all(|j| overlap(self.state(i), self.state(j)) < eps))
    }
}

/// Σ pᵢ |φᵢ⟩⟨φᵢ| as a Bloch vector.
pub fn ensemble_average(e: &WeightedEnsemble) -> MixedState {
    let mut r = [0.0; 3];
    for (p, s) in e.members() {
        let b = s.bloch();
        for k in 0..3 {
            r[k] += p * b[k];
        }
    }
    MixedState { bloch: r }
}

/// The normalized amplitude sum of `x` and `y`, with `y` rephased so that
/// ⟨x|y⟩ = +√α. Its overlap with either input is (1 + √α)/2.
pub fn bisector(x: &PureState, y: &PureState) -> Result<PureState> {
    let alpha = overlap(x, y);
    if alpha < 1e-15 {
        return Err(Error::AntipodalInput);
    }
    let ax = x.amplitudes();
    let ay = y.amplitudes();
    let ip = inner(x, y);
    let phase = ip.conj() / ip.norm();
    let c0 = ax[0] + ay[0] * phase;
    let c1 = ax[1] + ay[1] * phase;
    PureState::from_amplitudes(c0, c1)
}

/// Pairwise squared overlaps α = |⟨x|y⟩|², β = |⟨x|z⟩|², γ = |⟨y|z⟩|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapTriple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl OverlapTriple {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        for v in [alpha, beta, gamma] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput("overlaps must lie in [0, 1]"));
            }
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn of_states(x: &PureState, y: &PureState, z: &PureState) -> Self {
        Self { alpha: overlap(x, y), beta: overlap(x, z), gamma: overlap(y, z) }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    /// Determinant of the Bloch Gram matrix with off-diagonals 2α−1, 2β−1, 2γ−1.
    pub fn gram_determinant(&self) -> f64 {
        let a = 2.0 * self.alpha - 1.0;
        let b = 2.0 * self.beta - 1.0;
        let c = 2.0 * self.gamma - 1.0;
        1.0 + 2.0 * a * b * c - a * a - b * b - c * c
    }
}

/// Whether three unit Bloch vectors with the given overlaps exist.
pub fn realizable(t: &OverlapTriple) -> bool {
    // With unit diagonal and |off-diagonal| ≤ 1 the 1×1 and 2×2 principal
    // minors are nonnegative, so the determinant decides.
    t.gram_determinant() >= -REALIZABLE_TOL
}

/// Three states reproducing the triple: x on +z, y in the xz-plane, z completed.
pub fn states_from_triple(t: &OverlapTriple) -> Result<(PureState, PureState, PureState)> {
    if !realizable(t) {
        return Err(Error::NotRealizable);
    }
    let a = 2.0 * t.alpha - 1.0;
    let b = 2.0 * t.beta - 1.0;
    let c = 2.0 * t.gamma - 1.0;
    let x = [0.0, 0.0, 1.0];
    let sy = (1.0 - a * a).max(0.0).sqrt();
    let y = [sy, 0.0, a];
    let sb = (1.0 - b * b).max(0.0).sqrt();
    let z = if sy > 1e-12 {
        let u = ((c - a * b) / sy).clamp(-sb, sb);
        let v = (1.0 - b * b - u * u).max(0.0).sqrt();
        [u, v, b]
    } else {
        // y = ±x; any z at the right latitude works.
        [sb, 0.0, b]
    };
    Ok((PureState::from_direction(x)?, PureState::from_direction(y)?, PureState::from_direction(z)?))
}

/// Rotation of a Bloch vector by the orthogonal matrix `r`.
pub fn rotate(r: &[[f64; 3]; 3], v: &Vec3) -> Vec3 {
    [dot(&r[0], v), dot(&r[1], v), dot(&r[2], v)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(b: Vec3) -> PureState {
        PureState::from_direction(b).unwrap()
    }

    #[test]
    fn overlap_identity_and_orthogonal() {
        let s = st([0.3, -0.4, 0.5]);
        assert!((overlap(&s, &s) - 1.0).abs() < 1e-12);
        assert!(overlap(&s, &s.orthogonal()).abs() < 1e-12);
    }

    #[test]
    fn overlap_matches_amplitudes() {
        let th = 1.1_f64;
        let a = PureState::from_amplitudes(
            Complex64::new((th / 2.0).cos(), 0.0),
            Complex64::new((th / 2.0).sin(), 0.0),
        )
        .unwrap();
        let big_x = PureState::basis(1);
        let s2 = (th / 2.0).sin().powi(2);
        assert!((overlap(&a, &big_x) - s2).abs() < 1e-12);
        assert!((inner(&a, &big_x).norm_sqr() - s2).abs() < 1e-12);
    }

    #[test]
    fn canonical_gauge() {
        let s = PureState::from_amplitudes(Complex64::new(0.0, 0.6), Complex64::new(0.8, 0.0)).unwrap();
        let a = s.amplitudes();
        assert!(a[0].im == 0.0 && a[0].re > 0.0);
        assert!((a[1] - Complex64::new(0.0, -0.8)).norm() < 1e-12);
        let derived = st(s.bloch()).amplitudes();
        assert!((derived[0] - a[0]).norm() < 1e-12 && (derived[1] - a[1]).norm() < 1e-12);
        let down = PureState::from_amplitudes(Complex64::new(0.0, 0.0), Complex64::new(0.0, -2.0)).unwrap();
        assert_eq!(down.amplitudes()[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn average_examples() {
        let z = PureState::basis(0);
        let e = WeightedEnsemble::uniform(&[z, z.orthogonal()]).unwrap();
        assert!(norm(&ensemble_average(&e).bloch()) < 1e-15);
        let q = 0.3;
        let e = WeightedEnsemble::new(alloc::vec![(q, z), (1.0 - q, z.orthogonal())]).unwrap();
        assert!((ensemble_average(&e).bloch()[2] - (2.0 * q - 1.0)).abs() < 1e-15);
        let th = 0.7_f64;
        let a = st([th.sin(), 0.0, th.cos()]);
        let b = st([-th.sin(), 0.0, th.cos()]);
        let r = ensemble_average(&WeightedEnsemble::uniform(&[a, b]).unwrap()).bloch();
        assert!(r[0].abs() < 1e-15 && r[1].abs() < 1e-15 && (r[2] - th.cos()).abs() < 1e-15);
    }

    #[test]
    fn ensemble_validation() {
        assert!(WeightedEnsemble::new(alloc::vec![]).is_err());
        let z = PureState::basis(0);
        assert!(WeightedEnsemble::new(alloc::vec![(0.5, z), (0.4, z)]).is_err());
        assert!(WeightedEnsemble::new(alloc::vec![(1.2, z), (-0.2, z)]).is_err());
    }

    #[test]
    fn bisector_examples() {
        let x = st([0.1, 0.2, 0.9]);
        let z = bisector(&x, &x).unwrap();
        assert!((overlap(&z, &x) - 1.0).abs() < 1e-12);
        // α = 1/4: Bloch angle 120°.
        let y = st([(2.0 * core::f64::consts::PI / 3.0).sin(), 0.0, (2.0 * core::f64::consts::PI / 3.0).cos()]);
        let x = PureState::basis(0);
        assert!((overlap(&x, &y) - 0.25).abs() < 1e-12);
        let z = bisector(&x, &y).unwrap();
        assert!((overlap(&z, &x) - 0.75).abs() < 1e-10);
        assert!((overlap(&z, &y) - 0.75).abs() < 1e-10);
        assert_eq!(bisector(&x, &x.orthogonal()), Err(Error::AntipodalInput));
    }

    #[test]
    fn bisector_near_orthogonal_limit() {
        let t = core::f64::consts::PI - 1e-4;
        let x = PureState::basis(0);
        let y = st([t.sin(), 0.0, t.cos()]);
        let alpha = overlap(&x, &y);
        let z = bisector(&x, &y).unwrap();
        assert!((overlap(&z, &x) - 0.5).abs() < 1e-3);
        assert!((overlap(&z, &x) - (1.0 + alpha.sqrt()) / 2.0).abs() < 1e-8);
    }

    #[test]
    fn realizable_examples() {
        assert!(realizable(&OverlapTriple::new(1.0, 1.0, 1.0).unwrap()));
        assert!(realizable(&OverlapTriple::new(0.0, 0.0, 1.0).unwrap()));
        let t = OverlapTriple::new(0.0, 0.0, 0.0).unwrap();
        assert!((t.gram_determinant() + 4.0).abs() < 1e-15);
        assert!(!realizable(&t));
        assert_eq!(states_from_triple(&t), Err(Error::NotRealizable));
    }

    #[test]
    fn states_from_triple_examples() {
        let t = OverlapTriple::new(0.5, 0.5, 0.5).unwrap();
        let (x, y, z) = states_from_triple(&t).unwrap();
        for (p, q) in [(x, y), (x, z), (y, z)] {
            assert!(dot(&p.bloch(), &q.bloch()).abs() < 1e-12);
        }
        let t = OverlapTriple::new(1.0, 1.0, 1.0).unwrap();
        let (x, y, z) = states_from_triple(&t).unwrap();
        assert!(overlap(&x, &y) > 1.0 - 1e-12 && overlap(&y, &z) > 1.0 - 1e-12);
        let t = OverlapTriple::new(0.25, 0.75, 0.75).unwrap();
        let (x, y, z) = states_from_triple(&t).unwrap();
        let w = bisector(&x, &y).unwrap();
        assert!(overlap(&z, &w) > 1.0 - 1e-10);
        let back = OverlapTriple::of_states(&x, &y, &z);
        assert!((back.alpha - 0.25).abs() < 1e-10 && (back.beta - 0.75).abs() < 1e-10);
    }

    #[test]
    fn mixed_state_roundtrip() {
        let m = MixedState::from_bloch([0.1, -0.3, 0.2]).unwrap();
        let back = MixedState::from_matrix(&m.matrix()).unwrap();
        assert!(m.max_deviation(&back) < 1e-15);
        assert!(MixedState::from_bloch([1.0, 1.0, 0.0]).is_err());
        let ev = m.eigenvalues();
        assert!(ev[1] >= 0.0 && (ev[0] + ev[1] - 1.0).abs() < 1e-15);
    }
}
