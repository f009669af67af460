//! Canned scenarios.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::assembly::{Options, Origin, Scenario};
use crate::error::{Error, Result};
use crate::qubit::{dot, norm, states_from_triple, OverlapTriple, PureState, Vec3, WeightedEnsemble};
use num_complex::Complex64;

fn labels(names: &[[&str; 2]]) -> Vec<Vec<String>> {
    names.iter().map(|p| p.iter().map(|s| s.to_string()).collect()).collect()
}

fn open_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

fn antipodal_pair(s: PureState) -> Result<WeightedEnsemble> {
    let t = s.orthogonal();
    WeightedEnsemble::new(vec![(0.5, s), (0.5, t)])
}

/// Two orthogonal-basis ensembles of the maximally mixed state with
/// |⟨x|y⟩|² = α.
pub fn two_orthogonal(alpha: f64) -> Result<Scenario> {
    if !open_unit(alpha) {
        return Err(Error::InvalidInput("alpha must lie in (0, 1)"));
    }
    let c = 2.0 * alpha - 1.0;
    let x = PureState::from_bloch([0.0, 0.0, 1.0])?;
    let y = PureState::from_bloch([(1.0 - c * c).max(0.0).sqrt(), 0.0, c])?;
    Scenario::new(vec![antipodal_pair(x)?, antipodal_pair(y)?], Options::default())?
        .with_labels(labels(&[["x", "X"], ["y", "Y"]]))
        .map(|s| s.with_origin(Origin::TwoOrthogonal { alpha }))
}

/// An orthogonal ensemble {|0⟩, |1⟩} with weights (1 ± cos θ)/2 and a
/// uniform non-orthogonal pair at Bloch polar angles ±θ.
pub fn nonorthogonal_pair(theta: f64) -> Result<Scenario> {
    if !(theta > 0.0 && theta < core::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidInput("theta must lie in (0, pi/2)"));
    }
    let (s, c) = theta.sin_cos();
    let basis = WeightedEnsemble::new(vec![
        ((1.0 + c) / 2.0, PureState::basis(0)),
        ((1.0 - c) / 2.0, PureState::basis(1)),
    ])?;
    let a = PureState::from_bloch([s, 0.0, c])?;
    let b = PureState::from_bloch([-s, 0.0, c])?;
    let pair = WeightedEnsemble::new(vec![(0.5, a), (0.5, b)])?;
    Scenario::new(vec![basis, pair], Options::default())?
        .with_labels(labels(&[["x", "X"], ["a", "b"]]))
        .map(|s| s.with_origin(Origin::NonorthogonalPair { theta }))
}

/// Three orthogonal-basis ensembles of the maximally mixed state whose
/// first members have the given pairwise overlaps.
pub fn three_orthogonal(triple: OverlapTriple) -> Result<Scenario> {
    if !triple.as_array().iter().all(|&v| open_unit(v)) {
        return Err(Error::InvalidInput("overlaps must lie in (0, 1)"));
    }
    let (x, y, z) = states_from_triple(&triple)?;
    Scenario::new(vec![antipodal_pair(x)?, antipodal_pair(y)?, antipodal_pair(z)?], Options::default())?
        .with_labels(labels(&[["x", "X"], ["y", "Y"], ["z", "Z"]]))
        .map(|s| s.with_origin(Origin::ThreeOrthogonal { triple }))
}

/// Reduced state diag(q, 1−q) split as {|0⟩, |1⟩} and as the uniform pair
/// √q|0⟩ ± √(1−q)|1⟩.
pub fn gpr(q: f64) -> Result<Scenario> {
    if !open_unit(q) {
        return Err(Error::InvalidInput("q must lie in (0, 1)"));
    }
    let basis = WeightedEnsemble::new(vec![(q, PureState::basis(0)), (1.0 - q, PureState::basis(1))])?;
    let (c0, c1) = (Complex64::new(q.sqrt(), 0.0), Complex64::new((1.0 - q).sqrt(), 0.0));
    let a = PureState::from_amplitudes(c0, c1)?;
    let b = PureState::from_amplitudes(c0, -c1)?;
    let pair = WeightedEnsemble::new(vec![(0.5, a), (0.5, b)])?;
    Scenario::new(vec![basis, pair], Options::default())?
        .with_labels(labels(&[["x", "X"], ["a", "b"]]))
        .map(|s| s.with_origin(Origin::Gpr { q }))
}

const AXIS_NAMES: [[&str; 2]; 4] = [["x", "X"], ["y", "Y"], ["z", "Z"], ["u", "U"]];

/// Antipodal ensembles along the given directions, steered from a Werner
/// state of visibility `w`.
pub fn werner(w: f64, directions: &[Vec3]) -> Result<Scenario> {
    if !(2..=AXIS_NAMES.len()).contains(&directions.len()) {
        return Err(Error::InvalidInput("werner scenarios take 2 to 4 directions"));
    }
    if directions.iter().any(|d| norm(d) < 1e-12) {
        return Err(Error::InvalidInput("direction must be nonzero"));
    }
    for (i, a) in directions.iter().enumerate() {
        for b in &directions[i + 1..] {
            // Antiparallel directions give the same basis.
            if (dot(a, b).abs() - norm(a) * norm(b)).abs() < 1e-12 {
                return Err(Error::InvalidInput("bases must be pairwise distinct"));
            }
        }
    }
    let ensembles = directions
        .iter()
        .map(|d| antipodal_pair(PureState::from_direction(*d)?))
        .collect::<Result<Vec<_>>>()?;
    Scenario::new(ensembles, Options::default())?
        .with_labels(labels(&AXIS_NAMES[..directions.len()]))?
        .with_werner_w(w)
        .map(|s| s.with_origin(Origin::Werner { w }))
}
