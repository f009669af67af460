use lhv_core::qubit::{bisector, overlap, realizable, rotate, states_from_triple, OverlapTriple, PureState};
use proptest::prelude::*;

fn direction() -> impl Strategy<Value = [f64; 3]> {
    (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let r = (1.0 - z * z).sqrt();
        [r * phi.cos(), r * phi.sin(), z]
    })
}

/// Rotation matrix from Euler angles z-y-z.
fn rotation() -> impl Strategy<Value = [[f64; 3]; 3]> {
    (0.0f64..6.3, 0.0f64..3.2, 0.0f64..6.3).prop_map(|(a, b, c)| {
        let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
        let ry = |t: f64| [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]];
        let mul = |x: [[f64; 3]; 3], y: [[f64; 3]; 3]| {
            let mut o = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    o[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
                }
            }
            o
        };
        mul(mul(rz(a), ry(b)), rz(c))
    })
}

fn state(d: [f64; 3]) -> PureState {
    PureState::from_direction(d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn overlap_is_symmetric_and_rotation_invariant(a in direction(), b in direction(), r in rotation()) {
        let (x, y) = (state(a), state(b));
        prop_assert!((overlap(&x, &y) - overlap(&y, &x)).abs() <= 1e-12);
        let (rx, ry) = (state(rotate(&r, &a)), state(rotate(&r, &b)));
        prop_assert!((overlap(&x, &y) - overlap(&rx, &ry)).abs() <= 1e-12);
    }

    #[test]
    fn bisector_is_equidistant(a in direction(), b in direction()) {
        let (x, y) = (state(a), state(b));
        let alpha = overlap(&x, &y);
        prop_assume!(alpha > 1e-6);
        let z = bisector(&x, &y).unwrap();
        prop_assert!((overlap(&z, &x) - overlap(&z, &y)).abs() <= 1e-10);
        prop_assert!((overlap(&z, &x) - (1.0 + alpha.sqrt()) / 2.0).abs() <= 1e-10);
    }

    #[test]
    fn triples_of_states_are_realizable_and_rebuildable(a in direction(), b in direction(), c in direction()) {
        let t = OverlapTriple::of_states(&state(a), &state(b), &state(c));
        prop_assert!(realizable(&t));
        let (x, y, z) = states_from_triple(&t).unwrap();
        let back = OverlapTriple::of_states(&x, &y, &z);
        for (u, v) in t.as_array().iter().zip(back.as_array()) {
            prop_assert!((u - v).abs() <= 1e-10, "{:?} vs {:?}", t, back);
        }
    }
}

#[test]
fn unrealizable_triple_is_rejected() {
    // Pairwise antipodal on the sphere is impossible for three states.
    let t = OverlapTriple::new(0.0, 0.0, 0.0).unwrap();
    assert!(!realizable(&t));
    assert!(states_from_triple(&t).is_err());
}
