//! Shared fixtures for unit tests.

use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::Rng;

use crate::linalg::ArmSet;

pub(crate) fn vec2(x: f64, y: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y])
}

pub(crate) fn canonical(d: usize) -> ArmSet {
    ArmSet::new(
        (0..d)
            .map(|i| DVector::from_fn(d, |j, _| f64::from(j == i)))
            .collect(),
    )
    .unwrap()
}

/// Canonical basis plus the disturbing arm `(cos α, sin α)` in the plane.
pub(crate) fn counterexample_arms(alpha: f64) -> ArmSet {
    ArmSet::new(vec![
        vec2(1.0, 0.0),
        vec2(0.0, 1.0),
        vec2(alpha.cos(), alpha.sin()),
    ])
    .unwrap()
}

pub(crate) fn random_spanning_arms(rng: &mut StdRng, d: usize, a: usize) -> ArmSet {
    assert!(a >= d, "cannot span ℝ^{d} with {a} arms");
    loop {
        let arms: Vec<DVector<f64>> = (0..a)
            .map(|_| DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        if let Ok(set) = ArmSet::new(arms) {
            return set;
        }
    }
}
