//! Fixtures shared by the benches.

use conic_core::geometry::{ConeAngleVector, ConicSurfaceSpec};

/// Three equal cones on the equator.
pub fn equilateral(beta: f64) -> ConicSurfaceSpec {
    let s = 3f64.sqrt() / 2.0;
    ConicSurfaceSpec::new(
        0,
        ConeAngleVector::new(vec![beta; 3]).expect("beta in (-1, 0)"),
        Some(vec![[1.0, 0.0, 0.0], [-0.5, s, 0.0], [-0.5, -s, 0.0]]),
    )
    .expect("valid spec")
}
