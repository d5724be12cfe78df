use std::sync::Arc;

use conic_core::geometry::{classify, ConeAngleVector, ConicSurfaceSpec, GeometryTag};
use conic_core::liouville::{
    build_background_on_mesh, build_mesh, cone_positions, football_check, newton_solve, uniformize, BaseSurface, LiouvilleError,
    NewtonOptions, SolverOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coarse() -> SolverOptions {
    SolverOptions { mesh_level: 2, grading_rings: 24, ..Default::default() }
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

/// Hyperbolic sphere with 3 or 4 cones at least 0.9 rad apart.
fn random_hyperbolic(rng: &mut ChaCha8Rng) -> ConicSurfaceSpec {
    let k = rng.random_range(3..=4);
    let lo = if k == 3 { -0.95 } else { -0.9 };
    let hi = if k == 3 { -0.7 } else { -0.55 };
    let betas: Vec<f64> = (0..k).map(|_| rng.random_range(lo..hi)).collect();
    let mut positions: Vec<[f64; 3]> = Vec::new();
    while positions.len() < k {
        let p = random_unit(rng);
        if positions.iter().all(|q| (p[0] * q[0] + p[1] * q[1] + p[2] * q[2]).clamp(-1.0, 1.0).acos() > 0.9) {
            positions.push(p);
        }
    }
    ConicSurfaceSpec::new(0, ConeAngleVector::new(betas).unwrap(), Some(positions)).unwrap()
}

#[test]
fn random_hyperbolic_specs_converge_from_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..20 {
        let spec = random_hyperbolic(&mut rng);
        assert_eq!(classify(&spec).tag, GeometryTag::Hyperbolic);
        let sol = uniformize(&spec, &coarse()).unwrap_or_else(|e| panic!("spec {i} {:?}: {e}", spec.angles.as_slice()));
        assert!(sol.k_target < 0.0);
        assert!(sol.diagnostics.residual_sup < coarse().tol_res, "spec {i}: {:?}", sol.diagnostics);
        assert!(sol.diagnostics.gb_residual < 1e-4, "spec {i}: {:?}", sol.diagnostics);
    }
}

#[test]
fn hyperbolic_solution_is_unique() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = random_hyperbolic(&mut rng);
    let options = coarse();
    let mesh = Arc::new(build_mesh(BaseSurface::RoundSphere, &cone_positions(&spec).unwrap(), &options.mesh()).unwrap());
    let bg = Arc::new(build_background_on_mesh(&spec, mesh.clone()).unwrap());
    let k_target = uniformize(&spec, &options).unwrap().k_target;
    let newton = NewtonOptions { max_iter: 200, ..options.newton() };
    let solve = |rng: &mut ChaCha8Rng| {
        let start: Vec<f64> = (0..mesh.vertex_count()).map(|_| rng.random_range(-0.5..0.5)).collect();
        newton_solve(&bg, k_target, &start, &newton).unwrap().phi
    };
    let (a, b) = (solve(&mut rng), solve(&mut rng));
    let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-6, "{gap}");
}

#[test]
fn football_error_decays_at_second_order() {
    let check = football_check(-0.25, &[3, 4, 5], 24).unwrap();
    assert!(check.order >= 1.5, "{check:?}");
    assert!(check.levels.windows(2).all(|w| w[1].sup_error < w[0].sup_error));
}

#[test]
fn torus_with_cones_is_hyperbolic_and_solves() {
    let spec = ConicSurfaceSpec::new(
        1,
        ConeAngleVector::new(vec![-0.3, -0.4]).unwrap(),
        Some(vec![[0.2, 0.3, 0.0], [0.7, 0.6, 0.0]]),
    )
    .unwrap();
    let sol = uniformize(&spec, &coarse()).unwrap();
    assert!(sol.k_target < 0.0);
    assert!((sol.diagnostics.area - 1.0).abs() < 1e-6, "{:?}", sol.diagnostics);
}

#[test]
fn gate_rejections_name_the_tag() {
    let outside = ConicSurfaceSpec::new(
        0,
        ConeAngleVector::new(vec![-0.8, -0.1, -0.1]).unwrap(),
        Some(vec![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
    )
    .unwrap();
    match uniformize(&outside, &coarse()) {
        Err(LiouvilleError::NotUniformizable { tag, violated_index }) => {
            assert_eq!(tag, GeometryTag::OutsideTroyanov);
            assert_eq!(violated_index, Some(1));
        }
        other => panic!("{:?}", other.map(|s| s.diagnostics)),
    }
}
