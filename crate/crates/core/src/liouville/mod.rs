//! Numerical uniformization of conic surfaces of genus 0 and 1: the singular
//! part `Σ χ_j β_j log σ_j` is split off and the continuous remainder `φ`
//! solves `Δφ − K_g + K e^{2φ} = 0` on a cone-graded triangulation.

mod audit;
mod background;
mod football;
mod mesh;
mod newton;
mod sparse;
mod sweep;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{gauss_bonnet_pair, sph_to_euc_projection, ConeAngleVector, ConicSurfaceSpec, GeometryTag};

pub use audit::{exponent_audit, ConeExponentFit, RING_BINS_REQUIRED};
pub use background::{
    base_background, build_background, build_background_on_mesh, cone_positions, cutoff_profile, gate, surface_for_genus,
    BackgroundGeometry, ConeData, CUTOFF_MAX,
};
pub use football::{football_check, football_spec, FootballCheck, FootballFactor, FootballLevel};
pub use mesh::{build_mesh, BaseSurface, Mesh, MeshOptions, GRADING_RADIUS, NOMINAL_RING_RATIO};
pub use newton::{
    diagnostics, gauge_row, newton_solve, residual, residual_vector, ConformalSolution, Diagnostics, NewtonOptions,
    SINGULAR_EIGENVALUE, SMALL_EIGENVALUE,
};
pub use sparse::{CsrMatrix, Factorization};
pub use self::sweep::{family_sweep, symmetric_path, SweepPoint, SweepReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiouvilleError {
    #[error("spec is not uniformizable ({tag:?})")]
    NotUniformizable { tag: GeometryTag, violated_index: Option<usize> },
    #[error("genus {0} is not meshed")]
    UnsupportedGenus(u32),
    #[error("cone positions are required")]
    MissingPositions,
    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),
    #[error("Newton diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("linearization is singular (eigenvalue {eigenvalue:e})")]
    SingularLinearization { eigenvalue: f64 },
    #[error("linear solver failed: {0}")]
    LinearSolver(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub mesh_level: u32,
    pub grading_rings: u32,
    pub tol_res: f64,
    pub tol_step: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        let mesh = MeshOptions::default();
        let newton = NewtonOptions::default();
        Self {
            mesh_level: mesh.level,
            grading_rings: mesh.grading_rings,
            tol_res: newton.tol_res,
            tol_step: newton.tol_step,
            max_iter: newton.max_iter,
        }
    }
}

impl SolverOptions {
    pub fn mesh(&self) -> MeshOptions {
        MeshOptions { level: self.mesh_level, grading_rings: self.grading_rings }
    }

    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions { tol_res: self.tol_res, tol_step: self.tol_step, max_iter: self.max_iter, ..NewtonOptions::default() }
    }
}

/// Smallest continuation step before giving up.
const MIN_CONTINUATION_STEP: f64 = 1.0 / 64.0;

/// Gate, mesh and solve with unit area.
pub fn uniformize(spec: &ConicSurfaceSpec, options: &SolverOptions) -> Result<ConformalSolution, LiouvilleError> {
    gate(spec)?;
    let surface = surface_for_genus(spec.genus)?;
    let mesh = Arc::new(build_mesh(surface, &cone_positions(spec)?, &options.mesh())?);
    uniformize_on_mesh(spec, mesh, options, None)
}

/// Solves on a prepared mesh, optionally from a warm start. Spherical targets
/// that fail from the initial field are reached by continuation from the
/// Euclidean point on the ray through the angle vector.
pub fn uniformize_on_mesh(
    spec: &ConicSurfaceSpec,
    mesh: Arc<Mesh>,
    options: &SolverOptions,
    initial: Option<&[f64]>,
) -> Result<ConformalSolution, LiouvilleError> {
    let class = gate(spec)?;
    let bg = Arc::new(build_background_on_mesh(spec, mesh.clone())?);
    let k_target = gauss_bonnet_pair(spec, 1.0);
    // Spherical targets start from the constant with unit area.
    let shift = if class.tag == GeometryTag::Spherical { -0.5 * bg.area_of(&vec![0.0; mesh.vertex_count()]).ln() } else { 0.0 };
    let flat_start = vec![shift; mesh.vertex_count()];
    let start = initial.unwrap_or(&flat_start);
    let cold = newton_solve(&bg, k_target, start, &options.newton());
    match cold {
        Err(LiouvilleError::NewtonDiverged { .. }) | Err(LiouvilleError::SingularLinearization { .. })
            if class.tag == GeometryTag::Spherical && spec.cone_count() >= 3 =>
        {
            spherical_continuation(spec, mesh, options).map_err(|_| cold.unwrap_err())
        }
        other => other,
    }
}

/// Reaches a spherical target with `k ≥ 3` from the Euclidean point
/// `β·(−2/Σβ)`, scaling the angles back in steps that halve on failure.
pub fn spherical_continuation(spec: &ConicSurfaceSpec, mesh: Arc<Mesh>, options: &SolverOptions) -> Result<ConformalSolution, LiouvilleError> {
    let (lambda, euc) = sph_to_euc_projection(&spec.angles).map_err(|e| LiouvilleError::Invalid(e.to_string()))?;
    let at = |s: f64| -> Result<ConicSurfaceSpec, LiouvilleError> {
        let factor = 1.0 + s * (lambda - 1.0);
        let angles = if s == 1.0 { spec.angles.clone() } else { euc.scaled(factor).map_err(|e| LiouvilleError::Invalid(e.to_string()))? };
        ConicSurfaceSpec::new(spec.genus, angles, spec.positions.clone()).map_err(|e| LiouvilleError::Invalid(e.to_string()))
    };
    // The Euclidean point, with exactly Σβ = −2.
    let flat = ConicSurfaceSpec::new(spec.genus, exact_euclidean(&spec.angles).unwrap_or(euc.clone()), spec.positions.clone())
        .map_err(|e| LiouvilleError::Invalid(e.to_string()))?;
    let mut current = uniformize_on_mesh_direct(&flat, mesh.clone(), options, None)?;
    let (mut s, mut step) = (0.0f64, 0.25);
    while s < 1.0 {
        let next = (s + step).min(1.0);
        match uniformize_on_mesh_direct(&at(next)?, mesh.clone(), options, Some(&current.phi)) {
            Ok(sol) => {
                current = sol;
                s = next;
            }
            Err(e) => {
                step *= 0.5;
                if step < MIN_CONTINUATION_STEP {
                    return Err(e);
                }
            }
        }
    }
    Ok(current)
}

/// Exact rational rescaling to `Σβ = −2` when the angles are rational.
fn exact_euclidean(angles: &ConeAngleVector) -> Option<ConeAngleVector> {
    let exact = angles.exact()?;
    let total: num_rational::Rational64 = exact.iter().sum();
    let factor = num_rational::Rational64::from_integer(-2) / total;
    ConeAngleVector::from_rationals(exact.iter().map(|q| q * factor).collect()).ok()
}

fn uniformize_on_mesh_direct(
    spec: &ConicSurfaceSpec,
    mesh: Arc<Mesh>,
    options: &SolverOptions,
    initial: Option<&[f64]>,
) -> Result<ConformalSolution, LiouvilleError> {
    let bg = Arc::new(build_background_on_mesh(spec, mesh.clone())?);
    let zero = vec![0.0; mesh.vertex_count()];
    newton_solve(&bg, gauss_bonnet_pair(spec, 1.0), initial.unwrap_or(&zero), &options.newton())
}
