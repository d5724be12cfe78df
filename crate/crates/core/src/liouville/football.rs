//! Football oracle: the conformal factor of the two-cone constant-curvature
//! sphere over the round sphere, from a 1-D solve in `ℓ = ln tan(θ/2)`.
//!
//! With `dt² + f(t)² dψ²`, `f = (1+β) sin(√K t)/√K`, conformality to
//! `dθ² + sin²θ dψ²` means `dt/dℓ = f(t)` and `e^u = f(t)/sin θ`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::mesh::build_mesh;
use super::{cone_positions, surface_for_genus, uniformize_on_mesh, LiouvilleError, SolverOptions};
use crate::geometry::{ConeAngleVector, ConicSurfaceSpec};

const STEP: f64 = 1e-3;
const HALF_WIDTH: f64 = 30.0;

/// `t(ℓ)` tabulated by RK4 on `ℓ ≤ 0`, from `t(0) = π/(2√K)` at the equator.
/// The other hemisphere follows from `t(−ℓ) = π/√K − t(ℓ)`.
#[derive(Debug, Clone)]
pub struct FootballFactor {
    pub beta: f64,
    pub curvature: f64,
    t: Vec<f64>,
}

impl FootballFactor {
    pub fn new(beta: f64, curvature: f64) -> Self {
        let root = curvature.sqrt();
        let rhs = |t: f64| (1.0 + beta) * (root * t).sin() / root;
        let n = (HALF_WIDTH / STEP).round() as usize;
        // t[i] = t(−i·STEP)
        let mut t = Vec::with_capacity(n + 1);
        t.push(0.5 * PI / root);
        let h = -STEP;
        for _ in 0..n {
            let y = *t.last().unwrap();
            let k1 = rhs(y);
            let k2 = rhs(y + 0.5 * h * k1);
            let k3 = rhs(y + 0.5 * h * k2);
            let k4 = rhs(y + h * k3);
            t.push(y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        }
        Self { beta, curvature, t }
    }

    /// `G(ℓ) = ln sin(√K t) − (1+β)ℓ` for `ℓ ≤ 0`, which tends to `ln 2` at the
    /// pole; beyond the table the linearized equation keeps it constant.
    fn reduced_log_sin(&self, ell: f64) -> f64 {
        let root = self.curvature.sqrt();
        let n = self.t.len() - 1;
        let rate = 1.0 + self.beta;
        let x = (-ell / STEP).max(0.0);
        if x >= n as f64 {
            return (root * self.t[n]).sin().ln() + rate * HALF_WIDTH;
        }
        let i = (x.floor() as usize).min(n - 1);
        let s = x - i as f64;
        // Hermite data in the variable x = −ℓ/STEP.
        let d = |t: f64| -rate * (root * t).sin() / root * STEP;
        let (y0, y1, d0, d1) = (self.t[i], self.t[i + 1], d(self.t[i]), d(self.t[i + 1]));
        let t = (2.0 * s.powi(3) - 3.0 * s * s + 1.0) * y0
            + (s.powi(3) - 2.0 * s * s + s) * d0
            + (-2.0 * s.powi(3) + 3.0 * s * s) * y1
            + (s.powi(3) - s * s) * d1;
        (root * t).sin().ln() - rate * ell
    }

    fn scale(&self) -> f64 {
        ((1.0 + self.beta) / self.curvature.sqrt()).ln()
    }

    /// `u` with `e^{2u}` times the round metric equal to the football, at
    /// colatitude `θ ∈ (0, π)` from the first cone.
    pub fn log_factor(&self, theta: f64) -> f64 {
        let ell = (0.5 * theta.min(PI - theta)).tan().ln();
        // ln sin θ = ln 2 + ℓ − ln(1 + e^{2ℓ})
        self.scale() + self.reduced_log_sin(ell) + self.beta * ell - 2f64.ln() + (2.0 * ell).exp().ln_1p()
    }

    /// The same `u` from `tan(√K t/2) = tan(θ/2)^{1+β}`.
    pub fn closed_form_log_factor(&self, theta: f64) -> f64 {
        let ell = (0.5 * theta.min(PI - theta)).tan().ln();
        let reduced = 2f64.ln() - (2.0 * (1.0 + self.beta) * ell).exp().ln_1p();
        self.scale() + reduced + self.beta * ell - 2f64.ln() + (2.0 * ell).exp().ln_1p()
    }

    /// `φ = u − s` for the stereographic singular part with cutoff radius `ε`,
    /// including the cone points.
    pub fn regular_part(&self, theta: f64, cutoff: f64) -> f64 {
        let theta = theta.clamp(0.0, PI);
        let near = theta.min(PI - theta);
        let chi_near = super::cutoff_profile(near / cutoff);
        let chi_far = super::cutoff_profile((PI - near) / cutoff);
        let ell = (0.5 * near).tan().ln();
        let ln2 = 2f64.ln();
        if ell == f64::NEG_INFINITY {
            return self.scale() - ln2 + self.reduced_log_sin(ell) - self.beta * ln2;
        }
        self.scale() - ln2 + self.reduced_log_sin(ell) + (2.0 * ell).exp().ln_1p()
            + self.beta * ell * (1.0 - chi_near + chi_far)
            - self.beta * ln2 * (chi_near + chi_far)
    }

    /// Limit of `φ` at the cones.
    pub fn pole_value(&self) -> f64 {
        self.scale() - self.beta * 2f64.ln()
    }
}

/// Two antipodal cones of angle `2π(1+β)` at the poles.
pub fn football_spec(beta: f64) -> Result<ConicSurfaceSpec, LiouvilleError> {
    let angles = ConeAngleVector::new(vec![beta, beta]).map_err(|e| LiouvilleError::Invalid(e.to_string()))?;
    ConicSurfaceSpec::new(0, angles, Some(vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])).map_err(|e| LiouvilleError::Invalid(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootballLevel {
    pub level: u32,
    pub vertices: usize,
    pub base_size: f64,
    /// `sup |φ_h − φ|` over the vertices.
    pub sup_error: f64,
    /// Sup of the pointwise residual at the exact factor, away from the cones.
    /// Cotangent Laplacians are not pointwise consistent on irregular meshes,
    /// so this need not shrink; the area-weighted RMS does.
    pub residual_at_exact: f64,
    pub residual_at_exact_rms: f64,
    pub gb_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootballCheck {
    pub beta: f64,
    pub curvature: f64,
    pub levels: Vec<FootballLevel>,
    /// Least-squares slope of `log error` against `log h`.
    pub order: f64,
}

/// Solves the unit-area football on each mesh level and compares with the 1-D factor.
pub fn football_check(beta: f64, levels: &[u32], grading_rings: u32) -> Result<FootballCheck, LiouvilleError> {
    let spec = football_spec(beta)?;
    let curvature = 4.0 * PI * (1.0 + beta);
    let exact = FootballFactor::new(beta, curvature);
    let surface = surface_for_genus(0)?;
    let mut out = Vec::new();
    for &level in levels {
        let options = SolverOptions { mesh_level: level, grading_rings, ..Default::default() };
        let mesh = Arc::new(build_mesh(surface, &cone_positions(&spec)?, &options.mesh())?);
        let sol = uniformize_on_mesh(&spec, mesh, &options, None)?;
        let bg = &sol.background;
        let cutoff = bg.cones[0].cutoff;
        let theta: Vec<f64> = bg.mesh.vertices.iter().map(|x| x[2].clamp(-1.0, 1.0).acos()).collect();
        let phi_exact: Vec<f64> = theta.iter().map(|&t| exact.regular_part(t, cutoff)).collect();
        let sup_error = sol.phi.iter().zip(&phi_exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let res = super::residual(bg, &phi_exact, sol.k_target);
        let away: Vec<usize> = (0..theta.len()).filter(|&v| theta[v].min(PI - theta[v]) > cutoff).collect();
        let residual_at_exact = away.iter().map(|&v| res[v].abs()).fold(0.0, f64::max);
        let weight: f64 = away.iter().map(|&v| bg.lumped_area[v]).sum();
        let residual_at_exact_rms = (away.iter().map(|&v| bg.lumped_area[v] * res[v] * res[v]).sum::<f64>() / weight).sqrt();
        out.push(FootballLevel {
            level,
            vertices: bg.mesh.vertex_count(),
            base_size: bg.mesh.base_size,
            sup_error,
            residual_at_exact,
            residual_at_exact_rms,
            gb_residual: sol.diagnostics.gb_residual,
            iterations: sol.diagnostics.iterations,
        });
    }
    let order = fitted_order(&out);
    Ok(FootballCheck { beta, curvature, levels: out, order })
}

fn fitted_order(levels: &[FootballLevel]) -> f64 {
    let pts: Vec<(f64, f64)> = levels.iter().map(|l| (l.base_size.ln(), l.sup_error.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
