//! Newton iteration for `Sφ + K₀A + F_s − K·N(φ) = 0`, the finite-element
//! form of `Δφ − K_g + K e^{2φ} = 0` on the singular background, with the
//! consistent nonlinear mass `N_i = ∫ e^{2(s+φ)} v_i dA₀`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::background::BackgroundGeometry;
use super::mesh::{dot, norm, sub};
use super::sparse::{CsrMatrix, Factorization};
use super::LiouvilleError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Bound on the residual sup-norm per mean vertex area.
    pub tol_res: f64,
    /// Bound on the sup-norm of the last Newton step.
    pub tol_step: f64,
    pub max_iter: usize,
    /// Track the smallest eigenvalue of the linearization on spherical targets.
    pub monitor: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol_res: 1e-8, tol_step: 1e-10, max_iter: 60, monitor: true }
    }
}

/// Below this the monitored eigenvalue is reported as singular.
pub const SINGULAR_EIGENVALUE: f64 = 1e-10;
/// Below this Newton steps start at half length.
pub const SMALL_EIGENVALUE: f64 = 1e-4;
const LINE_SEARCH_TRIES: usize = 10;
const MONITOR_ITERATIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Area of `e^{2(s+φ)}g₀` with `φ` interpolated linearly.
    pub area: f64,
    /// `|K·area − 2πχ|`.
    pub gb_residual: f64,
    pub min_phi: f64,
    pub max_phi: f64,
    /// Integrated discrete curvature of the solved metric over its area.
    pub mean_curvature: f64,
    /// Final residual sup-norm per mean vertex area.
    pub residual_sup: f64,
    pub iterations: usize,
    /// Last monitored eigenvalue of the linearization (spherical targets).
    pub min_eigenvalue: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConformalSolution {
    pub background: Arc<BackgroundGeometry>,
    /// Regular part of the conformal factor at each vertex.
    pub phi: Vec<f64>,
    pub k_target: f64,
    /// Residual 2-norm per mean vertex area after each accepted step.
    pub newton_history: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// `F(φ)` of the discrete equation.
pub fn residual_vector(bg: &BackgroundGeometry, phi: &[f64], k_target: f64) -> Vec<f64> {
    let sphi = bg.stiffness.mul_vec(phi);
    let nonlinear = if k_target == 0.0 { vec![0.0; phi.len()] } else { bg.nonlinear_term(phi).0 };
    (0..phi.len())
        .map(|i| sphi[i] + bg.base_curvature * bg.lumped_area[i] + bg.source[i] - k_target * nonlinear[i])
        .collect()
}

/// Pointwise residual `Δφ − K_g + K e^{2φ}` (in `g₀` units) at the vertices.
pub fn residual(bg: &BackgroundGeometry, phi: &[f64], k_target: f64) -> Vec<f64> {
    residual_vector(bg, phi, k_target).iter().zip(&bg.lumped_area).map(|(f, a)| -f / a).collect()
}

fn mean_vertex_area(bg: &BackgroundGeometry) -> f64 {
    bg.lumped_area.iter().sum::<f64>() / bg.lumped_area.len() as f64
}

/// Constraint row fixing the kernel: mean zero for flat targets, and the
/// axial moment for two-cone spherical targets, whose solutions come in a
/// one-parameter family of dilations fixing both cones.
pub fn gauge_row(bg: &BackgroundGeometry, k_target: f64) -> Option<Vec<f64>> {
    if k_target == 0.0 {
        return Some(bg.lumped_area.clone());
    }
    if k_target > 0.0 && bg.cones.len() == 2 {
        let axis = sub(bg.cones[0].position, bg.cones[1].position);
        let axis = [axis[0] / norm(axis), axis[1] / norm(axis), axis[2] / norm(axis)];
        return Some(bg.mesh.vertices.iter().zip(&bg.lumped_area).map(|(&x, a)| a * dot(x, axis)).collect());
    }
    None
}

pub fn diagnostics(bg: &BackgroundGeometry, phi: &[f64], k_target: f64, iterations: usize, min_eigenvalue: Option<f64>) -> Diagnostics {
    let area = bg.area_of(phi);
    let sphi = bg.stiffness.mul_vec(phi);
    let curvature: f64 = (0..phi.len()).map(|i| sphi[i] + bg.base_curvature * bg.lumped_area[i] + bg.source[i]).sum();
    let f = residual_vector(bg, phi, k_target);
    Diagnostics {
        area,
        gb_residual: (k_target * area - 2.0 * PI * bg.class.chi_beta).abs(),
        min_phi: phi.iter().copied().fold(f64::INFINITY, f64::min),
        max_phi: phi.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_curvature: curvature / area,
        residual_sup: f.iter().map(|v| v.abs()).fold(0.0, f64::max) / mean_vertex_area(bg),
        iterations,
        min_eigenvalue,
    }
}

/// Smallest-magnitude eigenvalue of `J x = λ M x` on the gauge complement,
/// by inverse iteration with the Newton factorization.
fn monitored_eigenvalue(jacobian: &CsrMatrix, fact: &Factorization, mass: &CsrMatrix) -> f64 {
    let n = mass.n;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for _ in 0..MONITOR_ITERATIONS {
        let mut rhs = mass.mul_vec(&x);
        rhs.resize(fact.size, 0.0);
        let y = fact.solve(&rhs);
        let y = &y[..n];
        let scale = dot(y, &mass.mul_vec(y)).sqrt();
        x = y.iter().map(|v| v / scale).collect();
    }
    dot(&x, &jacobian.mul_vec(&x)) / dot(&x, &mass.mul_vec(&x))
}

pub fn newton_solve(
    bg: &Arc<BackgroundGeometry>,
    k_target: f64,
    initial: &[f64],
    options: &NewtonOptions,
) -> Result<ConformalSolution, LiouvilleError> {
    let n = bg.mesh.vertex_count();
    if initial.len() != n || initial.iter().any(|v| !v.is_finite()) {
        return Err(LiouvilleError::Invalid("initial field has the wrong size or is not finite".into()));
    }
    if !k_target.is_finite() {
        return Err(LiouvilleError::Invalid("target curvature is not finite".into()));
    }
    let scale = mean_vertex_area(bg);
    let border = gauge_row(bg, k_target);
    let full = |phi: &[f64], mu: f64| {
        let mut f = residual_vector(bg, phi, k_target);
        if let Some(c) = &border {
            f.iter_mut().zip(c).for_each(|(fi, ci)| *fi += mu * ci);
            f.push(c.iter().zip(phi).map(|(a, b)| a * b).sum());
        }
        f
    };
    let merit = |f: &[f64]| f.iter().map(|v| v * v).sum::<f64>().sqrt() / scale;
    let sup = |f: &[f64]| f.iter().map(|v| v.abs()).fold(0.0, f64::max) / scale;

    if k_target == 0.0 {
        // Linear: solve with mean zero, then shift to unit area.
        let c = border.as_ref().unwrap();
        let fact = Factorization::new(&bg.stiffness, &vec![0.0; n], Some(c))?;
        let mut rhs: Vec<f64> = (0..n).map(|i| -(bg.base_curvature * bg.lumped_area[i] + bg.source[i])).collect();
        rhs.push(0.0);
        let before = merit(&full(initial, 0.0));
        let sol = fact.solve(&rhs);
        let mut phi = sol[..n].to_vec();
        let shift = -0.5 * bg.area_of(&phi).ln();
        phi.iter_mut().for_each(|p| *p += shift);
        let f = residual_vector(bg, &phi, 0.0);
        let history = vec![before, merit(&f)];
        let diagnostics = diagnostics(bg, &phi, 0.0, 1, None);
        return Ok(ConformalSolution { background: bg.clone(), phi, k_target, newton_history: history, diagnostics });
    }

    let mut phi = initial.to_vec();
    let mut mu = 0.0;
    let mut history = Vec::new();
    let mut min_eigenvalue = None;
    let mut f = full(&phi, mu);
    for iteration in 0..options.max_iter {
        let mass = bg.nonlinear_term(&phi).1;
        let jacobian = CsrMatrix {
            vals: bg.stiffness.vals.iter().zip(&mass.vals).map(|(s, m)| s - 2.0 * k_target * m).collect(),
            ..bg.stiffness.clone()
        };
        let fact = Factorization::new(&jacobian, &vec![0.0; n], border.as_deref())?;
        let mut alpha = 1.0;
        if options.monitor && k_target > 0.0 {
            let lambda = monitored_eigenvalue(&jacobian, &fact, &mass);
            min_eigenvalue = Some(lambda);
            if !(lambda.abs() >= SINGULAR_EIGENVALUE) {
                return Err(LiouvilleError::SingularLinearization { eigenvalue: lambda });
            }
            if lambda.abs() < SMALL_EIGENVALUE {
                alpha = 0.5;
            }
        }
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = fact.solve(&rhs);
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(LiouvilleError::LinearSolver("non-finite Newton step".into()));
        }
        let step = delta[..n].iter().map(|d| d.abs()).fold(0.0, f64::max);
        if sup(&f) < options.tol_res && step < options.tol_step {
            let diagnostics = diagnostics(bg, &phi, k_target, iteration, min_eigenvalue);
            return Ok(ConformalSolution { background: bg.clone(), phi, k_target, newton_history: history, diagnostics });
        }
        let m0 = merit(&f);
        let mut accepted = None;
        for _ in 0..LINE_SEARCH_TRIES {
            let trial: Vec<f64> = phi.iter().zip(&delta).map(|(p, d)| p + alpha * d).collect();
            let trial_mu = mu + alpha * delta.get(n).copied().unwrap_or(0.0);
            let ft = full(&trial, trial_mu);
            let mt = merit(&ft);
            if mt.is_finite() && mt < (1.0 - 1e-4 * alpha) * m0 {
                accepted = Some((trial, trial_mu, ft, mt));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, trial_mu, ft, mt)) = accepted else {
            if sup(&f) < options.tol_res {
                let diagnostics = diagnostics(bg, &phi, k_target, iteration, min_eigenvalue);
                return Ok(ConformalSolution { background: bg.clone(), phi, k_target, newton_history: history, diagnostics });
            }
            return Err(LiouvilleError::NewtonDiverged { iterations: iteration, residual: sup(&f) });
        };
        phi = trial;
        mu = trial_mu;
        f = ft;
        history.push(mt);
        if sup(&f) < options.tol_res && alpha * step < options.tol_step {
            let diagnostics = diagnostics(bg, &phi, k_target, iteration + 1, min_eigenvalue);
            return Ok(ConformalSolution { background: bg.clone(), phi, k_target, newton_history: history, diagnostics });
        }
    }
    Err(LiouvilleError::NewtonDiverged { iterations: options.max_iter, residual: sup(&f) })
}
