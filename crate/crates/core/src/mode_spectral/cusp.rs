//! Fourier modes on the hyperbolic cusp `dr²/r² + r²dy²`.
//!
//! On mode `j` the linearized curvature operator is
//! `L_j = −r²∂_r² − 2r∂_r + j²/r² + 2`, which is the mode Laplacian shifted by −2.

use serde::{Deserialize, Serialize};

use super::{solve_source, ModeEigenproblem, SpectralError};

/// Characteristic exponents of `−r²∂_r² − 2r∂_r + 2`, roots of `ζ² + ζ − 2`,
/// larger first.
pub fn cusp_zero_mode_roots() -> (f64, f64) {
    let (b, c) = (1.0f64, -2.0f64);
    let disc = (b * b - 4.0 * c).sqrt();
    // Stable quadratic formula.
    let q = -0.5 * (b + b.signum() * disc);
    let (x1, x2) = (q, c / q);
    (x1.max(x2), x1.min(x2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspDecayOptions {
    /// Dirichlet radius. The decay estimate is asymptotic at the cusp tip;
    /// far from it the Dirichlet layer of the slow `j = 1` mode distorts the
    /// `j⁻²` comparison.
    pub r0: f64,
    pub cells: usize,
}

impl Default for CuspDecayOptions {
    fn default() -> Self {
        Self { r0: 0.05, cells: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspDecayReport {
    pub j: i64,
    pub c: f64,
    pub a: f64,
    pub r0: f64,
    /// `max |u| e^{c/r}` over the grid.
    pub raw_constant: f64,
    /// Smallest `A` with `|u| ≤ A j⁻² e^{−c/r}` on the grid.
    pub constant: f64,
    /// Supersolution constant `a/(2 + (j² − c²)/r₀²)`.
    pub barrier: f64,
    /// Whether `|u| ≤ barrier · e^{−c/r}` holds on the grid.
    pub barrier_holds: bool,
}

/// Solves `L_j u = a e^{−c/r}` on `(0, r₀]` with `u(r₀) = 0` and measures the
/// decay constant of `u` against `e^{−c/r}`.
pub fn cusp_mode_decay_check(j: i64, c: f64, a: f64, options: CuspDecayOptions) -> Result<CuspDecayReport, SpectralError> {
    if j == 0 {
        return Err(SpectralError::InvalidProblem("cusp decay needs |j| >= 1".into()));
    }
    if !(c > 0.0 && c < 1.0) || !(a >= 0.0) {
        return Err(SpectralError::InvalidProblem("need 0 < c < 1 and a >= 0".into()));
    }
    // Below c/700 the source is below the smallest normal double.
    let r_min = (c / 700.0).min(0.1 * options.r0);
    let problem = ModeEigenproblem::cusp(j, r_min, options.r0, options.cells, -2.0)?;
    let (r, u) = solve_source(&problem, |r| a * (-c / r).exp())?;
    let j2 = (j * j) as f64;
    let barrier = a / (2.0 + (j2 - c * c) / (options.r0 * options.r0));
    let mut raw_constant: f64 = 0.0;
    let mut barrier_holds = true;
    for (&ri, &ui) in r.iter().zip(&u) {
        let w = (-c / ri).exp();
        if w > 0.0 {
            raw_constant = raw_constant.max(ui.abs() / w);
        }
        if ui.abs() > barrier * w * (1.0 + 1e-9) + 1e-300 {
            barrier_holds = false;
        }
    }
    Ok(CuspDecayReport { j, c, a, r0: options.r0, raw_constant, constant: j2 * raw_constant, barrier, barrier_holds })
}
