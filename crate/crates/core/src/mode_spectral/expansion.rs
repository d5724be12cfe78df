//! Leading exponents of Friedrichs solutions near a flat cone point.

use serde::{Deserialize, Serialize};

use super::{solve_source, GridMap, ModeEigenproblem, RadialGrid, SpectralError};
use crate::indicial::k_beta;

/// Cells of the fitting grid.
pub const FIT_CELLS: usize = 4000;
/// Grading parameter of the fitting grid; the first cell is below 1e-9.
pub const FIT_GRADING: f64 = 16.0;
/// Fitting window in `r`.
pub const FIT_WINDOW: (f64, f64) = (1e-4, 1e-3);

/// Right-hand side `amplitude · r^exponent` on one Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSource {
    pub mode: i64,
    pub exponent: f64,
    pub amplitude: f64,
}

impl RadialSource {
    /// Mode-`k` part of a function smooth in the conformal coordinate:
    /// `ρ^{|k|} = ((1+β) r)^{|k_β|}` up to a constant.
    pub fn smooth(beta: f64, mode: i64, amplitude: f64) -> Self {
        Self { mode, exponent: k_beta(beta, mode).abs(), amplitude }
    }

    /// Exponent of `u − a₀` for the Friedrichs solution on the unit cone
    /// with a Dirichlet rim: the particular power `r^{p+2}` competes with the
    /// regular homogeneous branch `r^{|k_β|}` (absent on mode 0).
    pub fn predicted_exponent(&self, beta: f64) -> f64 {
        if self.mode == 0 {
            self.exponent + 2.0
        } else {
            k_beta(beta, self.mode).abs().min(self.exponent + 2.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeFit {
    pub mode: i64,
    /// Pole value (zero off mode 0).
    pub a0: f64,
    pub slope: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFitReport {
    pub beta: f64,
    pub modes: Vec<ModeFit>,
    /// Slope of `Σ_k |u_k − a₀,k|`.
    pub combined_slope: f64,
    pub combined_predicted: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let den = n * sxx - sx * sx;
    (den > 0.0).then(|| (n * sxy - sx * sy) / den)
}

/// Solves `Δu = f` mode by mode on the unit flat cone with the Friedrichs
/// selection and a Dirichlet rim, then fits the exponent of `u − a₀` on
/// [`FIT_WINDOW`].
pub fn friedrichs_expansion_fit(beta: f64, sources: &[RadialSource]) -> Result<ExpansionFitReport, SpectralError> {
    if sources.is_empty() {
        return Err(SpectralError::DegenerateFit("no source modes".into()));
    }
    let grid = RadialGrid { map: GridMap::Graded { lo: 0.0, hi: 1.0, b: FIT_GRADING }, cells: FIT_CELLS };
    let mut nodes = Vec::new();
    let mut combined: Vec<f64> = Vec::new();
    let mut modes = Vec::with_capacity(sources.len());
    for src in sources {
        if !(src.exponent >= 0.0) {
            return Err(SpectralError::InvalidProblem("source must be bounded".into()));
        }
        let problem = ModeEigenproblem::flat_cone(beta, src.mode, 1.0, FIT_CELLS)?.with_grid(grid);
        let (r, u) = solve_source(&problem, |r| src.amplitude * r.powf(src.exponent))?;
        let a0 = u[0];
        let dev: Vec<f64> = u.iter().map(|v| (v - a0).abs()).collect();
        let slope = fit_window(&r, &dev)?;
        modes.push(ModeFit { mode: src.mode, a0, slope, predicted: src.predicted_exponent(beta) });
        if combined.is_empty() {
            combined = dev;
            nodes = r;
        } else {
            combined.iter_mut().zip(&dev).for_each(|(c, d)| *c += d);
        }
    }
    let combined_slope = fit_window(&nodes, &combined)?;
    let combined_predicted = modes.iter().map(|m| m.predicted).fold(f64::INFINITY, f64::min);
    Ok(ExpansionFitReport { beta, modes, combined_slope, combined_predicted })
}

fn fit_window(r: &[f64], dev: &[f64]) -> Result<f64, SpectralError> {
    let pts: Vec<(f64, f64)> = r
        .iter()
        .zip(dev)
        .filter(|(&x, _)| x >= FIT_WINDOW.0 && x <= FIT_WINDOW.1)
        .map(|(&x, &y)| (x, y))
        .collect();
    if pts.len() < 10 {
        return Err(SpectralError::DegenerateFit(format!("only {} grid points in the window", pts.len())));
    }
    if pts.iter().any(|&(_, y)| !(y > f64::MIN_POSITIVE * 1e10) || !y.is_finite()) {
        return Err(SpectralError::DegenerateFit("u − a₀ underflows in the window".into()));
    }
    log_log_slope(&pts).ok_or_else(|| SpectralError::DegenerateFit("singular regression".into()))
}
