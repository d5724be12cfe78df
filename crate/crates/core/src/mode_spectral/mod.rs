//! Friedrichs spectra of the Laplacian on single Fourier modes of model
//! geometries: flat or curved cones with a Dirichlet rim, footballs, and
//! truncated hyperbolic cusps.
//!
//! Mode `k` of `Δ` on `dr² + f(r)²dy²` is `−f⁻¹(f u')' + k² f⁻² u`. It is
//! discretized by piecewise-linear finite elements with a lumped mass matrix
//! on a smoothly graded grid, giving a symmetric tridiagonal pencil. At a
//! pole the Friedrichs domain is selected by the weak form itself: the pole
//! value is free for `k = 0` and zero otherwise.

mod cusp;
mod expansion;
pub mod tridiag;

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model_metrics::{warp, Chart, ModelMetric};
use tridiag::SymTridiagonal;

pub use cusp::{cusp_mode_decay_check, cusp_zero_mode_roots, CuspDecayOptions, CuspDecayReport};
pub use expansion::{friedrichs_expansion_fit, ExpansionFitReport, ModeFit, RadialSource};

/// Smallest admissible number of grid cells.
pub const MIN_CELLS: usize = 64;
/// Adjacent-cell ratio of the graded grids at `MIN_CELLS` cells.
pub const BASE_GRADING_RATIO: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("grid has {cells} cells, fewer than the minimum {MIN_CELLS}")]
    GridTooCoarse { cells: usize },
    #[error("the operator has continuous spectrum (cusp end without a boundary)")]
    NoDiscreteSpectrum,
    #[error("invalid mode problem: {0}")]
    InvalidProblem(String),
    #[error("eigenvalue bound violated on mode {mode}: lambda = {value}, bound = {bound}")]
    BoundViolated { mode: i64, value: f64, bound: f64 },
    #[error("expansion fit degenerate: {0}")]
    DegenerateFit(String),
}

/// Node placement `ξ ∈ [0,1] ↦ x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GridMap {
    /// `x = lo + (hi − lo)(e^{bξ} − 1)/(e^b − 1)`, clustering at `lo`.
    Graded { lo: f64, hi: f64, b: f64 },
    /// `x = lo + (hi − lo)(1/2 + tanh(b(ξ − 1/2))/(2 tanh(b/2)))`, clustering at both ends.
    TwoSided { lo: f64, hi: f64, b: f64 },
    /// Uniform in `log x`.
    LogUniform { lo: f64, hi: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl GridMap {
    pub fn point(&self, xi: f64) -> f64 {
        match *self {
            GridMap::Graded { lo, hi, b } => lo + (hi - lo) * (b * xi).exp_m1() / b.exp_m1(),
            GridMap::TwoSided { lo, hi, b } => lo + (hi - lo) * (0.5 + (b * (xi - 0.5)).tanh() / (2.0 * (b / 2.0).tanh())),
            GridMap::LogUniform { lo, hi } => (lo.ln() + (hi.ln() - lo.ln()) * xi).exp(),
            GridMap::Uniform { lo, hi } => lo + (hi - lo) * xi,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            GridMap::Graded { lo, hi, .. }
            | GridMap::TwoSided { lo, hi, .. }
            | GridMap::LogUniform { lo, hi }
            | GridMap::Uniform { lo, hi } => (lo, hi),
        }
    }
}

/// Parameter of [`GridMap::Graded`] giving adjacent-cell ratio `ratio` on `cells` cells.
pub fn graded_parameter(ratio: f64, cells: usize) -> f64 {
    cells as f64 * ratio.ln()
}

/// Parameter of [`GridMap::TwoSided`] giving end-cell ratio `ratio` on `cells` cells.
pub fn two_sided_parameter(ratio: f64, cells: usize) -> f64 {
    // Near an end the log-density slope is 2b·tanh(b/2) per unit ξ.
    let target = cells as f64 * ratio.ln();
    let (mut lo, mut hi) = (0.0f64, 200.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 2.0 * mid * (mid / 2.0).tanh() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub map: GridMap,
    pub cells: usize,
}

impl RadialGrid {
    pub fn nodes(&self) -> Vec<f64> {
        let (lo, hi) = self.map.bounds();
        let mut out: Vec<f64> = (0..=self.cells).map(|i| self.map.point(i as f64 / self.cells as f64)).collect();
        out[0] = lo;
        out[self.cells] = hi;
        out
    }

    pub fn refined(&self) -> Self {
        Self { map: self.map, cells: 2 * self.cells }
    }
}

/// Condition at the inner end of the radial interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InnerBoundary {
    /// Friedrichs selection at a cone pole.
    Friedrichs,
    /// Negative control: the pole cell is cut away and the boundary value
    /// is tied to a log branch `u ~ a₀(1 + κ log r)` through a Robin condition.
    LogBranch { kappa: f64 },
    /// Homogeneous Dirichlet condition at the first node (cusp truncation).
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OuterBoundary {
    Dirichlet(f64),
    /// Second cone point of a football.
    SecondPole,
    /// Open cusp end; no discrete spectrum.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEigenproblem {
    pub geometry: ModelMetric,
    pub mode: i64,
    pub grid: RadialGrid,
    pub inner_bc: InnerBoundary,
    pub outer_bc: OuterBoundary,
    /// The discretized operator is `Δ_k − shift`.
    pub shift: f64,
}

impl ModeEigenproblem {
    /// Cone of curvature `metric.curvature` truncated at `r_max` with a Dirichlet rim.
    pub fn cone(metric: ModelMetric, mode: i64, r_max: f64, cells: usize) -> Result<Self, SpectralError> {
        if metric.chart != Chart::Polar {
            return Err(SpectralError::InvalidProblem("cone problems use the polar chart".into()));
        }
        let (_, hi) = metric.domain();
        if !(r_max > 0.0 && r_max < hi) {
            return Err(SpectralError::InvalidProblem(format!("r_max = {r_max} outside the chart")));
        }
        let b = graded_parameter(BASE_GRADING_RATIO, MIN_CELLS);
        let problem = Self {
            geometry: metric,
            mode,
            grid: RadialGrid { map: GridMap::Graded { lo: 0.0, hi: r_max, b }, cells },
            inner_bc: InnerBoundary::Friedrichs,
            outer_bc: OuterBoundary::Dirichlet(r_max),
            shift: 0.0,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn flat_cone(beta: f64, mode: i64, r_max: f64, cells: usize) -> Result<Self, SpectralError> {
        let metric = ModelMetric::flat_cone(beta).map_err(|e| SpectralError::InvalidProblem(e.to_string()))?;
        Self::cone(metric, mode, r_max, cells)
    }

    pub fn football(beta: f64, curvature: f64, mode: i64, cells: usize) -> Result<Self, SpectralError> {
        let metric = ModelMetric::football(beta, curvature).map_err(|e| SpectralError::InvalidProblem(e.to_string()))?;
        let (lo, hi) = metric.domain();
        let b = two_sided_parameter(BASE_GRADING_RATIO, MIN_CELLS);
        let problem = Self {
            geometry: metric,
            mode,
            grid: RadialGrid { map: GridMap::TwoSided { lo, hi, b }, cells },
            inner_bc: InnerBoundary::Friedrichs,
            outer_bc: OuterBoundary::SecondPole,
            shift: 0.0,
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Cusp `dr²/r² + r²dy²` on `[r_min, r0]`, Dirichlet at both ends; the
    /// grid is uniform in `log r`.
    pub fn cusp(mode: i64, r_min: f64, r0: f64, cells: usize, shift: f64) -> Result<Self, SpectralError> {
        if !(r_min > 0.0 && r_min < r0 && r0 <= 1.0) {
            return Err(SpectralError::InvalidProblem("cusp needs 0 < r_min < r0 <= 1".into()));
        }
        let problem = Self {
            geometry: ModelMetric::cusp(),
            mode,
            grid: RadialGrid { map: GridMap::LogUniform { lo: r_min, hi: r0 }, cells },
            inner_bc: InnerBoundary::Dirichlet,
            outer_bc: OuterBoundary::Dirichlet(r0),
            shift,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_inner(mut self, inner: InnerBoundary) -> Self {
        self.inner_bc = inner;
        self
    }

    pub fn with_grid(mut self, grid: RadialGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_cells(mut self, cells: usize) -> Self {
        self.grid.cells = cells;
        self
    }

    fn validate(&self) -> Result<(), SpectralError> {
        if self.grid.cells < MIN_CELLS {
            return Err(SpectralError::GridTooCoarse { cells: self.grid.cells });
        }
        let (lo, hi) = self.grid.map.bounds();
        if !(lo < hi) {
            return Err(SpectralError::InvalidProblem("grid bounds are not increasing".into()));
        }
        if self.geometry.chart == Chart::Suspension && !self.grid.cells.is_multiple_of(2) {
            return Err(SpectralError::InvalidProblem("football grids need an even cell count".into()));
        }
        if let OuterBoundary::Dirichlet(r) = self.outer_bc {
            if (r - hi).abs() > 1e-12 * hi.abs().max(1.0) {
                return Err(SpectralError::InvalidProblem("Dirichlet radius differs from the grid end".into()));
            }
        }
        Ok(())
    }

    fn is_cusp(&self) -> bool {
        self.geometry.chart == Chart::Cusp
    }

    /// Finite-element variable: `r`, or `log r` on the cusp.
    fn fe_coordinate(&self, r: f64) -> f64 {
        if self.is_cusp() {
            r.ln()
        } else {
            r
        }
    }

    fn warp_at(&self, x: f64) -> f64 {
        if self.is_cusp() {
            x.exp()
        } else {
            warp(self.geometry.beta, self.geometry.curvature, x).0
        }
    }
}

/// Assembled pencil `A u = λ M u` on the retained nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMode {
    /// Radius of every grid node.
    pub nodes: Vec<f64>,
    /// Grid indices of the unknowns.
    pub unknowns: Vec<usize>,
    /// `A − shift·M` restricted to the unknowns.
    pub stiffness: SymTridiagonal,
    /// Lumped `f(r) dr` mass of each unknown.
    pub mass: Vec<f64>,
}

impl DiscreteMode {
    /// `M^{-1/2} A M^{-1/2}`.
    pub fn scaled(&self) -> SymTridiagonal {
        let s: Vec<f64> = self.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        SymTridiagonal {
            diag: self.stiffness.diag.iter().zip(&s).map(|(d, si)| d * si * si).collect(),
            off: self.stiffness.off.iter().enumerate().map(|(i, o)| o * s[i] * s[i + 1]).collect(),
        }
    }

    /// `M^{-1} A u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.stiffness.mul_vec(u).iter().zip(&self.mass).map(|(a, m)| a / m).collect()
    }

    /// Nodal values on the full grid from values on the unknowns.
    pub fn extend(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        for (&i, &v) in self.unknowns.iter().zip(u) {
            out[i] = v;
        }
        out
    }
}

const QUAD_POINTS: usize = 5;

pub(crate) fn unit_gauss_rule() -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(QUAD_POINTS).unwrap())
        .iter()
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

pub fn assemble_mode(problem: &ModeEigenproblem) -> Result<DiscreteMode, SpectralError> {
    problem.validate()?;
    let nodes = problem.grid.nodes();
    let x: Vec<f64> = nodes.iter().map(|&r| problem.fe_coordinate(r)).collect();
    let n = nodes.len();
    let k2 = (problem.mode * problem.mode) as f64;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    let mut mass = vec![0.0; n];
    let first_element = usize::from(matches!(problem.inner_bc, InnerBoundary::LogBranch { .. }));
    let rule = unit_gauss_rule();
    for e in first_element..n - 1 {
        let h = x[e + 1] - x[e];
        for &(t, wt) in &rule {
            let f = problem.warp_at(x[e] + h * t);
            let w = h * wt;
            let (pa, pb) = (1.0 - t, t);
            let grad = f / (h * h);
            let pot = k2 / f;
            diag[e] += w * (grad + pot * pa * pa);
            diag[e + 1] += w * (grad + pot * pb * pb);
            off[e] += w * (-grad + pot * pa * pb);
            mass[e] += w * f * pa;
            mass[e + 1] += w * f * pb;
        }
    }
    let pole_free = problem.mode == 0;
    let mut first = match problem.inner_bc {
        InnerBoundary::Friedrichs if pole_free => 0,
        InnerBoundary::Friedrichs | InnerBoundary::Dirichlet => 1,
        InnerBoundary::LogBranch { .. } => 1,
    };
    if let InnerBoundary::LogBranch { kappa } = problem.inner_bc {
        if problem.mode != 0 {
            return Err(SpectralError::InvalidProblem("log-branch control applies to mode 0".into()));
        }
        // −[f u' v] at r = ε with ε u' = κ u/(1 + κ log ε).
        let eps = nodes[1];
        let f = problem.warp_at(x[1]);
        diag[1] += f * kappa / (eps * (1.0 + kappa * eps.ln()));
    }
    let last = match problem.outer_bc {
        OuterBoundary::Dirichlet(_) => n - 2,
        OuterBoundary::SecondPole if pole_free => n - 1,
        OuterBoundary::SecondPole => n - 2,
        OuterBoundary::None => n - 1,
    };
    if first > last {
        first = last;
    }
    let unknowns: Vec<usize> = (first..=last).collect();
    let c = problem.shift;
    let stiffness = SymTridiagonal {
        diag: unknowns.iter().map(|&i| diag[i] - c * mass[i]).collect(),
        off: unknowns[..unknowns.len() - 1].iter().map(|&i| off[i]).collect(),
    };
    let mass = unknowns.iter().map(|&i| mass[i]).collect();
    Ok(DiscreteMode { nodes, unknowns, stiffness, mass })
}

/// Consistent load `∫ g φ_i f dx` on the unknowns of `discrete`, with `g` a
/// function of the radius.
pub fn assemble_load(problem: &ModeEigenproblem, discrete: &DiscreteMode, g: impl Fn(f64) -> f64) -> Vec<f64> {
    let nodes = &discrete.nodes;
    let x: Vec<f64> = nodes.iter().map(|&r| problem.fe_coordinate(r)).collect();
    let mut load = vec![0.0; nodes.len()];
    let first_element = usize::from(matches!(problem.inner_bc, InnerBoundary::LogBranch { .. }));
    let rule = unit_gauss_rule();
    for e in first_element..nodes.len() - 1 {
        let h = x[e + 1] - x[e];
        for &(t, wt) in &rule {
            let xq = x[e] + h * t;
            let r = if problem.is_cusp() { xq.exp() } else { xq };
            let v = h * wt * problem.warp_at(xq) * g(r);
            load[e] += v * (1.0 - t);
            load[e + 1] += v * t;
        }
    }
    discrete.unknowns.iter().map(|&i| load[i]).collect()
}

/// Solves `(Δ_k − shift) u = g` with the problem's boundary conditions and
/// returns nodal values on the full grid.
pub fn solve_source(problem: &ModeEigenproblem, g: impl Fn(f64) -> f64) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    let discrete = assemble_mode(problem)?;
    let load = assemble_load(problem, &discrete, g);
    let t = &discrete.stiffness;
    let u = tridiag::TridiagonalLu::new(&t.off, &t.diag, &t.off).solve(&load);
    let full = discrete.extend(&u);
    Ok((discrete.nodes, full))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub mode: i64,
    /// Radial index, 0-based.
    pub index: usize,
    /// Richardson-extrapolated eigenvalue.
    pub value: f64,
    pub coarse: f64,
    pub fine: f64,
    pub error_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub mode: i64,
    /// Cell count of the coarse grid; the fine grid has twice as many.
    pub grid_n: usize,
    pub eigenvalues: Vec<EigenEntry>,
}

/// `(4λ_{2n} − λ_n)/3` with error bar `|λ_{2n} − λ_n|/3`.
pub fn richardson(coarse: f64, fine: f64) -> (f64, f64) {
    ((4.0 * fine - coarse) / 3.0, (fine - coarse).abs() / 3.0)
}

fn check_spectrum_problem(problem: &ModeEigenproblem) -> Result<(), SpectralError> {
    if problem.outer_bc == OuterBoundary::None || (problem.is_cusp() && problem.mode == 0) {
        return Err(SpectralError::NoDiscreteSpectrum);
    }
    Ok(())
}

pub fn solve_spectrum(problem: &ModeEigenproblem, count: usize) -> Result<SpectrumResult, SpectralError> {
    check_spectrum_problem(problem)?;
    let coarse = assemble_mode(problem)?.scaled().lowest_eigenvalues(count);
    let fine_problem = problem.clone().with_grid(problem.grid.refined());
    let fine = assemble_mode(&fine_problem)?.scaled().lowest_eigenvalues(count);
    let eigenvalues = coarse
        .iter()
        .zip(&fine)
        .enumerate()
        .map(|(index, (&c, &f))| {
            let (value, error_bar) = richardson(c, f);
            EigenEntry { mode: problem.mode, index, value, coarse: c, fine: f, error_bar }
        })
        .collect();
    Ok(SpectrumResult { mode: problem.mode, grid_n: problem.grid.cells, eigenvalues })
}

/// Spectra of several independent mode problems, in input order.
pub fn solve_modes(problems: &[ModeEigenproblem], count: usize) -> Vec<Result<SpectrumResult, SpectralError>> {
    problems.par_iter().map(|p| solve_spectrum(p, count)).collect()
}

/// Eigenpairs on the problem's own grid; eigenfunctions are nodal values on
/// the full grid, normalized in the discrete `f dr` norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunctions {
    pub nodes: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub functions: Vec<Vec<f64>>,
}

pub fn mode_eigenfunctions(problem: &ModeEigenproblem, count: usize) -> Result<ModeFunctions, SpectralError> {
    check_spectrum_problem(problem)?;
    let discrete = assemble_mode(problem)?;
    let scaled = discrete.scaled();
    let eigenvalues = scaled.lowest_eigenvalues(count);
    let functions = eigenvalues
        .iter()
        .map(|&lam| {
            let v = scaled.eigenvector(lam);
            let u: Vec<f64> = v.iter().zip(&discrete.mass).map(|(vi, m)| vi / m.sqrt()).collect();
            discrete.extend(&u)
        })
        .collect();
    Ok(ModeFunctions { nodes: discrete.nodes, eigenvalues, functions })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeBound {
    pub mode: i64,
    /// First nonzero eigenvalue of the mode (index 1 on mode 0, else index 0).
    pub lambda: f64,
    pub error_bar: f64,
    /// `lambda − 2K`.
    pub margin: f64,
    pub tolerance: f64,
    pub equality: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueBoundReport {
    pub beta: f64,
    pub curvature: f64,
    pub modes: Vec<ModeBound>,
    pub min_lambda: f64,
    /// Sup-norm distance of the normalized mode-0 eigenfunction to `cos(√K t)`.
    pub rigidity_profile_error: f64,
}

/// Tolerance multiplier on the Richardson error bar for equality verdicts.
pub const EQUALITY_FACTOR: f64 = 10.0;

pub fn verify_eigenvalue_bound(beta: f64, curvature: f64, modes: &[i64], cells: usize) -> Result<EigenvalueBoundReport, SpectralError> {
    let problems = modes
        .iter()
        .map(|&k| ModeEigenproblem::football(beta, curvature, k, cells))
        .collect::<Result<Vec<_>, _>>()?;
    let spectra = solve_modes(&problems, 2);
    let bound = 2.0 * curvature;
    let mut out = Vec::with_capacity(modes.len());
    for (&k, spectrum) in modes.iter().zip(spectra) {
        let spectrum = spectrum?;
        let entry = spectrum.eigenvalues[if k == 0 { 1 } else { 0 }];
        let tolerance = EQUALITY_FACTOR * entry.error_bar + 1e-12 * bound;
        let margin = entry.value - bound;
        let equality = margin.abs() <= tolerance;
        if margin < -tolerance || (k != 0 && beta < 0.0 && margin <= tolerance) {
            return Err(SpectralError::BoundViolated { mode: k, value: entry.value, bound });
        }
        out.push(ModeBound { mode: k, lambda: entry.value, error_bar: entry.error_bar, margin, tolerance, equality });
    }
    let min_lambda = out.iter().map(|m| m.lambda).fold(f64::INFINITY, f64::min);
    let rigidity_profile_error = if modes.contains(&0) {
        let f = mode_eigenfunctions(&ModeEigenproblem::football(beta, curvature, 0, 2 * cells)?, 2)?;
        profile_error(&f.nodes, &f.functions[1], |t| (curvature.sqrt() * t).cos())
    } else {
        f64::NAN
    };
    Ok(EigenvalueBoundReport { beta, curvature, modes: out, min_lambda, rigidity_profile_error })
}

/// Sup distance after scaling `u` to best match `target` at its extremum.
fn profile_error(nodes: &[f64], u: &[f64], target: impl Fn(f64) -> f64) -> f64 {
    let (imax, _) = u.iter().enumerate().fold((0, 0.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
    let scale = target(nodes[imax]) / u[imax];
    nodes.iter().zip(u).map(|(&t, &v)| (scale * v - target(t)).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_grids() {
        assert!(matches!(ModeEigenproblem::flat_cone(-0.5, 0, 1.0, 32), Err(SpectralError::GridTooCoarse { cells: 32 })));
        let p = ModeEigenproblem::flat_cone(-0.5, 0, 1.0, 64).unwrap().with_cells(10);
        assert!(matches!(assemble_mode(&p), Err(SpectralError::GridTooCoarse { .. })));
    }

    #[test]
    fn grading_ratio_at_base_resolution() {
        let g = RadialGrid { map: GridMap::Graded { lo: 0.0, hi: 1.0, b: graded_parameter(1.05, 64) }, cells: 64 };
        let x = g.nodes();
        assert!(((x[2] - x[1]) / (x[1] - x[0]) - 1.05).abs() < 1e-12);
        let b = two_sided_parameter(1.05, 64);
        let g = RadialGrid { map: GridMap::TwoSided { lo: 0.0, hi: 1.0, b }, cells: 64 };
        let x = g.nodes();
        let ratio = (x[2] - x[1]) / (x[1] - x[0]);
        assert!((ratio - 1.05).abs() < 2e-3, "{ratio}");
        assert!((x[32] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flat_cone_weight_is_half_r() {
        let p = ModeEigenproblem::flat_cone(-0.5, 0, 1.0, 64).unwrap();
        let d = assemble_mode(&p).unwrap();
        // ∫₀¹ r/2 dr = 1/4, less the share of the Dirichlet rim node.
        let x = d.nodes[63];
        let rim = (1.0 - x) * (2.0 + x) / 12.0;
        let total: f64 = d.mass.iter().sum();
        assert!((total + rim - 0.25).abs() < 1e-14, "{}", total + rim);
    }

    #[test]
    fn cusp_zero_mode_operator_is_euler_type() {
        // −r²u'' − 2ru' + 2u with u = r: gives 2r − 2r = 0 up to the discretization.
        let p = ModeEigenproblem::cusp(0, 0.05, 1.0, 400, -2.0).unwrap();
        let d = assemble_mode(&p).unwrap();
        let r: Vec<f64> = d.unknowns.iter().map(|&i| d.nodes[i]).collect();
        let au = d.apply(&r);
        for i in 10..r.len() - 10 {
            assert!(au[i].abs() < 1e-3 * r[i], "{i}: {}", au[i]);
        }
    }

    #[test]
    fn assembled_operator_is_self_adjoint() {
        for p in [
            ModeEigenproblem::flat_cone(-0.3, 2, 1.0, 100).unwrap(),
            ModeEigenproblem::football(-0.6, 2.0, 0, 100).unwrap(),
            ModeEigenproblem::cusp(3, 0.01, 0.5, 100, -2.0).unwrap(),
        ] {
            let d = assemble_mode(&p).unwrap();
            let n = d.mass.len();
            let u: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.11).cos()).collect();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&d.mass).map(|((x, y), m)| x * y * m).sum::<f64>();
            let lhs = dot(&d.apply(&u), &v);
            let rhs = dot(&u, &d.apply(&v));
            assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(rhs.abs()), "{lhs} {rhs}");
        }
    }

    #[test]
    fn flat_cone_bessel_value() {
        // j_{2,1}² for β = −1/2, mode 1.
        let s = solve_spectrum(&ModeEigenproblem::flat_cone(-0.5, 1, 1.0, 256).unwrap(), 1).unwrap();
        let e = s.eigenvalues[0];
        assert!((e.value - 26.374_616_427_163_4).abs() < 1e-5, "{e:?}");
    }

    #[test]
    fn football_mode_zero_is_twice_curvature() {
        for (beta, k) in [(-0.5, 1.0), (-0.25, 4.0)] {
            let s = solve_spectrum(&ModeEigenproblem::football(beta, k, 0, 256).unwrap(), 2).unwrap();
            assert!(s.eigenvalues[0].value.abs() < 1e-9);
            assert!((s.eigenvalues[1].value - 2.0 * k).abs() < 1e-7, "{:?}", s.eigenvalues[1]);
        }
    }

    #[test]
    fn second_order_convergence() {
        let p = ModeEigenproblem::flat_cone(-0.25, 1, 1.0, 64).unwrap();
        let exact = solve_spectrum(&p.clone().with_cells(2048), 1).unwrap().eigenvalues[0].value;
        let e1 = solve_spectrum(&p.clone().with_cells(128), 1).unwrap().eigenvalues[0].coarse - exact;
        let e2 = solve_spectrum(&p.clone().with_cells(256), 1).unwrap().eigenvalues[0].coarse - exact;
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.1, "{order}");
    }

    #[test]
    fn cusp_guards() {
        let p = ModeEigenproblem::cusp(1, 0.01, 0.5, 64, 0.0).unwrap();
        let mut open = p.clone();
        open.outer_bc = OuterBoundary::None;
        assert_eq!(solve_spectrum(&open, 1), Err(SpectralError::NoDiscreteSpectrum));
        let zero = ModeEigenproblem::cusp(0, 0.01, 0.5, 64, 0.0).unwrap();
        assert_eq!(solve_spectrum(&zero, 1), Err(SpectralError::NoDiscreteSpectrum));
        assert!(solve_spectrum(&p, 1).is_ok());
    }

    #[test]
    fn log_branch_changes_first_eigenvalue() {
        let p = ModeEigenproblem::flat_cone(-0.5, 0, 1.0, 256).unwrap();
        let fr = solve_spectrum(&p, 1).unwrap().eigenvalues[0].value;
        let lb = solve_spectrum(&p.with_inner(InnerBoundary::LogBranch { kappa: 1.0 }), 1).unwrap().eigenvalues[0].value;
        assert!((fr - lb).abs() > 0.1, "{fr} {lb}");
    }

    #[test]
    fn friedrichs_eigenfunctions_bounded_at_pole() {
        for k in 0..3 {
            let f = mode_eigenfunctions(&ModeEigenproblem::flat_cone(-0.75, k, 1.0, 256).unwrap(), 3).unwrap();
            for u in &f.functions {
                let near = u[..4].iter().map(|v| v.abs()).fold(0.0, f64::max);
                let interior = u[4..].iter().map(|v| v.abs()).fold(0.0, f64::max);
                assert!(near <= 2.0 * interior);
            }
        }
    }

    #[test]
    fn bound_report_structure() {
        let r = verify_eigenvalue_bound(-0.5, 1.0, &[0, 1, 2], 128).unwrap();
        assert!(r.modes[0].equality);
        assert!(r.modes[1].margin > 0.0 && !r.modes[1].equality);
        assert!(r.rigidity_profile_error < 1e-3, "{}", r.rigidity_profile_error);
        // mode 1 on a K=1 football: k_β(k_β+1) with k_β = 2.
        assert!((r.modes[1].lambda - 6.0).abs() < 1e-6);
    }

    #[test]
    fn mode_one_tends_to_two_as_cone_closes() {
        let r = verify_eigenvalue_bound(-0.01, 1.0, &[1], 128).unwrap();
        let kb = 1.0 / 0.99;
        assert!((r.modes[0].lambda - kb * (kb + 1.0)).abs() < 1e-6);
        assert!(r.modes[0].lambda - 2.0 < 0.031);
    }

    #[test]
    fn monotone_in_mode() {
        let problems: Vec<_> = (0..4).map(|k| ModeEigenproblem::flat_cone(-0.4, k, 1.0, 128).unwrap()).collect();
        let s = solve_modes(&problems, 1);
        let lowest: Vec<f64> = s.into_iter().map(|r| r.unwrap().eigenvalues[0].value).collect();
        assert!(lowest.windows(2).all(|w| w[0] < w[1]), "{lowest:?}");
    }
}
