//! Asymptotic exponents of a solved factor at each cone.
//!
//! Slopes are reported against the cone distance `r ∝ σ^{1+β}` of the conic
//! metric. The Friedrichs expansion `φ = a₀ + a₂r² + b r^{1/(1+β)} cos ψ + …`
//! predicts `min(2, 1/(1+β))` for `|φ − φ(p)|` and `1/(1+β)` for its first
//! Fourier mode around the cone.

use serde::{Deserialize, Serialize};

use super::mesh::{cross, dot, norm, scale, sub, BaseSurface, NOMINAL_RING_RATIO};
use super::{ConformalSolution, LiouvilleError};

/// Occupied ring bins required inside the grading radius.
pub const RING_BINS_REQUIRED: usize = 8;
/// Fit window in multiples of the innermost vertex distance.
const WINDOW: (f64, f64) = (10.0, 1000.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeExponentFit {
    pub cone: usize,
    pub beta: f64,
    /// Fitted slope of `log |φ − φ(p)|` against `log r`.
    pub slope: f64,
    pub predicted: f64,
    /// Fitted slope of the mode-1 ring amplitude against `log r`.
    pub mode1_slope: f64,
    pub mode1_predicted: f64,
    /// Mode-1 amplitude on the outermost ring of the window, relative to the
    /// mean `|φ − φ(p)|` there. Symmetric configurations make it vanish, and
    /// the mode-1 slope then only fits discretization noise.
    pub mode1_share: f64,
    pub rings: usize,
    /// Window in `σ`.
    pub window: (f64, f64),
}

impl ConeExponentFit {
    pub fn relative_error(&self) -> f64 {
        (self.slope / self.predicted - 1.0).abs()
    }

    pub fn mode1_relative_error(&self) -> f64 {
        (self.mode1_slope / self.mode1_predicted - 1.0).abs()
    }
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn exponent_audit(sol: &ConformalSolution) -> Result<Vec<ConeExponentFit>, LiouvilleError> {
    let bg = &sol.background;
    let mesh = &bg.mesh;
    let surface = mesh.surface;
    let mut fits = Vec::new();
    for (j, cone) in bg.cones.iter().enumerate() {
        let p = cone.position;
        let centre = sol.phi[cone.vertex];
        // Tangent frame at the cone for the angular coordinate.
        let (e1, e2) = match surface {
            BaseSurface::RoundSphere => {
                let a = if p[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
                let e1 = cross(p, a);
                let e1 = scale(e1, 1.0 / norm(e1));
                (e1, cross(p, e1))
            }
            BaseSurface::FlatTorus => ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        };
        let near: Vec<(f64, f64, f64)> = (0..mesh.vertex_count())
            .filter(|&v| v != cone.vertex)
            .filter_map(|v| {
                let x = mesh.vertices[v];
                let d = surface.distance(p, x);
                (d < mesh.grading_radius).then(|| {
                    let w = match surface {
                        BaseSurface::RoundSphere => sub(x, p),
                        BaseSurface::FlatTorus => surface.displacement(p, x),
                    };
                    (bg.sigma(j, x), dot(w, e2).atan2(dot(w, e1)), sol.phi[v] - centre)
                })
            })
            .collect();
        let sigma_min = near.iter().map(|n| n.0).fold(f64::INFINITY, f64::min);
        if !sigma_min.is_finite() {
            return Err(LiouvilleError::MeshTooCoarse(format!("no vertices graded around cone {j}")));
        }
        let bin = |s: f64| ((s / sigma_min).ln() / NOMINAL_RING_RATIO.ln()).floor() as i64;
        let mut bins: std::collections::BTreeMap<i64, Vec<(f64, f64, f64)>> = Default::default();
        for &n in &near {
            bins.entry(bin(n.0)).or_default().push(n);
        }
        if bins.len() < RING_BINS_REQUIRED {
            return Err(LiouvilleError::MeshTooCoarse(format!("{} ring bins around cone {j}", bins.len())));
        }
        let window = (WINDOW.0 * sigma_min, WINDOW.1 * sigma_min);
        let rate = 1.0 + cone.beta;
        let points: Vec<(f64, f64)> = near
            .iter()
            .filter(|n| n.0 >= window.0 && n.0 <= window.1 && n.2 != 0.0)
            .map(|n| (rate * n.0.ln(), n.2.abs().ln()))
            .collect();
        // Mode-1 amplitude per ring by least squares on (1, cos ψ, sin ψ).
        let mut ring_points = Vec::new();
        let mut outer_share = 0.0;
        for ring in bins.values() {
            let s = ring.iter().map(|n| n.0.ln()).sum::<f64>() / ring.len() as f64;
            if ring.len() < 4 || s.exp() < window.0 || s.exp() > window.1 {
                continue;
            }
            let mut normal = nalgebra::Matrix3::<f64>::zeros();
            let mut rhs = nalgebra::Vector3::<f64>::zeros();
            for n in ring {
                let basis = nalgebra::Vector3::new(1.0, n.1.cos(), n.1.sin());
                normal += basis * basis.transpose();
                rhs += basis * n.2;
            }
            if let Some(c) = normal.lu().solve(&rhs) {
                let amp = c[1].hypot(c[2]);
                if amp > 0.0 {
                    ring_points.push((rate * s, amp.ln()));
                    let mean = ring.iter().map(|n| n.2.abs()).sum::<f64>() / ring.len() as f64;
                    outer_share = amp / mean;
                }
            }
        }
        if points.len() < 3 || ring_points.len() < 3 {
            return Err(LiouvilleError::MeshTooCoarse(format!("too few samples in the fit window around cone {j}")));
        }
        fits.push(ConeExponentFit {
            cone: j,
            beta: cone.beta,
            slope: slope(&points),
            predicted: (1.0 / rate).min(2.0),
            mode1_slope: slope(&ring_points),
            mode1_predicted: 1.0 / rate,
            mode1_share: outer_share,
            rings: bins.len(),
            window,
        });
    }
    Ok(fits)
}
