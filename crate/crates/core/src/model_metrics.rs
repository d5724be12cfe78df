//! Model conic metrics `dr² + f(r)² dy²`, their conformal flat form,
//! footballs (suspensions) and the hyperbolic cusp.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("coordinate {r} lies outside the chart domain ({lo}, {hi})")]
    OutOfChart { r: f64, lo: f64, hi: f64 },
    #[error("invalid model parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    /// Geodesic polar coordinates `(r, y)`, `y ∈ [0, 2π)`.
    Polar,
    /// `|z|^{2β}|dz|²` with `z = ρ e^{iy}`; evaluation takes `ρ`. Flat only.
    ConformalFlat,
    /// Two-pole suspension `t ∈ (0, π/√K)`. Positive curvature only.
    Suspension,
    /// `dr²/r² + r² dy²` with `r ∈ (0, 1]`; derivatives are in `s = log r`.
    Cusp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelMetric {
    pub beta: f64,
    pub curvature: f64,
    pub chart: Chart,
}

impl ModelMetric {
    pub fn new(beta: f64, curvature: f64, chart: Chart) -> Result<Self, ModelError> {
        if !(beta > -1.0 && beta <= 0.0) {
            return Err(ModelError::InvalidParameters(format!("beta {beta} outside (-1, 0]")));
        }
        if !curvature.is_finite() {
            return Err(ModelError::InvalidParameters("curvature is not finite".into()));
        }
        match chart {
            Chart::Suspension if curvature <= 0.0 => {
                return Err(ModelError::InvalidParameters("suspension needs K > 0".into()))
            }
            Chart::ConformalFlat if curvature != 0.0 => {
                return Err(ModelError::InvalidParameters("conformal chart is flat only".into()))
            }
            Chart::Cusp if curvature != -1.0 || beta != 0.0 => {
                return Err(ModelError::InvalidParameters("cusp has K = -1 and no cone".into()))
            }
            _ => {}
        }
        Ok(Self { beta, curvature, chart })
    }

    pub fn flat_cone(beta: f64) -> Result<Self, ModelError> {
        Self::new(beta, 0.0, Chart::Polar)
    }

    pub fn football(beta: f64, curvature: f64) -> Result<Self, ModelError> {
        Self::new(beta, curvature, Chart::Suspension)
    }

    pub fn cusp() -> Self {
        Self { beta: 0.0, curvature: -1.0, chart: Chart::Cusp }
    }

    /// Open chart interval; the cusp interval is closed at 1.
    pub fn domain(&self) -> (f64, f64) {
        match self.chart {
            Chart::Suspension => (0.0, PI / self.curvature.sqrt()),
            Chart::Polar if self.curvature > 0.0 => (0.0, PI / self.curvature.sqrt()),
            Chart::Cusp => (0.0, 1.0),
            _ => (0.0, f64::INFINITY),
        }
    }
}

/// Warp function and derivatives of `dr² + f(r)² dy²` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpedMetricSample {
    pub r: f64,
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
}

impl WarpedMetricSample {
    pub fn curvature(&self) -> f64 {
        -self.fpp / self.f
    }
}

/// Warp `f`, `f'`, `f''` of the constant-curvature cone of parameter `beta`
/// at geodesic distance `r`, without domain checks.
pub fn warp(beta: f64, curvature: f64, r: f64) -> (f64, f64, f64) {
    let a = 1.0 + beta;
    if curvature < 0.0 {
        let s = (-curvature).sqrt();
        let f = a * (s * r).sinh() / s;
        (f, a * (s * r).cosh(), -curvature * f)
    } else if curvature == 0.0 {
        (a * r, a, 0.0)
    } else {
        let s = curvature.sqrt();
        let f = a * (s * r).sin() / s;
        (f, a * (s * r).cos(), -curvature * f)
    }
}

pub fn evaluate_model(metric: &ModelMetric, r: f64) -> Result<WarpedMetricSample, ModelError> {
    let (lo, hi) = metric.domain();
    let inside = match metric.chart {
        Chart::Cusp => r > lo && r <= hi,
        _ => r > lo && r < hi,
    };
    if !inside {
        return Err(ModelError::OutOfChart { r, lo, hi });
    }
    match metric.chart {
        Chart::Cusp => Ok(WarpedMetricSample { r, f: r, fp: r, fpp: r }),
        Chart::ConformalFlat => {
            let rr = conformal_to_polar(r, metric.beta);
            let (f, fp, fpp) = warp(metric.beta, 0.0, rr);
            Ok(WarpedMetricSample { r: rr, f, fp, fpp })
        }
        _ => {
            let (f, fp, fpp) = warp(metric.beta, metric.curvature, r);
            Ok(WarpedMetricSample { r, f, fp, fpp })
        }
    }
}

/// `r = ρ^{1+β}/(1+β)`.
pub fn conformal_to_polar(rho: f64, beta: f64) -> f64 {
    rho.powf(1.0 + beta) / (1.0 + beta)
}

/// Inverse of [`conformal_to_polar`].
pub fn polar_to_conformal(r: f64, beta: f64) -> f64 {
    ((1.0 + beta) * r).powf(1.0 / (1.0 + beta))
}

/// Pole-to-pole distance `π/√K` of the suspension.
pub fn football_geodesic_diameter(_beta: f64, curvature: f64) -> f64 {
    PI / curvature.sqrt()
}

/// `∫ 2π f = 4π(1+β)/K`.
pub fn football_area(beta: f64, curvature: f64) -> f64 {
    4.0 * PI * (1.0 + beta) / curvature
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{chi_beta, ConicSurfaceSpec};
    use proptest::prelude::*;

    #[test]
    fn evaluate_examples() {
        let m = ModelMetric::football(-0.5, 1.0).unwrap();
        let s = evaluate_model(&m, PI / 2.0).unwrap();
        assert!((s.f - 0.5).abs() < 1e-15);
        assert!((s.curvature() - 1.0).abs() < 1e-12);
        let s = evaluate_model(&ModelMetric::flat_cone(-0.5).unwrap(), 2.0).unwrap();
        assert_eq!(s.f, 1.0);
        let m = ModelMetric::new(-0.25, -1.0, Chart::Polar).unwrap();
        let s = evaluate_model(&m, 1.0).unwrap();
        assert!((s.f - 0.75 * 1f64.sinh()).abs() < 1e-15);
        assert!((s.f - 0.8814009).abs() < 1e-6);
    }

    #[test]
    fn chart_domains() {
        let m = ModelMetric::football(-0.5, 4.0).unwrap();
        assert!(matches!(evaluate_model(&m, 0.0), Err(ModelError::OutOfChart { .. })));
        assert!(evaluate_model(&m, PI / 2.0).is_err());
        assert!(evaluate_model(&m, PI / 2.0 - 1e-9).is_ok());
        assert!(ModelMetric::new(-0.5, -1.0, Chart::Suspension).is_err());
        assert!(ModelMetric::new(-1.0, 0.0, Chart::Polar).is_err());
        assert!(ModelMetric::new(0.0, 1.0, Chart::Suspension).is_ok());
        let c = ModelMetric::cusp();
        assert!(evaluate_model(&c, 1.0).is_ok());
        assert!(evaluate_model(&c, 1.5).is_err());
        assert_eq!(evaluate_model(&c, 0.3).unwrap().curvature(), -1.0);
    }

    #[test]
    fn conformal_examples() {
        assert_eq!(conformal_to_polar(1.0, -0.5), 2.0);
        assert_eq!(conformal_to_polar(4.0, -0.5), 4.0);
        let v = conformal_to_polar(std::f64::consts::E, -0.75);
        assert!((v - 4.0 * 0.25f64.exp()).abs() < 1e-14);
        assert!((v - 5.1361).abs() < 1e-4);
        let m = ModelMetric::new(-0.5, 0.0, Chart::ConformalFlat).unwrap();
        assert_eq!(evaluate_model(&m, 4.0).unwrap().r, 4.0);
    }

    #[test]
    fn football_examples() {
        assert_eq!(football_geodesic_diameter(-0.3, 1.0), PI);
        assert_eq!(football_geodesic_diameter(-0.3, 4.0), PI / 2.0);
        assert!((football_area(-0.5, 1.0) - 2.0 * PI).abs() < 1e-15);
        assert!((football_area(-1e-12, 1.0) - 4.0 * PI).abs() < 1e-10);
        assert!((football_area(-0.75, 2.0) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn football_area_matches_quadrature() {
        let (beta, k) = (-0.75f64, 2.0f64);
        let rule = gauss_quad::GaussLegendre::new(std::num::NonZeroUsize::new(40).unwrap());
        let q = rule.integrate(0.0, PI / k.sqrt(), |t| 2.0 * PI * warp(beta, k, t).0);
        assert!((q - football_area(beta, k)).abs() < 1e-13);
    }

    #[test]
    fn cone_angle_normalization() {
        for k in [-2.0, 0.0, 3.0] {
            for beta in [-0.9, -0.5, -0.1, 0.0] {
                let (f, _, _) = warp(beta, k, 1e-8);
                assert!((f / 1e-8 - (1.0 + beta)).abs() < 1e-6);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn curvature_identity(beta in -0.999f64..0.0, k in -5.0f64..5.0, u in 0.01f64..0.99) {
            let r = if k > 0.0 { u * PI / k.sqrt() } else { 3.0 * u };
            let (f, _, fpp) = warp(beta, k, r);
            prop_assert!((-fpp / f - k).abs() < 1e-10);
            let h = 1e-5;
            let fd = (warp(beta, k, r + h).1 - warp(beta, k, r - h).1) / (2.0 * h);
            prop_assert!((fd - fpp).abs() < 1e-6 * (1.0 + fpp.abs()));
        }

        #[test]
        fn area_gauss_bonnet(beta in -0.999f64..-0.001, k in 0.01f64..10.0) {
            let spec = ConicSurfaceSpec::unplaced(0, vec![beta, beta]).unwrap();
            let lhs = football_area(beta, k) * k;
            prop_assert!((lhs - 2.0 * PI * chi_beta(&spec)).abs() < 1e-12);
        }

        #[test]
        fn conformal_pullback(beta in -0.999f64..-0.001, rho in 0.01f64..10.0) {
            // dr/dρ = ρ^β and (1+β) r = ρ^{1+β}: the pullback of |z|^{2β}|dz|².
            let r = conformal_to_polar(rho, beta);
            let h = 1e-4 * rho;
            let drdrho = (conformal_to_polar(rho + h, beta) - conformal_to_polar(rho - h, beta)) / (2.0 * h);
            prop_assert!((drdrho * drdrho / rho.powf(2.0 * beta) - 1.0).abs() < 1e-8);
            let tangential = ((1.0 + beta) * r).powi(2);
            prop_assert!((tangential / rho.powf(2.0 * beta + 2.0) - 1.0).abs() < 1e-12);
            // The inverse raises to 1/(1+β), which amplifies rounding by that factor.
            let tol = 1e-14 * (1.0 / (1.0 + beta)).max(1.0);
            prop_assert!((polar_to_conformal(r, beta) / rho - 1.0).abs() < tol);
        }
    }
}
