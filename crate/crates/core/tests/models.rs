use std::f64::consts::PI;

use conic_core::model_metrics::{
    conformal_to_polar, evaluate_model, football_area, football_geodesic_diameter, polar_to_conformal, Chart, ModelMetric,
};
use gauss_quad::GaussLegendre;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn constant_curvature_charts(beta in -0.95f64..-0.05, curvature in -4.0f64..4.0, t in 0.05f64..0.95) {
        let metric = ModelMetric::new(beta, curvature, Chart::Polar).unwrap();
        let (lo, hi) = metric.domain();
        let hi = if hi.is_finite() { hi } else { 5.0 };
        let s = evaluate_model(&metric, lo + t * (hi - lo)).unwrap();
        prop_assert!((s.curvature() - curvature).abs() < 1e-9 * (1.0 + curvature.abs()));
        prop_assert!(s.f > 0.0);
    }

    #[test]
    fn conformal_chart_round_trips(beta in -0.95f64..-0.05, rho in 1e-3f64..10.0) {
        let back = polar_to_conformal(conformal_to_polar(rho, beta), beta);
        prop_assert!((back - rho).abs() < 1e-12 * rho);
    }
}

#[test]
fn football_area_integrates_the_warp() {
    let rule = GaussLegendre::new(40.try_into().unwrap());
    for (beta, curvature) in [(-0.5, 1.0), (-0.25, 3.0), (-0.8, 0.5)] {
        let metric = ModelMetric::new(beta, curvature, Chart::Suspension).unwrap();
        let d = football_geodesic_diameter(beta, curvature);
        let area = rule.integrate(0.0, d, |r| 2.0 * PI * evaluate_model(&metric, r).map(|s| s.f).unwrap_or(0.0));
        assert!((area - football_area(beta, curvature)).abs() < 1e-10, "{area}");
    }
}

#[test]
fn cusp_has_unit_negative_curvature() {
    let s = evaluate_model(&ModelMetric::cusp(), 0.3).unwrap();
    assert_eq!(s.curvature(), -1.0);
}
