//! Continuation along a path of cone-angle vectors with fixed positions.

use std::sync::Arc;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::mesh::build_mesh;
use super::{cone_positions, gate, surface_for_genus, uniformize_on_mesh, Diagnostics, LiouvilleError, SolverOptions};
use crate::geometry::{dimension_report, gauss_bonnet_pair, ConeAngleVector, ConicSurfaceSpec, DimensionReport, GeometryTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub t: f64,
    pub betas: Vec<f64>,
    pub tag: GeometryTag,
    pub k_target: f64,
    pub diagnostics: Diagnostics,
    pub dimensions: DimensionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// Index into the path of the first gate rejection, where the sweep stops.
    pub rejected_at: Option<usize>,
    pub rejected_tag: Option<GeometryTag>,
    /// Zero of `K_target(t)` by linear interpolation at its sign change.
    pub k_target_zero: Option<f64>,
    /// Zero of the solved mean curvature, located the same way.
    pub curvature_zero: Option<f64>,
    pub dimensions_constant: bool,
}

/// `(t, (−t, …, −t))` for `k` cones at `steps + 1` equally spaced exact `t`.
pub fn symmetric_path(k: usize, from: Rational64, to: Rational64, steps: usize) -> Vec<(f64, ConeAngleVector)> {
    (0..=steps)
        .map(|i| {
            let t = from + (to - from) * Rational64::new(i as i64, steps.max(1) as i64);
            let angles = ConeAngleVector::from_rationals(vec![-t; k]).expect("path inside (−1, 0)");
            (*t.numer() as f64 / *t.denom() as f64, angles)
        })
        .collect()
}

fn zero_crossing(ts: &[f64], values: &[f64]) -> Option<f64> {
    for i in 0..values.len() {
        if values[i] == 0.0 {
            return Some(ts[i]);
        }
        if i + 1 < values.len() && values[i].signum() != values[i + 1].signum() && values[i + 1] != 0.0 {
            let w = values[i] / (values[i] - values[i + 1]);
            return Some(ts[i] + w * (ts[i + 1] - ts[i]));
        }
    }
    None
}

/// Solves each point of the path on one mesh, warm-starting from the previous
/// solution. Each point is gated; the sweep stops at the first rejection.
pub fn family_sweep(
    genus: u32,
    positions: &[[f64; 3]],
    path: &[(f64, ConeAngleVector)],
    options: &SolverOptions,
) -> Result<SweepReport, LiouvilleError> {
    let make = |angles: &ConeAngleVector| {
        ConicSurfaceSpec::new(genus, angles.clone(), Some(positions.to_vec())).map_err(|e| LiouvilleError::Invalid(e.to_string()))
    };
    let first = path.first().ok_or_else(|| LiouvilleError::Invalid("empty path".into()))?;
    let surface = surface_for_genus(genus)?;
    let mesh = Arc::new(build_mesh(surface, &cone_positions(&make(&first.1)?)?, &options.mesh())?);
    let mut points: Vec<SweepPoint> = Vec::new();
    let (mut rejected_at, mut rejected_tag) = (None, None);
    let mut warm: Option<Vec<f64>> = None;
    for (i, (t, angles)) in path.iter().enumerate() {
        let spec = make(angles)?;
        let class = match gate(&spec) {
            Ok(class) => class,
            Err(LiouvilleError::NotUniformizable { tag, .. }) => {
                rejected_at = Some(i);
                rejected_tag = Some(tag);
                break;
            }
            Err(e) => return Err(e),
        };
        let sol = uniformize_on_mesh(&spec, mesh.clone(), options, warm.as_deref())?;
        points.push(SweepPoint {
            t: *t,
            betas: angles.as_slice().to_vec(),
            tag: class.tag,
            k_target: gauss_bonnet_pair(&spec, 1.0),
            diagnostics: sol.diagnostics.clone(),
            dimensions: dimension_report(&spec),
        });
        warm = Some(sol.phi);
    }
    let ts: Vec<f64> = points.iter().map(|p| p.t).collect();
    let ks: Vec<f64> = points.iter().map(|p| p.k_target).collect();
    let curv: Vec<f64> = points.iter().map(|p| p.diagnostics.mean_curvature).collect();
    let dimensions_constant = points.windows(2).all(|w| w[0].dimensions == w[1].dimensions);
    Ok(SweepReport {
        k_target_zero: zero_crossing(&ts, &ks),
        curvature_zero: zero_crossing(&ts, &curv),
        points,
        rejected_at,
        rejected_tag,
        dimensions_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_path_points() {
        let path = symmetric_path(4, Rational64::new(2, 5), Rational64::new(3, 5), 10);
        assert_eq!(path.len(), 11);
        assert_eq!(path[5].0, 0.5);
        assert_eq!(path[5].1.sum(), -2.0);
    }

    #[test]
    fn interpolated_zero() {
        assert_eq!(zero_crossing(&[0.0, 1.0], &[1.0, -1.0]), Some(0.5));
        assert_eq!(zero_crossing(&[0.0, 1.0, 2.0], &[1.0, 0.0, -1.0]), Some(1.0));
        assert_eq!(zero_crossing(&[0.0, 1.0], &[1.0, 2.0]), None);
    }

    #[test]
    fn rejection_is_recorded() {
        let s = 3f64.sqrt() / 2.0;
        let pos = [[1.0, 0.0, 0.0], [-0.5, s, 0.0], [-0.5, -s, 0.0]];
        let path: Vec<(f64, ConeAngleVector)> = [0.1, 0.2, 0.3]
            .iter()
            .enumerate()
            .map(|(i, &t)| (i as f64, ConeAngleVector::new(vec![-0.5 - t, -0.05, -0.05]).unwrap()))
            .collect();
        let opts = SolverOptions { mesh_level: 2, grading_rings: 12, ..Default::default() };
        let report = family_sweep(0, &pos, &path, &opts).unwrap();
        assert_eq!(report.rejected_at, Some(0));
        assert_eq!(report.rejected_tag, Some(GeometryTag::OutsideTroyanov));
        assert!(report.points.is_empty());
    }
}
