//! Constant-curvature conic metrics on surfaces: cone-angle classification,
//! model geometries, indicial roots of the linearized operators, Friedrichs
//! spectra on model cones, and numerical uniformization.

pub mod acceptance;
pub mod cli_io;
pub mod geometry;
pub mod indicial;
pub mod liouville;
pub mod mode_spectral;
pub mod model_metrics;

pub use geometry::{
    chi_beta, classify, dimension_report, gauss_bonnet_pair, sph_to_euc_projection, ConeAngleVector,
    ConicSurfaceSpec, DimensionReport, GeometryClass, GeometryTag,
};
pub use model_metrics::{evaluate_model, ModelMetric, WarpedMetricSample};
