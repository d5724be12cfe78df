//! Cone-angle combinatorics: Euler characteristic with angle defects,
//! Gauss-Bonnet, the Troyanov region and deformation-space dimensions.

use std::f64::consts::PI;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used to call a floating-point `χ` zero.
pub const EUCLIDEAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("cone angle parameter at index {index} is {value}, outside (-1, 0)")]
    BetaOutOfRange { index: usize, value: f64 },
    #[error("expected {expected} cone positions, got {got}")]
    PositionCount { expected: usize, got: usize },
    #[error("cone positions {first} and {second} coincide")]
    CoincidentPositions { first: usize, second: usize },
    #[error("cone position {index} is not finite")]
    NonFinitePosition { index: usize },
    #[error("cone angles do not lie in the spherical region with k >= 3")]
    NotSpherical,
}

/// Ordered cone-angle parameters `β_j ∈ (-1, 0)`.
///
/// Values may optionally carry exact rationals; when every entry is exact the
/// Euclidean test and the Troyanov inequalities are decided without tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeAngleVector {
    betas: Vec<f64>,
    exact: Option<Vec<Rational64>>,
}

impl ConeAngleVector {
    pub fn new(betas: Vec<f64>) -> Result<Self, GeometryError> {
        for (index, &value) in betas.iter().enumerate() {
            if !(value > -1.0 && value < 0.0) {
                return Err(GeometryError::BetaOutOfRange { index, value });
            }
        }
        Ok(Self { betas, exact: None })
    }

    pub fn from_rationals(values: Vec<Rational64>) -> Result<Self, GeometryError> {
        let betas: Vec<f64> = values.iter().map(rational_to_f64).collect();
        for (index, q) in values.iter().enumerate() {
            if !(*q > Rational64::from_integer(-1) && *q < Rational64::from_integer(0)) {
                return Err(GeometryError::BetaOutOfRange { index, value: betas[index] });
            }
        }
        Ok(Self { betas, exact: Some(values) })
    }

    pub fn empty() -> Self {
        Self { betas: Vec::new(), exact: Some(Vec::new()) }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.betas
    }

    pub fn exact(&self) -> Option<&[Rational64]> {
        self.exact.as_deref()
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.betas.iter().sum()
    }

    /// Scales every entry by `lambda`; exactness is dropped.
    pub fn scaled(&self, lambda: f64) -> Result<Self, GeometryError> {
        Self::new(self.betas.iter().map(|b| b * lambda).collect())
    }
}

pub(crate) fn rational_to_f64(q: &Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// A compact oriented surface of genus `γ` with `k` marked cone points.
///
/// Positions are unit vectors for `γ = 0` and lattice coordinates in
/// `[0,1)²` (third component zero) for `γ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicSurfaceSpec {
    pub genus: u32,
    pub angles: ConeAngleVector,
    pub positions: Option<Vec<[f64; 3]>>,
}

impl ConicSurfaceSpec {
    pub fn new(
        genus: u32,
        angles: ConeAngleVector,
        positions: Option<Vec<[f64; 3]>>,
    ) -> Result<Self, GeometryError> {
        if let Some(points) = &positions {
            if points.len() != angles.len() {
                return Err(GeometryError::PositionCount { expected: angles.len(), got: points.len() });
            }
            for (index, p) in points.iter().enumerate() {
                if p.iter().any(|c| !c.is_finite()) {
                    return Err(GeometryError::NonFinitePosition { index });
                }
            }
            for i in 0..points.len() {
                for j in i + 1..points.len() {
                    if position_gap(genus, &points[i], &points[j]) < 1e-12 {
                        return Err(GeometryError::CoincidentPositions { first: i, second: j });
                    }
                }
            }
        }
        Ok(Self { genus, angles, positions })
    }

    /// Spec without positions, for purely combinatorial questions.
    pub fn unplaced(genus: u32, betas: Vec<f64>) -> Result<Self, GeometryError> {
        Self::new(genus, ConeAngleVector::new(betas)?, None)
    }

    pub fn cone_count(&self) -> usize {
        self.angles.len()
    }
}

fn position_gap(genus: u32, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    if genus == 1 {
        let wrap = |d: f64| d - d.round();
        wrap(a[0] - b[0]).hypot(wrap(a[1] - b[1]))
    } else {
        let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeometryTag {
    Hyperbolic,
    Euclidean,
    Spherical,
    OutsideTroyanov,
    TwoConeUnequal,
    NotCoveredByTheorem,
}

impl GeometryTag {
    /// Whether a constant-curvature conic metric is known to exist.
    pub fn is_uniformizable(self) -> bool {
        matches!(self, Self::Hyperbolic | Self::Euclidean | Self::Spherical)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryClass {
    pub tag: GeometryTag,
    pub chi_beta: f64,
    /// 1-based index of the first cone violating the Troyanov inequality.
    pub violated_index: Option<usize>,
}

/// `χ(Σ_p, β) = 2 − 2γ + Σ β_j`.
pub fn chi_beta(spec: &ConicSurfaceSpec) -> f64 {
    2.0 - 2.0 * spec.genus as f64 + spec.angles.sum()
}

fn exact_chi(spec: &ConicSurfaceSpec) -> Option<Rational64> {
    let exact = spec.angles.exact()?;
    let base = Rational64::from_integer(2 - 2 * spec.genus as i64);
    Some(exact.iter().fold(base, |acc, q| acc + q))
}

/// Sign of `χ` with the Euclidean tolerance (or exactly, for rational input).
fn chi_sign(spec: &ConicSurfaceSpec) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    if let Some(q) = exact_chi(spec) {
        return q.cmp(&Rational64::from_integer(0));
    }
    let chi = chi_beta(spec);
    if chi.abs() <= EUCLIDEAN_TOL {
        Ordering::Equal
    } else if chi < 0.0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// First cone `j` (0-based) with `Σ_{i≠j} β_i ≥ β_j`, if any.
fn troyanov_violation(angles: &ConeAngleVector) -> Option<usize> {
    if let Some(exact) = angles.exact() {
        let total: Rational64 = exact.iter().sum();
        return exact.iter().position(|&b| total - b >= b);
    }
    let betas = angles.as_slice();
    (0..betas.len()).find(|&j| {
        let others: f64 = betas.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, b)| b).sum();
        !(others < betas[j])
    })
}

pub fn classify(spec: &ConicSurfaceSpec) -> GeometryClass {
    use std::cmp::Ordering;
    let chi = chi_beta(spec);
    let k = spec.cone_count();
    let (tag, violated_index) = match chi_sign(spec) {
        Ordering::Less => (GeometryTag::Hyperbolic, None),
        Ordering::Equal => (GeometryTag::Euclidean, None),
        Ordering::Greater if k >= 3 => match troyanov_violation(&spec.angles) {
            None => (GeometryTag::Spherical, None),
            Some(j) => (GeometryTag::OutsideTroyanov, Some(j + 1)),
        },
        Ordering::Greater if k == 2 => {
            let equal = match spec.angles.exact() {
                Some(q) => q[0] == q[1],
                None => spec.angles.as_slice()[0] == spec.angles.as_slice()[1],
            };
            if equal {
                (GeometryTag::Spherical, None)
            } else {
                (GeometryTag::TwoConeUnequal, None)
            }
        }
        Ordering::Greater => (GeometryTag::NotCoveredByTheorem, None),
    };
    GeometryClass { tag, chi_beta: chi, violated_index }
}

/// Constant curvature forced by Gauss-Bonnet for a metric of the given area.
pub fn gauss_bonnet_pair(spec: &ConicSurfaceSpec, area: f64) -> f64 {
    if chi_sign(spec) == std::cmp::Ordering::Equal {
        return 0.0;
    }
    2.0 * PI * chi_beta(spec) / area
}

/// Scaling `λ = −Σβ/2` taking a spherical angle vector to the Euclidean
/// simplex `Σβ = −2`, together with the rescaled vector `β/λ`.
pub fn sph_to_euc_projection(betas: &ConeAngleVector) -> Result<(f64, ConeAngleVector), GeometryError> {
    let spec = ConicSurfaceSpec::new(0, betas.clone(), None)?;
    if betas.len() < 3 || classify(&spec).tag != GeometryTag::Spherical {
        return Err(GeometryError::NotSpherical);
    }
    let lambda = -betas.sum() / 2.0;
    let euc = ConeAngleVector::new(betas.as_slice().iter().map(|b| b / lambda).collect())
        .map_err(|_| GeometryError::NotSpherical)?;
    Ok((lambda, euc))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dim_tt: i64,
    pub dim_tt_sing: i64,
    pub dim_slice: i64,
    pub dim_teich_conic: i64,
    pub dim_fiber: i64,
    /// Set when the genus-zero count `2k − 3` was negative and clamped to 0.
    pub tt_sing_clamped: bool,
    /// Set when any of the slice, Teichmüller or fiber counts is negative.
    pub formula_negative: bool,
}

pub fn dimension_report(spec: &ConicSurfaceSpec) -> DimensionReport {
    let g = spec.genus as i64;
    let k = spec.cone_count() as i64;
    let dim_tt = match g {
        0 => 0,
        1 => 2,
        _ => 6 * g - 6,
    };
    let (dim_tt_sing, tt_sing_clamped) = match g {
        0 => ((2 * k - 3).max(0), 2 * k - 3 < 0),
        1 => (2 * k, false),
        _ => (dim_tt + 2 * k, false),
    };
    let dim_teich_conic = 6 * g - 6 + 3 * k;
    let dim_slice = dim_teich_conic + 1;
    let dim_fiber = 6 * g - 6 + 2 * k;
    DimensionReport {
        dim_tt,
        dim_tt_sing,
        dim_slice,
        dim_teich_conic,
        dim_fiber,
        tt_sing_clamped,
        formula_negative: dim_slice < 0 || dim_teich_conic < 0 || dim_fiber < 0,
    }
}
