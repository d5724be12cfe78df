//! Singular background metric `e^{2s} g₀` with `s = Σ χ_j β_j log σ_j`, and
//! the finite-element data of the curvature equation on a mesh.
//!
//! `σ_j` is `2 tan(d/2)` on the sphere and `d` on the torus, so `log σ_j`
//! is harmonic away from the cone (and its antipode). The source
//! `Δ_{g₀} s` is then supported in the cutoff annuli.

use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::{FiniteAboveNegOneF64, GaussJacobi, GaussLegendre};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mesh::{add, build_mesh, cross, dot, norm, scale, sub, BaseSurface, Mesh, MeshOptions};
use super::sparse::CsrMatrix;
use super::LiouvilleError;
use crate::geometry::{classify, ConicSurfaceSpec, GeometryClass};

/// Upper bound for the cutoff radius `ε`.
pub const CUTOFF_MAX: f64 = 0.6;

/// Degree-5 seven-point triangle rule: barycentric points, weights summing to 1.
const DUNAVANT7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_770;
    const B1: f64 = 0.470_142_064_105_115;
    const W1: f64 = 0.132_394_152_788_506;
    const A2: f64 = 0.797_426_985_353_087;
    const B2: f64 = 0.101_286_507_323_456;
    const W2: f64 = 0.125_939_180_544_827;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Quadrature pieces per cutoff radius in the cutoff annuli, for the area
/// weight and the source.
const PIECES_PER_CUTOFF: f64 = 24.0;
/// Minimum pieces per base edge, so the quadrature error falls with the mesh
/// size. The source term needs the finer rule to keep Gauss-Bonnet converging.
const WEIGHT_PIECES_PER_EDGE: f64 = 4.0;
const SOURCE_PIECES_PER_EDGE: f64 = 12.0;

/// Regular subdivision of the reference triangle into `m²` pieces, as
/// barycentric corners and area fraction.
fn subdivision(m: usize) -> Vec<([[f64; 3]; 3], f64)> {
    let h = 1.0 / m as f64;
    let node = |i: usize, j: usize| {
        let (x, y) = (i as f64 * h, j as f64 * h);
        [1.0 - x - y, x, y]
    };
    let frac = h * h;
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m - i {
            out.push(([node(i, j), node(i + 1, j), node(i, j + 1)], frac));
            if i + j + 2 <= m {
                out.push(([node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)], frac));
            }
        }
    }
    out
}

/// Points per direction of the Duffy rule on triangles touching a cone (even).
const DUFFY_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeData {
    pub beta: f64,
    pub position: [f64; 3],
    pub vertex: usize,
    /// Cutoff radius `ε`: `χ = 1` for `d ≤ ε/2`, `χ = 0` for `d ≥ ε`.
    pub cutoff: f64,
}

/// Smooth step: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
pub fn cutoff_profile(t: f64) -> f64 {
    let e = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let (a, b) = (e(1.0 - t), e(t - 0.5));
        a / (a + b)
    }
}

/// Quadrature point of the singular area form `e^{2s} dA₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct QuadPoint {
    pub triangle: usize,
    pub vertices: [usize; 3],
    pub bary: [f64; 3],
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct BackgroundGeometry {
    pub spec: ConicSurfaceSpec,
    pub class: GeometryClass,
    pub mesh: Arc<Mesh>,
    pub cones: Vec<ConeData>,
    pub base_curvature: f64,
    /// Cotangent stiffness matrix.
    pub stiffness: CsrMatrix,
    /// `∫ v_i dA₀`.
    pub lumped_area: Vec<f64>,
    /// `∫ (Δ_{g₀} s) v_i dA₀`.
    pub source: Vec<f64>,
    /// `∫ e^{2s} v_i dA₀`.
    pub weight: Vec<f64>,
    pub(crate) quad: Vec<QuadPoint>,
    /// Positions in `stiffness.vals` of each triangle's local entries.
    pub(crate) slots: Vec<[[usize; 3]; 3]>,
}

pub fn surface_for_genus(genus: u32) -> Result<BaseSurface, LiouvilleError> {
    match genus {
        0 => Ok(BaseSurface::RoundSphere),
        1 => Ok(BaseSurface::FlatTorus),
        g => Err(LiouvilleError::UnsupportedGenus(g)),
    }
}

/// Applies the classification gate; only uniformizable specs pass.
pub fn gate(spec: &ConicSurfaceSpec) -> Result<GeometryClass, LiouvilleError> {
    let class = classify(spec);
    if !class.tag.is_uniformizable() {
        return Err(LiouvilleError::NotUniformizable { tag: class.tag, violated_index: class.violated_index });
    }
    Ok(class)
}

pub fn cone_positions(spec: &ConicSurfaceSpec) -> Result<Vec<[f64; 3]>, LiouvilleError> {
    let surface = surface_for_genus(spec.genus)?;
    let points = spec.positions.as_ref().ok_or(LiouvilleError::MissingPositions)?;
    Ok(points.iter().map(|&p| surface.project(p)).collect())
}

pub fn build_background(spec: &ConicSurfaceSpec, options: &MeshOptions) -> Result<BackgroundGeometry, LiouvilleError> {
    gate(spec)?;
    let surface = surface_for_genus(spec.genus)?;
    let mesh = build_mesh(surface, &cone_positions(spec)?, options)?;
    build_background_on_mesh(spec, Arc::new(mesh))
}

/// The cone-free base metric itself (round sphere or flat torus), bypassing
/// the gate; used to check the discrete operators.
pub fn base_background(surface: BaseSurface, options: &MeshOptions) -> Result<BackgroundGeometry, LiouvilleError> {
    let spec = ConicSurfaceSpec::new(surface.genus(), crate::geometry::ConeAngleVector::empty(), Some(Vec::new()))
        .map_err(|e| LiouvilleError::Invalid(e.to_string()))?;
    let mesh = build_mesh(surface, &[], options)?;
    assemble_background(&spec, classify(&spec), Arc::new(mesh))
}

/// Background for `spec` on a mesh built for the same cone positions.
pub fn build_background_on_mesh(spec: &ConicSurfaceSpec, mesh: Arc<Mesh>) -> Result<BackgroundGeometry, LiouvilleError> {
    let class = gate(spec)?;
    assemble_background(spec, class, mesh)
}

fn assemble_background(spec: &ConicSurfaceSpec, class: GeometryClass, mesh: Arc<Mesh>) -> Result<BackgroundGeometry, LiouvilleError> {
    let surface = surface_for_genus(spec.genus)?;
    if surface != mesh.surface {
        return Err(LiouvilleError::Invalid("mesh surface does not match the genus".into()));
    }
    let positions = cone_positions(spec)?;
    if positions.len() != mesh.cone_vertices.len()
        || positions.iter().zip(&mesh.cone_vertices).any(|(&p, &v)| surface.distance(p, mesh.vertices[v]) > 1e-12)
    {
        return Err(LiouvilleError::Invalid("mesh was built for other cone positions".into()));
    }
    let mut gap = match surface {
        BaseSurface::RoundSphere => f64::INFINITY,
        BaseSurface::FlatTorus => 1.0,
    };
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            gap = gap.min(surface.distance(positions[i], positions[j]));
        }
    }
    let cutoff = CUTOFF_MAX.min(0.45 * gap);
    let cones = positions
        .iter()
        .zip(&mesh.cone_vertices)
        .zip(spec.angles.as_slice())
        .map(|((&position, &vertex), &beta)| ConeData { beta, position, vertex, cutoff })
        .collect();
    let mut bg = BackgroundGeometry {
        spec: spec.clone(),
        class,
        mesh,
        cones,
        base_curvature: surface.curvature(),
        stiffness: CsrMatrix::from_triplets(0, Vec::new()),
        lumped_area: Vec::new(),
        source: Vec::new(),
        weight: Vec::new(),
        quad: Vec::new(),
        slots: Vec::new(),
    };
    bg.assemble();
    Ok(bg)
}

struct LocalData {
    stiffness: [[f64; 3]; 3],
    area: [f64; 3],
    source: [f64; 3],
    weight: [f64; 3],
    quad: Vec<QuadPoint>,
}

impl BackgroundGeometry {
    pub fn surface(&self) -> BaseSurface {
        self.mesh.surface
    }

    /// `σ_j` at `x`.
    pub fn sigma(&self, j: usize, x: [f64; 3]) -> f64 {
        let d = self.surface().distance(self.cones[j].position, x);
        match self.surface() {
            BaseSurface::RoundSphere => 2.0 * (0.5 * d).tan(),
            BaseSurface::FlatTorus => d,
        }
    }

    fn cone_term(&self, j: usize, x: [f64; 3]) -> f64 {
        let c = &self.cones[j];
        let d = self.surface().distance(c.position, x);
        let chi = cutoff_profile(d / c.cutoff);
        if chi == 0.0 || c.beta == 0.0 {
            0.0
        } else {
            chi * c.beta * self.sigma(j, x).ln()
        }
    }

    /// `s(x) = Σ χ_j β_j log σ_j`.
    pub fn singular_part(&self, x: [f64; 3]) -> f64 {
        (0..self.cones.len()).map(|j| self.cone_term(j, x)).sum()
    }

    /// Geodesic normal chart at `x`: `v ↦ exp_x(v₁e₁ + v₂e₂)`, with `e₁ ⟂ a`
    /// on the sphere.
    fn normal_chart(&self, x: [f64; 3], a: [f64; 3]) -> impl Fn(f64, f64) -> [f64; 3] {
        let surface = self.surface();
        let (e1, e2) = match surface {
            BaseSurface::RoundSphere => {
                let e1 = cross(x, a);
                let e1 = scale(e1, 1.0 / norm(e1));
                (e1, cross(x, e1))
            }
            BaseSurface::FlatTorus => ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        };
        move |a: f64, b: f64| {
            let v = add(scale(e1, a), scale(e2, b));
            match surface {
                BaseSurface::RoundSphere => {
                    let t = norm(v);
                    if t == 0.0 {
                        x
                    } else {
                        add(scale(x, t.cos()), scale(v, t.sin() / t))
                    }
                }
                BaseSurface::FlatTorus => surface.project(add(x, v)),
            }
        }
    }

    /// Positive Laplacian `−Σ ∂ᵢ² u` of the base metric at `x`, by fourth-order
    /// differences in geodesic normal coordinates (the metric is flat to
    /// first order at the centre of such a chart).
    pub fn base_laplacian(&self, u: impl Fn([f64; 3]) -> f64, x: [f64; 3], h: f64) -> f64 {
        self.laplacian_in_frame(u, x, h, least_aligned_axis(x))
    }

    /// The stencil's `O(h⁴)` error integrates to zero only where the frame
    /// varies smoothly, so each annulus keeps one reference axis.
    fn laplacian_in_frame(&self, u: impl Fn([f64; 3]) -> f64, x: [f64; 3], h: f64, a: [f64; 3]) -> f64 {
        let chart = self.normal_chart(x, a);
        let centre = u(x);
        let second = |dir: usize| {
            let at = |t: f64| if dir == 0 { u(chart(t, 0.0)) } else { u(chart(0.0, t)) };
            (-at(2.0 * h) + 16.0 * at(h) - 30.0 * centre + 16.0 * at(-h) - at(-2.0 * h)) / (12.0 * h * h)
        };
        -(second(0) + second(1))
    }

    /// `Δ_{g₀} s`, nonzero only in the cutoff annuli.
    pub fn source_density(&self, x: [f64; 3]) -> f64 {
        let mut total = 0.0;
        for (j, c) in self.cones.iter().enumerate() {
            let d = self.surface().distance(c.position, x);
            if c.beta != 0.0 && d > 0.5 * c.cutoff && d < c.cutoff {
                total += self.laplacian_in_frame(|y| self.cone_term(j, y), x, 1e-3 * c.cutoff, least_aligned_axis(c.position));
            }
        }
        total
    }

    /// Curvature `e^{−2u}(K₀ + Δ_{g₀} u)` of `e^{2u} g₀` for a smooth `u`.
    pub fn conformal_curvature(&self, u: impl Fn([f64; 3]) -> f64, x: [f64; 3], h: f64) -> f64 {
        (-2.0 * u(x)).exp() * (self.base_curvature + self.base_laplacian(&u, x, h))
    }

    /// Curvature of the singular background `e^{2s} g₀` away from the cones.
    pub fn background_curvature(&self, x: [f64; 3]) -> f64 {
        (-2.0 * self.singular_part(x)).exp() * (self.base_curvature + self.source_density(x))
    }

    /// Area of `e^{2(s+φ)} g₀` with `φ` interpolated linearly on each triangle.
    pub fn area_of(&self, phi: &[f64]) -> f64 {
        // Fixed chunks summed in order keep the result bit-reproducible.
        let partial: Vec<f64> = self
            .quad
            .par_chunks(4096)
            .map(|chunk| chunk.iter().map(|q| q.weight * (2.0 * (0..3).map(|a| q.bary[a] * phi[q.vertices[a]]).sum::<f64>()).exp()).sum())
            .collect();
        partial.iter().sum()
    }

    /// `N_i = ∫ e^{2(s+φ)} v_i dA₀` and its derivative `M_ij = ∫ e^{2(s+φ)} v_i v_j dA₀`
    /// (so `∂N/∂φ = 2M`), on the stiffness pattern. `Σ N_i` is `area_of(φ)`.
    pub fn nonlinear_term(&self, phi: &[f64]) -> (Vec<f64>, CsrMatrix) {
        let n = phi.len();
        let mut values = vec![0.0; n];
        let mut mass = CsrMatrix { vals: vec![0.0; self.stiffness.nnz()], ..self.stiffness.clone() };
        for q in &self.quad {
            let w = q.weight * (2.0 * (0..3).map(|a| q.bary[a] * phi[q.vertices[a]]).sum::<f64>()).exp();
            let slots = &self.slots[q.triangle];
            for a in 0..3 {
                values[q.vertices[a]] += w * q.bary[a];
                for b in 0..3 {
                    mass.vals[slots[a][b]] += w * q.bary[a] * q.bary[b];
                }
            }
        }
        (values, mass)
    }

    fn assemble(&mut self) {
        let mesh = self.mesh.clone();
        let n = mesh.vertex_count();
        let mut cone_at = vec![None; n];
        for (j, c) in self.cones.iter().enumerate() {
            cone_at[c.vertex] = Some(j);
        }
        let jacobi: Vec<Option<Vec<(f64, f64)>>> = self
            .cones
            .iter()
            .map(|c| {
                let b = 2.0 * c.beta + 1.0;
                let rule = GaussJacobi::new(
                    NonZeroUsize::new(DUFFY_POINTS).unwrap(),
                    FiniteAboveNegOneF64::new(0.0)?,
                    FiniteAboveNegOneF64::new(b)?,
                );
                // ∫₀¹ ξ^b g(ξ) dξ = 2^{−b−1} ∫₋₁¹ (1+x)^b g((1+x)/2) dx
                let factor = 0.5f64.powf(b + 1.0);
                Some(rule.iter().map(|(x, w)| (0.5 * (1.0 + x), factor * w)).collect())
            })
            .collect();
        let legendre: Vec<(f64, f64)> = GaussLegendre::new(NonZeroUsize::new(DUFFY_POINTS).unwrap())
            .iter()
            .map(|(x, w)| (0.5 * (1.0 + x), 0.5 * w))
            .collect();
        let local: Vec<LocalData> = (0..mesh.triangle_count())
            .into_par_iter()
            .map(|t| self.local_data(&mesh, t, &cone_at, &jacobi, &legendre))
            .collect();
        let mut trips = Vec::with_capacity(9 * local.len());
        let (mut area, mut source, mut weight) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut quad = Vec::new();
        for (t, data) in local.into_iter().enumerate() {
            let tri = mesh.triangles[t];
            for a in 0..3 {
                area[tri[a]] += data.area[a];
                source[tri[a]] += data.source[a];
                weight[tri[a]] += data.weight[a];
                for b in 0..3 {
                    trips.push((tri[a], tri[b], data.stiffness[a][b]));
                }
            }
            quad.extend(data.quad);
        }
        self.stiffness = CsrMatrix::from_triplets(n, trips);
        let a = &self.stiffness;
        let slot = |i: usize, j: usize| a.row_ptr[i] + a.cols[a.row_ptr[i]..a.row_ptr[i + 1]].binary_search(&j).expect("triangle entry");
        self.slots = mesh
            .triangles
            .iter()
            .map(|tri| {
                let mut s = [[0; 3]; 3];
                for x in 0..3 {
                    for y in 0..3 {
                        s[x][y] = slot(tri[x], tri[y]);
                    }
                }
                s
            })
            .collect();
        self.lumped_area = area;
        self.source = source;
        self.weight = weight;
        self.quad = quad;
    }

    fn local_data(
        &self,
        mesh: &Mesh,
        t: usize,
        cone_at: &[Option<usize>],
        jacobi: &[Option<Vec<(f64, f64)>>],
        legendre: &[(f64, f64)],
    ) -> LocalData {
        let surface = mesh.surface;
        let tri = mesh.triangles[t];
        let p = mesh.triangle_points(t);
        let normal = cross(sub(p[1], p[0]), sub(p[2], p[0]));
        let twice_area = norm(normal);
        let unit_normal = scale(normal, 1.0 / twice_area);
        let jac = |x: [f64; 3]| match surface {
            BaseSurface::RoundSphere => dot(unit_normal, x) / norm(x).powi(3),
            BaseSurface::FlatTorus => 1.0,
        };
        let point = |bary: [f64; 3]| add(add(scale(p[0], bary[0]), scale(p[1], bary[1])), scale(p[2], bary[2]));

        let mut stiffness = [[0.0; 3]; 3];
        let opposite = [sub(p[2], p[1]), sub(p[0], p[2]), sub(p[1], p[0])];
        for a in 0..3 {
            for b in 0..3 {
                stiffness[a][b] = dot(opposite[a], opposite[b]) / (2.0 * twice_area);
            }
        }

        let mut data = LocalData { stiffness, area: [0.0; 3], source: [0.0; 3], weight: [0.0; 3], quad: Vec::new() };
        // The cutoff annuli carry the source; their triangles are subdivided
        // until the pieces resolve the cutoff profile.
        let centre = surface.project(point([1.0 / 3.0; 3]));
        let size = mesh.longest_edge(t);
        let annulus_cutoff = self
            .cones
            .iter()
            .filter(|c| c.beta != 0.0)
            .filter(|c| {
                let d = surface.distance(c.position, centre);
                d + size > 0.5 * c.cutoff && d - size < c.cutoff
            })
            .map(|c| c.cutoff)
            .fold(f64::INFINITY, f64::min);
        let pieces_for = |resolution: f64| if resolution.is_finite() { (size / resolution).ceil().max(1.0) as usize } else { 1 };
        let pieces = pieces_for((annulus_cutoff / PIECES_PER_CUTOFF).min(mesh.base_size / WEIGHT_PIECES_PER_EDGE));
        let source_pieces = pieces_for((annulus_cutoff / PIECES_PER_CUTOFF).min(mesh.base_size / SOURCE_PIECES_PER_EDGE));
        let sub_bary = |corners: &[[f64; 3]; 3], b: [f64; 3]| {
            let mut bary = [0.0; 3];
            for (k, corner) in corners.iter().enumerate() {
                for a in 0..3 {
                    bary[a] += b[k] * corner[a];
                }
            }
            bary
        };
        // Same rule as the weights, so a constant φ on the bare sphere is exact.
        for (corners, sub_area) in subdivision(pieces) {
            for &(b, w) in &DUNAVANT7 {
                let bary = sub_bary(&corners, b);
                let dw = 0.5 * twice_area * sub_area * w * jac(point(bary));
                for a in 0..3 {
                    data.area[a] += dw * bary[a];
                }
            }
        }
        if annulus_cutoff.is_finite() {
            for (corners, sub_area) in subdivision(source_pieces) {
                for &(b, w) in &DUNAVANT7 {
                    let bary = sub_bary(&corners, b);
                    let x = point(bary);
                    let dw = 0.5 * twice_area * sub_area * w * jac(x);
                    let f = self.source_density(surface.project(x));
                    for a in 0..3 {
                        data.source[a] += dw * f * bary[a];
                    }
                }
            }
        }

        let singular_corner = (0..3).find_map(|a| cone_at[tri[a]].filter(|&j| self.cones[j].beta != 0.0).map(|j| (a, j)));
        match singular_corner.and_then(|(a, j)| jacobi[j].as_ref().map(|rule| (a, j, rule))) {
            Some((c, j, rule)) => {
                // Duffy map from the cone corner: x = P₀ + ξ(P₁ − P₀) + ξη(P₂ − P₁).
                let beta = self.cones[j].beta;
                let (i1, i2) = ((c + 1) % 3, (c + 2) % 3);
                for &(xi, wx) in rule {
                    for &(eta, we) in legendre {
                        let mut bary = [0.0; 3];
                        bary[c] = 1.0 - xi;
                        bary[i1] = xi * (1.0 - eta);
                        bary[i2] = xi * eta;
                        let x = point(bary);
                        let y = surface.project(x);
                        let density = (2.0 * self.singular_part(y) - 2.0 * beta * xi.ln()).exp();
                        let dw = twice_area * wx * we * jac(x) * density;
                        for a in 0..3 {
                            data.weight[a] += dw * bary[a];
                        }
                        data.quad.push(QuadPoint { triangle: t, vertices: tri, bary, weight: dw });
                    }
                }
            }
            None => {
                for (corners, sub_area) in subdivision(pieces) {
                    for &(b, w) in &DUNAVANT7 {
                        let bary = sub_bary(&corners, b);
                        let x = point(bary);
                        let y = surface.project(x);
                        let dw = 0.5 * twice_area * sub_area * w * jac(x) * (2.0 * self.singular_part(y)).exp();
                        for a in 0..3 {
                            data.weight[a] += dw * bary[a];
                        }
                        data.quad.push(QuadPoint { triangle: t, vertices: tri, bary, weight: dw });
                    }
                }
            }
        }
        data
    }
}

/// Coordinate axis at least `acos(1/√3)` from `x`.
fn least_aligned_axis(x: [f64; 3]) -> [f64; 3] {
    let i = (0..3).min_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs())).unwrap();
    let mut a = [0.0; 3];
    a[i] = 1.0;
    a
}
