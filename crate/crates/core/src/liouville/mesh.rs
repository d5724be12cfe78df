//! Triangulations of the round unit sphere and the unit-area flat torus with
//! every cone point at a vertex and graded newest-vertex-bisection rings
//! around each cone.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::LiouvilleError;

/// Radius of the graded zone around each cone.
pub const GRADING_RADIUS: f64 = 0.25;
/// Nominal ring ratio used to turn a ring count into an innermost radius.
pub const NOMINAL_RING_RATIO: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseSurface {
    /// Round unit sphere, `K = 1`.
    RoundSphere,
    /// `ℝ²/ℤ²`, `K = 0`, area 1. Points are `(x, y, 0)` with `x, y ∈ [0,1)`.
    FlatTorus,
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn wrap(x: f64) -> f64 {
    let w = x - x.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

impl BaseSurface {
    pub fn curvature(self) -> f64 {
        match self {
            Self::RoundSphere => 1.0,
            Self::FlatTorus => 0.0,
        }
    }

    pub fn area(self) -> f64 {
        match self {
            Self::RoundSphere => 4.0 * PI,
            Self::FlatTorus => 1.0,
        }
    }

    pub fn genus(self) -> u32 {
        match self {
            Self::RoundSphere => 0,
            Self::FlatTorus => 1,
        }
    }

    /// `b − a`, by minimal image on the torus.
    pub fn displacement(self, a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        let d = sub(b, a);
        match self {
            Self::RoundSphere => d,
            Self::FlatTorus => [d[0] - d[0].round(), d[1] - d[1].round(), 0.0],
        }
    }

    /// Geodesic distance.
    pub fn distance(self, a: [f64; 3], b: [f64; 3]) -> f64 {
        match self {
            Self::RoundSphere => norm(cross(a, b)).atan2(dot(a, b)),
            Self::FlatTorus => norm(self.displacement(a, b)),
        }
    }

    pub fn project(self, x: [f64; 3]) -> [f64; 3] {
        match self {
            Self::RoundSphere => scale(x, 1.0 / norm(x)),
            Self::FlatTorus => [wrap(x[0]), wrap(x[1]), 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshOptions {
    /// Uniform refinement level of the base mesh.
    pub level: u32,
    /// Graded rings per cone; the innermost radius is
    /// `GRADING_RADIUS · 1.2^{-grading_rings}`.
    pub grading_rings: u32,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self { level: 4, grading_rings: 56 }
    }
}

impl MeshOptions {
    pub fn innermost_radius(&self) -> f64 {
        GRADING_RADIUS * NOMINAL_RING_RATIO.powi(-(self.grading_rings as i32))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub surface: BaseSurface,
    pub vertices: Vec<[f64; 3]>,
    /// Counter-clockwise seen from outside (sphere) or from `+z` (torus).
    pub triangles: Vec<[usize; 3]>,
    /// Vertex index of each cone point.
    pub cone_vertices: Vec<usize>,
    /// Longest edge of the uniform base mesh.
    pub base_size: f64,
    pub grading_radius: f64,
    pub innermost: f64,
}

impl Mesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Corner positions of a flat triangle, unwrapped around the first corner.
    pub fn triangle_points(&self, t: usize) -> [[f64; 3]; 3] {
        let [a, b, c] = self.triangles[t];
        let pa = self.vertices[a];
        let pb = add(pa, self.surface.displacement(pa, self.vertices[b]));
        let pc = add(pa, self.surface.displacement(pa, self.vertices[c]));
        [pa, pb, pc]
    }

    pub fn longest_edge(&self, t: usize) -> f64 {
        let [p, q, r] = self.triangle_points(t);
        norm(sub(q, p)).max(norm(sub(r, q))).max(norm(sub(p, r)))
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn icosahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v = Vec::new();
    for s1 in [-1.0, 1.0] {
        for s2 in [-1.0, 1.0] {
            v.push([s1, s2 * g, 0.0]);
            v.push([0.0, s1, s2 * g]);
            v.push([s2 * g, 0.0, s1]);
        }
    }
    let mut faces = Vec::new();
    for a in 0..12 {
        for b in a + 1..12 {
            for c in b + 1..12 {
                let close = |i: usize, j: usize| (norm(sub(v[i], v[j])) - 2.0).abs() < 1e-9;
                if close(a, b) && close(b, c) && close(a, c) {
                    let outward = dot(cross(sub(v[b], v[a]), sub(v[c], v[a])), v[a]) > 0.0;
                    faces.push(if outward { [a, b, c] } else { [a, c, b] });
                }
            }
        }
    }
    let v = v.into_iter().map(|p| scale(p, 1.0 / norm(p))).collect();
    (v, faces)
}

fn subdivide(surface: BaseSurface, vertices: &mut Vec<[f64; 3]>, triangles: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| {
        *mids.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let pa = vertices[a];
            let m = add(pa, scale(surface.displacement(pa, vertices[b]), 0.5));
            vertices.push(surface.project(m));
            vertices.len() - 1
        })
    };
    let mut out = Vec::with_capacity(4 * triangles.len());
    for &[a, b, c] in triangles {
        let (ab, bc, ca) = (mid(a, b, vertices), mid(b, c, vertices), mid(c, a, vertices));
        out.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    out
}

/// Rotation taking unit `u` to unit `v`.
fn rotation(u: [f64; 3], v: [f64; 3]) -> [[f64; 3]; 3] {
    let c = dot(u, v);
    let mut axis = cross(u, v);
    let s = norm(axis);
    if s < 1e-14 {
        if c > 0.0 {
            return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        }
        let trial = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        axis = cross(u, trial);
    }
    let k = scale(axis, 1.0 / norm(axis));
    let angle = s.atan2(c);
    let (sa, ca) = angle.sin_cos();
    let mut r = [[0.0; 3]; 3];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            let kx = [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]];
            *e = if i == j { ca } else { 0.0 } + sa * kx[i][j] + (1.0 - ca) * k[i] * k[j];
        }
    }
    r
}

fn apply(r: &[[f64; 3]; 3], x: [f64; 3]) -> [f64; 3] {
    [dot(r[0], x), dot(r[1], x), dot(r[2], x)]
}

fn bump(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

fn uniform_mesh(surface: BaseSurface, level: u32) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    match surface {
        BaseSurface::RoundSphere => {
            let (mut v, mut t) = icosahedron();
            for _ in 0..level {
                t = subdivide(surface, &mut v, &t);
            }
            (v, t)
        }
        BaseSurface::FlatTorus => {
            let n = 1usize << level.max(2);
            let idx = |i: usize, j: usize| (i % n) * n + (j % n);
            let v = (0..n * n).map(|k| [(k / n) as f64 / n as f64, (k % n) as f64 / n as f64, 0.0]).collect();
            let mut t = Vec::with_capacity(2 * n * n);
            for i in 0..n {
                for j in 0..n {
                    t.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                    t.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
                }
            }
            (v, t)
        }
    }
}

/// Moves the base mesh so that every cone sits at a vertex: a rigid motion
/// for the first cone, then smooth compactly supported warps for the rest.
fn place_cones(surface: BaseSurface, vertices: &mut [[f64; 3]], cones: &[[f64; 3]], h: f64) -> Result<Vec<usize>, LiouvilleError> {
    if cones.is_empty() {
        return Ok(Vec::new());
    }
    let nearest = |vertices: &[[f64; 3]], p: [f64; 3]| {
        (0..vertices.len())
            .min_by(|&a, &b| surface.distance(vertices[a], p).total_cmp(&surface.distance(vertices[b], p)))
            .unwrap()
    };
    let first = nearest(vertices, cones[0]);
    match surface {
        BaseSurface::RoundSphere => {
            let r = rotation(vertices[first], cones[0]);
            for v in vertices.iter_mut() {
                *v = surface.project(apply(&r, *v));
            }
            vertices[first] = cones[0];
        }
        BaseSurface::FlatTorus => {
            let shift = surface.displacement(vertices[first], cones[0]);
            for v in vertices.iter_mut() {
                *v = surface.project(add(*v, shift));
            }
            vertices[first] = cones[0];
        }
    }
    let mut placed = vec![first];
    let mut min_gap = f64::INFINITY;
    for i in 0..cones.len() {
        for j in i + 1..cones.len() {
            min_gap = min_gap.min(surface.distance(cones[i], cones[j]));
        }
    }
    let radius = (3.0 * h).min(0.45 * min_gap);
    for &p in &cones[1..] {
        let v = nearest(vertices, p);
        if placed.contains(&v) {
            return Err(LiouvilleError::MeshTooCoarse("two cones share a nearest vertex".into()));
        }
        if surface.distance(vertices[v], p) > 1e-15 {
            let centre = vertices[v];
            let delta = surface.displacement(centre, p);
            for x in vertices.iter_mut() {
                let w = bump(surface.distance(*x, centre) / radius);
                if w > 0.0 {
                    *x = surface.project(add(*x, scale(delta, w)));
                }
            }
            vertices[v] = p;
        }
        placed.push(v);
    }
    Ok(placed)
}

/// Newest-vertex bisection; `[v0, v1, v2]` has refinement edge `(v1, v2)`.
struct Bisection<'a> {
    surface: BaseSurface,
    vertices: &'a mut Vec<[f64; 3]>,
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    edges: HashMap<(usize, usize), [usize; 2]>,
    mids: HashMap<(usize, usize), usize>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl<'a> Bisection<'a> {
    fn new(surface: BaseSurface, vertices: &'a mut Vec<[f64; 3]>, triangles: &[[usize; 3]]) -> Self {
        let mut me = Self { surface, vertices, tris: Vec::new(), alive: Vec::new(), edges: HashMap::new(), mids: HashMap::new() };
        for &t in triangles {
            // Longest edge first, ties broken by vertex ids.
            let label = |a: usize, b: usize| {
                let len = norm(me.surface.displacement(me.vertices[a], me.vertices[b]));
                (len, std::cmp::Reverse(key(a, b)))
            };
            let rot = (0..3)
                .max_by(|&i, &j| {
                    let (a, b) = (label(t[(i + 1) % 3], t[(i + 2) % 3]), label(t[(j + 1) % 3], t[(j + 2) % 3]));
                    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
                })
                .unwrap();
            me.add([t[rot], t[(rot + 1) % 3], t[(rot + 2) % 3]]);
        }
        me
    }

    fn add(&mut self, t: [usize; 3]) {
        let id = self.tris.len();
        self.tris.push(t);
        self.alive.push(true);
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            let slot = self.edges.entry(key(a, b)).or_insert([usize::MAX; 2]);
            if slot[0] == usize::MAX {
                slot[0] = id;
            } else {
                slot[1] = id;
            }
        }
    }

    fn remove(&mut self, id: usize) {
        self.alive[id] = false;
        let t = self.tris[id];
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            if let Some(slot) = self.edges.get_mut(&key(a, b)) {
                if slot[0] == id {
                    slot[0] = slot[1];
                }
                slot[1] = usize::MAX;
            }
        }
    }

    fn neighbor(&self, id: usize, e: (usize, usize)) -> Option<usize> {
        let slot = self.edges.get(&e)?;
        slot.iter().copied().find(|&t| t != id && t != usize::MAX)
    }

    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        if let Some(&m) = self.mids.get(&key(a, b)) {
            return m;
        }
        let pa = self.vertices[a];
        let m = add(pa, scale(self.surface.displacement(pa, self.vertices[b]), 0.5));
        self.vertices.push(self.surface.project(m));
        let id = self.vertices.len() - 1;
        self.mids.insert(key(a, b), id);
        id
    }

    fn split(&mut self, id: usize) {
        let [v0, v1, v2] = self.tris[id];
        let m = self.midpoint(v1, v2);
        self.remove(id);
        self.add([m, v0, v1]);
        self.add([m, v2, v0]);
    }

    fn bisect(&mut self, id: usize) {
        let [_, v1, v2] = self.tris[id];
        let e = key(v1, v2);
        if let Some(n) = self.neighbor(id, e) {
            let [_, n1, n2] = self.tris[n];
            if key(n1, n2) != e {
                self.bisect(n);
            }
            if !self.alive[id] {
                return;
            }
            let n = self.neighbor(id, e).expect("neighbor across the refinement edge");
            self.split(n);
        }
        self.split(id);
    }

    fn finish(self) -> Vec<[usize; 3]> {
        self.tris.into_iter().zip(self.alive).filter(|(_, a)| *a).map(|(t, _)| t).collect()
    }
}

/// Builds the graded mesh with cone `j` at vertex `cone_vertices[j]`.
pub fn build_mesh(surface: BaseSurface, cones: &[[f64; 3]], options: &MeshOptions) -> Result<Mesh, LiouvilleError> {
    let cones: Vec<[f64; 3]> = cones.iter().map(|&p| surface.project(p)).collect();
    let (mut vertices, triangles) = uniform_mesh(surface, options.level);
    let h0 = triangles
        .iter()
        .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
        .map(|(a, b)| norm(surface.displacement(vertices[a], vertices[b])))
        .fold(0.0, f64::max);
    let cone_vertices = place_cones(surface, &mut vertices, &cones, h0)?;
    let mut min_gap = f64::INFINITY;
    for i in 0..cones.len() {
        for j in i + 1..cones.len() {
            min_gap = min_gap.min(surface.distance(cones[i], cones[j]));
        }
    }
    let grading_radius = GRADING_RADIUS.min(0.45 * min_gap);
    let innermost = options.innermost_radius();
    let h_base = triangles
        .iter()
        .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
        .map(|(a, b)| norm(surface.displacement(vertices[a], vertices[b])))
        .fold(0.0, f64::max)
        * 1.001;
    let target = |d: f64| h_base * (d / grading_radius).clamp(innermost / h_base, 1.0);
    let mut nvb = Bisection::new(surface, &mut vertices, &triangles);
    if !cones.is_empty() {
        loop {
            let marked: Vec<usize> = (0..nvb.tris.len())
                .filter(|&id| nvb.alive[id])
                .filter(|&id| {
                    let t = nvb.tris[id];
                    let pts = t.map(|v| nvb.vertices[v]);
                    let d = cones
                        .iter()
                        .flat_map(|&c| pts.iter().map(move |&p| surface.distance(p, c)))
                        .fold(f64::INFINITY, f64::min);
                    let longest = (0..3)
                        .map(|i| norm(surface.displacement(pts[i], pts[(i + 1) % 3])))
                        .fold(0.0, f64::max);
                    longest > target(d)
                })
                .collect();
            if marked.is_empty() {
                break;
            }
            for id in marked {
                if nvb.alive[id] {
                    nvb.bisect(id);
                }
            }
        }
    }
    let triangles = nvb.finish();
    Ok(Mesh { surface, vertices, triangles, cone_vertices, base_size: h_base, grading_radius, innermost })
}
