//! Indicial calculus at a cone point.
//!
//! Operators are reduced on the Fourier mode `ψ_k = e^{iky}` of the flat
//! cone `dr² + (1+β)² r² dy²`. A homogeneous operator of order `o` sends
//! `r^ζ Φ ψ_k` to `r^{ζ−o} M(ζ) Φ ψ_k`, where `M` is a matrix polynomial in
//! `ζ` (the symbol of `r∂_r`). Coefficient vectors use the orthonormal frames
//! `{dr, (1+β) r dy}` for 1-forms and `{g, dr² − (1+β)²r²dy², (1+β)r(dr⊗dy + dy⊗dr)}`
//! for symmetric 2-tensors; `k_β = k/(1+β)`.
//!
//! All second-order operators use the rough-Laplacian normalization, so the
//! symmetrized covariant derivative `δ*` is the Lie derivative `η ↦ L_{η♯} g`
//! and `B δ* = P` holds exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::ConeAngleVector;

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance for deciding that a candidate `ζ` is an indicial root.
pub const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndicialError {
    #[error("zeta = {zeta} is not an indicial root of {operator:?} on mode {mode}")]
    NotIndicialRoot { operator: ModeOperator, mode: i64, zeta: f64 },
    #[error("nu = {nu} is inadmissible for cone {index}; the largest admissible value is {max_nu}")]
    InvalidNu { index: usize, nu: f64, max_nu: f64 },
    #[error("nu = {0} lies outside (0, 1)")]
    NuOutOfRange(f64),
    #[error("beta = {0} lies outside (-1, 0)")]
    BetaOutOfRange(f64),
}

fn check_beta(beta: f64) -> Result<(), IndicialError> {
    if beta > -1.0 && beta < 0.0 {
        Ok(())
    } else {
        Err(IndicialError::BetaOutOfRange(beta))
    }
}

/// Operators with an indicial root table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndicialOperator {
    ScalarLaplacian,
    P,
    L,
}

/// Operators with a mode-reduced matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeOperator {
    /// Scalar Laplacian `Δ = ∇*∇`.
    ScalarLaplacian,
    /// Rough Laplacian plus Ricci term on 1-forms.
    P,
    /// Rough Laplacian plus curvature terms on symmetric 2-tensors.
    L,
    /// Trace-free block of `L`.
    LTraceFree,
    /// Divergence, symmetric 2-tensors to 1-forms.
    Delta,
    /// Lie derivative of the metric, 1-forms to symmetric 2-tensors.
    DeltaStar,
    /// Trace-free part of `DeltaStar`.
    ConformalKilling,
    /// `δ + ½ d tr`.
    Bianchi,
    /// Metric trace, symmetric 2-tensors to scalars.
    Trace,
    /// Exterior derivative on scalars.
    Gradient,
}

impl ModeOperator {
    /// Power of `r^{-1}` produced by the operator.
    pub fn order(self) -> usize {
        match self {
            Self::ScalarLaplacian | Self::P | Self::L | Self::LTraceFree => 2,
            Self::Delta | Self::DeltaStar | Self::ConformalKilling | Self::Bianchi | Self::Gradient => 1,
            Self::Trace => 0,
        }
    }

    /// `(rows, cols)` of the mode matrix.
    pub fn shape(self) -> (usize, usize) {
        match self {
            Self::ScalarLaplacian => (1, 1),
            Self::P | Self::LTraceFree => (2, 2),
            Self::L => (3, 3),
            Self::Delta | Self::Bianchi => (2, 3),
            Self::DeltaStar | Self::ConformalKilling => (3, 2),
            Self::Trace => (1, 3),
            Self::Gradient => (2, 1),
        }
    }
}

/// Polynomial in `ζ` with small complex matrix coefficients; `coeffs[j]`
/// multiplies `ζ^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPolynomial {
    pub coeffs: Vec<CMatrix>,
}

impl SymbolPolynomial {
    pub fn rows(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn cols(&self) -> usize {
        self.coeffs[0].ncols()
    }

    pub fn eval(&self, zeta: Complex64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.rows(), self.cols());
        for c in self.coeffs.iter().rev() {
            acc = acc * zeta + c;
        }
        acc
    }

    /// `ζ ↦ p(ζ + s)`.
    pub fn shifted(&self, s: f64) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![CMatrix::zeros(self.rows(), self.cols()); n];
        for (j, c) in self.coeffs.iter().enumerate() {
            // (ζ + s)^j = Σ_i C(j,i) s^{j−i} ζ^i
            let mut binom = 1.0;
            for i in 0..=j {
                if i > 0 {
                    binom = binom * (j - i + 1) as f64 / i as f64;
                }
                out[i] += c * Complex64::new(binom * s.powi((j - i) as i32), 0.0);
            }
        }
        Self { coeffs: out }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![CMatrix::zeros(self.rows(), other.cols()); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// Largest coefficient-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = CMatrix::zeros(self.rows(), self.cols());
        (0..n)
            .map(|j| {
                let a = self.coeffs.get(j).unwrap_or(&zero);
                let b = other.coeffs.get(j).unwrap_or(&zero);
                (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Mode-reduced matrix of a homogeneous cone operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOperatorMatrix {
    pub operator: ModeOperator,
    pub mode: i64,
    pub beta: f64,
    /// `symbol.coeffs[0]` is the zeroth-order part, `coeffs[1]` the `r∂_r`
    /// coefficient and `coeffs[2]` (second-order operators) the `(r∂_r)²` one.
    pub symbol: SymbolPolynomial,
}

impl ModeOperatorMatrix {
    pub fn order(&self) -> usize {
        self.operator.order()
    }

    pub fn zeroth(&self) -> &CMatrix {
        &self.symbol.coeffs[0]
    }

    pub fn r_dr_coefficient(&self) -> CMatrix {
        self.symbol
            .coeffs
            .get(1)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.symbol.rows(), self.symbol.cols()))
    }

    pub fn at(&self, zeta: f64) -> CMatrix {
        self.symbol.eval(Complex64::new(zeta, 0.0))
    }

    /// Symbol of `self ∘ inner`: `self(ζ − ord inner) · inner(ζ)`.
    pub fn compose(&self, inner: &ModeOperatorMatrix) -> SymbolPolynomial {
        self.symbol.shifted(-(inner.order() as f64)).mul(&inner.symbol)
    }
}

fn cm(rows: usize, cols: usize, entries: &[Complex64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, entries)
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

pub fn k_beta(beta: f64, mode: i64) -> f64 {
    mode as f64 / (1.0 + beta)
}

pub fn mode_matrix(operator: ModeOperator, beta: f64, mode: i64) -> ModeOperatorMatrix {
    let m = k_beta(beta, mode);
    let z = re(0.0);
    let one = re(1.0);
    let neg_identity = |n: usize| -CMatrix::identity(n, n);
    let coeffs = match operator {
        ModeOperator::ScalarLaplacian => vec![cm(1, 1, &[re(m * m)]), cm(1, 1, &[z]), neg_identity(1)],
        ModeOperator::P => vec![
            cm(2, 2, &[re(m * m + 1.0), im(2.0 * m), im(-2.0 * m), re(m * m + 1.0)]),
            CMatrix::zeros(2, 2),
            neg_identity(2),
        ],
        ModeOperator::LTraceFree => vec![
            cm(2, 2, &[re(m * m + 4.0), im(4.0 * m), im(-4.0 * m), re(m * m + 4.0)]),
            CMatrix::zeros(2, 2),
            neg_identity(2),
        ],
        ModeOperator::L => {
            let mut c0 = CMatrix::zeros(3, 3);
            c0[(0, 0)] = re(m * m);
            c0[(1, 1)] = re(m * m + 4.0);
            c0[(2, 2)] = re(m * m + 4.0);
            c0[(1, 2)] = im(4.0 * m);
            c0[(2, 1)] = im(-4.0 * m);
            vec![c0, CMatrix::zeros(3, 3), neg_identity(3)]
        }
        ModeOperator::Delta => vec![
            cm(2, 3, &[z, re(-2.0), im(-m), im(-m), im(m), re(-2.0)]),
            cm(2, 3, &[-one, -one, z, z, z, -one]),
        ],
        ModeOperator::DeltaStar => vec![
            cm(3, 2, &[one, im(m), -one, im(-m), im(m), -one]),
            cm(3, 2, &[one, z, one, z, z, one]),
        ],
        ModeOperator::ConformalKilling => vec![
            cm(3, 2, &[z, z, -one, im(-m), im(m), -one]),
            cm(3, 2, &[z, z, one, z, z, one]),
        ],
        ModeOperator::Bianchi => vec![
            cm(2, 3, &[z, re(-2.0), im(-m), z, im(m), re(-2.0)]),
            cm(2, 3, &[z, -one, z, z, z, -one]),
        ],
        ModeOperator::Trace => vec![cm(1, 3, &[re(2.0), z, z])],
        ModeOperator::Gradient => vec![cm(2, 1, &[z, im(m)]), cm(2, 1, &[one, z])],
    };
    ModeOperatorMatrix { operator, mode, beta, symbol: SymbolPolynomial { coeffs } }
}

/// Which piece of the bundle a root lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RootPart {
    Scalar,
    OneForm,
    Trace,
    TraceFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// A real angular section `Φ(y) = cos(ky)·cos_coeffs + sin(ky)·sin_coeffs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealSection {
    pub cos_coeffs: Vec<f64>,
    pub sin_coeffs: Vec<f64>,
}

impl RealSection {
    /// Coefficient on `ψ_k` (`k > 0`) in the complex expansion; the `ψ_{−k}`
    /// coefficient is its conjugate. For `k = 0` this is `cos_coeffs`.
    pub fn complex_coefficients(&self, mode: u64) -> Vec<Complex64> {
        self.cos_coeffs
            .iter()
            .zip(&self.sin_coeffs)
            .map(|(&a, &b)| if mode == 0 { re(a) } else { Complex64::new(a / 2.0, -b / 2.0) })
            .collect()
    }

    /// Section with complex mode coefficient `c` on `ψ_k` plus its conjugate on `ψ_{−k}`.
    pub fn from_complex(mode: u64, c: &[Complex64]) -> Self {
        if mode == 0 {
            return Self { cos_coeffs: c.iter().map(|z| z.re).collect(), sin_coeffs: vec![0.0; c.len()] };
        }
        Self {
            cos_coeffs: c.iter().map(|z| 2.0 * z.re).collect(),
            sin_coeffs: c.iter().map(|z| -2.0 * z.im).collect(),
        }
    }
}

/// Indicial root `ζ` on the mode pair `±k`, with its real solution space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicialRoot {
    pub value: f64,
    /// `|k|`; sections combine `ψ_k` and `ψ_{−k}`.
    pub mode: u64,
    pub part: RootPart,
    /// Solution families `(branch, k)` producing this root; branch is
    /// `None` for the scalar and trace parts.
    pub families: Vec<(Option<Branch>, i64)>,
    /// Real dimension of `{r^ζ Φ}` plus its logarithmic partners.
    pub multiplicity: usize,
    pub log_multiplicity: usize,
    pub eigensections: Vec<RealSection>,
    /// Largest residual of the eigensections in the exact mode matrices.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicialRootTable {
    pub operator: IndicialOperator,
    pub beta: f64,
    pub window: (f64, f64),
    pub roots: Vec<IndicialRoot>,
}

impl IndicialRootTable {
    /// Total multiplicity of all entries at `zeta`.
    pub fn multiplicity_at(&self, zeta: f64) -> usize {
        self.roots.iter().filter(|r| (r.value - zeta).abs() <= ROOT_TOL).map(|r| r.multiplicity).sum()
    }

    /// Distinct root values in ascending order.
    pub fn values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.roots {
            if out.last().is_none_or(|v| (r.value - v).abs() > ROOT_TOL) {
                out.push(r.value);
            }
        }
        out
    }

    pub fn max_residual(&self) -> f64 {
        self.roots.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

pub fn roots_scalar(beta: f64, window: (f64, f64)) -> IndicialRootTable {
    root_table(IndicialOperator::ScalarLaplacian, beta, window)
}

pub fn roots_oneform(beta: f64, window: (f64, f64)) -> IndicialRootTable {
    root_table(IndicialOperator::P, beta, window)
}

pub fn roots_symmetric2(beta: f64, window: (f64, f64)) -> IndicialRootTable {
    root_table(IndicialOperator::L, beta, window)
}

fn full_operator(op: IndicialOperator) -> ModeOperator {
    match op {
        IndicialOperator::ScalarLaplacian => ModeOperator::ScalarLaplacian,
        IndicialOperator::P => ModeOperator::P,
        IndicialOperator::L => ModeOperator::L,
    }
}

/// Complex null vectors of the Hermitian block `C − ζ² I` on mode `k ≥ 0`,
/// in closed form. `shift` is 0 for a scalar block, 1 for 1-forms and 2 for
/// trace-free tensors.
fn block_null_vectors(m: f64, shift: f64, zeta: f64) -> Vec<Vec<Complex64>> {
    let z2 = zeta * zeta;
    let close = |mu: f64| (mu - z2).abs() <= ROOT_TOL * (1.0 + mu.abs());
    if shift == 0.0 {
        return if close(m * m) { vec![vec![re(1.0)]] } else { Vec::new() };
    }
    if m == 0.0 {
        return if close(shift * shift) { vec![vec![re(1.0), re(0.0)], vec![re(0.0), re(1.0)]] } else { Vec::new() };
    }
    let mut out = Vec::new();
    if close((m + shift).powi(2)) {
        out.push(vec![re(1.0), im(-1.0)]);
    }
    if close((m - shift).powi(2)) {
        out.push(vec![re(1.0), im(1.0)]);
    }
    out
}

fn apply(m: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Residual of a real section in the full operator on modes `±k`.
fn section_residual(op: ModeOperator, beta: f64, mode: u64, zeta: f64, section: &RealSection) -> f64 {
    let c = section.complex_coefficients(mode);
    let plus = vec_norm(&apply(&mode_matrix(op, beta, mode as i64).at(zeta), &c));
    if mode == 0 {
        return plus.max(section.sin_coeffs.iter().map(|x| x.abs()).fold(0.0, f64::max));
    }
    let cc: Vec<Complex64> = c.iter().map(|z| z.conj()).collect();
    let minus = vec_norm(&apply(&mode_matrix(op, beta, -(mode as i64)).at(zeta), &cc));
    plus.max(minus)
}

fn embed(part: RootPart, v: &[Complex64]) -> Vec<Complex64> {
    match part {
        RootPart::Scalar | RootPart::OneForm => v.to_vec(),
        RootPart::Trace => vec![v[0], re(0.0), re(0.0)],
        RootPart::TraceFree => vec![re(0.0), v[0], v[1]],
    }
}

/// Real sections spanned by a complex null vector `v` of mode `k`: the real
/// part of `v e^{iky}` and minus its imaginary part.
fn real_sections(mode: u64, v: &[Complex64]) -> Vec<RealSection> {
    if mode == 0 {
        return vec![RealSection { cos_coeffs: v.iter().map(|z| z.re).collect(), sin_coeffs: vec![0.0; v.len()] }];
    }
    vec![
        RealSection { cos_coeffs: v.iter().map(|z| z.re).collect(), sin_coeffs: v.iter().map(|z| -z.im).collect() },
        RealSection { cos_coeffs: v.iter().map(|z| -z.im).collect(), sin_coeffs: v.iter().map(|z| -z.re).collect() },
    ]
}

pub fn root_table(operator: IndicialOperator, beta: f64, window: (f64, f64)) -> IndicialRootTable {
    let parts: &[(RootPart, f64)] = match operator {
        IndicialOperator::ScalarLaplacian => &[(RootPart::Scalar, 0.0)],
        IndicialOperator::P => &[(RootPart::OneForm, 1.0)],
        IndicialOperator::L => &[(RootPart::Trace, 0.0), (RootPart::TraceFree, 2.0)],
    };
    let full = full_operator(operator);
    let (lo, hi) = window;
    let reach = lo.abs().max(hi.abs());
    let mut roots = Vec::new();
    for &(part, shift) in parts {
        let kmax = ((reach + shift) * (1.0 + beta)).floor() as u64 + 1;
        for a in 0..=kmax {
            let m = k_beta(beta, a as i64);
            let mut candidates: Vec<f64> = if shift == 0.0 {
                vec![m, -m]
            } else {
                vec![m + shift, -(m + shift), m - shift, -(m - shift)]
            };
            candidates.retain(|z| *z >= lo - ROOT_TOL && *z <= hi + ROOT_TOL);
            candidates.sort_by(|x, y| x.total_cmp(y));
            candidates.dedup_by(|x, y| (*x - *y).abs() <= ROOT_TOL);
            for zeta in candidates {
                let nulls = block_null_vectors(m, shift, zeta);
                let eigensections: Vec<RealSection> =
                    nulls.iter().flat_map(|v| real_sections(a, &embed(part, v))).collect();
                if eigensections.is_empty() {
                    continue;
                }
                let residual = eigensections
                    .iter()
                    .map(|s| section_residual(full, beta, a, zeta, s))
                    .fold(0.0, f64::max);
                // ζ² = μ has a double root only when μ = 0.
                let log_multiplicity = usize::from(zeta.abs() <= ROOT_TOL);
                let families = families_for(part, shift, beta, a, zeta);
                roots.push(IndicialRoot {
                    value: if zeta.abs() <= ROOT_TOL { 0.0 } else { zeta },
                    mode: a,
                    part,
                    families,
                    multiplicity: eigensections.len() * (1 + log_multiplicity),
                    log_multiplicity,
                    eigensections,
                    residual,
                });
            }
        }
    }
    roots.sort_by(|x, y| x.value.total_cmp(&y.value).then(x.mode.cmp(&y.mode)).then(x.part.cmp(&y.part)));
    IndicialRootTable { operator, beta, window, roots }
}

fn families_for(part: RootPart, shift: f64, beta: f64, a: u64, zeta: f64) -> Vec<(Option<Branch>, i64)> {
    let ks: Vec<i64> = if a == 0 { vec![0] } else { vec![a as i64, -(a as i64)] };
    let mut out = Vec::new();
    for k in ks {
        let m = k_beta(beta, k);
        match part {
            RootPart::Scalar | RootPart::Trace => {
                if (m - zeta).abs() <= ROOT_TOL {
                    out.push((None, k));
                }
            }
            RootPart::OneForm | RootPart::TraceFree => {
                if (shift + m - zeta).abs() <= ROOT_TOL {
                    out.push((Some(Branch::Plus), k));
                }
                if (-shift + m - zeta).abs() <= ROOT_TOL {
                    out.push((Some(Branch::Minus), k));
                }
            }
        }
    }
    out
}

/// Complex null vectors of the full operator `op` on complex mode `k` at `ζ`.
fn operator_null_vectors(op: IndicialOperator, beta: f64, mode: i64, zeta: f64) -> Vec<Vec<Complex64>> {
    let a = mode.unsigned_abs();
    let parts: &[(RootPart, f64)] = match op {
        IndicialOperator::ScalarLaplacian => &[(RootPart::Scalar, 0.0)],
        IndicialOperator::P => &[(RootPart::OneForm, 1.0)],
        IndicialOperator::L => &[(RootPart::Trace, 0.0), (RootPart::TraceFree, 2.0)],
    };
    let mut out = Vec::new();
    for &(part, shift) in parts {
        for v in block_null_vectors(k_beta(beta, a as i64), shift, zeta) {
            let v = embed(part, &v);
            // Mode −k carries the conjugate structure.
            out.push(if mode < 0 { v.iter().map(|z| z.conj()).collect() } else { v });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Intertwiner {
    /// `B` maps `L`-indicial pairs to `P`-indicial pairs.
    Bianchi,
    /// `D` maps `P`-indicial pairs to `L`-indicial pairs.
    ConformalKilling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntertwiningReport {
    pub intertwiner: Intertwiner,
    pub mode: i64,
    pub source_zeta: f64,
    pub target_zeta: f64,
    pub sources: Vec<Vec<Complex64>>,
    pub images: Vec<Vec<Complex64>>,
    pub image_norms: Vec<f64>,
    /// Largest modulus of the target operator applied to an image.
    pub max_residual: f64,
}

pub fn check_intertwining(
    intertwiner: Intertwiner,
    beta: f64,
    mode: i64,
    zeta: f64,
) -> Result<IntertwiningReport, IndicialError> {
    check_beta(beta)?;
    let (source_op, map_op, target_op) = match intertwiner {
        Intertwiner::Bianchi => (IndicialOperator::L, ModeOperator::Bianchi, ModeOperator::P),
        Intertwiner::ConformalKilling => (IndicialOperator::P, ModeOperator::ConformalKilling, ModeOperator::L),
    };
    let sources = operator_null_vectors(source_op, beta, mode, zeta);
    if sources.is_empty() {
        return Err(IndicialError::NotIndicialRoot { operator: full_operator(source_op), mode, zeta });
    }
    let map = mode_matrix(map_op, beta, mode).at(zeta);
    let target_zeta = zeta - 1.0;
    let target = mode_matrix(target_op, beta, mode).at(target_zeta);
    let images: Vec<Vec<Complex64>> = sources.iter().map(|v| apply(&map, v)).collect();
    let image_norms = images.iter().map(|w| vec_norm(w)).collect();
    let max_residual = images.iter().map(|w| vec_norm(&apply(&target, w))).fold(0.0, f64::max);
    Ok(IntertwiningReport { intertwiner, mode, source_zeta: zeta, target_zeta, sources, images, image_norms, max_residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XYMap {
    pub beta: f64,
    /// Columns are the images of `a₁`, `a₂` in the basis `(α₂', α₃')`.
    pub matrix: [[f64; 2]; 2],
    pub determinant: f64,
    /// Least-squares defect of expressing the images in the target basis.
    pub projection_residual: f64,
}

/// Mode-1 sections of the `X_β` (source) and `Y_β` (target) bases.
pub fn xbeta_basis() -> [RealSection; 2] {
    [
        RealSection { cos_coeffs: vec![1.0, 0.0], sin_coeffs: vec![0.0, -1.0] },
        RealSection { cos_coeffs: vec![0.0, -1.0], sin_coeffs: vec![-1.0, 0.0] },
    ]
}

pub fn ybeta_basis() -> [RealSection; 2] {
    [
        RealSection { cos_coeffs: vec![0.0, 1.0, 0.0], sin_coeffs: vec![0.0, 0.0, -1.0] },
        RealSection { cos_coeffs: vec![0.0, 0.0, -1.0], sin_coeffs: vec![0.0, -1.0, 0.0] },
    ]
}

/// Matrix of `D` from the `P`-roots `ζ = −1 + 1/(1+β)` on modes `±1` to the
/// `L`-roots `ζ = −2 + 1/(1+β)`.
pub fn xbeta_ybeta_map(beta: f64) -> Result<XYMap, IndicialError> {
    check_beta(beta)?;
    let zeta = -1.0 + 1.0 / (1.0 + beta);
    let d = mode_matrix(ModeOperator::ConformalKilling, beta, 1).at(zeta);
    let ys = ybeta_basis();
    let flat = |s: &RealSection| -> Vec<f64> { s.cos_coeffs.iter().chain(&s.sin_coeffs).copied().collect() };
    let y0 = flat(&ys[0]);
    let y1 = flat(&ys[1]);
    let mut matrix = [[0.0; 2]; 2];
    let mut projection_residual: f64 = 0.0;
    for (col, x) in xbeta_basis().iter().enumerate() {
        let image = RealSection::from_complex(1, &apply(&d, &x.complex_coefficients(1)));
        let v = flat(&image);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        // y0, y1 are orthogonal with equal norms.
        let c0 = dot(&v, &y0) / dot(&y0, &y0);
        let c1 = dot(&v, &y1) / dot(&y1, &y1);
        matrix[0][col] = c0;
        matrix[1][col] = c1;
        let defect = v.iter().zip(y0.iter().zip(&y1)).map(|(p, (a, b))| (p - c0 * a - c1 * b).abs()).fold(0.0, f64::max);
        projection_residual = projection_residual.max(defect);
    }
    let determinant = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    Ok(XYMap { beta, matrix, determinant, projection_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootLabel {
    /// Scalar `ζ = 0` pair: rescaling the metric and changing the cone angle.
    ScaleAndConeAngle,
    /// `P` at `ζ = 1`, mode 0: the dilation `r∂_r` and the rotation `∂_y`.
    DilationAndRotation,
    /// Trace-free `L` rate of smooth symmetric 2-tensors.
    SmoothTensorRate,
    /// Trace-free `L` rate of singular transverse-traceless tensors.
    SingularTtRate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricLabel {
    pub operator: IndicialOperator,
    pub root: f64,
    pub mode: u64,
    pub label: RootLabel,
}

pub fn geometric_labels(beta: f64) -> Result<Vec<GeometricLabel>, IndicialError> {
    check_beta(beta)?;
    let inv = 1.0 / (1.0 + beta);
    Ok(vec![
        GeometricLabel { operator: IndicialOperator::ScalarLaplacian, root: 0.0, mode: 0, label: RootLabel::ScaleAndConeAngle },
        GeometricLabel { operator: IndicialOperator::P, root: 1.0, mode: 0, label: RootLabel::DilationAndRotation },
        GeometricLabel { operator: IndicialOperator::L, root: -2.0 + 2.0 * inv, mode: 2, label: RootLabel::SmoothTensorRate },
        GeometricLabel { operator: IndicialOperator::L, root: -2.0 + inv, mode: 1, label: RootLabel::SingularTtRate },
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegularizationDecision {
    Identity,
    SubtractConformalKilling { exponent: f64 },
}

pub fn regularization_plan(betas: &ConeAngleVector, nu: f64) -> Result<Vec<RegularizationDecision>, IndicialError> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(IndicialError::NuOutOfRange(nu));
    }
    let mut out = Vec::with_capacity(betas.len());
    for (index, &b) in betas.as_slice().iter().enumerate() {
        let inv = 1.0 / (1.0 + b);
        if b < -0.5 {
            let max_nu = -2.0 + inv;
            if nu >= max_nu {
                return Err(IndicialError::InvalidNu { index, nu, max_nu });
            }
            out.push(RegularizationDecision::Identity);
        } else {
            out.push(RegularizationDecision::SubtractConformalKilling { exponent: -1.0 + inv });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn scalar_examples() {
        let t = roots_scalar(-0.5, (-3.0, 3.0));
        assert_eq!(t.values(), vec![-2.0, 0.0, 2.0]);
        let zero = t.roots.iter().find(|r| r.value == 0.0).unwrap();
        assert_eq!(zero.log_multiplicity, 1);
        assert_eq!(zero.multiplicity, 2);
        let t = roots_scalar(-0.75, (0.0, 9.0));
        assert_eq!(t.values(), vec![0.0, 4.0, 8.0]);
        let t = roots_scalar(-1e-9, (-1.5, 1.5));
        let v = t.values();
        assert_eq!(v.len(), 3);
        assert!((v[0] + 1.0).abs() < 1e-8 && v[1] == 0.0 && (v[2] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn oneform_examples() {
        let t = roots_oneform(-0.5, (0.5, 1.5));
        assert_eq!(t.values(), vec![1.0]);
        assert_eq!(t.multiplicity_at(1.0), 4);
        let fams: Vec<_> = t.roots.iter().flat_map(|r| r.families.clone()).collect();
        assert!(fams.contains(&(Some(Branch::Plus), 0)));
        assert!(fams.contains(&(Some(Branch::Minus), 1)));
        let t = roots_oneform(-0.5, (-1.5, -0.5));
        assert_eq!(t.multiplicity_at(-1.0), 4);
        let t = roots_oneform(-2.0 / 3.0, (3.5, 4.5));
        assert!(t.roots.iter().any(|r| close(r.value, 4.0) && r.families.contains(&(Some(Branch::Plus), 1))));
    }

    #[test]
    fn oneform_sections_match_real_pairs() {
        // (+, k): (cos ky, sin ky), (−sin ky, cos ky)
        let t = roots_oneform(-0.5, (2.5, 3.5));
        let r = t.roots.iter().find(|r| r.mode == 1 && r.families.contains(&(Some(Branch::Plus), 1))).unwrap();
        assert_eq!(r.eigensections[0], RealSection { cos_coeffs: vec![1.0, 0.0], sin_coeffs: vec![0.0, 1.0] });
        assert_eq!(r.eigensections[1], RealSection { cos_coeffs: vec![0.0, 1.0], sin_coeffs: vec![-1.0, 0.0] });
    }

    #[test]
    fn symmetric2_examples() {
        let t = roots_symmetric2(-0.5, (-0.5, 0.5));
        assert_eq!(t.values(), vec![0.0]);
        let trace = t.roots.iter().find(|r| r.part == RootPart::Trace).unwrap();
        assert_eq!(trace.log_multiplicity, 1);
        let tf = t.roots.iter().find(|r| r.part == RootPart::TraceFree).unwrap();
        assert_eq!(tf.mode, 1);
        assert!(tf.families.contains(&(Some(Branch::Minus), 1)));
        assert!(tf.families.contains(&(Some(Branch::Plus), -1)));
        // The two families share one eigenspace, so the second is a log partner.
        assert_eq!(tf.log_multiplicity, 1);
        assert_eq!(tf.multiplicity, 4);
        let t = roots_symmetric2(-0.75, (1e-9, 3.0));
        let smallest = t.roots.iter().find(|r| r.part == RootPart::TraceFree).unwrap();
        assert!(close(smallest.value, 2.0));
    }

    #[test]
    fn window_endpoints_are_included() {
        let t = roots_scalar(-0.5, (2.0, 4.0));
        assert_eq!(t.values(), vec![2.0, 4.0]);
    }

    #[test]
    fn mode_matrix_examples() {
        let p = mode_matrix(ModeOperator::P, -0.5, 0);
        assert_eq!(*p.zeroth(), CMatrix::identity(2, 2));
        let l = mode_matrix(ModeOperator::LTraceFree, -0.5, 1);
        let want = cm(2, 2, &[re(8.0), im(8.0), im(-8.0), re(8.0)]);
        assert_eq!(*l.zeroth(), want);
        for k in [-3, 0, 5] {
            let t = mode_matrix(ModeOperator::Trace, -0.3, k);
            assert_eq!(*t.zeroth(), cm(1, 3, &[re(2.0), re(0.0), re(0.0)]));
        }
        let d = mode_matrix(ModeOperator::Delta, -0.5, 1);
        assert_eq!(d.symbol.rows(), 2);
        assert_eq!(d.symbol.cols(), 3);
    }

    #[test]
    fn intertwining_examples() {
        let r = check_intertwining(Intertwiner::Bianchi, -0.5, 1, 0.0).unwrap();
        assert_eq!(r.target_zeta, -1.0);
        assert!(r.max_residual < 1e-12);
        // r dr and r² dy are conformal Killing, so their images vanish.
        let r = check_intertwining(Intertwiner::ConformalKilling, -0.5, 0, 1.0).unwrap();
        assert!(r.max_residual < 1e-12);
        assert_eq!(r.sources.len(), 2);
        assert!(r.image_norms.iter().all(|&n| n == 0.0));
        let r = check_intertwining(Intertwiner::ConformalKilling, -0.5, 2, 3.0).unwrap();
        assert!(r.max_residual < 1e-12);
        assert!(r.image_norms.iter().any(|&n| n > 0.1));
        assert!(matches!(
            check_intertwining(Intertwiner::Bianchi, -0.5, 1, 0.3),
            Err(IndicialError::NotIndicialRoot { .. })
        ));
    }

    #[test]
    fn bianchi_kills_trace_roots() {
        // Scalar root 2 on mode 1 of the trace part at β = −1/2.
        let r = check_intertwining(Intertwiner::Bianchi, -0.5, 1, 2.0).unwrap();
        let trace_image = r.sources.iter().zip(&r.image_norms).find(|(s, _)| s[1].norm() == 0.0 && s[2].norm() == 0.0);
        assert_eq!(trace_image.unwrap().1, &0.0);
    }

    #[test]
    fn xbeta_map_is_scalar_multiple() {
        for beta in [-0.9, -0.5, -0.25] {
            let x = xbeta_ybeta_map(beta).unwrap();
            let c = -2.0 * beta / (1.0 + beta);
            assert!(close(x.matrix[0][0], c) && close(x.matrix[1][1], c));
            assert!(close(x.matrix[0][1], 0.0) && close(x.matrix[1][0], 0.0));
            assert!(x.projection_residual < 1e-12);
        }
        assert!(close(xbeta_ybeta_map(-0.5).unwrap().determinant, 4.0));
    }

    #[test]
    fn label_examples() {
        let find = |b: f64, l: RootLabel| geometric_labels(b).unwrap().into_iter().find(|g| g.label == l).unwrap().root;
        assert!(close(find(-0.5, RootLabel::SingularTtRate), 0.0));
        assert!(close(find(-0.5, RootLabel::SmoothTensorRate), 2.0));
        assert!(close(find(-0.75, RootLabel::SingularTtRate), 2.0));
        assert!(close(find(-0.25, RootLabel::SingularTtRate), -2.0 / 3.0));
    }

    #[test]
    fn labelled_roots_are_roots() {
        for beta in [-0.75, -0.5, -0.25] {
            for g in geometric_labels(beta).unwrap() {
                let t = root_table(g.operator, beta, (g.root - 0.1, g.root + 0.1));
                assert!(t.roots.iter().any(|r| close(r.value, g.root) && r.mode == g.mode), "{g:?}");
            }
        }
    }

    #[test]
    fn regularization_examples() {
        let v = |b: Vec<f64>| ConeAngleVector::new(b).unwrap();
        assert_eq!(regularization_plan(&v(vec![-0.75]), 0.5).unwrap(), vec![RegularizationDecision::Identity]);
        let plan = regularization_plan(&v(vec![-0.25]), 0.9).unwrap();
        match plan[0] {
            RegularizationDecision::SubtractConformalKilling { exponent } => assert!(close(exponent, 1.0 / 3.0)),
            _ => panic!("expected subtraction"),
        }
        let plan = regularization_plan(&v(vec![-0.75, -0.25]), 0.5).unwrap();
        assert_eq!(plan[0], RegularizationDecision::Identity);
        assert!(matches!(plan[1], RegularizationDecision::SubtractConformalKilling { .. }));
        match regularization_plan(&v(vec![-0.6]), 0.6) {
            Err(IndicialError::InvalidNu { index: 0, max_nu, .. }) => assert!(close(max_nu, 0.5)),
            other => panic!("{other:?}"),
        }
        assert!(regularization_plan(&v(vec![-0.6]), 0.0).is_err());
    }

    fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
        let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn root_symmetry(beta in -0.99f64..-0.01, a in 0.0f64..6.0, b in 0.0f64..6.0, op in 0usize..3) {
            let op = [IndicialOperator::ScalarLaplacian, IndicialOperator::P, IndicialOperator::L][op];
            let w = a.min(b);
            let t = root_table(op, beta, (-w, w));
            for v in t.values() {
                prop_assert_eq!(t.multiplicity_at(v), t.multiplicity_at(-v));
            }
        }

        #[test]
        fn eigensection_residuals(beta in -0.99f64..-0.01, op in 0usize..3) {
            let op = [IndicialOperator::ScalarLaplacian, IndicialOperator::P, IndicialOperator::L][op];
            let t = root_table(op, beta, (-6.0, 6.0));
            prop_assert!(t.max_residual() <= 1e-12);
            prop_assert!(t.roots.iter().all(|r| !r.eigensections.is_empty()));
        }

        #[test]
        fn closed_forms_match_eigendecomposition(beta in -0.99f64..-0.01, k in -6i64..=6) {
            let m = k_beta(beta, k);
            let ev = hermitian_eigenvalues(mode_matrix(ModeOperator::P, beta, k).zeroth());
            let mut want = vec![(m - 1.0).powi(2), (m + 1.0).powi(2)];
            want.sort_by(|a, b| a.total_cmp(b));
            for (e, w) in ev.iter().zip(&want) {
                prop_assert!((e - w).abs() <= 1e-12 * (1.0 + w));
            }
            let ev = hermitian_eigenvalues(mode_matrix(ModeOperator::L, beta, k).zeroth());
            let mut want = vec![m * m, (m - 2.0).powi(2), (m + 2.0).powi(2)];
            want.sort_by(|a, b| a.total_cmp(b));
            for (e, w) in ev.iter().zip(&want) {
                prop_assert!((e - w).abs() <= 1e-12 * (1.0 + w));
            }
            let ev = hermitian_eigenvalues(mode_matrix(ModeOperator::ScalarLaplacian, beta, k).zeroth());
            prop_assert!((ev[0] - m * m).abs() <= 1e-12 * (1.0 + m * m));
        }

        #[test]
        fn intertwining_identities(beta in -0.99f64..-0.01, k in -8i64..=8) {
            let b = mode_matrix(ModeOperator::Bianchi, beta, k);
            let l = mode_matrix(ModeOperator::L, beta, k);
            let p = mode_matrix(ModeOperator::P, beta, k);
            let d = mode_matrix(ModeOperator::ConformalKilling, beta, k);
            prop_assert!(b.compose(&l).max_abs_diff(&p.compose(&b)) <= 1e-12 * (1.0 + k_beta(beta, k).powi(3).abs()));
            prop_assert!(l.compose(&d).max_abs_diff(&d.compose(&p)) <= 1e-12 * (1.0 + k_beta(beta, k).powi(3).abs()));
            let trace = [re(1.0), re(0.0), re(0.0)];
            for zeta in [-2.5, 0.0, 1.0, 3.7] {
                let img = apply(&b.at(zeta), &trace);
                prop_assert!(img.iter().all(|z| *z == re(0.0)));
            }
        }

        #[test]
        fn structural_identities(beta in -0.99f64..-0.01, k in -8i64..=8) {
            let b = mode_matrix(ModeOperator::Bianchi, beta, k);
            let ds = mode_matrix(ModeOperator::DeltaStar, beta, k);
            let p = mode_matrix(ModeOperator::P, beta, k);
            prop_assert!(b.compose(&ds).max_abs_diff(&p.symbol) <= 1e-12 * (1.0 + k_beta(beta, k).powi(2)));
            // B = δ + ½ d∘tr
            let delta = mode_matrix(ModeOperator::Delta, beta, k);
            let grad = mode_matrix(ModeOperator::Gradient, beta, k);
            let tr = mode_matrix(ModeOperator::Trace, beta, k);
            let half = SymbolPolynomial { coeffs: grad.compose(&tr).coeffs.iter().map(|c| c * re(0.5)).collect() };
            let sum = SymbolPolynomial { coeffs: delta.symbol.coeffs.iter().zip(&half.coeffs).map(|(a, b)| a + b).collect() };
            prop_assert!(sum.max_abs_diff(&b.symbol) <= 1e-14 * (1.0 + k_beta(beta, k).abs()));
            // Δ on scalars is the divergence of the gradient.
            let codiff = SymbolPolynomial { coeffs: vec![
                cm(1, 2, &[re(-1.0), im(-k_beta(beta, k))]),
                cm(1, 2, &[re(-1.0), re(0.0)]),
            ] };
            let lap = mode_matrix(ModeOperator::ScalarLaplacian, beta, k);
            let comp = codiff.shifted(-1.0).mul(&grad.symbol);
            prop_assert!(comp.max_abs_diff(&lap.symbol) <= 1e-12 * (1.0 + k_beta(beta, k).powi(2)));
        }
    }
}
