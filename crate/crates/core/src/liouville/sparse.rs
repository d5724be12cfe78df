//! Compressed sparse rows for the stiffness matrix and sparse LU solves of
//! optionally bordered systems through `faer`.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;

use super::LiouvilleError;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Duplicate entries are summed.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.vals[k] * x[self.cols[k]]).sum())
            .collect()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

/// Solver for `[[A + diag(d), c], [cᵀ, 0]]` (or `A + diag(d)` without a border).
///
/// A dense border row defeats the column ordering of a sparse LU, so the
/// bordered system is reduced to solves with `A + diag(d) + ρ e_p e_pᵀ`, which
/// pins the vertex `p` where the border is largest, and a 2×2 system for the
/// multiplier and the pinned value.
pub struct Factorization {
    lu: Lu<usize, f64>,
    n: usize,
    border: Option<Border>,
    pub size: usize,
}

struct Border {
    c: Vec<f64>,
    pin: usize,
    rho: f64,
    /// `B⁻¹c` and `B⁻¹e_p` for the pinned matrix `B`.
    yc: Vec<f64>,
    ye: Vec<f64>,
}

impl Factorization {
    pub fn new(a: &CsrMatrix, diag: &[f64], border: Option<&[f64]>) -> Result<Self, LiouvilleError> {
        let n = a.n;
        let (pin, rho) = match border {
            Some(c) => {
                let pin = (0..n).max_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs())).unwrap_or(0);
                let mean_diag = (0..n)
                    .map(|i| (a.row_ptr[i]..a.row_ptr[i + 1]).find(|&k| a.cols[k] == i).map_or(0.0, |k| a.vals[k].abs()))
                    .sum::<f64>()
                    / n.max(1) as f64;
                (pin, mean_diag.max(f64::MIN_POSITIVE))
            }
            None => (usize::MAX, 0.0),
        };
        let mut trips = Vec::with_capacity(a.nnz() + 1);
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.cols[k];
                let mut v = a.vals[k];
                if i == j {
                    v += diag[i];
                    if i == pin {
                        v += rho;
                    }
                }
                trips.push(Triplet::new(i, j, v));
            }
        }
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips)
            .map_err(|e| LiouvilleError::LinearSolver(format!("{e:?}")))?;
        let lu = m.sp_lu().map_err(|e| LiouvilleError::LinearSolver(format!("{e:?}")))?;
        let mut out = Self { lu, n, border: None, size: n + usize::from(border.is_some()) };
        if let Some(c) = border {
            let yc = out.plain(c);
            let mut e = vec![0.0; n];
            e[pin] = 1.0;
            let ye = out.plain(&e);
            out.border = Some(Border { c: c.to_vec(), pin, rho, yc, ye });
        }
        Ok(out)
    }

    fn plain(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Col::<f64>::from_fn(self.n, |i| b[i]);
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| x[i]).collect()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let Some(br) = &self.border else {
            return self.plain(b);
        };
        let n = self.n;
        let yr = self.plain(&b[..n]);
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        // x = yr − μ yc + ρν ye with ν = x_p and cᵀx = g.
        let p = br.pin;
        let (a11, a12, r1) = (br.yc[p], 1.0 - br.rho * br.ye[p], yr[p]);
        let (a21, a22, r2) = (dot(&br.c, &br.yc), -br.rho * dot(&br.c, &br.ye), dot(&br.c, &yr) - b[n]);
        let det = a11 * a22 - a12 * a21;
        let mu = (r1 * a22 - a12 * r2) / det;
        let nu = (a11 * r2 - a21 * r1) / det;
        let mut x: Vec<f64> = (0..n).map(|i| yr[i] - mu * br.yc[i] + br.rho * nu * br.ye[i]).collect();
        x.push(mu);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (1, 1, 1.0)]);
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![4.0, 3.0]);
    }

    #[test]
    fn bordered_solve() {
        // Singular Laplacian of a path, made solvable by a mean-zero border.
        let a = CsrMatrix::from_triplets(3, vec![(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 1.0)]);
        let f = Factorization::new(&a, &[0.0; 3], Some(&[1.0, 1.0, 1.0])).unwrap();
        let x = f.solve(&[1.0, 0.0, -1.0, 0.0]);
        let ax = a.mul_vec(&x[..3]);
        assert!((ax[0] + x[3] - 1.0).abs() < 1e-12 && (ax[2] + x[3] + 1.0).abs() < 1e-12);
        assert!((x[0] + x[1] + x[2]).abs() < 1e-12);
    }
}
