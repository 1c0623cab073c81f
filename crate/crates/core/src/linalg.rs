//! Small dense linear algebra: one-sided Jacobi SVD and what is built on it
//! (rank, null spaces, least squares, subspace intersection).
//!
//! Everything here operates on desk-scale matrices (a few dozen entries), so
//! the quadratic-convergence Jacobi sweep is both accurate and fast enough.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative singular-value threshold used for rank decisions.
pub const DEFAULT_RANK_RTOL: f64 = 1e-10;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from equally long rows. An empty row list gives a
    /// `0 × cols` matrix, so `cols` must be supplied.
    pub fn from_rows(cols: usize, rows: &[Vec<T>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Matrix whose columns are the given vectors, each of length `dim`.
    pub fn from_columns(dim: usize, cols: &[Vec<T>]) -> Result<Self> {
        let mut m = Self::zeros(dim, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            for i in 0..dim {
                m[(i, j)] = c[i];
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn svd(&self) -> Svd<T> {
        Svd::new(self)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Thin SVD `A = U Σ Vᵀ` with the full right factor `V` (`cols × cols`).
///
/// Singular values are sorted in decreasing order; `u` holds one column per
/// singular value, zero columns for vanishing singular values.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub s: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> Svd<T> {
    fn new(a: &Matrix<T>) -> Self {
        let (m, n) = (a.rows, a.cols);
        // Column-major working copy.
        let mut w: Vec<Vec<T>> = (0..n).map(|j| a.column(j)).collect();
        let mut v: Vec<Vec<T>> = (0..n)
            .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
        let eps = T::epsilon();
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha: T = w[p].iter().map(|&x| x * x).sum();
                    let beta: T = w[q].iter().map(|&x| x * x).sum();
                    let gamma: T = w[p].iter().zip(&w[q]).map(|(&x, &y)| x * y).sum();
                    if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for i in 0..m {
                        let (x, y) = (w[p][i], w[q][i]);
                        w[p][i] = c * x - s * y;
                        w[q][i] = s * x + c * y;
                    }
                    for i in 0..n {
                        let (x, y) = (v[p][i], v[q][i]);
                        v[p][i] = c * x - s * y;
                        v[q][i] = s * x + c * y;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let norms: Vec<T> = w
            .iter()
            .map(|c| c.iter().map(|&x| x * x).sum::<T>().sqrt())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
        let mut u = Matrix::zeros(m, n);
        let mut vm = Matrix::zeros(n, n);
        let mut s = Vec::with_capacity(n);
        for (k, &j) in order.iter().enumerate() {
            let sj = norms[j];
            s.push(sj);
            for i in 0..n {
                vm[(i, k)] = v[j][i];
            }
            if sj > T::zero() {
                for i in 0..m {
                    u[(i, k)] = w[j][i] / sj;
                }
            }
        }
        Self { u, s, v: vm }
    }

    pub fn max_singular(&self) -> T {
        self.s.first().copied().unwrap_or_else(T::zero)
    }

    fn threshold(&self, rel_tol: T) -> T {
        rel_tol * self.max_singular()
    }

    /// Number of singular values above `rel_tol · σ_max` (zero matrix → 0).
    pub fn rank(&self, rel_tol: T) -> usize {
        let smax = self.max_singular();
        if smax == T::zero() {
            return 0;
        }
        let thr = self.threshold(rel_tol);
        self.s.iter().filter(|&&x| x > thr).count()
    }

    /// Orthonormal basis of the kernel.
    pub fn nullspace(&self, rel_tol: T) -> Vec<Vec<T>> {
        let r = self.rank(rel_tol);
        (r..self.v.cols()).map(|k| self.v.column(k)).collect()
    }

    /// Orthonormal basis of the column space.
    pub fn range(&self, rel_tol: T) -> Vec<Vec<T>> {
        let r = self.rank(rel_tol);
        (0..r).map(|k| self.u.column(k)).collect()
    }

    /// Minimum-norm least-squares solution of `A x = b`.
    pub fn solve(&self, b: &[T], rel_tol: T) -> Vec<T> {
        let r = self.rank(rel_tol);
        let n = self.v.rows();
        let mut x = vec![T::zero(); n];
        for k in 0..r {
            let ub: T = (0..self.u.rows()).map(|i| self.u[(i, k)] * b[i]).sum();
            let coef = ub / self.s[k];
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = *xi + coef * self.v[(i, k)];
            }
        }
        x
    }

    /// `σ_max / σ_min` over the leading `min(rows, cols)` singular values.
    pub fn condition_number(&self) -> T {
        let p = self.u.rows().min(self.v.rows());
        if p == 0 {
            return T::one();
        }
        let smin = self.s[p - 1];
        if smin == T::zero() {
            T::infinity()
        } else {
            self.max_singular() / smin
        }
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Orthonormalizes `vectors` (each of length `dim`), failing if they are dependent.
pub fn orthonormalize<T: Scalar>(dim: usize, vectors: &[Vec<T>], rel_tol: T) -> Result<Vec<Vec<T>>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let a = Matrix::from_columns(dim, vectors)?;
    let svd = a.svd();
    let rank = svd.rank(rel_tol);
    if rank < vectors.len() {
        return Err(Error::DependentBasis {
            rank,
            count: vectors.len(),
        });
    }
    Ok(svd.range(rel_tol))
}

/// `I − B Bᵀ` for an orthonormal basis `B`.
pub fn complement_projector<T: Scalar>(dim: usize, basis: &[Vec<T>]) -> Matrix<T> {
    let mut p = Matrix::identity(dim);
    for b in basis {
        for i in 0..dim {
            for j in 0..dim {
                p[(i, j)] = p[(i, j)] - b[i] * b[j];
            }
        }
    }
    p
}

/// Orthonormal basis of `span(B1) ∩ span(B2)` for orthonormal inputs, as the
/// null space of the stacked complement projectors. Both projectors have unit
/// norm, so `tol` is an absolute singular-value threshold (the sine of the
/// largest principal angle still counted as "inside").
pub fn intersect_subspaces<T: Scalar>(dim: usize, b1: &[Vec<T>], b2: &[Vec<T>], tol: T) -> Vec<Vec<T>> {
    let stacked = complement_projector(dim, b1).vstack(&complement_projector(dim, b2));
    let svd = stacked.svd();
    (0..dim)
        .filter(|&k| svd.s[k] <= tol)
        .map(|k| svd.v.column(k))
        .collect()
}
