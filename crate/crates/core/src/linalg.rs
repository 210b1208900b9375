//! Small dense matrix type and the factorizations the learners need.
//!
//! Matrices here are at most a few thousand rows (task counts, budgets), so a
//! row-major `Vec` is enough. Eigendecompositions are delegated to nalgebra.

use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Builds a matrix from equally sized rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == T::zero() {
                    continue;
                }
                let src = other.row(l);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `max_ij |self_ij − other_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    /// `‖self − I‖_max` for a square matrix.
    pub fn identity_deviation(&self) -> T {
        assert!(self.is_square());
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((self[(i, j)] - target).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Lower Cholesky factor of a symmetric positive definite matrix, or
    /// `None` when a pivot is not strictly positive.
    pub fn cholesky(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for p in 0..j {
                d -= l[(j, p)] * l[(j, p)];
            }
            if !(d > T::zero()) {
                return None;
            }
            let ljj = d.sqrt();
            l[(j, j)] = ljj;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for p in 0..j {
                    s -= l[(i, p)] * l[(j, p)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Some(l)
    }

    /// Inverse of a symmetric positive definite matrix through its Cholesky
    /// factor. The result is exactly symmetric.
    pub fn spd_inverse(&self) -> Option<Self> {
        let l = self.cholesky()?;
        let n = self.rows;
        // L⁻¹ by forward substitution, column by column.
        let mut linv = Self::zeros(n, n);
        for c in 0..n {
            linv[(c, c)] = T::one() / l[(c, c)];
            for i in c + 1..n {
                let mut s = T::zero();
                for p in c..i {
                    s += l[(i, p)] * linv[(p, c)];
                }
                linv[(i, c)] = -s / l[(i, i)];
            }
        }
        // A⁻¹ = L⁻ᵀ L⁻¹
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = T::zero();
                for p in i..n {
                    s += linv[(p, i)] * linv[(p, j)];
                }
                inv[(i, j)] = s;
                inv[(j, i)] = s;
            }
        }
        Some(inv)
    }

    /// Moore–Penrose pseudoinverse of a symmetric matrix. Eigenvalues below
    /// `T::pinv_cutoff()` times the largest eigenvalue magnitude are dropped.
    pub fn symmetric_pseudoinverse(&self) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return Self::zeros(0, 0);
        }
        let eig = SymmetricEigen::new(self.to_nalgebra());
        let largest = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cutoff = T::pinv_cutoff().as_f64() * largest;
        let mut out = DMatrix::<f64>::zeros(n, n);
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda.abs() <= cutoff || lambda == 0.0 {
                continue;
            }
            let v = eig.eigenvectors.column(idx);
            out += (v * v.transpose()) / lambda;
        }
        Self::from_nalgebra(&out)
    }

    /// Appends one row and column: `[[self, col], [colᵀ, diag]]`.
    pub fn border_symmetric(&mut self, col: &[T], diag: T) {
        self.border_symmetric_with(col, diag, |_, _| {});
    }

    /// [`border_symmetric`](Self::border_symmetric) in place, handing each
    /// old row (first `n` entries) to `update` right after it moves.
    pub(crate) fn border_symmetric_with(&mut self, col: &[T], diag: T, mut update: impl FnMut(usize, &mut [T])) {
        assert!(self.is_square());
        let n = self.rows;
        assert_eq!(col.len(), n);
        let m = n + 1;
        self.data.resize(m * m, T::zero());
        // back to front so no row is overwritten before it moves
        for i in (0..n).rev() {
            self.data.copy_within(i * n..i * n + n, i * m);
            update(i, &mut self.data[i * m..i * m + n]);
            self.data[i * m + n] = col[i];
        }
        self.data[n * m..n * m + n].copy_from_slice(col);
        self.data[n * m + n] = diag;
        self.rows = m;
        self.cols = m;
    }

    /// Deletes row `r` and column `r` of a square matrix.
    pub fn remove_row_col(&mut self, r: usize) {
        self.remove_row_col_with(r, |_, _| {});
    }

    /// [`remove_row_col`](Self::remove_row_col) in place, handing each
    /// surviving row (indexed by its old position) to `update` once compacted.
    pub(crate) fn remove_row_col_with(&mut self, r: usize, mut update: impl FnMut(usize, &mut [T])) {
        assert!(self.is_square() && r < self.rows);
        let n = self.rows;
        let m = n - 1;
        // front to back: every destination precedes its source
        for (dst, i) in (0..n).filter(|&i| i != r).enumerate() {
            let (src, out) = (i * n, dst * m);
            self.data.copy_within(src..src + r, out);
            self.data.copy_within(src + r + 1..src + n, out + r);
            update(i, &mut self.data[out..out + m]);
        }
        self.data.truncate(m * m);
        self.rows = m;
        self.cols = m;
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].as_f64())
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| T::lit(m[(i, j)]))
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}
