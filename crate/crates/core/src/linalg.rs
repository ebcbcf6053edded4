//! Small dense matrices.
//!
//! Phase-space dimensions stay at desk scale (4n ≤ ~64), so everything here
//! is a plain row-major `Vec`. Integer matrices carry the structure tensors
//! exactly; `f64` matrices carry forms, Jacobians and solver state.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use crate::error::DimensionMismatch;

/// Row-major dense square-or-rectangular matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<i64>;
pub type RealMatrix = Matrix<f64>;

impl<T: Copy + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn map<U: Copy + Zero>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

impl<T> Matrix<T>
where
    T: Copy + Zero + num_traits::One,
{
    pub fn identity(size: usize) -> Self {
        Self::from_fn(size, size, |r, c| if r == c { T::one() } else { T::zero() })
    }
}

impl<T> Matrix<T>
where
    T: Copy + Zero + Add<Output = T> + Mul<Output = T>,
{
    pub fn matmul(&self, other: &Self) -> Result<Self, DimensionMismatch> {
        if self.cols != other.rows {
            return Err(DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * out.cols + c;
                    out.data[idx] = out.data[idx] + a * other.get(k, c);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>, DimensionMismatch> {
        if v.len() != self.cols {
            return Err(DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(self
            .iter_rows()
            .map(|row| row.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect())
    }
}

impl<T> Matrix<T>
where
    T: Copy + Zero + Sub<Output = T> + Signed + PartialOrd,
{
    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|x| x.abs())
            .fold(T::zero(), |m, x| if x > m { x } else { m })
    }

    /// Largest absolute row sum (the operator norm induced by the vector max-norm).
    pub fn inf_norm(&self) -> T {
        self.iter_rows()
            .map(|row| row.iter().fold(T::zero(), |acc, x| acc + x.abs()))
            .fold(T::zero(), |m, x| if x > m { x } else { m })
    }

    /// Largest absolute entry of `self - other`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), |m, x| if x > m { x } else { m })
    }
}

impl<T: Copy + Zero + Add<Output = T>> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Copy + Zero + Sub<Output = T>> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Copy + Zero + Neg<Output = T>> Neg for &Matrix<T> {
    type Output = Matrix<T>;

    fn neg(self) -> Matrix<T> {
        self.map(|x| -x)
    }
}

impl IntMatrix {
    /// Exactly one nonzero entry per row and per column, each equal to ±1.
    pub fn is_signed_permutation(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        let mut col_hits = vec![0usize; n];
        for row in self.iter_rows() {
            let mut row_hits = 0;
            for (&v, hits) in row.iter().zip(col_hits.iter_mut()) {
                match v {
                    0 => {}
                    1 | -1 => {
                        row_hits += 1;
                        *hits += 1;
                    }
                    _ => return false,
                }
            }
            if row_hits != 1 {
                return false;
            }
        }
        col_hits.iter().all(|&h| h == 1)
    }

    pub fn to_real(&self) -> RealMatrix {
        self.map(|x| x as f64)
    }
}

impl RealMatrix {
    /// Converts back to integers when every entry is integral.
    pub fn to_integer(&self) -> Option<IntMatrix> {
        if self.data.iter().all(|x| x.fract() == 0.0 && x.abs() < 1e15) {
            Some(self.map(|x| x as i64))
        } else {
            None
        }
    }

    /// Solves `self · x = b` by Gaussian elimination with partial pivoting.
    /// Returns `None` when the matrix is numerically singular.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.rows;
        if !self.is_square() || b.len() != n {
            return None;
        }
        let mut a = self.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let (pivot, pmag) =
                (k..n)
                    .map(|r| (r, a.get(r, k).abs()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag == 0.0 || !pmag.is_finite() {
                return None;
            }
            if pivot != k {
                for c in 0..n {
                    a.data.swap(k * n + c, pivot * n + c);
                }
                x.swap(k, pivot);
            }
            let diag = a.get(k, k);
            for r in k + 1..n {
                let factor = a.get(r, k) / diag;
                if factor == 0.0 {
                    continue;
                }
                for c in k..n {
                    let v = a.get(r, c) - factor * a.get(k, c);
                    a.set(r, c, v);
                }
                x[r] -= factor * x[k];
            }
        }
        for k in (0..n).rev() {
            let tail: f64 = (k + 1..n).map(|c| a.get(k, c) * x[c]).sum();
            x[k] = (x[k] - tail) / a.get(k, k);
        }
        Some(x)
    }

    /// Determinant via partial-pivot elimination.
    pub fn determinant(&self) -> f64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = 1.0;
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&i, &j| a.get(i, k).abs().total_cmp(&a.get(j, k).abs()))
                .unwrap_or(k);
            if a.get(pivot, k) == 0.0 {
                return 0.0;
            }
            if pivot != k {
                for c in 0..n {
                    a.data.swap(k * n + c, pivot * n + c);
                }
                det = -det;
            }
            let diag = a.get(k, k);
            det *= diag;
            for r in k + 1..n {
                let factor = a.get(r, k) / diag;
                for c in k..n {
                    let v = a.get(r, c) - factor * a.get(k, c);
                    a.set(r, c, v);
                }
            }
        }
        det
    }
}

impl<T> AsRef<Matrix<T>> for Matrix<T> {
    fn as_ref(&self) -> &Matrix<T> {
        self
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

/// Max-norm of a vector.
pub fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}
