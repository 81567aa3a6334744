use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{Float, Zero};

use super::scalar::{Real, Scalar};
use super::NumericsError;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

pub type CMatrix<T> = Matrix<Complex<T>>;
pub type RMatrix<T> = Matrix<T>;

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data; `data.len()` must equal `rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<S>) -> Result<Self, NumericsError> {
        if data.len() != rows * cols {
            return Err(NumericsError::DimensionMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Panics on ragged input; intended for literals in code and tests.
    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_diag(diag: &[S]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
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

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<S> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(S) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, k: S) -> Self {
        self.map(|x| x * k)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> S::Real {
        self.data
            .iter()
            .fold(S::Real::zero(), |acc, x| Float::max(acc, x.modulus()))
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> S::Real {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].modulus()).sum::<S::Real>())
            .fold(S::Real::zero(), |acc, s| Float::max(acc, s))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.finite())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self, NumericsError> {
        if self.cols != rhs.rows {
            return Err(NumericsError::DimensionMismatch {
                expected: (self.cols, rhs.cols),
                found: (rhs.rows, rhs.cols),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == S::zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[S]) -> Result<Vec<S>, NumericsError> {
        if self.cols != x.len() {
            return Err(NumericsError::DimensionMismatch {
                expected: (self.cols, 1),
                found: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// Row vector times matrix, `xᵀ A`.
    pub fn vec_mul(&self, x: &[S]) -> Result<Vec<S>, NumericsError> {
        if self.rows != x.len() {
            return Err(NumericsError::DimensionMismatch {
                expected: (self.rows, 1),
                found: (x.len(), 1),
            });
        }
        let mut out = vec![S::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(S, S) -> S) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix shape mismatch"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self + k·I`; the matrix must be square.
    pub fn add_diagonal(&self, k: S) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            out[(i, i)] += k;
        }
        out
    }
}

impl<T: Real> Matrix<T> {
    pub fn to_complex(&self) -> CMatrix<T> {
        self.map(|x| Complex::new(x, T::zero()))
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> Add for &Matrix<S> {
    type Output = Matrix<S>;

    fn add(self, rhs: Self) -> Matrix<S> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<S: Scalar> Sub for &Matrix<S> {
    type Output = Matrix<S>;

    fn sub(self, rhs: Self) -> Matrix<S> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

/// Panics on shape mismatch; use [`Matrix::matmul`] for the checked form.
impl<S: Scalar> Mul for &Matrix<S> {
    type Output = Matrix<S>;

    fn mul(self, rhs: Self) -> Matrix<S> {
        self.matmul(rhs).expect("matrix shape mismatch")
    }
}
