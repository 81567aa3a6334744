use num_traits::ToPrimitive;

use super::matrix::Matrix;
use super::scalar::{Real, Scalar};
use super::NumericsError;

/// LU factorization `P A = L U` with partial (row) pivoting.
#[derive(Clone, Debug)]
pub struct Lu<S> {
    lu: Matrix<S>,
    perm: Vec<usize>,
}

fn pivot_floor<T: Real>() -> T {
    T::lit(1e-300).max(T::min_positive_value())
}

impl<S: Scalar> Lu<S> {
    pub fn factor(a: &Matrix<S>) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::DimensionMismatch {
                expected: (a.rows(), a.rows()),
                found: (a.rows(), a.cols()),
            });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let floor = pivot_floor::<S::Real>();

        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].modulus();
            for i in k + 1..n {
                let m = lu[(i, k)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            // NaN fails every comparison, so it lands here too.
            if !(best >= floor) {
                return Err(NumericsError::SingularMatrix {
                    column: k,
                    pivot: best.to_f64().unwrap_or(f64::NAN),
                });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    fn check_len(&self, len: usize) -> Result<(), NumericsError> {
        if len != self.dim() {
            return Err(NumericsError::DimensionMismatch {
                expected: (self.dim(), 1),
                found: (len, 1),
            });
        }
        Ok(())
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[S]) -> Result<Vec<S>, NumericsError> {
        self.check_len(b.len())?;
        let n = self.dim();
        let mut x: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }

    /// Solves `Aᵀ x = b`, i.e. the row-vector system `xᵀ A = bᵀ`.
    pub fn solve_transposed(&self, b: &[S]) -> Result<Vec<S>, NumericsError> {
        self.check_len(b.len())?;
        let n = self.dim();
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ y = b, Lᵀ z = y, then x = Pᵀ z.
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(j, i)] * y[j];
            }
            y[i] = s / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![S::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix<S>) -> Result<Matrix<S>, NumericsError> {
        self.check_len(b.rows())?;
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve(&b.column(j))?;
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<Matrix<S>, NumericsError> {
        self.solve_matrix(&Matrix::identity(self.dim()))
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn lu_solve<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Result<Vec<S>, NumericsError> {
    if a.rows() != b.len() {
        return Err(NumericsError::DimensionMismatch {
            expected: (a.rows(), 1),
            found: (b.len(), 1),
        });
    }
    Lu::factor(a)?.solve(b)
}
