use num_complex::Complex;

use super::lu::Lu;
use super::matrix::{CMatrix, Matrix};
use super::scalar::Real;
use super::NumericsError;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// `A = V Λ V⁻¹` for a real, possibly non-symmetric, square matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T: Real> {
    pub eigenvalues: Vec<Complex<T>>,
    /// Eigenvectors stored as columns, each scaled to unit max-modulus.
    pub right_vectors: CMatrix<T>,
    /// `V⁻¹`; its rows are the left eigenvectors.
    pub left_inverse: CMatrix<T>,
    /// `‖A − V Λ V⁻¹‖_max`.
    pub residual_norm: T,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Rebuilds `V f(Λ) V⁻¹`.
    pub fn reconstruct_with(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> CMatrix<T> {
        let n = self.dim();
        let fl: Vec<_> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        Matrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.right_vectors[(i, k)] * fl[k] * self.left_inverse[(k, j)])
                .sum()
        })
    }
}

/// Eigendecomposition of a real square matrix: Householder reduction to Hessenberg form,
/// then Francis double-shift QR with back substitution for the vectors.
///
/// Fails with `IllConditioned` when the reconstruction residual exceeds `1e-10·‖A‖_max`
/// (nearly defective input).
pub fn eig_real_nonsymmetric<T: Real>(a: &Matrix<T>) -> Result<EigenDecomposition<T>, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::DimensionMismatch {
            expected: (a.rows(), a.rows()),
            found: (a.rows(), a.cols()),
        });
    }
    if !a.is_finite() {
        return Err(NumericsError::NonFinite("eigendecomposition input"));
    }
    let n = a.rows();
    let mut h: Vec<Vec<T>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut v = vec![vec![T::zero(); n]; n];
    orthes(&mut h, &mut v);
    let (d, e) = hqr2(&mut h, &mut v)?;

    let mut values = Vec::with_capacity(n);
    let mut vectors = CMatrix::<T>::zeros(n, n);
    let mut j = 0;
    while j < n {
        if e[j] == T::zero() {
            values.push(Complex::new(d[j], T::zero()));
            for i in 0..n {
                vectors[(i, j)] = Complex::new(v[i][j], T::zero());
            }
            j += 1;
        } else {
            // Columns j, j+1 hold the real and imaginary parts for d[j] + i·e[j].
            let lam = Complex::new(d[j], e[j]);
            values.push(lam);
            values.push(lam.conj());
            for i in 0..n {
                let z = Complex::new(v[i][j], v[i][j + 1]);
                vectors[(i, j)] = z;
                vectors[(i, j + 1)] = z.conj();
            }
            j += 2;
        }
    }
    for k in 0..n {
        let scale = (0..n).fold(T::zero(), |m, i| m.max(vectors[(i, k)].norm()));
        if scale > T::zero() {
            for i in 0..n {
                vectors[(i, k)] = vectors[(i, k)] / scale;
            }
        }
    }

    let left_inverse = Lu::factor(&vectors)
        .and_then(|lu| lu.inverse())
        .map_err(|_| NumericsError::IllConditioned {
            residual: f64::INFINITY,
        })?;
    let mut dec = EigenDecomposition {
        eigenvalues: values,
        right_vectors: vectors,
        left_inverse,
        residual_norm: T::zero(),
    };
    let rebuilt = dec.reconstruct_with(|l| l);
    let residual = (&rebuilt - &a.to_complex()).max_abs();
    dec.residual_norm = residual;
    let scale = a.max_abs().max(T::min_positive_value());
    if !(residual <= T::lit(1e-10) * scale) {
        return Err(NumericsError::IllConditioned {
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(dec)
}

/// Householder reduction to upper Hessenberg form; accumulates the transform in `v`.
fn orthes<T: Real>(h: &mut [Vec<T>], v: &mut [Vec<T>]) {
    let n = h.len();
    if n == 0 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![T::zero(); n];
    for m in 1..high {
        let scale = (m..=high).fold(T::zero(), |s, i| s + h[i][m - 1].abs());
        if scale == T::zero() {
            continue;
        }
        let mut hh = T::zero();
        for i in (m..=high).rev() {
            ort[i] = h[i][m - 1] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > T::zero() {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = T::zero();
            for i in (m..=high).rev() {
                f += ort[i] * h[i][j];
            }
            f /= hh;
            for i in m..=high {
                h[i][j] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = T::zero();
            for j in (m..=high).rev() {
                f += ort[j] * h[i][j];
            }
            f /= hh;
            for j in m..=high {
                h[i][j] -= f * ort[j];
            }
        }
        ort[m] = scale * ort[m];
        h[m][m - 1] = scale * g;
    }

    for (i, row) in v.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = if i == j { T::one() } else { T::zero() };
        }
    }
    for m in (1..high).rev() {
        if h[m][m - 1] == T::zero() {
            continue;
        }
        for i in m + 1..=high {
            ort[i] = h[i][m - 1];
        }
        for j in m..=high {
            let mut g = T::zero();
            for i in m..=high {
                g += ort[i] * v[i][j];
            }
            // Double division avoids underflow.
            g = (g / ort[m]) / h[m][m - 1];
            for i in m..=high {
                v[i][j] += g * ort[i];
            }
        }
    }
}

fn cdiv<T: Real>(xr: T, xi: T, yr: T, yi: T) -> (T, T) {
    let q = Complex::new(xr, xi) / Complex::new(yr, yi);
    (q.re, q.im)
}

/// Francis QR on the Hessenberg matrix `h`, then back substitution so that the columns of
/// `v` become the (real-packed) eigenvectors. Returns real and imaginary eigenvalue parts.
#[allow(clippy::many_single_char_names)]
fn hqr2<T: Real>(h: &mut [Vec<T>], v: &mut [Vec<T>]) -> Result<(Vec<T>, Vec<T>), NumericsError> {
    let nn = h.len();
    let mut d = vec![T::zero(); nn];
    let mut e = vec![T::zero(); nn];
    if nn == 0 {
        return Ok((d, e));
    }
    let zero = T::zero();
    let one = T::one();
    let two = T::lit(2.0);
    let eps = T::epsilon();
    let low: isize = 0;
    let high: isize = nn as isize - 1;
    let mut n: isize = nn as isize - 1;
    let mut exshift = zero;
    let (mut p, mut q, mut r, mut s, mut z) = (zero, zero, zero, zero, zero);
    let (mut t, mut w, mut x, mut y);

    macro_rules! hm {
        ($i:expr, $j:expr) => {
            h[($i) as usize][($j) as usize]
        };
    }
    macro_rules! vm {
        ($i:expr, $j:expr) => {
            v[($i) as usize][($j) as usize]
        };
    }
    macro_rules! di {
        ($v:ident, $i:expr) => {
            $v[($i) as usize]
        };
    }

    let mut norm = zero;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[i][j].abs();
        }
    }

    let mut iter = 0usize;
    let mut total_sweeps = 0usize;
    let sweep_cap = MAX_SWEEPS_PER_EIGENVALUE * nn.max(1);
    while n >= low {
        // Look for a single small subdiagonal element.
        let mut l = n;
        while l > low {
            s = hm!(l - 1, l - 1).abs() + hm!(l, l).abs();
            if s == zero {
                s = norm;
            }
            if hm!(l, l - 1).abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One root found.
            hm!(n, n) = hm!(n, n) + exshift;
            di!(d, n) = hm!(n, n);
            di!(e, n) = zero;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // Two roots found.
            w = hm!(n, n - 1) * hm!(n - 1, n);
            p = (hm!(n - 1, n - 1) - hm!(n, n)) / two;
            q = p * p + w;
            z = q.abs().sqrt();
            hm!(n, n) = hm!(n, n) + exshift;
            hm!(n - 1, n - 1) = hm!(n - 1, n - 1) + exshift;
            x = hm!(n, n);

            if q >= zero {
                z = if p >= zero { p + z } else { p - z };
                di!(d, n - 1) = x + z;
                di!(d, n) = di!(d, n - 1);
                if z != zero {
                    di!(d, n) = x - w / z;
                }
                di!(e, n - 1) = zero;
                di!(e, n) = zero;
                x = hm!(n, n - 1);
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;

                for j in (n - 1)..(nn as isize) {
                    z = hm!(n - 1, j);
                    hm!(n - 1, j) = q * z + p * hm!(n, j);
                    hm!(n, j) = q * hm!(n, j) - p * z;
                }
                for i in 0..=n {
                    z = hm!(i, n - 1);
                    hm!(i, n - 1) = q * z + p * hm!(i, n);
                    hm!(i, n) = q * hm!(i, n) - p * z;
                }
                for i in low..=high {
                    z = vm!(i, n - 1);
                    vm!(i, n - 1) = q * z + p * vm!(i, n);
                    vm!(i, n) = q * vm!(i, n) - p * z;
                }
            } else {
                di!(d, n - 1) = x + p;
                di!(d, n) = x + p;
                di!(e, n - 1) = z;
                di!(e, n) = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = hm!(n, n);
            y = zero;
            w = zero;
            if l < n {
                y = hm!(n - 1, n - 1);
                w = hm!(n, n - 1) * hm!(n - 1, n);
            }

            // Exceptional shifts.
            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    hm!(i, i) = hm!(i, i) - x;
                }
                s = hm!(n, n - 1).abs() + hm!(n - 1, n - 2).abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            if iter == 30 {
                s = (y - x) / two;
                s = s * s + w;
                if s > zero {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / two + s);
                    for i in low..=n {
                        hm!(i, i) = hm!(i, i) - s;
                    }
                    exshift += s;
                    x = T::lit(0.964);
                    y = x;
                    w = x;
                }
            }

            iter += 1;
            total_sweeps += 1;
            if total_sweeps > sweep_cap {
                return Err(NumericsError::NoConvergence {
                    iterations: total_sweeps,
                });
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = n - 2;
            while m >= l {
                z = hm!(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / hm!(m + 1, m) + hm!(m, m + 1);
                q = hm!(m + 1, m + 1) - z - r - s;
                r = hm!(m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if hm!(m, m - 1).abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (hm!(m - 1, m - 1).abs() + z.abs() + hm!(m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=n {
                hm!(i, i - 2) = zero;
                if i > m + 2 {
                    hm!(i, i - 3) = zero;
                }
            }

            // Double QR step on rows l..n, columns m..n.
            let mut k = m;
            while k <= n - 1 {
                let notlast = k != n - 1;
                if k != m {
                    p = hm!(k, k - 1);
                    q = hm!(k + 1, k - 1);
                    r = if notlast { hm!(k + 2, k - 1) } else { zero };
                    x = p.abs() + q.abs() + r.abs();
                    if x == zero {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < zero {
                    s = -s;
                }
                if s != zero {
                    if k != m {
                        hm!(k, k - 1) = -s * x;
                    } else if l != m {
                        hm!(k, k - 1) = -hm!(k, k - 1);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..(nn as isize) {
                        p = hm!(k, j) + q * hm!(k + 1, j);
                        if notlast {
                            p += r * hm!(k + 2, j);
                            hm!(k + 2, j) = hm!(k + 2, j) - p * z;
                        }
                        hm!(k, j) = hm!(k, j) - p * x;
                        hm!(k + 1, j) = hm!(k + 1, j) - p * y;
                    }
                    for i in 0..=n.min(k + 3) {
                        p = x * hm!(i, k) + y * hm!(i, k + 1);
                        if notlast {
                            p += z * hm!(i, k + 2);
                            hm!(i, k + 2) = hm!(i, k + 2) - p * r;
                        }
                        hm!(i, k) = hm!(i, k) - p;
                        hm!(i, k + 1) = hm!(i, k + 1) - p * q;
                    }
                    for i in low..=high {
                        p = x * vm!(i, k) + y * vm!(i, k + 1);
                        if notlast {
                            p += z * vm!(i, k + 2);
                            vm!(i, k + 2) = vm!(i, k + 2) - p * r;
                        }
                        vm!(i, k) = vm!(i, k) - p;
                        vm!(i, k + 1) = vm!(i, k + 1) - p * q;
                    }
                }
                k += 1;
            }
        }
    }

    if norm == zero {
        return Ok((d, e));
    }

    // Back substitution into the quasi-triangular form.
    for n in (0..nn as isize).rev() {
        p = di!(d, n);
        q = di!(e, n);

        if q == zero {
            let mut l = n;
            hm!(n, n) = one;
            for i in (0..n).rev() {
                w = hm!(i, i) - p;
                r = zero;
                for j in l..=n {
                    r += hm!(i, j) * hm!(j, n);
                }
                if di!(e, i) < zero {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if di!(e, i) == zero {
                        hm!(i, n) = if w != zero { -r / w } else { -r / (eps * norm) };
                    } else {
                        x = hm!(i, i + 1);
                        y = hm!(i + 1, i);
                        q = (di!(d, i) - p) * (di!(d, i) - p) + di!(e, i) * di!(e, i);
                        t = (x * s - z * r) / q;
                        hm!(i, n) = t;
                        hm!(i + 1, n) = if x.abs() > z.abs() {
                            (-r - w * t) / x
                        } else {
                            (-s - y * t) / z
                        };
                    }
                    t = hm!(i, n).abs();
                    if (eps * t) * t > one {
                        for j in i..=n {
                            hm!(j, n) = hm!(j, n) / t;
                        }
                    }
                }
            }
        } else if q < zero {
            let mut l = n - 1;
            if hm!(n, n - 1).abs() > hm!(n - 1, n).abs() {
                hm!(n - 1, n - 1) = q / hm!(n, n - 1);
                hm!(n - 1, n) = -(hm!(n, n) - p) / hm!(n, n - 1);
            } else {
                let (cr, ci) = cdiv(zero, -hm!(n - 1, n), hm!(n - 1, n - 1) - p, q);
                hm!(n - 1, n - 1) = cr;
                hm!(n - 1, n) = ci;
            }
            hm!(n, n - 1) = zero;
            hm!(n, n) = one;
            for i in (0..(n - 1)).rev() {
                let mut ra = zero;
                let mut sa = zero;
                for j in l..=n {
                    ra += hm!(i, j) * hm!(j, n - 1);
                    sa += hm!(i, j) * hm!(j, n);
                }
                w = hm!(i, i) - p;

                if di!(e, i) < zero {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if di!(e, i) == zero {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        hm!(i, n - 1) = cr;
                        hm!(i, n) = ci;
                    } else {
                        x = hm!(i, i + 1);
                        y = hm!(i + 1, i);
                        let mut vr = (di!(d, i) - p) * (di!(d, i) - p) + di!(e, i) * di!(e, i) - q * q;
                        let vi = (di!(d, i) - p) * two * q;
                        if vr == zero && vi == zero {
                            vr = eps * norm * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) = cdiv(
                            x * r - z * ra + q * sa,
                            x * s - z * sa - q * ra,
                            vr,
                            vi,
                        );
                        hm!(i, n - 1) = cr;
                        hm!(i, n) = ci;
                        if x.abs() > z.abs() + q.abs() {
                            hm!(i + 1, n - 1) = (-ra - w * hm!(i, n - 1) + q * hm!(i, n)) / x;
                            hm!(i + 1, n) = (-sa - w * hm!(i, n) - q * hm!(i, n - 1)) / x;
                        } else {
                            let (cr, ci) =
                                cdiv(-r - y * hm!(i, n - 1), -s - y * hm!(i, n), z, q);
                            hm!(i + 1, n - 1) = cr;
                            hm!(i + 1, n) = ci;
                        }
                    }
                    t = hm!(i, n - 1).abs().max(hm!(i, n).abs());
                    if (eps * t) * t > one {
                        for j in i..=n {
                            hm!(j, n - 1) = hm!(j, n - 1) / t;
                            hm!(j, n) = hm!(j, n) / t;
                        }
                    }
                }
            }
        }
    }

    // Back transformation to the original basis.
    for j in (low..nn as isize).rev() {
        for i in low..=high {
            z = zero;
            for k in low..=j.min(high) {
                z += vm!(i, k) * hm!(k, j);
            }
            vm!(i, j) = z;
        }
    }

    Ok((d, e))
}
