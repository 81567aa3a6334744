use num_traits::{Float, One};

use super::lu::Lu;
use super::matrix::Matrix;
use super::scalar::{Real, Scalar};
use super::NumericsError;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// 1-norm bounds below which the degree-m approximant is accurate to double precision.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152e0;

fn coeff<S: Scalar>(b: f64) -> S {
    S::from_real(S::Real::lit(b))
}

/// Odd/even split `U = A·Σ b_{2k+1} A^{2k}`, `V = Σ b_{2k} A^{2k}` for the low-order approximants.
fn pade_low<S: Scalar>(a: &Matrix<S>, b: &[f64]) -> (Matrix<S>, Matrix<S>) {
    let n = a.rows();
    let a2 = a * a;
    let mut powers = vec![Matrix::identity(n), a2.clone()];
    while powers.len() < b.len() / 2 {
        let next = powers.last().map(|p| p * &a2).unwrap_or_else(|| a2.clone());
        powers.push(next);
    }
    let mut u = Matrix::zeros(n, n);
    let mut v = Matrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        u = &u + &p.scale(coeff(b[2 * k + 1]));
        v = &v + &p.scale(coeff(b[2 * k]));
    }
    (a * &u, v)
}

fn pade13<S: Scalar>(a: &Matrix<S>) -> (Matrix<S>, Matrix<S>) {
    let n = a.rows();
    let b = |k: usize| coeff::<S>(B13[k]);
    let ident = Matrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |m6: S, m4: S, m2: S, m0: S| {
        let t = &(&a6.scale(m6) + &a4.scale(m4)) + &a2.scale(m2);
        &t + &ident.scale(m0)
    };
    let u_inner = &a6 * &(&(&a6.scale(b(13)) + &a4.scale(b(11))) + &a2.scale(b(9)));
    let u = a * &(&u_inner + &lin(b(7), b(5), b(3), b(1)));
    let v_inner = &a6 * &(&(&a6.scale(b(12)) + &a4.scale(b(10))) + &a2.scale(b(8)));
    let v = &v_inner + &lin(b(6), b(4), b(2), b(0));
    (u, v)
}

/// Matrix exponential by scaling and squaring with a diagonal Padé approximant of degree
/// up to 13.
pub fn expm<S: Scalar>(a: &Matrix<S>) -> Result<Matrix<S>, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::DimensionMismatch {
            expected: (a.rows(), a.rows()),
            found: (a.rows(), a.cols()),
        });
    }
    if !a.is_finite() {
        return Err(NumericsError::NonFinite("expm input"));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let norm = a.norm_1();

    let (u, v, squarings) = match THETA
        .iter()
        .find(|(_, th)| norm <= S::Real::lit(*th))
        .map(|&(m, _)| m)
    {
        Some(m) => {
            let b: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(a, b);
            (u, v, 0)
        }
        None => {
            let ratio = norm / S::Real::lit(THETA13);
            let s = if ratio > S::Real::one() {
                num_traits::ToPrimitive::to_i32(&ratio.log2().ceil()).unwrap_or(0).max(0)
            } else {
                0
            };
            let scaled = a.scale(S::from_real(S::Real::lit(2f64.powi(-s))));
            let (u, v) = pade13(&scaled);
            (u, v, s)
        }
    };

    // (V − U)⁻¹ (V + U)
    let p = &v + &u;
    let q = &v - &u;
    let mut r = Lu::factor(&q)?.solve_matrix(&p)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(NumericsError::NonFinite("expm"));
    }
    Ok(r)
}
