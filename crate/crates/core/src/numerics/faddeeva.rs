use std::f64::consts::PI;

use num_complex::Complex64;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
// Trapezoid step; the discretisation error is about exp(-π²/h²) ≈ 7e-18.
const STEP: f64 = 0.5;
const NODES: i32 = 16;

/// Faddeeva function `w(z) = exp(−z²)·erfc(−iz)`.
///
/// Upper half plane: pole-corrected trapezoid rule for moderate `Im z`, Laplace continued
/// fraction beyond. Lower half plane via `w(z) = 2exp(−z²) − w(−z)`, which overflows to
/// infinity once `Im z` is strongly negative.
pub fn faddeeva(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return 2.0 * (-z * z).exp() - faddeeva(-z);
    }
    // w(−x + iy) = conj(w(x + iy)): evaluate on x ≥ 0 only, so the symmetry is exact.
    if z.re < 0.0 {
        return upper_right(Complex64::new(-z.re, z.im)).conj();
    }
    upper_right(z)
}

fn upper_right(z: Complex64) -> Complex64 {
    if z.im >= 6.0 || z.norm_sqr() >= 1.0e4 {
        continued_fraction(z)
    } else {
        trapezoid(z)
    }
}

fn continued_fraction(z: Complex64) -> Complex64 {
    let r = z.norm();
    let terms = if r > 1.0e3 { 4 } else { 12 + (1800.0 / (r * r)).ceil() as usize };
    let mut t = z;
    for k in (1..=terms).rev() {
        t = z - (0.5 * k as f64) / t;
    }
    Complex64::new(0.0, FRAC_1_SQRT_PI) / t
}

fn trapezoid(z: Complex64) -> Complex64 {
    let u = z.re / STEP;
    let shifted = (u - u.round()).abs() < 0.25;
    let offset = if shifted { 0.5 } else { 0.0 };

    let mut sum = Complex64::new(0.0, 0.0);
    for n in -NODES..NODES {
        let t = (n as f64 + offset) * STEP;
        sum += (-t * t).exp() / (z - t);
    }
    let theta = 2.0 * PI / STEP;
    let e = (Complex64::i() * theta * z).exp();
    let num = 2.0 * (-z * z + Complex64::i() * theta * z).exp();
    let corr = if shifted { num / (e + 1.0) } else { num / (e - 1.0) };
    Complex64::new(0.0, STEP / PI) * sum + corr
}
