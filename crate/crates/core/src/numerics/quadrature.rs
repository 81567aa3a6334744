//! Adaptive Gauss–Kronrod and fixed Gauss–Legendre quadrature for complex, vector-valued
//! integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::NumericsError;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Integral estimate with its error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: Vec<Complex64>,
    /// Bound on the max-norm of the error.
    pub error: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Tolerance relative to `∫|f|`; useful when `∫f` cancels far below the integrand scale.
    pub l1_rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            l1_rel_tol: 0.0,
            max_intervals: 50_000,
        }
    }
}

impl QuadOptions {
    fn target(&self, value: &[Complex64], l1: f64) -> f64 {
        self.abs_tol
            .max(self.rel_tol * max_norm(value))
            .max(self.l1_rel_tol * l1)
    }
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

// QUADPACK's rescaling of the raw Gauss/Kronrod difference, and its roundoff floor.
fn rescale_error(raw: f64, res_abs: f64, res_asc: f64) -> (f64, f64) {
    let mut err = raw;
    if res_asc != 0.0 && err != 0.0 {
        let r = 200.0 * err / res_asc;
        err = res_asc * (r * r.sqrt()).min(1.0);
    }
    let mut floor = 0.0;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        floor = 50.0 * f64::EPSILON * res_abs;
        err = err.max(floor);
    }
    (err, floor)
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: f64,
    floor: f64,
}

// Heap entry ordered by panel error.
struct Worst(f64, usize);

impl PartialEq for Worst {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0).is_eq()
    }
}
impl Eq for Worst {}
impl PartialOrd for Worst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Worst {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

// |re| + |im|: within √2 of the modulus, cheap and overflow-free. Only feeds the error
// heuristics.
#[inline]
fn mag(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// One 21-point Kronrod panel. `buf` holds the 21 integrand vectors.
fn kronrod<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [Vec<Complex64>]) -> Panel
where
    F: FnMut(f64, &mut [Complex64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    f(center, &mut buf[0]);
    for j in 0..10 {
        let dx = half * XGK[j];
        let (lo, hi) = buf[1..].split_at_mut(10);
        f(center - dx, &mut lo[j]);
        f(center + dx, &mut hi[j]);
    }

    let mut value = vec![Complex64::new(0.0, 0.0); dim];
    let mut error: f64 = 0.0;
    let mut floor: f64 = 0.0;
    for (d, out) in value.iter_mut().enumerate() {
        let fc = buf[0][d];
        let mut res_k = fc * WGK[10];
        let mut res_g = Complex64::new(0.0, 0.0);
        let mut res_abs = mag(fc) * WGK[10];
        for j in 0..10 {
            let f1 = buf[1 + j][d];
            let f2 = buf[11 + j][d];
            res_k += (f1 + f2) * WGK[j];
            res_abs += (mag(f1) + mag(f2)) * WGK[j];
            // Gauss nodes are the odd Kronrod abscissae.
            if j % 2 == 1 {
                res_g += (f1 + f2) * WG[j / 2];
            }
        }
        let mean = res_k * 0.5;
        let mut res_asc = mag(fc - mean) * WGK[10];
        for j in 0..10 {
            res_asc += (mag(buf[1 + j][d] - mean) + mag(buf[11 + j][d] - mean)) * WGK[j];
        }
        let scale = half.abs();
        *out = res_k * half;
        let raw = ((res_k - res_g) * half).norm();
        let (e, f) = rescale_error(raw, res_abs * scale, res_asc * scale);
        error = error.max(e);
        floor = floor.max(f);
    }
    Panel {
        a,
        b,
        value,
        error,
        floor,
    }
}

/// Adaptive bisection over an initial partition `breaks` (ascending, at least two points) for
/// a vector-valued integrand of dimension `dim`. `f(x, out)` writes the integrand at `x`.
///
/// Converges when the summed error bound is below
/// `max(abs_tol, rel_tol·‖I‖_max, l1_rel_tol·∫|f|)`, or when it
/// consists only of the roundoff floor `50ε∫|f|` that no subdivision can lower (the returned
/// `error` then exceeds the requested tolerance). Otherwise returns `ToleranceNotMet` with the
/// best estimate.
pub fn integrate_vector<F>(
    mut f: F,
    breaks: &[f64],
    dim: usize,
    opts: QuadOptions,
) -> Result<Estimate, NumericsError>
where
    F: FnMut(f64, &mut [Complex64]),
{
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut buf = vec![vec![Complex64::new(0.0, 0.0); dim]; 21];
    let mut panels: Vec<Panel> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&mut f, w[0], w[1], dim, &mut buf))
        .collect();
    let mut heap: BinaryHeap<Worst> = panels
        .iter()
        .enumerate()
        .map(|(k, p)| Worst(p.error, k))
        .collect();
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    let (mut err, mut floor) = (0.0, 0.0);
    for p in &panels {
        for (t, v) in total.iter_mut().zip(&p.value) {
            *t += v;
        }
        err += p.error;
        floor += p.floor;
    }

    loop {
        if total.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NumericsError::NonFinite("quadrature integrand"));
        }
        let tol = opts.target(&total, floor / (50.0 * f64::EPSILON));
        let at_floor = err <= floor * (1.0 + 1e-9);
        if err <= tol || at_floor {
            // Re-sum exactly; the running totals drift by rounding.
            let mut value = vec![Complex64::new(0.0, 0.0); dim];
            let mut error = 0.0;
            for p in &panels {
                for (t, v) in value.iter_mut().zip(&p.value) {
                    *t += v;
                }
                error += p.error;
            }
            return Ok(Estimate {
                value,
                error,
                intervals: panels.len(),
            });
        }
        let Worst(_, worst) = heap.pop().expect("nonempty partition");
        let (a, b) = (panels[worst].a, panels[worst].b);
        let mid = 0.5 * (a + b);
        if panels.len() >= opts.max_intervals || !(mid > a && mid < b) {
            return Err(NumericsError::ToleranceNotMet {
                value: total,
                error: err,
                tolerance: tol,
                intervals: panels.len(),
            });
        }
        let left = kronrod(&mut f, a, mid, dim, &mut buf);
        let right = kronrod(&mut f, mid, b, dim, &mut buf);
        let old = &panels[worst];
        for d in 0..dim {
            total[d] += left.value[d] + right.value[d] - old.value[d];
        }
        err += left.error + right.error - old.error;
        floor += left.floor + right.floor - old.floor;
        heap.push(Worst(left.error, worst));
        heap.push(Worst(right.error, panels.len()));
        panels[worst] = left;
        panels.push(right);
    }
}

/// Scalar complex integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate_adaptive<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Complex64, NumericsError>
where
    F: FnMut(f64) -> Complex64,
{
    let opts = QuadOptions {
        abs_tol: tol,
        rel_tol: 0.0,
        ..QuadOptions::default()
    };
    integrate_vector(|x, out| out[0] = f(x), &[a, b], 1, opts).map(|e| e.value[0])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n(x) and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_over_half_period() {
        let v = integrate_adaptive(|x| Complex64::new(x.sin(), 0.0), 0.0, std::f64::consts::PI, 1e-10)
            .unwrap();
        assert!((v.re - 2.0).abs() < 1e-10 && v.im == 0.0);
    }

    #[test]
    fn gaussian_normalisation() {
        let s = 0.37;
        let v = integrate_adaptive(
            |x| Complex64::new((-x * x / (2.0 * s * s)).exp(), 0.0),
            -8.0 * s,
            8.0 * s,
            1e-12,
        )
        .unwrap();
        let want = s * (2.0 * std::f64::consts::PI).sqrt();
        assert!((v.re - want).abs() < 1e-10 * want);
    }

    #[test]
    fn cap_reports_best_estimate() {
        let opts = QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 0.0,
            l1_rel_tol: 0.0,
            max_intervals: 4,
        };
        let r = integrate_vector(|x, o| o[0] = Complex64::new(x.abs().sqrt(), 0.0), &[-1.0, 1.0], 1, opts);
        match r {
            Err(NumericsError::ToleranceNotMet { value, intervals, .. }) => {
                assert_eq!(intervals, 4);
                assert!((value[0].re - 4.0 / 3.0).abs() < 1e-2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 20] {
            let (x, w) = gauss_legendre(n);
            let p = 2 * n as i32 - 2;
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            assert!((got - 2.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n}");
        }
    }
}
