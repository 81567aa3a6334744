//! Stimulated Raman and shaped-pulse absorption spectra of the bath-modulated modes.
//!
//! Frequency bookkeeping: for a reported Raman shift `x` the probe-minus-pump frequency is
//! `ν = ω − ω₁ = convention.detuning(x)`. The coherence resolvent is evaluated at `ν`,
//! the probe spectrum at `ν` relative to its carrier offset.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::kinetics::{propagate, KineticsError, RateMatrix};
use crate::numerics::quadrature::{gauss_legendre, integrate_vector, QuadOptions};
use crate::numerics::{c, eig_real_nonsymmetric, expm, faddeeva, Lu, NumericsError};
use crate::pulses::PulseSet;
use crate::sle::{CoherenceBlock, ModelError, SleModel};
use crate::units::{cm_to_rad_per_s, s_to_fs};
use crate::{ComplexMatrix, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("numerical failure at shift {shift_cm} cm^-1, delay {delay_fs} fs: {source}")]
    AtPoint {
        shift_cm: f64,
        delay_fs: f64,
        source: NumericsError,
    },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("the analytic overlap needs a pole-form kernel")]
    NeedsPoles,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How the delay-dependent overlap integral is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum EvaluationPath {
    /// Closed form through the Faddeeva function.
    #[default]
    Analytic,
    /// Adaptive quadrature over the probe spectrum.
    Quadrature,
    /// Double time-domain quadrature of the matter correlation function.
    TimeDomain,
}

impl EvaluationPath {
    pub fn as_str(self) -> &'static str {
        match self {
            EvaluationPath::Analytic => "analytic",
            EvaluationPath::Quadrature => "quadrature",
            EvaluationPath::TimeDomain => "time-domain",
        }
    }
}

impl fmt::Display for EvaluationPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvaluationPath {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "quadrature" => Ok(Self::Quadrature),
            "time-domain" => Ok(Self::TimeDomain),
            other => Err(format!(
                "unknown evaluation path '{other}' (expected analytic, quadrature or time-domain)"
            )),
        }
    }
}

/// Strictly ascending Raman-shift grid in cm⁻¹.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftGrid {
    points_cm: Vec<f64>,
}

impl ShiftGrid {
    pub fn new(points_cm: Vec<f64>) -> Result<Self, SignalError> {
        if points_cm.is_empty() {
            return Err(SignalError::InvalidGrid("grid is empty".into()));
        }
        if points_cm.iter().any(|x| !x.is_finite()) {
            return Err(SignalError::InvalidGrid("grid has non-finite points".into()));
        }
        if points_cm.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SignalError::InvalidGrid("grid must be strictly ascending".into()));
        }
        Ok(Self { points_cm })
    }

    /// `min, min + step, …` up to and including `max` (within a small rounding slack).
    pub fn uniform(min_cm: f64, max_cm: f64, step_cm: f64) -> Result<Self, SignalError> {
        if !(step_cm > 0.0 && step_cm.is_finite()) {
            return Err(SignalError::InvalidGrid(format!("step must be positive, got {step_cm}")));
        }
        if !(max_cm >= min_cm) {
            return Err(SignalError::InvalidGrid(format!(
                "max {max_cm} is below min {min_cm}"
            )));
        }
        let n = ((max_cm - min_cm) / step_cm + 1e-9).floor() as usize + 1;
        Self::new((0..n).map(|i| min_cm + step_cm * i as f64).collect())
    }

    pub fn points_cm(&self) -> &[f64] {
        &self.points_cm
    }

    pub fn len(&self) -> usize {
        self.points_cm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points_cm.is_empty()
    }

    pub fn step_cm(&self) -> Option<f64> {
        self.points_cm.windows(2).next().map(|w| w[1] - w[0])
    }
}

/// A sampled spectrum at one delay.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub shifts_cm: Vec<f64>,
    /// Seconds.
    pub delay: f64,
    pub values: Vec<f64>,
    pub label: String,
    pub path: EvaluationPath,
}

impl Spectrum {
    pub fn peak_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Values divided by the largest magnitude (unchanged if all zero).
    pub fn normalized(&self) -> Vec<f64> {
        let p = self.peak_abs();
        if p == 0.0 {
            return self.values.clone();
        }
        self.values.iter().map(|v| v / p).collect()
    }

    pub fn delay_fs(&self) -> f64 {
        s_to_fs(self.delay)
    }
}

/// Partial-fraction form of the damped population spectrum:
/// `ρ_s(t) = Σ_j c_sj e^{−λ_j t}`, so `ρ_s(−Δ) = Σ_j c_sj (−i)/(iΔ + λ_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapKernel {
    poles: Vec<C64>,
    /// `weights[(s, j)] = c_sj`.
    weights: ComplexMatrix,
}

impl OverlapKernel {
    pub fn new(poles: Vec<C64>, weights: ComplexMatrix) -> Result<Self, SignalError> {
        if weights.cols() != poles.len() {
            return Err(NumericsError::DimensionMismatch {
                expected: (weights.rows(), poles.len()),
                found: (weights.rows(), weights.cols()),
            }
            .into());
        }
        if poles.iter().any(|p| !(p.re > 0.0)) {
            return Err(SignalError::InvalidGrid(
                "kernel poles must have positive real part".into(),
            ));
        }
        Ok(Self { poles, weights })
    }

    /// Eigen-expansion of `exp(−(K + 2γ)t)·p0`.
    pub fn from_bath(bath: &RateMatrix, dephasing: f64, p0: &[f64]) -> Result<Self, SignalError> {
        let dec = eig_real_nonsymmetric(bath.matrix())?;
        let p0c: Vec<C64> = p0.iter().map(|&p| c(p, 0.0)).collect();
        let coeff = dec.left_inverse.mul_vec(&p0c)?;
        let n = bath.states();
        let weights = ComplexMatrix::from_fn(n, n, |s, j| dec.right_vectors[(s, j)] * coeff[j]);
        let poles = dec
            .eigenvalues
            .iter()
            .map(|&k| k + 2.0 * dephasing)
            .collect();
        Self::new(poles, weights)
    }

    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn weights(&self) -> &ComplexMatrix {
        &self.weights
    }

    pub fn states(&self) -> usize {
        self.weights.rows()
    }

    /// Damped populations at time `t ≥ 0`.
    pub fn populations(&self, t: f64) -> Vec<C64> {
        let e: Vec<C64> = self.poles.iter().map(|&l| (-l * t).exp()).collect();
        self.weights.mul_vec(&e).expect("kernel shape")
    }

    fn min_decay(&self) -> f64 {
        self.poles.iter().fold(f64::INFINITY, |m, p| m.min(p.re))
    }
}

/// Population spectrum without a pole expansion, through a linear solve per frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolventKernel {
    bath: RateMatrix,
    dephasing: f64,
    p0: Vec<f64>,
}

impl ResolventKernel {
    pub fn new(bath: RateMatrix, dephasing: f64, p0: Vec<f64>) -> Self {
        Self {
            bath,
            dephasing,
            p0,
        }
    }

    /// `−i(iΔ + K + 2γ)⁻¹ p0` at complex `Δ`.
    fn eval(&self, delta: C64, out: &mut [C64]) -> Result<(), NumericsError> {
        let a = self
            .bath
            .matrix()
            .to_complex()
            .add_diagonal(c(2.0 * self.dephasing, 0.0) + c(0.0, 1.0) * delta);
        let rhs: Vec<C64> = self.p0.iter().map(|&p| c(p, 0.0)).collect();
        let x = Lu::factor(&a)?.solve(&rhs)?;
        for (o, v) in out.iter_mut().zip(x) {
            *o = v * c(0.0, -1.0);
        }
        Ok(())
    }
}

/// Population spectrum of one dephasing class, in whichever form is available.
#[derive(Clone, Debug, PartialEq)]
pub enum PopulationKernel {
    Poles(OverlapKernel),
    Resolvent(ResolventKernel),
}

impl PopulationKernel {
    fn states(&self) -> usize {
        match self {
            PopulationKernel::Poles(k) => k.states(),
            PopulationKernel::Resolvent(r) => r.p0.len(),
        }
    }

    /// `ρ(−Δ)` into `out`; `terms` is scratch space.
    fn eval(&self, delta: C64, out: &mut [C64], terms: &mut Vec<C64>) -> Result<(), NumericsError> {
        match self {
            PopulationKernel::Poles(k) => {
                terms.clear();
                terms.extend(k.poles.iter().map(|&l| {
                    // −i/z with z = iΔ + λ
                    let z = c(l.re - delta.im, l.im + delta.re);
                    let d = z.norm_sqr();
                    c(-z.im / d, -z.re / d)
                }));
                for (s, o) in out.iter_mut().enumerate() {
                    *o = k.weights.row(s).iter().zip(terms.iter()).map(|(w, t)| w * t).sum();
                }
                Ok(())
            }
            PopulationKernel::Resolvent(r) => r.eval(delta, out),
        }
    }

    fn min_decay(&self) -> f64 {
        match self {
            PopulationKernel::Poles(k) => k.min_decay(),
            // Chain generators have spectra in the closed right half plane.
            PopulationKernel::Resolvent(r) => 2.0 * r.dephasing,
        }
    }

    fn pole_positions(&self) -> Vec<f64> {
        match self {
            PopulationKernel::Poles(k) => k.poles.iter().map(|p| -p.im).collect(),
            PopulationKernel::Resolvent(_) => vec![0.0],
        }
    }
}

/// Single-pole overlap
/// `J(λ) = ∫ dΔ/2π Ẽ_p(ω + Δ) e^{iΔT} (−i)/(iΔ + λ) = −i ∫₀^∞ dt e^{−λt} e^{−ia(T−t)} e^{−(T−t)²/2σ²}`
/// with `a = ω − ω_p`, in closed form.
pub fn pole_overlap(lambda: C64, a: f64, delay: f64, sigma: f64) -> C64 {
    let beta = c(0.0, a) - lambda;
    let z0 = -(beta * (sigma * sigma) + delay) / (sigma * 2f64.sqrt());
    let pref = c(0.0, -sigma * (PI / 2.0).sqrt());
    let gauss = (c(-0.5 * delay * delay / (sigma * sigma), -a * delay)).exp();
    // Use w on whichever of ±iz₀ lies in the upper half plane.
    if z0.re >= 0.0 {
        pref * gauss * faddeeva(c(0.0, 1.0) * z0)
    } else {
        let tail = (-lambda * delay + beta * beta * (0.5 * sigma * sigma)).exp();
        pref * (tail * 2.0 - gauss * faddeeva(c(0.0, -1.0) * z0))
    }
}

/// Quadrature settings for the overlap integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapQuadrature {
    pub rel_tol: f64,
    /// Alternative target relative to the integral of the integrand's magnitude; governs
    /// points where the overlap cancels far below the probe scale.
    pub integrand_rel_tol: f64,
    /// Half-width of the probe window in units of 1/σ.
    pub window_sigmas: f64,
    /// Contour shift as a fraction of the slowest population decay rate.
    pub contour_shift: f64,
    pub max_intervals: usize,
}

impl Default for OverlapQuadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            integrand_rel_tol: 1e-12,
            window_sigmas: 12.0,
            contour_shift: 0.9,
            max_intervals: 200_000,
        }
    }
}

/// Overlap vector `O_s(ω, T) = ∫ dΔ/2π Ẽ_p(ω + Δ) e^{iΔT} ρ_s(−Δ)`; `nu` is `ω − ω₁`.
pub fn overlap_integral(
    kernel: &PopulationKernel,
    pulses: &PulseSet,
    nu: f64,
    delay: f64,
    path: EvaluationPath,
) -> Result<Vec<C64>, SignalError> {
    match path {
        EvaluationPath::Analytic | EvaluationPath::TimeDomain => match kernel {
            PopulationKernel::Poles(k) => Ok(overlap_analytic(k, pulses, nu, delay)),
            PopulationKernel::Resolvent(_) => Err(SignalError::NeedsPoles),
        },
        EvaluationPath::Quadrature => {
            overlap_quadrature(kernel, pulses, nu, delay, &OverlapQuadrature::default())
        }
    }
}

fn overlap_analytic(k: &OverlapKernel, pulses: &PulseSet, nu: f64, delay: f64) -> Vec<C64> {
    let a = nu - pulses.probe_center_offset;
    let sigma = pulses.probe_duration;
    let j: Vec<C64> = k
        .poles
        .iter()
        .map(|&l| pole_overlap(l, a, delay, sigma))
        .collect();
    k.weights.mul_vec(&j).expect("kernel shape")
}

/// Quadrature form of [`overlap_integral`] along `Im Δ = η`, below the kernel poles.
pub fn overlap_quadrature(
    kernel: &PopulationKernel,
    pulses: &PulseSet,
    nu: f64,
    delay: f64,
    opts: &OverlapQuadrature,
) -> Result<Vec<C64>, SignalError> {
    let sigma = pulses.probe_duration;
    let center = pulses.probe_center_offset - nu;
    let half = opts.window_sigmas / sigma;
    let eta = opts.contour_shift * kernel.min_decay();
    let norm = sigma * (2.0 * PI).sqrt() / (2.0 * PI);
    let weight = move |delta: C64| {
        let d = delta - center;
        (d * d * (-0.5 * sigma * sigma)).exp() * norm * (c(0.0, delay) * delta).exp()
    };
    // Below e^{-32} of the peak the starting partition need not follow the oscillation.
    let core = half.min(8.0 / sigma);
    let dense = (center - core, center + core);
    integrate_overlap(kernel, weight, (center - half, center + half), dense, eta, delay, opts)
}

/// `∫_{lo}^{hi} dΔ f(Δ + iη) e^{i(Δ+iη)T} ρ(−(Δ + iη))` for an analytic spectral weight `f`
/// (which must include the 1/2π measure).
pub fn overlap_quadrature_with<F>(
    kernel: &PopulationKernel,
    spectrum: F,
    lo: f64,
    hi: f64,
    eta: f64,
    delay: f64,
    opts: &OverlapQuadrature,
) -> Result<Vec<C64>, SignalError>
where
    F: Fn(C64) -> C64,
{
    let weight = |d: C64| spectrum(d) * (c(0.0, delay) * d).exp();
    integrate_overlap(kernel, weight, (lo, hi), (lo, hi), eta, delay, opts)
}

// `weight` carries the spectrum and the delay phase; the starting partition resolves the
// oscillation on `dense`.
fn integrate_overlap<F>(
    kernel: &PopulationKernel,
    weight: F,
    (lo, hi): (f64, f64),
    dense: (f64, f64),
    eta: f64,
    delay: f64,
    opts: &OverlapQuadrature,
) -> Result<Vec<C64>, SignalError>
where
    F: Fn(C64) -> C64,
{
    let n = kernel.states();
    let gap = (kernel.min_decay() - eta).max(f64::MIN_POSITIVE);
    let mut breaks = vec![lo, hi];
    for p in kernel.pole_positions() {
        for k in [0.0, 1.0, 4.0, 16.0, 64.0] {
            for sgn in [-1.0, 1.0] {
                let x = p + sgn * k * gap;
                if x > lo && x < hi {
                    breaks.push(x);
                }
            }
        }
    }
    if delay > 0.0 {
        // About two oscillations of e^{iΔT} per starting panel.
        let width = 4.0 * PI / delay;
        let (a, b) = dense;
        let count = ((b - a) / width).ceil().min(1e6) as usize;
        breaks.extend((0..=count).map(|i| a + (b - a) * i as f64 / count as f64));
        breaks.retain(|&x| x >= lo && x <= hi);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    breaks.dedup();

    let mut failure = None;
    let mut rho = vec![c(0.0, 0.0); n];
    let mut terms = Vec::with_capacity(n);
    let est = integrate_vector(
        |x, out| {
            let d = c(x, eta);
            let w = weight(d);
            // The kernel takes Δ and returns ρ(−Δ).
            if let Err(e) = kernel.eval(d, &mut rho, &mut terms) {
                failure.get_or_insert(e);
                out.iter_mut().for_each(|o| *o = c(0.0, 0.0));
                return;
            }
            for (o, r) in out.iter_mut().zip(&rho) {
                *o = w * r;
            }
        },
        &breaks,
        n,
        QuadOptions {
            abs_tol: 0.0,
            rel_tol: opts.rel_tol,
            l1_rel_tol: opts.integrand_rel_tol,
            max_intervals: opts.max_intervals,
        },
    );
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(est?.value)
}

// One population kernel per distinct dephasing rate.
struct KernelSet {
    kernels: Vec<(f64, PopulationKernel)>,
    of_mode: Vec<usize>,
    path: EvaluationPath,
}

impl KernelSet {
    fn build(model: &SleModel, path: EvaluationPath) -> Result<Self, SignalError> {
        let mut kernels: Vec<(f64, PopulationKernel)> = Vec::new();
        let mut of_mode = Vec::new();
        let mut effective = path;
        for mode in model.modes() {
            let g = mode.dephasing;
            if let Some(i) = kernels.iter().position(|(k, _)| *k == g) {
                of_mode.push(i);
                continue;
            }
            let kernel = match OverlapKernel::from_bath(model.bath(), g, model.initial()) {
                Ok(k) => PopulationKernel::Poles(k),
                Err(SignalError::Numerics(
                    NumericsError::NoConvergence { .. } | NumericsError::IllConditioned { .. },
                )) => {
                    // No usable eigenbasis: integrate the resolvent numerically instead.
                    effective = EvaluationPath::Quadrature;
                    PopulationKernel::Resolvent(ResolventKernel::new(
                        model.bath().clone(),
                        g,
                        model.initial().to_vec(),
                    ))
                }
                Err(e) => return Err(e),
            };
            of_mode.push(kernels.len());
            kernels.push((g, kernel));
        }
        // A fallback kernel forces every class onto the quadrature path.
        Ok(Self {
            kernels,
            of_mode,
            path: effective,
        })
    }
}

fn at_point(shift_cm: f64, delay: f64) -> impl Fn(SignalError) -> SignalError {
    move |e| match e {
        SignalError::Numerics(source) => SignalError::AtPoint {
            shift_cm,
            delay_fs: s_to_fs(delay),
            source,
        },
        other => other,
    }
}

/// Delay-independent part of a stimulated Raman evaluation on a fixed grid: coherence
/// resolvent column sums and population kernels. Reuse it across delays.
pub struct FsrsEvaluator<'a> {
    model: &'a SleModel,
    grid: ShiftGrid,
    nu: Vec<f64>,
    /// `column_sums[point][mode][state]`.
    column_sums: Vec<Vec<Vec<C64>>>,
    kernels: KernelSet,
    quadrature: OverlapQuadrature,
}

impl<'a> FsrsEvaluator<'a> {
    pub fn new(
        model: &'a SleModel,
        grid: &ShiftGrid,
        path: EvaluationPath,
    ) -> Result<Self, SignalError> {
        let conv = model.pulses().convention;
        let nu: Vec<f64> = grid
            .points_cm()
            .iter()
            .map(|&x| conv.detuning(cm_to_rad_per_s(x)))
            .collect();
        let blocks: Vec<CoherenceBlock> = (0..model.modes().len())
            .map(|m| model.coherence_block(m))
            .collect();
        let column_sums = nu
            .par_iter()
            .zip(grid.points_cm().par_iter())
            .map(|(&v, &x)| {
                blocks
                    .iter()
                    .map(|b| b.green_freq_column_sums(v))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| at_point(x, 0.0)(e.into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let kernel_path = if path == EvaluationPath::TimeDomain {
            EvaluationPath::Analytic
        } else {
            path
        };
        Ok(Self {
            model,
            grid: grid.clone(),
            nu,
            column_sums,
            kernels: KernelSet::build(model, kernel_path)?,
            quadrature: OverlapQuadrature::default(),
        })
    }

    pub fn with_quadrature(mut self, quadrature: OverlapQuadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    /// Path actually used (quadrature if the eigenbasis was unusable).
    pub fn path(&self) -> EvaluationPath {
        self.kernels.path
    }

    fn point(&self, i: usize, delay: f64) -> Result<f64, SignalError> {
        let pulses = self.model.pulses();
        let sigma = pulses.probe_duration;
        let nu = self.nu[i];
        let mut overlaps = Vec::with_capacity(self.kernels.kernels.len());
        for (_, k) in &self.kernels.kernels {
            overlaps.push(match self.kernels.path {
                EvaluationPath::Quadrature => {
                    overlap_quadrature(k, pulses, nu, delay, &self.quadrature)?
                }
                path => overlap_integral(k, pulses, nu, delay, path)?,
            });
        }
        let mut acc = c(0.0, 0.0);
        for (m, mode) in self.model.modes().iter().enumerate() {
            let o = &overlaps[self.kernels.of_mode[m]];
            let r = &self.column_sums[i][m];
            let s: C64 = r.iter().zip(o).map(|(a, b)| a * b).sum();
            acc += s * mode.raman_weight();
        }
        let e = pulses.probe_envelope_freq(nu);
        let v = (c(0.0, -2.0) * e * acc).im / (sigma * sigma);
        if !v.is_finite() {
            return Err(NumericsError::NonFinite("stimulated Raman signal").into());
        }
        Ok(v)
    }

    pub fn spectrum(&self, delay: f64) -> Result<Spectrum, SignalError> {
        let values = if delay < 0.0 {
            vec![0.0; self.grid.len()]
        } else {
            (0..self.grid.len())
                .into_par_iter()
                .map(|i| {
                    self.point(i, delay)
                        .map_err(at_point(self.grid.points_cm()[i], delay))
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(Spectrum {
            shifts_cm: self.grid.points_cm().to_vec(),
            delay,
            values,
            label: self.model.label().to_string(),
            path: self.kernels.path,
        })
    }

    /// All delays; every (delay, shift) pair is independent.
    pub fn sweep(&self, delays: &[f64]) -> Result<Vec<Spectrum>, SignalError> {
        let n = self.grid.len();
        let flat = (0..delays.len() * n)
            .into_par_iter()
            .map(|k| {
                let (d, i) = (delays[k / n], k % n);
                if d < 0.0 {
                    Ok(0.0)
                } else {
                    self.point(i, d).map_err(at_point(self.grid.points_cm()[i], d))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(delays
            .iter()
            .zip(flat.chunks(n))
            .map(|(&delay, values)| Spectrum {
                shifts_cm: self.grid.points_cm().to_vec(),
                delay,
                values: values.to_vec(),
                label: self.model.label().to_string(),
                path: self.kernels.path,
            })
            .collect())
    }
}

/// Stimulated Raman spectrum
/// `S(ω, T) = Im[−2i Ẽ_p(ω) Σ_modes α²μ² Σ_s (1ᵀG(ω − ω₁))_s O_s(ω, T)] / σ²`.
pub fn fsrs_spectrum(
    model: &SleModel,
    grid: &ShiftGrid,
    delay: f64,
    path: EvaluationPath,
) -> Result<Spectrum, SignalError> {
    if path == EvaluationPath::TimeDomain {
        return fsrs_spectrum_time_domain(model, grid, delay, &TimeDomainOptions::default());
    }
    FsrsEvaluator::new(model, grid, path)?.spectrum(delay)
}

/// Settings of the time-domain evaluator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeDomainOptions {
    /// Gauss–Legendre panel length (s).
    pub panel: f64,
    pub nodes_per_panel: usize,
    /// Coherence integration length in units of 1/γ.
    pub coherence_span: f64,
    /// Half-width of the probe gate in units of σ.
    pub probe_span: f64,
}

impl Default for TimeDomainOptions {
    fn default() -> Self {
        Self {
            panel: 10e-15,
            nodes_per_panel: 16,
            coherence_span: 25.0,
            probe_span: 12.0,
        }
    }
}

// Gauss–Legendre nodes on [start, start + panels·h) with the row/column propagated by
// exp(G·t) evaluated through the semigroup property.
struct Panels {
    offsets: Vec<f64>,
    weights: Vec<f64>,
    h: f64,
}

impl Panels {
    fn new(h: f64, nodes: usize) -> Self {
        let (x, w) = gauss_legendre(nodes);
        Self {
            offsets: x.iter().map(|x| 0.5 * h * (x + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * h * w).collect(),
            h,
        }
    }
}

/// `1ᵀ exp(M t)` at every node of `count` panels from t = 0, as rows.
fn coherence_rows(
    m: &ComplexMatrix,
    panels: &Panels,
    count: usize,
) -> Result<(Vec<f64>, Vec<f64>, Vec<Vec<C64>>), NumericsError> {
    let n = m.rows();
    let step = expm(&m.scale(c(panels.h, 0.0)))?;
    let node_props = panels
        .offsets
        .iter()
        .map(|&t| expm(&m.scale(c(t, 0.0))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut base = vec![c(1.0, 0.0); n];
    let mut times = Vec::with_capacity(count * panels.offsets.len());
    let mut weights = Vec::with_capacity(times.capacity());
    let mut rows = Vec::with_capacity(times.capacity());
    for p in 0..count {
        let t0 = p as f64 * panels.h;
        for (k, prop) in node_props.iter().enumerate() {
            times.push(t0 + panels.offsets[k]);
            weights.push(panels.weights[k]);
            rows.push(prop.vec_mul(&base)?);
        }
        base = step.vec_mul(&base)?;
    }
    Ok((times, weights, rows))
}

/// Stimulated Raman spectrum from the matter correlation function by direct time
/// quadrature: `S = Im[2i Ẽ_p(ω) Σ_modes α²μ² Σ_s A_s(ω − ω₁) B_s(ω, T)] / σ²` with
/// `A_s(ν) = ∫₀^∞ dt e^{iνt} (1ᵀ e^{Mt})_s` and
/// `B_s = ∫ dt e^{−(K+2γ)t} ρ₀ · e^{−(t−T)²/2σ²} e^{i(ω−ω_p)(t−T)}`.
pub fn fsrs_spectrum_time_domain(
    model: &SleModel,
    grid: &ShiftGrid,
    delay: f64,
    opts: &TimeDomainOptions,
) -> Result<Spectrum, SignalError> {
    let mut spectra = fsrs_time_domain_sweep(model, grid, &[delay], opts)?;
    Ok(spectra.remove(0))
}

/// Several delays sharing the delay-independent coherence integrals.
pub fn fsrs_time_domain_sweep(
    model: &SleModel,
    grid: &ShiftGrid,
    delays: &[f64],
    opts: &TimeDomainOptions,
) -> Result<Vec<Spectrum>, SignalError> {
    let pulses = model.pulses();
    let sigma = pulses.probe_duration;
    let conv = pulses.convention;
    let nu: Vec<f64> = grid
        .points_cm()
        .iter()
        .map(|&x| conv.detuning(cm_to_rad_per_s(x)))
        .collect();
    let panels = Panels::new(opts.panel, opts.nodes_per_panel);
    let node_phase = |v: f64| -> Vec<C64> {
        panels.offsets.iter().map(|&t| c(0.0, v * t).exp()).collect()
    };

    // A[point][mode][state]
    let mut a_terms = vec![Vec::with_capacity(model.modes().len()); nu.len()];
    for (mi, mode) in model.modes().iter().enumerate() {
        let count = (opts.coherence_span / mode.dephasing / opts.panel).ceil() as usize;
        let block = model.coherence_block(mi);
        let (_, weights, rows) = coherence_rows(block.generator(), &panels, count)?;
        let q = panels.offsets.len();
        let per_point: Vec<Vec<C64>> = nu
            .par_iter()
            .map(|&v| {
                let np = node_phase(v);
                let step = c(0.0, v * panels.h).exp();
                let mut panel_phase = c(1.0, 0.0);
                let mut acc = vec![c(0.0, 0.0); model.states()];
                for p in 0..count {
                    for k in 0..q {
                        let idx = p * q + k;
                        let w = panel_phase * np[k] * weights[idx];
                        for (a, r) in acc.iter_mut().zip(&rows[idx]) {
                            *a += w * r;
                        }
                    }
                    panel_phase *= step;
                }
                acc
            })
            .collect();
        for (slot, v) in a_terms.iter_mut().zip(per_point) {
            slot.push(v);
        }
    }

    let mut out = Vec::with_capacity(delays.len());
    for &delay in delays {
        if delay < 0.0 {
            out.push(Spectrum {
                shifts_cm: grid.points_cm().to_vec(),
                delay,
                values: vec![0.0; grid.len()],
                label: model.label().to_string(),
                path: EvaluationPath::TimeDomain,
            });
            continue;
        }
        let start = (delay - opts.probe_span * sigma).max(0.0);
        let stop = delay + opts.probe_span * sigma;
        let count = ((stop - start) / opts.panel).ceil() as usize;
        let h = (stop - start) / count as f64;
        let gate = Panels::new(h, opts.nodes_per_panel);

        // Populations at the gate nodes for each mode's damping.
        let p0: Vec<C64> = model.initial().iter().map(|&p| c(p, 0.0)).collect();
        let mut b_nodes: Vec<Vec<Vec<C64>>> = Vec::with_capacity(model.modes().len());
        let mut times = Vec::new();
        let mut weights = Vec::new();
        for p in 0..count {
            for k in 0..gate.offsets.len() {
                times.push(start + p as f64 * h + gate.offsets[k]);
                weights.push(gate.weights[k]);
            }
        }
        for mi in 0..model.modes().len() {
            let g = model.population_block(mi).generator().clone();
            let mut col = expm(&g.scale(c(start, 0.0)))?.mul_vec(&p0)?;
            let step = expm(&g.scale(c(h, 0.0)))?;
            let node_props = gate
                .offsets
                .iter()
                .map(|&t| expm(&g.scale(c(t, 0.0))))
                .collect::<Result<Vec<_>, _>>()?;
            let mut vals = Vec::with_capacity(times.len());
            for _ in 0..count {
                for prop in &node_props {
                    vals.push(prop.mul_vec(&col)?);
                }
                col = step.mul_vec(&col)?;
            }
            b_nodes.push(vals);
        }

        let values = nu
            .par_iter()
            .enumerate()
            .map(|(i, &v)| {
                let a = v - pulses.probe_center_offset;
                let mut acc = c(0.0, 0.0);
                for (mi, mode) in model.modes().iter().enumerate() {
                    let mut b = vec![c(0.0, 0.0); model.states()];
                    for (idx, &t) in times.iter().enumerate() {
                        let u = t - delay;
                        let w = c(-0.5 * u * u / (sigma * sigma), a * u).exp() * weights[idx];
                        for (bs, r) in b.iter_mut().zip(&b_nodes[mi][idx]) {
                            *bs += w * r;
                        }
                    }
                    let s: C64 = a_terms[i][mi].iter().zip(&b).map(|(x, y)| x * y).sum();
                    acc += s * mode.raman_weight();
                }
                let e = pulses.probe_envelope_freq(v);
                (c(0.0, 2.0) * e * acc).im / (sigma * sigma)
            })
            .collect();
        out.push(Spectrum {
            shifts_cm: grid.points_cm().to_vec(),
            delay,
            values,
            label: model.label().to_string(),
            path: EvaluationPath::TimeDomain,
        });
    }
    Ok(out)
}

/// Population-weighted sum of frozen-bath absorptive lines:
/// `S = Σ_modes Σ_s 2|Ẽ_p(ω)|² α²μ² Re[i·G⁽ˢ⁾(ω − ω₁)] ρ_s(T) / σ²` with `ρ(T)` the
/// undamped bath populations.
pub fn static_limit_spectrum(
    model: &SleModel,
    grid: &ShiftGrid,
    delay: f64,
) -> Result<Spectrum, SignalError> {
    let pulses = model.pulses();
    let sigma = pulses.probe_duration;
    let n = model.states();
    let label = model.label().to_string();
    if delay < 0.0 {
        return Ok(Spectrum {
            shifts_cm: grid.points_cm().to_vec(),
            delay,
            values: vec![0.0; grid.len()],
            label,
            path: EvaluationPath::Analytic,
        });
    }
    let rho = propagate(model.bath(), model.initial(), &[delay])?
        .populations
        .remove(0);
    let frozen: Vec<CoherenceBlock> = model
        .modes()
        .iter()
        .map(|m| CoherenceBlock::frozen(n, m))
        .collect();
    let conv = pulses.convention;
    let values = grid
        .points_cm()
        .par_iter()
        .map(|&x| {
            let v = conv.detuning(cm_to_rad_per_s(x));
            let e = pulses.probe_envelope_freq(v);
            let mut acc = 0.0;
            for (mode, block) in model.modes().iter().zip(&frozen) {
                let g = block
                    .green_freq_column_sums(v)
                    .map_err(|e| at_point(x, delay)(e.into()))?;
                let line: f64 = g
                    .iter()
                    .zip(&rho)
                    .map(|(g, r)| (c(0.0, 1.0) * g).re * r)
                    .sum();
                acc += mode.raman_weight() * line;
            }
            Ok(2.0 * e * e * acc / (sigma * sigma))
        })
        .collect::<Result<Vec<_>, SignalError>>()?;
    Ok(Spectrum {
        shifts_cm: grid.points_cm().to_vec(),
        delay,
        values,
        label,
        path: EvaluationPath::Analytic,
    })
}

/// Shaped-pulse transient absorption
/// `S = Im[−2i Ẽ_p(ω) Σ_modes μ⁴ Σ_s (1ᵀG(ν))_s e^{iνT} ρ_s(ν)] / σ`, `ν = ω − ω₁`, with
/// `ρ(ν)` the Fourier transform of the damped populations.
pub fn tasp_spectrum(
    model: &SleModel,
    grid: &ShiftGrid,
    delay: f64,
) -> Result<Spectrum, SignalError> {
    let pulses = model.pulses();
    let sigma = pulses.probe_duration;
    let label = model.label().to_string();
    if delay < 0.0 {
        return Ok(Spectrum {
            shifts_cm: grid.points_cm().to_vec(),
            delay,
            values: vec![0.0; grid.len()],
            label,
            path: EvaluationPath::Analytic,
        });
    }
    let blocks: Vec<CoherenceBlock> = (0..model.modes().len())
        .map(|m| model.coherence_block(m))
        .collect();
    let conv = pulses.convention;
    let values = grid
        .points_cm()
        .par_iter()
        .map(|&x| {
            let v = conv.detuning(cm_to_rad_per_s(x));
            let e = pulses.probe_envelope_freq(v);
            let phase = c(0.0, v * delay).exp();
            let mut acc = c(0.0, 0.0);
            for (mi, mode) in model.modes().iter().enumerate() {
                let wrap = |e: NumericsError| at_point(x, delay)(e.into());
                let r = blocks[mi].green_freq_column_sums(v).map_err(wrap)?;
                let rho = crate::kinetics::population_resolvent(
                    model.bath(),
                    mode.dephasing,
                    model.initial(),
                    -v,
                )?;
                let s: C64 = r.iter().zip(&rho).map(|(a, b)| a * b).sum();
                acc += s * phase * mode.absorption_weight();
            }
            let val = (c(0.0, -2.0) * e * acc).im / sigma;
            if !val.is_finite() {
                return Err(at_point(x, delay)(NumericsError::NonFinite("absorption signal").into()));
            }
            Ok(val)
        })
        .collect::<Result<Vec<_>, SignalError>>()?;
    Ok(Spectrum {
        shifts_cm: grid.points_cm().to_vec(),
        delay,
        values,
        label,
        path: EvaluationPath::Analytic,
    })
}
