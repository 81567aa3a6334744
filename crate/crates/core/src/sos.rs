//! Bath-free signals written as sums over molecular eigenstates, and the generalized
//! second- and third-order susceptibilities of a prepared nonstationary state.
//!
//! Sign and phase conventions follow the stochastic Liouville signals in [`crate::signals`]:
//! probe phase `e^{iΔT}`, absorption phase `e^{iνT}` and the common `Im[−2i …]` prefactor,
//! so that a single-state bath maps onto these expressions term by term.

use std::f64::consts::PI;

use thiserror::Error;

use crate::numerics::quadrature::{integrate_vector, QuadOptions};
use crate::numerics::{c, NumericsError};
use crate::pulses::{GaussianPulse, PulseSet};
use crate::signals::{pole_overlap, EvaluationPath, ShiftGrid, Spectrum};
use crate::sle::SleModel;
use crate::units::cm_to_rad_per_s;
use crate::{ComplexMatrix, RealMatrix, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SosError {
    #[error("invalid eigenstate system: {0}")]
    InvalidSystem(String),
    #[error("model cannot be mapped onto eigenstates: {0}")]
    NotMappable(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Levels with their couplings, dephasings and the coherences left by the actinic pulse.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenstateSystem {
    labels: Vec<String>,
    energies: Vec<f64>,
    dipoles: ComplexMatrix,
    polarizabilities: ComplexMatrix,
    dephasing: RealMatrix,
    coherences: ComplexMatrix,
}

fn check_hermitian(name: &str, m: &ComplexMatrix) -> Result<(), SosError> {
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-12 * scale {
                return Err(SosError::InvalidSystem(format!(
                    "{name} is not conjugate-symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

impl EigenstateSystem {
    /// Every dephasing rate, diagonal included, must be positive: the diagonal ones damp the
    /// prepared populations.
    pub fn new(
        levels: Vec<(String, f64)>,
        dipoles: ComplexMatrix,
        polarizabilities: ComplexMatrix,
        dephasing: RealMatrix,
        coherences: ComplexMatrix,
    ) -> Result<Self, SosError> {
        let n = levels.len();
        if n == 0 {
            return Err(SosError::InvalidSystem("no levels".into()));
        }
        for (name, (r, c)) in [
            ("dipoles", (dipoles.rows(), dipoles.cols())),
            ("polarizabilities", (polarizabilities.rows(), polarizabilities.cols())),
            ("dephasing", (dephasing.rows(), dephasing.cols())),
            ("coherences", (coherences.rows(), coherences.cols())),
        ] {
            if (r, c) != (n, n) {
                return Err(SosError::InvalidSystem(format!(
                    "{name} is {r}x{c}, expected {n}x{n}"
                )));
            }
        }
        if levels.iter().any(|(_, e)| !e.is_finite()) {
            return Err(SosError::InvalidSystem("level energies must be finite".into()));
        }
        check_hermitian("dipoles", &dipoles)?;
        check_hermitian("polarizabilities", &polarizabilities)?;
        check_hermitian("coherences", &coherences)?;
        for i in 0..n {
            for j in 0..n {
                let g = dephasing[(i, j)];
                if !(g.is_finite() && g > 0.0) {
                    return Err(SosError::InvalidSystem(format!(
                        "dephasing ({i}, {j}) must be positive, got {g}"
                    )));
                }
                if g != dephasing[(j, i)] {
                    return Err(SosError::InvalidSystem("dephasing must be symmetric".into()));
                }
            }
        }
        if !coherences.is_finite() {
            return Err(SosError::InvalidSystem("coherences must be finite".into()));
        }
        let (labels, energies) = levels.into_iter().unzip();
        Ok(Self {
            labels,
            energies,
            dipoles,
            polarizabilities,
            dephasing,
            coherences,
        })
    }

    /// The eigenstate picture of a model whose bath has a single state: one level `a` carrying
    /// all population and one level per mode at the mode frequency, with `α_ad = αμ` and
    /// `μ_ad = μ²` so the pathway weights match `α²μ²` and `μ⁴`. All modes must share one
    /// dephasing rate, since the population of `a` decays at a single rate `2γ`.
    pub fn from_single_state_model(model: &SleModel) -> Result<Self, SosError> {
        if model.states() != 1 {
            return Err(SosError::NotMappable(format!(
                "bath has {} states, need exactly one",
                model.states()
            )));
        }
        let gamma = model.modes()[0].dephasing;
        if model.modes().iter().any(|m| m.dephasing != gamma) {
            return Err(SosError::NotMappable("modes differ in dephasing".into()));
        }
        let n = model.modes().len() + 1;
        let mut levels = vec![("a".to_string(), 0.0)];
        for (i, m) in model.modes().iter().enumerate() {
            levels.push((format!("d{}", i + 1), m.base_frequency));
        }
        let mut alpha = ComplexMatrix::zeros(n, n);
        let mut mu = ComplexMatrix::zeros(n, n);
        for (i, m) in model.modes().iter().enumerate() {
            let d = i + 1;
            alpha[(0, d)] = c(m.polarizability * m.dipole, 0.0);
            alpha[(d, 0)] = alpha[(0, d)];
            mu[(0, d)] = c(m.dipole * m.dipole, 0.0);
            mu[(d, 0)] = mu[(0, d)];
        }
        let dephasing = RealMatrix::from_fn(n, n, |i, j| {
            if i == 0 && j == 0 {
                2.0 * gamma
            } else if i == 0 || j == 0 {
                gamma
            } else {
                2.0 * gamma
            }
        });
        let mut rho = ComplexMatrix::zeros(n, n);
        rho[(0, 0)] = c(1.0, 0.0);
        Self::new(levels, mu, alpha, dephasing, rho)
    }

    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dipoles(&self) -> &ComplexMatrix {
        &self.dipoles
    }

    pub fn polarizabilities(&self) -> &ComplexMatrix {
        &self.polarizabilities
    }

    pub fn dephasing(&self) -> &RealMatrix {
        &self.dephasing
    }

    pub fn coherences(&self) -> &ComplexMatrix {
        &self.coherences
    }

    /// `ω_ij = E_i − E_j`.
    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.energies[i] - self.energies[j]
    }

    pub fn with_dipoles(&self, dipoles: ComplexMatrix) -> Result<Self, SosError> {
        Self::new(
            self.labels.iter().cloned().zip(self.energies.iter().copied()).collect(),
            dipoles,
            self.polarizabilities.clone(),
            self.dephasing.clone(),
            self.coherences.clone(),
        )
    }

    pub fn with_dephasing(&self, dephasing: RealMatrix) -> Result<Self, SosError> {
        Self::new(
            self.labels.iter().cloned().zip(self.energies.iter().copied()).collect(),
            self.dipoles.clone(),
            self.polarizabilities.clone(),
            dephasing,
            self.coherences.clone(),
        )
    }

    pub fn with_coherences(&self, coherences: ComplexMatrix) -> Result<Self, SosError> {
        Self::new(
            self.labels.iter().cloned().zip(self.energies.iter().copied()).collect(),
            self.dipoles.clone(),
            self.polarizabilities.clone(),
            self.dephasing.clone(),
            coherences,
        )
    }
}

/// The two ladder diagrams of a linear-response signal from a prepared state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Diagram {
    /// Both field interactions on the ket side of the `a–d` coherence.
    First,
    /// The mirror-image diagram with the second interaction on the bra.
    Second,
}

/// One `(a, c, d)` contribution: `amplitude · L(ν) · R(ν, T)` where `L` is the spectral line
/// `1/(ν − line_center + i·line_width)` and `R` the response of the prepared coherence,
/// which decays as `e^{−decay·t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pathway {
    pub diagram: Diagram,
    pub a: usize,
    pub c: usize,
    pub d: usize,
    /// Coupling product times `ρ_ac`, including the diagram sign.
    pub amplitude: C64,
    pub line_center: f64,
    pub line_width: f64,
    pub decay: C64,
}

impl Pathway {
    pub fn line(&self, nu: f64) -> C64 {
        c(1.0, 0.0) / c(nu - self.line_center, self.line_width)
    }

    /// `1/(ν + i·decay)`: the second resonance of the absorption pathways.
    pub fn absorption_resonance(&self, nu: f64) -> C64 {
        c(1.0, 0.0) / (c(nu, 0.0) + c(0.0, 1.0) * self.decay)
    }
}

/// All pathways with nonzero amplitude for the given coupling operator (dipoles or
/// polarizabilities). Every resonance of the sum-over-states signals is created here.
pub fn pathways(sys: &EigenstateSystem, coupling: &ComplexMatrix) -> Vec<Pathway> {
    let n = sys.levels();
    let g = &sys.dephasing;
    let mut out = Vec::new();
    for a in 0..n {
        for cc in 0..n {
            let rho = sys.coherences[(a, cc)];
            if rho == c(0.0, 0.0) {
                continue;
            }
            for d in 0..n {
                let first = coupling[(d, a)] * coupling[(cc, d)] * rho;
                if first != c(0.0, 0.0) {
                    out.push(Pathway {
                        diagram: Diagram::First,
                        a,
                        c: cc,
                        d,
                        amplitude: first,
                        line_center: sys.transition(a, d),
                        line_width: g[(a, d)],
                        decay: c(g[(a, cc)], sys.transition(a, cc)),
                    });
                }
                let second = -(coupling[(a, d)] * coupling[(d, cc)] * rho);
                if second != c(0.0, 0.0) {
                    out.push(Pathway {
                        diagram: Diagram::Second,
                        a,
                        c: cc,
                        d,
                        amplitude: second,
                        line_center: sys.transition(d, a),
                        line_width: g[(d, a)],
                        decay: c(g[(cc, a)], sys.transition(cc, a)),
                    });
                }
            }
        }
    }
    out
}

/// Per-diagram parts of a signal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagramSignals {
    pub first: f64,
    pub second: f64,
}

impl DiagramSignals {
    pub fn total(&self) -> f64 {
        self.first + self.second
    }

    pub fn get(&self, d: Diagram) -> f64 {
        match d {
            Diagram::First => self.first,
            Diagram::Second => self.second,
        }
    }
}

fn finite(v: f64, what: &'static str) -> Result<f64, SosError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericsError::NonFinite(what).into())
    }
}

/// Stimulated Raman signal at `ν = ω − ω₁` with the Gaussian probe of `pulses`:
/// `Im[−2i Ẽ_p(ω) Σ amplitude · L(ν) · J(decay)] / σ²`, with `J` the probe overlap of a
/// single pole.
pub fn fsrs_sos_diagrams(
    sys: &EigenstateSystem,
    pulses: &PulseSet,
    nu: f64,
    delay: f64,
) -> Result<DiagramSignals, SosError> {
    if delay < 0.0 {
        return Ok(DiagramSignals { first: 0.0, second: 0.0 });
    }
    let sigma = pulses.probe_duration;
    let a = nu - pulses.probe_center_offset;
    let mut acc = [c(0.0, 0.0); 2];
    for p in pathways(sys, &sys.polarizabilities) {
        let term = p.amplitude * p.line(nu) * pole_overlap(p.decay, a, delay, sigma);
        acc[p.diagram as usize] += term;
    }
    let e = pulses.probe_envelope_freq(nu);
    let part = |z: C64| (c(0.0, -2.0) * e * z).im / (sigma * sigma);
    Ok(DiagramSignals {
        first: finite(part(acc[0]), "sum-over-states Raman signal")?,
        second: finite(part(acc[1]), "sum-over-states Raman signal")?,
    })
}

pub fn fsrs_sos(
    sys: &EigenstateSystem,
    pulses: &PulseSet,
    nu: f64,
    delay: f64,
) -> Result<f64, SosError> {
    Ok(fsrs_sos_diagrams(sys, pulses, nu, delay)?.total())
}

/// Transient absorption with a monochromatic pump:
/// `Im[−2i Ẽ_p(ω) Σ amplitude · L(ν) · e^{iνT}/(ν + i·decay)] / σ`.
pub fn tasp_sos_diagrams(
    sys: &EigenstateSystem,
    pulses: &PulseSet,
    nu: f64,
    delay: f64,
) -> Result<DiagramSignals, SosError> {
    if delay < 0.0 {
        return Ok(DiagramSignals { first: 0.0, second: 0.0 });
    }
    let sigma = pulses.probe_duration;
    let phase = c(0.0, nu * delay).exp();
    let mut acc = [c(0.0, 0.0); 2];
    for p in pathways(sys, &sys.dipoles) {
        acc[p.diagram as usize] += p.amplitude * p.line(nu) * p.absorption_resonance(nu) * phase;
    }
    let e = pulses.probe_envelope_freq(nu);
    let part = |z: C64| (c(0.0, -2.0) * e * z).im / sigma;
    Ok(DiagramSignals {
        first: finite(part(acc[0]), "sum-over-states absorption signal")?,
        second: finite(part(acc[1]), "sum-over-states absorption signal")?,
    })
}

pub fn tasp_sos(
    sys: &EigenstateSystem,
    pulses: &PulseSet,
    nu: f64,
    delay: f64,
) -> Result<f64, SosError> {
    Ok(tasp_sos_diagrams(sys, pulses, nu, delay)?.total())
}

fn sweep<F>(
    grid: &ShiftGrid,
    pulses: &PulseSet,
    delay: f64,
    label: &str,
    f: F,
) -> Result<Spectrum, SosError>
where
    F: Fn(f64) -> Result<DiagramSignals, SosError>,
{
    let values = grid
        .points_cm()
        .iter()
        .map(|&x| f(pulses.convention.detuning(cm_to_rad_per_s(x))).map(|d| d.total()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Spectrum {
        shifts_cm: grid.points_cm().to_vec(),
        delay,
        values,
        label: label.to_string(),
        path: EvaluationPath::Analytic,
    })
}

pub fn fsrs_sos_spectrum(
    sys: &EigenstateSystem,
    pulses: &PulseSet,
    grid: &ShiftGrid,
    delay: f64,
) -> Result<Spectrum, SosError> {
    sweep(grid, pulses, delay, "eigenstates", |nu| {
        fsrs_sos_diagrams(sys, pulses, nu, delay)
    })
}

pub fn tasp_sos_spectrum(
    sys: &EigenstateSystem,
    pulses: &PulseSet,
    grid: &ShiftGrid,
    delay: f64,
) -> Result<Spectrum, SosError> {
    sweep(grid, pulses, delay, "eigenstates", |nu| {
        tasp_sos_diagrams(sys, pulses, nu, delay)
    })
}

/// How a susceptibility chain is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SusceptibilityPath {
    /// Superoperators materialized on the pair basis, commutator built directly.
    Liouville,
    /// Same basis, commutator assembled as left minus right multiplication.
    LeftMinusRight,
    /// Operator algebra on density matrices, `μX − Xμ`, without superoperators.
    Hilbert,
}

/// Left, right and commutator superoperators of the full transition operator on the
/// `(i, j)` pair basis, index `i·n + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperators {
    pub left: ComplexMatrix,
    pub right: ComplexMatrix,
    pub commutator: ComplexMatrix,
}

impl Superoperators {
    pub fn new(op: &ComplexMatrix) -> Self {
        let n = op.rows();
        let dim = n * n;
        let idx = |i: usize, j: usize| i * n + j;
        let mut left = ComplexMatrix::zeros(dim, dim);
        let mut right = ComplexMatrix::zeros(dim, dim);
        let mut commutator = ComplexMatrix::zeros(dim, dim);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut lv = c(0.0, 0.0);
                        let mut rv = c(0.0, 0.0);
                        if j == l {
                            lv = op[(i, k)];
                        }
                        if i == k {
                            rv = op[(l, j)];
                        }
                        left[(idx(i, j), idx(k, l))] = lv;
                        right[(idx(i, j), idx(k, l))] = rv;
                        commutator[(idx(i, j), idx(k, l))] = lv - rv;
                    }
                }
            }
        }
        Self {
            left,
            right,
            commutator,
        }
    }
}

fn resolvent_entry(sys: &EigenstateSystem, omega: f64, i: usize, j: usize) -> C64 {
    c(1.0, 0.0) / c(omega - sys.transition(i, j), sys.dephasing[(i, j)])
}

/// `Σ_ac ρ_ac ⟨⟨I| Ṽ_L G(f₀) Ṽ_− G(f₁) … Ṽ_− G(f_last) |ac⟩⟩`.
fn chain(sys: &EigenstateSystem, path: SusceptibilityPath, freqs: &[f64]) -> C64 {
    let n = sys.levels();
    let mu = &sys.dipoles;
    match path {
        SusceptibilityPath::Hilbert => {
            let mut x = sys.coherences.clone();
            for (k, &f) in freqs.iter().enumerate().rev() {
                x = ComplexMatrix::from_fn(n, n, |i, j| x[(i, j)] * resolvent_entry(sys, f, i, j));
                if k > 0 {
                    x = &(mu * &x) - &(&x * mu);
                }
            }
            let y = mu * &x;
            (0..n).map(|i| y[(i, i)]).sum()
        }
        SusceptibilityPath::Liouville | SusceptibilityPath::LeftMinusRight => {
            let ops = Superoperators::new(mu);
            let minus = if path == SusceptibilityPath::Liouville {
                ops.commutator.clone()
            } else {
                &ops.left - &ops.right
            };
            let mut v: Vec<C64> = sys.coherences.as_slice().to_vec();
            for (k, &f) in freqs.iter().enumerate().rev() {
                for i in 0..n {
                    for j in 0..n {
                        v[i * n + j] *= resolvent_entry(sys, f, i, j);
                    }
                }
                if k > 0 {
                    v = minus.mul_vec(&v).expect("pair basis");
                }
            }
            let w = ops.left.mul_vec(&v).expect("pair basis");
            (0..n).map(|i| w[i * n + i]).sum()
        }
    }
}

/// `χ̃⁽²⁾(−ω; ω₁′, ω₂′) = ⟨Ṽ_L G(ω) Ṽ_− G(ω − ω₂′) Ṽ_− G(ω − ω₂′ − ω₁′)⟩′` with `Ṽ` the full
/// (non-rotating-wave) transition operator.
pub fn chi2(sys: &EigenstateSystem, omega: f64, first: f64, second: f64) -> C64 {
    chi2_with(sys, SusceptibilityPath::Liouville, omega, first, second)
}

pub fn chi2_with(
    sys: &EigenstateSystem,
    path: SusceptibilityPath,
    omega: f64,
    first: f64,
    second: f64,
) -> C64 {
    chain(sys, path, &[omega, omega - second, omega - second - first])
}

/// `χ̃⁽³⁾(−ω; ω₁′, ω₂′, ω₃′)`: one more `Ṽ_− G` link than [`chi2`].
pub fn chi3(sys: &EigenstateSystem, omega: f64, first: f64, second: f64, third: f64) -> C64 {
    chi3_with(sys, SusceptibilityPath::Liouville, omega, first, second, third)
}

pub fn chi3_with(
    sys: &EigenstateSystem,
    path: SusceptibilityPath,
    omega: f64,
    first: f64,
    second: f64,
    third: f64,
) -> C64 {
    chain(
        sys,
        path,
        &[
            omega,
            omega - third,
            omega - third - second,
            omega - third - second - first,
        ],
    )
}

/// Pulse envelope and centre time for the wave-mixing wrappers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimedPulse {
    pub pulse: GaussianPulse,
    /// Centre time relative to the preparation (s).
    pub time: f64,
}

const SPECTRAL_HALF_WIDTH: f64 = 8.0;

fn nested(
    fields: &[TimedPulse],
    chosen: &mut Vec<f64>,
    rel_tol: f64,
    f: &dyn Fn(&[f64]) -> C64,
) -> Result<C64, NumericsError> {
    let Some((head, rest)) = fields.split_first() else {
        return Ok(f(chosen));
    };
    let p = head.pulse;
    let half = SPECTRAL_HALF_WIDTH / p.duration;
    let mut failure = None;
    let est = integrate_vector(
        |w, out| {
            chosen.push(w);
            let inner = nested(rest, chosen, rel_tol, f);
            chosen.pop();
            match inner {
                Ok(v) => {
                    out[0] = v * p.spectrum(w) * c(0.0, w * head.time).exp() / (2.0 * PI);
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    out[0] = c(0.0, 0.0);
                }
            }
        },
        &[p.center - half, p.center, p.center + half],
        1,
        QuadOptions {
            abs_tol: 0.0,
            rel_tol,
            l1_rel_tol: 0.0,
            max_intervals: 2_000,
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est?.value[0])
}

/// Frequency-dispersed three-wave-mixing signal from the prepared state:
/// `2 Im[∫∫ dω₁′dω₂′/(2π)² e^{−iωT + iω₁′T₁ + iω₂′T₂} Ẽ_p(ω) Ẽ₁(ω₁′) Ẽ₂(ω₂′) χ̃⁽²⁾]`.
pub fn twm_signal(
    sys: &EigenstateSystem,
    probe: &TimedPulse,
    fields: [TimedPulse; 2],
    omega: f64,
) -> Result<f64, SosError> {
    let integral = nested(&fields, &mut Vec::with_capacity(2), 1e-7, &|w| {
        chi2(sys, omega, w[0], w[1])
    })?;
    let pre = c(0.0, -omega * probe.time).exp() * probe.pulse.spectrum(omega);
    finite(2.0 * (pre * integral).im, "three-wave-mixing signal")
}

/// Four-wave-mixing analogue of [`twm_signal`] with three fields and `χ̃⁽³⁾`.
pub fn fwm_signal(
    sys: &EigenstateSystem,
    probe: &TimedPulse,
    fields: [TimedPulse; 3],
    omega: f64,
) -> Result<f64, SosError> {
    let integral = nested(&fields, &mut Vec::with_capacity(3), 1e-6, &|w| {
        chi3(sys, omega, w[0], w[1], w[2])
    })?;
    let pre = c(0.0, -omega * probe.time).exp() * probe.pulse.spectrum(omega);
    finite(2.0 * (pre * integral).im, "four-wave-mixing signal")
}
