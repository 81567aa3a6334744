//! Joint system–bath Liouvillian blocks and their Green's functions.
//!
//! The population block of a mode evolves as `exp(−(K + 2γ)t)` and its vibrational
//! coherence block as `exp(M t)` with `M = −K + i·diag(ω_s) − γ`. The two sectors never mix,
//! so each is held as its own matrix.

use thiserror::Error;

use crate::kinetics::{check_distribution, KineticsError, RateMatrix};
use crate::numerics::{c, expm, Lu, NumericsError};
use crate::pulses::PulseSet;
use crate::{ComplexMatrix, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("mode {index}: {message}")]
    InvalidMode { index: usize, message: String },
    #[error("model needs at least one vibrational mode")]
    NoModes,
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// One vibrational transition whose frequency follows the bath state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VibrationalMode {
    /// Frequency in bath state 1 (rad/s).
    pub base_frequency: f64,
    /// Frequency increment per bath state (rad/s).
    pub shift_per_state: f64,
    /// Coherence dephasing rate γ (rad/s); populations decay at 2γ.
    pub dephasing: f64,
    /// Raman polarizability weight.
    pub polarizability: f64,
    /// Transition dipole weight.
    pub dipole: f64,
}

impl VibrationalMode {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.base_frequency.is_finite() && self.base_frequency > 0.0) {
            return Err(format!("base frequency must be positive, got {:e}", self.base_frequency));
        }
        if !self.shift_per_state.is_finite() {
            return Err("frequency shift must be finite".into());
        }
        if !(self.dephasing.is_finite() && self.dephasing > 0.0) {
            return Err(format!("dephasing must be positive, got {:e}", self.dephasing));
        }
        if !(self.polarizability.is_finite() && self.dipole.is_finite()) {
            return Err("weights must be finite".into());
        }
        Ok(())
    }

    /// `ω⁽ˢ⁾ = ω⁽¹⁾ + δ·(s − 1)` for `s = 1..=states`.
    pub fn frequencies_along_chain(&self, states: usize) -> Vec<f64> {
        (0..states)
            .map(|s| self.base_frequency + self.shift_per_state * s as f64)
            .collect()
    }

    /// Weight of the stimulated Raman pathway, `α²·μ²`.
    pub fn raman_weight(&self) -> f64 {
        self.polarizability.powi(2) * self.dipole.powi(2)
    }

    /// Weight of the linear absorption pathway, `μ²·μ²`.
    pub fn absorption_weight(&self) -> f64 {
        self.dipole.powi(4)
    }

    pub fn with_polarizability(mut self, alpha: f64) -> Self {
        self.polarizability = alpha;
        self
    }
}

/// Bath, modes, initial bath state and pulses: the immutable input of every signal.
#[derive(Clone, Debug, PartialEq)]
pub struct SleModel {
    bath: RateMatrix,
    modes: Vec<VibrationalMode>,
    initial: Vec<f64>,
    pulses: PulseSet,
    label: String,
}

impl SleModel {
    pub fn new(
        bath: RateMatrix,
        modes: Vec<VibrationalMode>,
        initial: Vec<f64>,
        pulses: PulseSet,
    ) -> Result<Self, ModelError> {
        if modes.is_empty() {
            return Err(ModelError::NoModes);
        }
        for (index, m) in modes.iter().enumerate() {
            m.validate()
                .map_err(|message| ModelError::InvalidMode { index, message })?;
        }
        check_distribution(&initial, bath.states())?;
        Ok(Self {
            bath,
            modes,
            initial,
            pulses,
            label: String::new(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn bath(&self) -> &RateMatrix {
        &self.bath
    }

    pub fn modes(&self) -> &[VibrationalMode] {
        &self.modes
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn pulses(&self) -> &PulseSet {
        &self.pulses
    }

    pub fn states(&self) -> usize {
        self.bath.states()
    }

    /// The same model restricted to a subset of its modes.
    pub fn with_modes(&self, keep: &[usize]) -> Result<Self, ModelError> {
        let modes = keep.iter().map(|&i| self.modes[i]).collect();
        Ok(Self::new(self.bath.clone(), modes, self.initial.clone(), self.pulses)?
            .with_label(self.label.clone()))
    }

    pub fn with_modes_replaced(&self, modes: Vec<VibrationalMode>) -> Result<Self, ModelError> {
        Ok(Self::new(self.bath.clone(), modes, self.initial.clone(), self.pulses)?
            .with_label(self.label.clone()))
    }

    pub fn with_pulses(&self, pulses: PulseSet) -> Self {
        Self {
            pulses,
            ..self.clone()
        }
    }

    pub fn with_bath(&self, bath: RateMatrix) -> Result<Self, ModelError> {
        Ok(Self::new(bath, self.modes.clone(), self.initial.clone(), self.pulses)?
            .with_label(self.label.clone()))
    }

    pub fn coherence_block(&self, mode: usize) -> CoherenceBlock {
        CoherenceBlock::new(&self.bath, &self.modes[mode])
    }

    pub fn population_block(&self, mode: usize) -> PopulationBlock {
        PopulationBlock::new(&self.bath, self.modes[mode].dephasing)
    }
}

/// Coherence generator `M = −K + i·diag(ω⁽ˢ⁾) − γ·I`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceBlock {
    m: ComplexMatrix,
}

impl CoherenceBlock {
    pub fn new(bath: &RateMatrix, mode: &VibrationalMode) -> Self {
        let n = bath.states();
        let freqs = mode.frequencies_along_chain(n);
        let k = bath.matrix();
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            let mut v = c(-k[(i, j)], 0.0);
            if i == j {
                v += c(-mode.dephasing, freqs[i]);
            }
            v
        });
        Self { m }
    }

    /// Coherence block with the bath frozen (`K = 0`).
    pub fn frozen(states: usize, mode: &VibrationalMode) -> Self {
        Self::new(&RateMatrix::frozen(states), mode)
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    /// `G(t) = −i·exp(M t)` for `t ≥ 0`, zero before.
    pub fn green_time(&self, t: f64) -> Result<ComplexMatrix, NumericsError> {
        let n = self.dim();
        if t < 0.0 {
            return Ok(ComplexMatrix::zeros(n, n));
        }
        Ok(expm(&self.m.scale(c(t, 0.0)))?.scale(c(0.0, -1.0)))
    }

    fn shifted(&self, omega_tilde: f64) -> ComplexMatrix {
        // −iω̃ − M
        self.m.scale(c(-1.0, 0.0)).add_diagonal(c(0.0, -omega_tilde))
    }

    /// `G(ω̃) = −i(−iω̃ − M)⁻¹ = ∫ dt e^{iω̃t} G(t)`.
    pub fn green_freq(&self, omega_tilde: f64) -> Result<ComplexMatrix, NumericsError> {
        Ok(Lu::factor(&self.shifted(omega_tilde))?
            .inverse()?
            .scale(c(0.0, -1.0)))
    }

    /// Column sums `1ᵀ G(ω̃)` without forming the inverse.
    pub fn green_freq_column_sums(&self, omega_tilde: f64) -> Result<Vec<C64>, NumericsError> {
        let ones = vec![c(1.0, 0.0); self.dim()];
        let row = Lu::factor(&self.shifted(omega_tilde))?.solve_transposed(&ones)?;
        Ok(row.into_iter().map(|v| v * c(0.0, -1.0)).collect())
    }
}

/// Population generator `−(K + 2γ)` of one mode's ground manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationBlock {
    g: ComplexMatrix,
}

impl PopulationBlock {
    pub fn new(bath: &RateMatrix, dephasing: f64) -> Self {
        let k = bath.matrix();
        let g = ComplexMatrix::from_fn(k.rows(), k.cols(), |i, j| {
            let d = if i == j { 2.0 * dephasing } else { 0.0 };
            c(-(k[(i, j)] + d), 0.0)
        });
        Self { g }
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.g
    }

    /// `−i·exp(−(K + 2γ)t)` for `t ≥ 0`, zero before.
    pub fn green_time(&self, t: f64) -> Result<ComplexMatrix, NumericsError> {
        let n = self.g.rows();
        if t < 0.0 {
            return Ok(ComplexMatrix::zeros(n, n));
        }
        Ok(expm(&self.g.scale(c(t, 0.0)))?.scale(c(0.0, -1.0)))
    }
}

/// Matter correlation function
/// `F(t₁, t₂) = −i Σ_modes α²μ² · 1ᵀ G_coh(t₁) G_pop(t₂) ρ₀` (zero outside `t₁, t₂ ≥ 0`).
pub fn matter_correlation(model: &SleModel, t1: f64, t2: f64) -> Result<C64, NumericsError> {
    if t1 < 0.0 || t2 < 0.0 {
        return Ok(c(0.0, 0.0));
    }
    let p0: Vec<C64> = model.initial().iter().map(|&p| c(p, 0.0)).collect();
    let mut total = c(0.0, 0.0);
    for (i, mode) in model.modes().iter().enumerate() {
        let gc = model.coherence_block(i).green_time(t1)?;
        let gp = model.population_block(i).green_time(t2)?;
        let v = gc.mul_vec(&gp.mul_vec(&p0)?)?;
        total += v.iter().sum::<C64>() * mode.raman_weight();
    }
    Ok(total * c(0.0, -1.0))
}
