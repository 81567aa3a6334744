//! Field models: impulsive actinic pulse, monochromatic Raman pump and Gaussian probe.
//!
//! Fourier convention throughout: `Ẽ(ω) = ∫ dt e^{iωt} E(t)`. Probe spectra are stored
//! without the translation phase of the delay; callers apply delay phases explicitly.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PulseError {
    #[error("probe duration must be positive and finite, got {0:e} s")]
    InvalidDuration(f64),
    #[error("pulse amplitude must be nonnegative and finite, got {0}")]
    InvalidAmplitude(f64),
}

/// How the Raman-shift axis maps onto the probe-minus-pump frequency `ω − ω₁`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ShiftConvention {
    /// Shift `x = ω₁ − ω`: Stokes lines appear at positive shift.
    #[default]
    Stokes,
    /// Shift `x = ω − ω₁` (mirrored axis).
    Direct,
}

impl ShiftConvention {
    /// `ω − ω₁` for a reported shift.
    #[inline]
    pub fn detuning(self, shift: f64) -> f64 {
        match self {
            ShiftConvention::Stokes => -shift,
            ShiftConvention::Direct => shift,
        }
    }
}

/// Gaussian pulse `A·exp(−t²/2σ² − iω_c t)` centred at time zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPulse {
    /// Carrier (rad/s) in whatever frame the caller works in.
    pub center: f64,
    /// Envelope duration σ (s).
    pub duration: f64,
    pub amplitude: f64,
}

impl GaussianPulse {
    pub fn new(center: f64, duration: f64, amplitude: f64) -> Result<Self, PulseError> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(PulseError::InvalidDuration(duration));
        }
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(PulseError::InvalidAmplitude(amplitude));
        }
        Ok(Self {
            center,
            duration,
            amplitude,
        })
    }

    /// `Ẽ(ω) = A·σ√(2π)·exp(−σ²(ω − ω_c)²/2)`.
    #[inline]
    pub fn spectrum(&self, omega: f64) -> f64 {
        let s = self.duration;
        let d = omega - self.center;
        self.amplitude * s * (2.0 * PI).sqrt() * (-0.5 * s * s * d * d).exp()
    }

    /// Envelope `A·exp(−t²/2σ²)` without the carrier.
    #[inline]
    pub fn envelope(&self, t: f64) -> f64 {
        let s = self.duration;
        self.amplitude * (-0.5 * t * t / (s * s)).exp()
    }
}

/// Pulse sequence of a stimulated Raman or shaped-absorption experiment. Frequencies are
/// relative to the pump frequency ω₁; all amplitudes are one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSet {
    /// Impulsive actinic amplitude `E_a` in `E_a δ(t)`.
    pub actinic_amplitude: f64,
    /// Probe carrier minus pump frequency, `ω_p − ω₁` (rad/s).
    pub probe_center_offset: f64,
    /// Probe envelope duration σ (s).
    pub probe_duration: f64,
    pub convention: ShiftConvention,
}

impl PulseSet {
    pub fn new(
        probe_center_offset: f64,
        probe_duration: f64,
        convention: ShiftConvention,
    ) -> Result<Self, PulseError> {
        if !(probe_duration.is_finite() && probe_duration > 0.0) {
            return Err(PulseError::InvalidDuration(probe_duration));
        }
        Ok(Self {
            actinic_amplitude: 1.0,
            probe_center_offset,
            probe_duration,
            convention,
        })
    }

    pub fn probe(&self) -> GaussianPulse {
        GaussianPulse {
            center: self.probe_center_offset,
            duration: self.probe_duration,
            amplitude: 1.0,
        }
    }

    /// Probe spectrum at `omega_rel = ω − ω₁`: `σ√(2π)·exp(−σ²(ω_rel − (ω_p − ω₁))²/2)`.
    #[inline]
    pub fn probe_envelope_freq(&self, omega_rel: f64) -> f64 {
        self.probe().spectrum(omega_rel)
    }

    /// Probe envelope in time about its centre, `exp(−t²/2σ²)`.
    #[inline]
    pub fn probe_envelope_time(&self, t: f64) -> f64 {
        self.probe().envelope(t)
    }

    /// Full width at half maximum of `|Ẽ_p|` in rad/s.
    pub fn probe_bandwidth_fwhm(&self) -> f64 {
        2.0 * (2.0 * std::f64::consts::LN_2).sqrt() / self.probe_duration
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{cm_to_rad_per_s, fs_to_s, rad_per_s_to_cm};

    fn regime_one() -> PulseSet {
        PulseSet::new(cm_to_rad_per_s(-1000.0), fs_to_s(20.0), ShiftConvention::Stokes).unwrap()
    }

    #[test]
    fn peak_value() {
        let p = regime_one();
        let peak = p.probe_envelope_freq(p.probe_center_offset);
        assert!((peak - p.probe_duration * (2.0 * PI).sqrt()).abs() < 1e-30);
    }

    #[test]
    fn twenty_fs_bandwidth() {
        let p = regime_one();
        let fwhm = p.probe_bandwidth_fwhm();
        assert!((fwhm - 1.177e14).abs() < 1e11);
        assert!((rad_per_s_to_cm(fwhm) - 625.1).abs() < 0.1);
        let half = p.probe_envelope_freq(p.probe_center_offset + fwhm / 2.0)
            / p.probe_envelope_freq(p.probe_center_offset);
        assert!((half - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_duration() {
        assert!(PulseSet::new(0.0, -1.0, ShiftConvention::Stokes).is_err());
        assert!(GaussianPulse::new(0.0, 0.0, 1.0).is_err());
        assert!(GaussianPulse::new(0.0, 1.0, -1.0).is_err());
    }
}
