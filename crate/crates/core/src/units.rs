//! Boundary units: wavenumbers (cm⁻¹) and femtoseconds outside, rad/s and seconds inside.

use std::f64::consts::PI;
use std::fmt;

/// Speed of light in cm/s.
pub const SPEED_OF_LIGHT_CM_PER_S: f64 = 2.997_924_58e10;
pub const FS: f64 = 1e-15;
pub const PS: f64 = 1e-12;

/// A spectroscopic wavenumber in cm⁻¹.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Wavenumber(pub f64);

/// An angular frequency (or rate) in rad/s.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct AngularFrequency(pub f64);

impl Wavenumber {
    pub fn to_angular(self) -> AngularFrequency {
        AngularFrequency(2.0 * PI * SPEED_OF_LIGHT_CM_PER_S * self.0)
    }
}

impl AngularFrequency {
    pub fn to_wavenumber(self) -> Wavenumber {
        Wavenumber(self.0 / (2.0 * PI * SPEED_OF_LIGHT_CM_PER_S))
    }
}

impl From<Wavenumber> for AngularFrequency {
    fn from(w: Wavenumber) -> Self {
        w.to_angular()
    }
}

impl From<AngularFrequency> for Wavenumber {
    fn from(w: AngularFrequency) -> Self {
        w.to_wavenumber()
    }
}

impl fmt::Display for Wavenumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} cm^-1", self.0)
    }
}

impl fmt::Display for AngularFrequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} rad/s", self.0)
    }
}

/// cm⁻¹ → rad/s.
#[inline]
pub fn cm_to_rad_per_s(cm: f64) -> f64 {
    Wavenumber(cm).to_angular().0
}

/// rad/s → cm⁻¹.
#[inline]
pub fn rad_per_s_to_cm(w: f64) -> f64 {
    AngularFrequency(w).to_wavenumber().0
}

#[inline]
pub fn fs_to_s(fs: f64) -> f64 {
    fs * FS
}

#[inline]
pub fn s_to_fs(s: f64) -> f64 {
    s / FS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_wavenumbers_is_about_1_88e12() {
        let w = cm_to_rad_per_s(10.0);
        assert!((w - 1.8836e12).abs() < 1e8, "{w}");
        assert!((rad_per_s_to_cm(w) - 10.0).abs() < 1e-12);
    }
}
