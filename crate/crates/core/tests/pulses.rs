use std::f64::consts::PI;

use proptest::prelude::*;
use sle_raman::numerics::{c, integrate_adaptive};
use sle_raman::pulses::{GaussianPulse, PulseSet, ShiftConvention};
use sle_raman::units::{cm_to_rad_per_s, fs_to_s, rad_per_s_to_cm};

fn probe(sigma_fs: f64) -> PulseSet {
    PulseSet::new(cm_to_rad_per_s(-1000.0), fs_to_s(sigma_fs), ShiftConvention::Stokes).unwrap()
}

#[test]
fn linewidth_unit_cross_check() {
    let w = cm_to_rad_per_s(10.0);
    assert!((w - 1.88e12).abs() / 1.88e12 < 5e-3);
    assert_eq!(format!("{:.2e}", w), "1.88e12");
    assert!((rad_per_s_to_cm(w) - 10.0).abs() < 1e-12);
}

#[test]
fn peak_at_probe_carrier() {
    for sigma in [20.0, 30.0] {
        let p = probe(sigma);
        let peak = p.probe_envelope_freq(p.probe_center_offset);
        assert!((peak / (p.probe_duration * (2.0 * PI).sqrt()) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn twenty_fs_probe_bandwidth() {
    let fwhm = probe(20.0).probe_bandwidth_fwhm();
    assert!((fwhm - 1.177e14).abs() / 1.177e14 < 1e-3);
    // Exact value is 625.07 cm⁻¹.
    assert!((rad_per_s_to_cm(fwhm) - 624.0).abs() < 2.0);
}

#[test]
fn parseval() {
    for sigma in [20.0, 30.0] {
        let p = probe(sigma);
        let s = p.probe_duration;
        let w0 = p.probe_center_offset;
        // ∫|Ẽ|² dω/2π in units of 1/σ, ∫|E|² dt in units of σ.
        let freq = integrate_adaptive(
            |x| c((p.probe_envelope_freq(w0 + x / s) / s).powi(2), 0.0),
            -12.0,
            12.0,
            1e-12,
        )
        .unwrap()
        .re
            * s
            / (2.0 * PI);
        let time = integrate_adaptive(
            |u| c(p.probe_envelope_time(u * s).powi(2), 0.0),
            -12.0,
            12.0,
            1e-12,
        )
        .unwrap()
        .re
            * s;
        assert!((freq / time - 1.0).abs() < 1e-10, "{freq} {time}");
    }
}

#[test]
fn convention_maps_shift_to_detuning() {
    assert_eq!(ShiftConvention::Stokes.detuning(5.0), -5.0);
    assert_eq!(ShiftConvention::Direct.detuning(5.0), 5.0);
    assert_eq!(ShiftConvention::default(), ShiftConvention::Stokes);
}

proptest! {
    #[test]
    fn spectrum_is_fourier_transform_of_envelope(
        sigma_fs in 5.0f64..60.0,
        center_cm in -2000.0f64..2000.0,
        offset in -4.0f64..4.0,
    ) {
        let s = fs_to_s(sigma_fs);
        let pulse = GaussianPulse::new(cm_to_rad_per_s(center_cm), s, 1.0).unwrap();
        let omega = pulse.center + offset / s;
        // ∫ e^{iωt} E(t) e^{−iω_c t} dt over u = t/σ
        let ft = integrate_adaptive(
            |u| {
                let t = u * s;
                c(0.0, (omega - pulse.center) * t).exp() * pulse.envelope(t)
            },
            -14.0,
            14.0,
            1e-13,
        )
        .unwrap()
            * s;
        let want = pulse.spectrum(omega);
        prop_assert!((ft.re - want).abs() <= 1e-9 * pulse.spectrum(pulse.center));
        prop_assert!(ft.im.abs() <= 1e-9 * pulse.spectrum(pulse.center));
    }

    #[test]
    fn spectrum_is_even_about_carrier(sigma_fs in 5.0f64..60.0, d in 0.0f64..1e14) {
        let p = probe(sigma_fs);
        let a = p.probe_envelope_freq(p.probe_center_offset + d);
        let b = p.probe_envelope_freq(p.probe_center_offset - d);
        prop_assert!((a - b).abs() <= 1e-15 * p.probe_envelope_freq(p.probe_center_offset));
        prop_assert!(a >= 0.0);
    }
}
