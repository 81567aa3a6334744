//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use sle_raman::kinetics::{propagate, propagate_eigen, RateMatrix};
use sle_raman::numerics::c;
use sle_raman::numerics::quadrature::integrate_adaptive;
use sle_raman::pulses::{PulseSet, ShiftConvention};
use sle_raman::scenario::{parse_delays, Scenario};
use sle_raman::signals::{
    fsrs_spectrum, fsrs_time_domain_sweep, overlap_integral, static_limit_spectrum,
    tasp_spectrum, EvaluationPath, FsrsEvaluator, OverlapKernel, PopulationKernel, ShiftGrid,
    Spectrum, TimeDomainOptions,
};
use sle_raman::sle::{SleModel, VibrationalMode};
use sle_raman::sos::{fsrs_sos_diagrams, tasp_sos_diagrams, EigenstateSystem};
use sle_raman::units::{cm_to_rad_per_s, fs_to_s, rad_per_s_to_cm};
use sle_raman::C64;

// Pinned tolerances and budgets.
const UNIT_CHECK: &str = "1.88e12";
const LORENTZ_REL: f64 = 1e-8;
const LORENTZ_FWHM_CM: f64 = 10.0;
const LORENTZ_FWHM_TOL_CM: f64 = 0.5;
const LORENTZ_BUDGET: Duration = Duration::from_secs(1);
const DUAL_PATH_REL: f64 = 1e-6;
const DUAL_PATH_BUDGET: Duration = Duration::from_secs(30);
const TIME_FREQ_REL: f64 = 1e-4;
const TIME_FREQ_BUDGET: Duration = Duration::from_secs(300);
const CONSERVATION: f64 = 1e-12;
const EXPM_VS_EIGEN: f64 = 1e-10;
const STEADY_STATE: f64 = 1e-12;
const DISPERSIVE_MIN: f64 = 0.05;
const ABSORPTIVE_MAX: f64 = 0.01;
const PROMINENCE: f64 = 0.02;
const SPACING_TOL: f64 = 0.25;
const STATIC_RATIO: f64 = 0.5;
const KEYSTONE_REL: f64 = 1e-8;
const SWEEP_BUDGET: Duration = Duration::from_secs(60);
const SPEEDUP_MIN: f64 = 3.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn preset(name: &str) -> Scenario {
    Scenario::preset(name).expect("built-in preset")
}

fn fs(x: f64) -> f64 {
    fs_to_s(x)
}

fn ps(x: f64) -> f64 {
    fs_to_s(1e3 * x)
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let peak = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / peak
}

fn table_fidelity() -> Outcome {
    let mut bad = Vec::new();
    let expect = [
        ("regime-I", 1.00e12, 0.667e12, 3.76e12, 7.51e12, 20.0, 1.88e12),
        ("regime-II", 1.00e12, 0.333e12, 0.939e12, 3.76e12, 30.0, 1.88e12),
    ];
    for (name, k1, k9, d1, d2, sigma, gamma) in expect {
        let sc = preset(name);
        let doc = sc.document();
        let m = sc.model();
        let checks = [
            doc.bath.k1_per_s == k1 && m.bath().forward_rates()[0] == k1,
            doc.bath.k_last_per_s == k9 && *m.bath().forward_rates().last().unwrap() == k9,
            m.modes()[..2].iter().all(|x| x.shift_per_state == d1),
            m.modes()[2..].iter().all(|x| x.shift_per_state == d2),
            doc.pulses.probe_sigma_fs == sigma && m.pulses().probe_duration == fs(sigma),
            m.modes().iter().all(|x| x.dephasing == gamma),
            Scenario::from_toml(&sc.to_toml()).is_ok_and(|back| back == sc),
        ];
        if checks.iter().any(|ok| !ok) {
            bad.push(format!("{name}: {checks:?}"));
        }
    }
    let unit = format!("{:.2e}", cm_to_rad_per_s(10.0));
    let pass = bad.is_empty() && unit == UNIT_CHECK;
    outcome(pass, format!("10 cm^-1 = {unit} s^-1; mismatches: {bad:?}"))
}

fn single_state(gamma_cm: f64, sigma: f64) -> SleModel {
    let mode = VibrationalMode {
        base_frequency: cm_to_rad_per_s(1000.0),
        shift_per_state: 0.0,
        dephasing: cm_to_rad_per_s(gamma_cm),
        polarizability: 1.0,
        dipole: 1.0,
    };
    let pulses = PulseSet::new(cm_to_rad_per_s(-1000.0), sigma, ShiftConvention::Stokes).unwrap();
    SleModel::new(RateMatrix::frozen(1), vec![mode], vec![1.0], pulses).unwrap()
}

/// Lorentzian line times the probe overlap, the overlap from its time-domain definition
/// in units of σ.
fn lorentzian_line(model: &SleModel, x_cm: f64, delay: f64) -> f64 {
    let p = model.pulses();
    let mode = model.modes()[0];
    let sigma = p.probe_duration;
    let nu = p.convention.detuning(cm_to_rad_per_s(x_cm));
    let a = nu - p.probe_center_offset;
    let lam = 2.0 * mode.dephasing;
    let lo = (-delay / sigma).max(-12.0);
    let integral = integrate_adaptive(
        |s| (c(-lam * sigma * s, a * sigma * s)).exp() * (-0.5 * s * s).exp(),
        lo,
        12.0,
        1e-12,
    )
    .unwrap();
    let overlap = c(0.0, -sigma * (-lam * delay).exp()) * integral;
    let lorentz = c(1.0, 0.0) / c(nu + mode.base_frequency, mode.dephasing);
    let e = sigma * (2.0 * std::f64::consts::PI).sqrt() * (-0.5 * (sigma * a).powi(2)).exp();
    (c(0.0, -2.0) * e * lorentz * overlap).im / (sigma * sigma)
}

fn fwhm(grid: &[f64], v: &[f64]) -> (f64, f64) {
    let i = (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    let half = v[i] / 2.0;
    let cross = |j: usize, k: usize| grid[j] + (half - v[j]) * (grid[k] - grid[j]) / (v[k] - v[j]);
    let l = (0..i).rev().find(|&j| v[j] < half).unwrap();
    let r = (i..v.len()).find(|&j| v[j] < half).unwrap();
    (grid[i], cross(r - 1, r) - cross(l, l + 1))
}

fn single_state_reduction() -> Outcome {
    let model = single_state(LORENTZ_FWHM_CM / 2.0, fs(20.0));
    let grid = ShiftGrid::uniform(900.0, 1100.0, 0.25).unwrap();
    let mut worst = 0.0f64;
    let mut elapsed = Duration::ZERO;
    let mut shape = (0.0, 0.0);
    for delay in [fs(2.0), ps(1.0)] {
        let started = Instant::now();
        let s = fsrs_spectrum(&model, &grid, delay, EvaluationPath::Analytic).unwrap();
        elapsed += started.elapsed();
        let want: Vec<f64> = grid
            .points_cm()
            .iter()
            .map(|&x| lorentzian_line(&model, x, delay))
            .collect();
        worst = worst.max(max_rel(&want, &s.values));
        shape = fwhm(grid.points_cm(), &s.values);
    }
    let (center, width) = shape;
    let pass = worst <= LORENTZ_REL
        && (center - 1000.0).abs() <= 0.25
        && (width - LORENTZ_FWHM_CM).abs() <= LORENTZ_FWHM_TOL_CM
        && elapsed < LORENTZ_BUDGET;
    outcome(
        pass,
        format!(
            "rel {worst:.1e}, peak {center} cm^-1, FWHM {width:.2} cm^-1 at 1 ps, {:.3} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn dual_path() -> Outcome {
    let sc = preset("regime-I");
    let m = sc.model();
    let kernel = PopulationKernel::Poles(
        OverlapKernel::from_bath(m.bath(), m.modes()[0].dephasing, m.initial()).unwrap(),
    );
    let grid = ShiftGrid::uniform(600.0, 1799.0, 1.0).unwrap();
    let started = Instant::now();
    let delays = [fs(2.0), fs(500.0), ps(1.0), ps(5.0), ps(15.0)];
    let worst = delays
        .iter()
        .flat_map(|&d| grid.points_cm().iter().map(move |&x| (d, x)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(delay, x)| {
            let nu = m.pulses().convention.detuning(cm_to_rad_per_s(x));
            let a = overlap_integral(&kernel, m.pulses(), nu, delay, EvaluationPath::Analytic).unwrap();
            let q = overlap_integral(&kernel, m.pulses(), nu, delay, EvaluationPath::Quadrature)
                .unwrap();
            let scale = a.iter().fold(0.0f64, |s, z| s.max(z.norm()));
            let err = a.iter().zip(&q).fold(0.0f64, |s, (u, v): (&C64, &C64)| s.max((u - v).norm()));
            err / scale
        })
        .reduce(|| 0.0, f64::max);
    let t = started.elapsed();
    outcome(
        worst <= DUAL_PATH_REL && t < DUAL_PATH_BUDGET,
        format!("rel {worst:.1e} over {} points x 5 delays, {:.1} s", grid.len(), t.as_secs_f64()),
    )
}

fn time_frequency() -> Outcome {
    let sc = preset("regime-I");
    let m = sc.model();
    let delays = [fs(2.0), fs(500.0), ps(5.0)];
    let started = Instant::now();
    let td = fsrs_time_domain_sweep(m, sc.grid(), &delays, &TimeDomainOptions::default()).unwrap();
    let mut worst = 0.0f64;
    for (d, t) in delays.iter().zip(&td) {
        let f = fsrs_spectrum(m, sc.grid(), *d, EvaluationPath::Analytic).unwrap();
        worst = worst.max(max_rel(&f.values, &t.values));
    }
    let t = started.elapsed();
    outcome(
        worst <= TIME_FREQ_REL && t < TIME_FREQ_BUDGET,
        format!("normalized Linf {worst:.1e}, {:.1} s", t.as_secs_f64()),
    )
}

fn populations() -> Outcome {
    let sc = preset("regime-I");
    let m = sc.model();
    let times: Vec<f64> = (0..=200).map(|i| fs(100.0 * i as f64)).collect();
    let a = propagate(m.bath(), m.initial(), &times).unwrap();
    let b = propagate_eigen(m.bath(), m.initial(), &times).unwrap();
    let mut leak = 0.0f64;
    let mut diff = 0.0f64;
    for (ra, rb) in a.populations.iter().zip(&b.populations) {
        leak = leak.max((ra.iter().sum::<f64>() - 1.0).abs());
        for (x, y) in ra.iter().zip(rb) {
            diff = diff.max((x - y).abs());
        }
    }
    let two = RateMatrix::chain(2, 1e12, 1e12, 0.1).unwrap();
    let st = two.stationary_distribution().unwrap();
    let late = propagate(&two, &[1.0, 0.0], &[ps(100.0)]).unwrap();
    let steady = [st.as_slice(), late.populations[0].as_slice()]
        .iter()
        .map(|p| (p[0] - 1.0 / 11.0).abs().max((p[1] - 10.0 / 11.0).abs()))
        .fold(0.0f64, f64::max);
    outcome(
        leak <= CONSERVATION && diff <= EXPM_VS_EIGEN && steady <= STEADY_STATE,
        format!("conservation {leak:.1e}, expm vs eigen {diff:.1e}, N=2 steady state {steady:.1e}"),
    )
}

/// Mode-resolved spectrum restricted to the mode's frequency span ± 3δ.
fn mode_window(model: &SleModel, mode: usize, grid: &ShiftGrid, delay: f64) -> (Vec<f64>, Vec<f64>) {
    let single = model.with_modes(&[mode]).unwrap();
    let s = fsrs_spectrum(&single, grid, delay, EvaluationPath::Analytic).unwrap();
    let freqs = model.modes()[mode].frequencies_along_chain(model.states());
    let d = rad_per_s_to_cm(model.modes()[mode].shift_per_state).abs();
    let lo = rad_per_s_to_cm(freqs.iter().cloned().fold(f64::MAX, f64::min)) - 3.0 * d;
    let hi = rad_per_s_to_cm(freqs.iter().cloned().fold(f64::MIN, f64::max)) + 3.0 * d;
    s.shifts_cm
        .iter()
        .zip(&s.values)
        .filter(|(x, _)| (lo..=hi).contains(*x))
        .map(|(x, v)| (*x, *v))
        .unzip()
}

fn negative_lobe(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    (-min).max(0.0) / max
}

fn dispersive_lineshapes() -> Outcome {
    let sc = preset("regime-I");
    let m = sc.model();
    let mut pass = true;
    let mut parts = Vec::new();
    for mode in [0, 1] {
        let early = negative_lobe(&mode_window(m, mode, sc.grid(), fs(2.0)).1);
        let late = negative_lobe(&mode_window(m, mode, sc.grid(), ps(15.0)).1);
        pass &= early >= DISPERSIVE_MIN && late < ABSORPTIVE_MAX;
        parts.push(format!("mode {}: 2 fs {:.1}%, 15 ps {:.2}%", mode + 1, 100.0 * early, 100.0 * late));
    }
    outcome(pass, parts.join("; "))
}

/// Local maxima whose prominence exceeds `fraction` of the largest value.
fn resolvable_maxima(x: &[f64], v: &[f64], fraction: f64) -> Vec<f64> {
    let top = v.iter().cloned().fold(f64::MIN, f64::max);
    let mut out = Vec::new();
    for i in 1..v.len() - 1 {
        if !(v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] > 0.0) {
            continue;
        }
        let mut left = v[i];
        for j in (0..i).rev() {
            if v[j] > v[i] {
                break;
            }
            left = left.min(v[j]);
        }
        let mut right = v[i];
        for &w in &v[i + 1..] {
            if w > v[i] {
                break;
            }
            right = right.min(w);
        }
        if v[i] - left.max(right) >= fraction * top {
            out.push(x[i]);
        }
    }
    out
}

fn longest_regular_run(peaks: &[f64], spacing: f64) -> usize {
    let mut best = usize::from(!peaks.is_empty());
    let mut run = best;
    for w in peaks.windows(2) {
        if ((w[1] - w[0]) - spacing).abs() <= SPACING_TOL * spacing {
            run += 1;
        } else {
            run = 1;
        }
        best = best.max(run);
    }
    best
}

fn fine_structure() -> Outcome {
    let grid = ShiftGrid::uniform(600.0, 2000.0, 0.5).unwrap();
    let mut found = Vec::new();
    for name in ["regime-I", "regime-II"] {
        let sc = preset(name);
        let m = sc.model().with_modes(&[2, 3]).unwrap();
        let d = rad_per_s_to_cm(m.modes()[0].shift_per_state);
        let freqs: Vec<f64> = m
            .modes()
            .iter()
            .flat_map(|x| x.frequencies_along_chain(m.states()))
            .map(rad_per_s_to_cm)
            .collect();
        let lo = freqs.iter().cloned().fold(f64::MAX, f64::min) - 3.0 * d;
        let hi = freqs.iter().cloned().fold(f64::MIN, f64::max) + 3.0 * d;
        let s = fsrs_spectrum(&m, &grid, ps(1.0), EvaluationPath::Analytic).unwrap();
        let (x, v): (Vec<f64>, Vec<f64>) = s
            .shifts_cm
            .iter()
            .zip(&s.values)
            .filter(|(x, _)| (lo..=hi).contains(*x))
            .map(|(x, v)| (*x, *v))
            .unzip();
        found.push(resolvable_maxima(&x, &v, PROMINENCE));
    }
    let d2 = rad_per_s_to_cm(preset("regime-I").model().modes()[2].shift_per_state);
    let run = longest_regular_run(&found[0], d2);
    let pass = run >= 3 && found[1].len() <= 2;
    outcome(
        pass,
        format!(
            "regime-I maxima {:?} (regular run {run}); regime-II maxima {:?}",
            found[0].iter().map(|x| x.round()).collect::<Vec<_>>(),
            found[1].iter().map(|x| x.round()).collect::<Vec<_>>()
        ),
    )
}

fn l2_distance(a: &Spectrum, b: &Spectrum) -> f64 {
    let na = a.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x / na - y / nb).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn static_convergence() -> Outcome {
    let sc = preset("regime-I");
    let m = sc.model();
    let dist = |t: f64| {
        let full = fsrs_spectrum(m, sc.grid(), t, EvaluationPath::Analytic).unwrap();
        let st = static_limit_spectrum(m, sc.grid(), t).unwrap();
        l2_distance(&full, &st)
    };
    let (early, late) = (dist(fs(2.0)), dist(ps(15.0)));
    outcome(
        late <= STATIC_RATIO * early,
        format!("L2 distance 2 fs {early:.3}, 15 ps {late:.3} (ratio {:.2})", late / early),
    )
}

fn keystone() -> Outcome {
    let modes = [(1000.0, 1.3, 0.8), (1250.0, 0.5, 1.1), (1600.0, 0.9, 1.0)];
    let modes = modes
        .iter()
        .map(|&(w, a, mu)| VibrationalMode {
            base_frequency: cm_to_rad_per_s(w),
            shift_per_state: 0.0,
            dephasing: cm_to_rad_per_s(10.0),
            polarizability: a,
            dipole: mu,
        })
        .collect();
    let pulses = PulseSet::new(cm_to_rad_per_s(-1000.0), fs(20.0), ShiftConvention::Stokes).unwrap();
    let model = SleModel::new(RateMatrix::frozen(1), modes, vec![1.0], pulses).unwrap();
    let sys = EigenstateSystem::from_single_state_model(&model).unwrap();
    let grid = ShiftGrid::uniform(600.0, 1800.0, 1.0).unwrap();
    let nus: Vec<f64> = grid
        .points_cm()
        .iter()
        .map(|&x| pulses.convention.detuning(cm_to_rad_per_s(x)))
        .collect();
    let (mut raman, mut absorption) = (0.0f64, 0.0f64);
    for delay in [0.0, fs(2.0), fs(300.0), ps(2.0)] {
        let sle = fsrs_spectrum(&model, &grid, delay, EvaluationPath::Analytic).unwrap();
        let sos: Vec<f64> = nus
            .iter()
            .map(|&nu| fsrs_sos_diagrams(&sys, &pulses, nu, delay).unwrap().first)
            .collect();
        raman = raman.max(max_rel(&sle.values, &sos));
        let sle = tasp_spectrum(&model, &grid, delay).unwrap();
        let sos: Vec<f64> = nus
            .iter()
            .map(|&nu| tasp_sos_diagrams(&sys, &pulses, nu, delay).unwrap().first)
            .collect();
        absorption = absorption.max(max_rel(&sle.values, &sos));
    }
    outcome(
        raman <= KEYSTONE_REL && absorption <= KEYSTONE_REL,
        format!("raman rel {raman:.1e}, absorption rel {absorption:.1e}"),
    )
}

fn timed_sweep(threads: usize, model: &SleModel, grid: &ShiftGrid, delays: &[f64]) -> (Duration, Vec<Spectrum>) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let started = Instant::now();
        let out = FsrsEvaluator::new(model, grid, EvaluationPath::Analytic)
            .unwrap()
            .sweep(delays)
            .unwrap();
        (started.elapsed(), out)
    })
}

fn performance() -> Outcome {
    let sc = preset("regime-I");
    let grid = ShiftGrid::uniform(600.0, 1799.0, 1.0).unwrap();
    let delays = parse_delays("2fs,500fs:14.5ps:500fs").unwrap();
    let (one, a) = timed_sweep(1, sc.model(), &grid, &delays);
    let (four, b) = timed_sweep(4, sc.model(), &grid, &delays);
    let speedup = one.as_secs_f64() / four.as_secs_f64();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    outcome(
        one < SWEEP_BUDGET && speedup >= SPEEDUP_MIN && a == b,
        format!(
            "{} x {} sweep: 1 worker {:.2} s, 4 workers {:.2} s, speedup {speedup:.2} \
             ({cores} hardware threads), identical output {}",
            grid.len(),
            delays.len(),
            one.as_secs_f64(),
            four.as_secs_f64(),
            a == b
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("preset parameters and unit conversion", table_fidelity),
        ("single-state Lorentzian reduction", single_state_reduction),
        ("closed form vs quadrature overlaps", dual_path),
        ("frequency vs time domain spectra", time_frequency),
        ("population conservation and steady state", populations),
        ("dispersive early, absorptive late lineshapes", dispersive_lineshapes),
        ("resolved bath-state fine structure", fine_structure),
        ("convergence to the static limit", static_convergence),
        ("single-state bath vs eigenstate expressions", keystone),
        ("sweep runtime and parallel scaling", performance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {:<46} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
