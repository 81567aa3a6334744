//! Consistency checks behind `sle-raman validate`.

use std::time::Instant;

use sle_raman::kinetics::{propagate, propagate_eigen, RateMatrix};
use sle_raman::pulses::{PulseSet, ShiftConvention};
use sle_raman::scenario::Scenario;
use sle_raman::signals::{
    fsrs_spectrum, fsrs_time_domain_sweep, overlap_integral, tasp_spectrum, EvaluationPath,
    OverlapKernel, PopulationKernel, ShiftGrid, TimeDomainOptions,
};
use sle_raman::sle::{SleModel, VibrationalMode};
use sle_raman::sos::{fsrs_sos_diagrams, tasp_sos_diagrams, EigenstateSystem};
use sle_raman::units::{cm_to_rad_per_s, fs_to_s};

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let peak = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / peak
}

fn regime_one() -> Scenario {
    Scenario::preset("regime-I").expect("built-in preset")
}

fn overlap_paths(step: f64) -> Result<f64, String> {
    let sc = regime_one();
    let m = sc.model();
    let kernel = PopulationKernel::Poles(
        OverlapKernel::from_bath(m.bath(), m.modes()[0].dephasing, m.initial())
            .map_err(|e| e.to_string())?,
    );
    let grid = ShiftGrid::uniform(600.0, 1799.0, step).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for delay in [fs_to_s(2.0), fs_to_s(500.0), fs_to_s(2.0e3)] {
        for &x in grid.points_cm() {
            let nu = m.pulses().convention.detuning(cm_to_rad_per_s(x));
            let a = overlap_integral(&kernel, m.pulses(), nu, delay, EvaluationPath::Analytic)
                .map_err(|e| e.to_string())?;
            let q = overlap_integral(&kernel, m.pulses(), nu, delay, EvaluationPath::Quadrature)
                .map_err(|e| e.to_string())?;
            let scale = a.iter().fold(0.0f64, |s, z| s.max(z.norm()));
            let err = a.iter().zip(&q).fold(0.0f64, |s, (u, v)| s.max((u - v).norm()));
            worst = worst.max(err / scale);
        }
    }
    Ok(worst)
}

fn time_vs_frequency(step: f64) -> Result<f64, String> {
    let sc = regime_one();
    let m = sc.model();
    let grid = ShiftGrid::uniform(600.0, 1800.0, step).map_err(|e| e.to_string())?;
    let delays = [fs_to_s(2.0), fs_to_s(500.0), fs_to_s(5.0e3)];
    let td = fsrs_time_domain_sweep(m, &grid, &delays, &TimeDomainOptions::default())
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (d, t) in delays.iter().zip(&td) {
        let f = fsrs_spectrum(m, &grid, *d, EvaluationPath::Analytic).map_err(|e| e.to_string())?;
        worst = worst.max(max_rel(&f.values, &t.values));
    }
    Ok(worst)
}

fn single_state_reduction(absorption: bool) -> Result<f64, String> {
    let pulses = PulseSet::new(cm_to_rad_per_s(-1000.0), fs_to_s(20.0), ShiftConvention::Stokes)
        .map_err(|e| e.to_string())?;
    let mode = VibrationalMode {
        base_frequency: cm_to_rad_per_s(1000.0),
        shift_per_state: 0.0,
        dephasing: cm_to_rad_per_s(10.0),
        polarizability: 1.3,
        dipole: 0.8,
    };
    let second = VibrationalMode {
        base_frequency: cm_to_rad_per_s(1250.0),
        ..mode
    };
    let model = SleModel::new(RateMatrix::frozen(1), vec![mode, second], vec![1.0], pulses)
        .map_err(|e| e.to_string())?;
    let sys = EigenstateSystem::from_single_state_model(&model).map_err(|e| e.to_string())?;
    let grid = ShiftGrid::uniform(600.0, 1800.0, 2.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for delay in [0.0, fs_to_s(50.0), fs_to_s(1.0e3)] {
        let (sle, sos): (Vec<f64>, Vec<f64>) = if absorption {
            let s = tasp_spectrum(&model, &grid, delay).map_err(|e| e.to_string())?;
            let o = grid
                .points_cm()
                .iter()
                .map(|&x| {
                    tasp_sos_diagrams(&sys, &pulses, pulses.convention.detuning(cm_to_rad_per_s(x)), delay)
                        .map(|d| d.first)
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            (s.values, o)
        } else {
            let s = fsrs_spectrum(&model, &grid, delay, EvaluationPath::Analytic)
                .map_err(|e| e.to_string())?;
            let o = grid
                .points_cm()
                .iter()
                .map(|&x| {
                    fsrs_sos_diagrams(&sys, &pulses, pulses.convention.detuning(cm_to_rad_per_s(x)), delay)
                        .map(|d| d.first)
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            (s.values, o)
        };
        worst = worst.max(max_rel(&sle, &sos));
    }
    Ok(worst)
}

fn conservation() -> Result<(f64, f64), String> {
    let sc = regime_one();
    let m = sc.model();
    let times: Vec<f64> = (0..=200).map(|i| fs_to_s(100.0 * i as f64)).collect();
    let a = propagate(m.bath(), m.initial(), &times).map_err(|e| e.to_string())?;
    let b = propagate_eigen(m.bath(), m.initial(), &times).map_err(|e| e.to_string())?;
    let mut leak = 0.0f64;
    let mut diff = 0.0f64;
    for (ra, rb) in a.populations.iter().zip(&b.populations) {
        leak = leak.max((ra.iter().sum::<f64>() - 1.0).abs());
        for (x, y) in ra.iter().zip(rb) {
            diff = diff.max((x - y).abs());
        }
    }
    Ok((leak, diff))
}

/// Runs every check, prints the table and reports whether all passed.
pub fn run(quick: bool) -> bool {
    let started = Instant::now();
    let (overlap_step, td_step) = if quick { (25.0, 5.0) } else { (1.0, 1.0) };
    let mut checks = Vec::new();
    let mut errors = Vec::new();
    let mut record = |name: &'static str, tolerance: f64, value: Result<f64, String>| match value {
        Ok(value) => checks.push(Check { name, value, tolerance }),
        Err(e) => {
            errors.push(format!("{name}: {e}"));
            checks.push(Check { name, value: f64::NAN, tolerance });
        }
    };
    record("overlap: closed form vs quadrature", 1e-6, overlap_paths(overlap_step));
    record("raman: frequency vs time domain", 1e-4, time_vs_frequency(td_step));
    record("raman: single-state bath vs eigenstates", 1e-8, single_state_reduction(false));
    record("absorption: single-state bath vs eigenstates", 1e-8, single_state_reduction(true));
    match conservation() {
        Ok((leak, diff)) => {
            record("populations: conservation", 1e-12, Ok(leak));
            record("populations: expm vs eigenvectors", 1e-10, Ok(diff));
        }
        Err(e) => {
            record("populations: conservation", 1e-12, Err(e.clone()));
            record("populations: expm vs eigenvectors", 1e-10, Err(e));
        }
    }

    println!("{:<48} {:>12} {:>10}  result", "check", "value", "tolerance");
    let mut all = true;
    for c in &checks {
        let pass = c.value <= c.tolerance;
        all &= pass;
        println!(
            "{:<48} {:>12.3e} {:>10.1e}  {}",
            c.name,
            c.value,
            c.tolerance,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    for e in errors {
        eprintln!("{e}");
    }
    println!("elapsed {:.1} s", started.elapsed().as_secs_f64());
    all
}
