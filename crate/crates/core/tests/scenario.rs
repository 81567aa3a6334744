use std::path::PathBuf;

use proptest::prelude::*;
use sle_raman::scenario::{
    emit_csv, parse_delays, regime_one, regime_two, Scenario, ScenarioDocument, ScenarioError,
};
use sle_raman::signals::{fsrs_spectrum, EvaluationPath, ShiftGrid, Spectrum};
use sle_raman::units::fs_to_s;

fn doc_values(doc: &ScenarioDocument) -> (f64, f64, f64, f64, f64, f64) {
    let d1 = doc.modes[0].delta_per_s.unwrap();
    let d2 = doc.modes[2].delta_per_s.unwrap();
    assert_eq!(doc.modes[1].delta_per_s, Some(d1));
    assert_eq!(doc.modes[3].delta_per_s, Some(d2));
    let g = doc.modes[0].gamma_per_s.unwrap();
    assert!(doc.modes.iter().all(|m| m.gamma_per_s == Some(g)));
    (doc.bath.k1_per_s, doc.bath.k_last_per_s, d1, d2, doc.pulses.probe_sigma_fs, g)
}

#[test]
fn presets_carry_the_tabulated_parameters() {
    let one = Scenario::preset("regime-I").unwrap();
    assert_eq!(doc_values(one.document()), (1.00e12, 0.667e12, 3.76e12, 7.51e12, 20.0, 1.88e12));
    let two = Scenario::preset("regime-II").unwrap();
    assert_eq!(doc_values(two.document()), (1.00e12, 0.333e12, 0.939e12, 3.76e12, 30.0, 1.88e12));

    // The built model sees exactly the same numbers.
    let m = one.model();
    assert_eq!(m.bath().forward_rates()[0], 1.00e12);
    assert_eq!(*m.bath().forward_rates().last().unwrap(), 0.667e12);
    assert_eq!(m.modes()[2].shift_per_state, 7.51e12);
    assert_eq!(m.pulses().probe_duration, fs_to_s(20.0));
    assert_eq!(m.states(), 10);
    assert_eq!(m.initial()[0], 1.0);
    assert!(Scenario::preset("regime-III").is_none());
}

#[test]
fn presets_survive_a_text_round_trip_bit_exactly() {
    for name in ["regime-I", "regime-II"] {
        let sc = Scenario::preset(name).unwrap();
        let text = sc.to_toml();
        let back = Scenario::from_toml(&text).unwrap();
        assert_eq!(back, sc);
        assert_eq!(back.to_toml(), text);
    }
    assert_eq!(Scenario::preset("regime-I").unwrap().document(), &regime_one());
    assert_eq!(Scenario::preset("regime-II").unwrap().document(), &regime_two());
}

#[test]
fn preset_delay_schedules() {
    let one = Scenario::preset("regime-I").unwrap();
    let fs: Vec<f64> = one.delays().iter().map(|d| (d * 1e15).round()).collect();
    assert_eq!(fs.len(), 1 + 20 + 5);
    assert_eq!(fs[0], 2.0);
    assert_eq!(fs[1], 500.0);
    assert_eq!(fs[20], 10000.0);
    assert_eq!(fs[21], 11000.0);
    assert_eq!(*fs.last().unwrap(), 15000.0);
}

fn with_sigma(sigma: &str) -> String {
    Scenario::preset("regime-I")
        .unwrap()
        .to_toml()
        .replace("probe_sigma_fs = 20.0", &format!("probe_sigma_fs = {sigma}"))
}

#[test]
fn negative_probe_duration_is_a_validation_error() {
    let text = with_sigma("-5.0");
    assert_ne!(text, Scenario::preset("regime-I").unwrap().to_toml());
    match Scenario::from_toml(&text) {
        Err(ScenarioError::Validation { key, .. }) => assert_eq!(key, "pulses.probe_sigma_fs"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn other_constraints_are_validated() {
    let base = Scenario::preset("regime-I").unwrap().to_toml();
    let cases = [
        ("k1_per_s = 1000000000000.0", "k1_per_s = -1.0", "bath.k1_per_s"),
        ("initial_state = 1", "initial_state = 11", "bath.initial_state"),
        ("backward_ratio = 0.1", "backward_ratio = -0.1", "bath.backward_ratio"),
    ];
    for (from, to, key) in cases {
        assert!(base.contains(from), "{from}");
        match Scenario::from_toml(&base.replacen(from, to, 1)) {
            Err(ScenarioError::Validation { key: k, .. }) => assert_eq!(k, key),
            other => panic!("{to}: {other:?}"),
        }
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let base = Scenario::preset("regime-I").unwrap().to_toml();
    let text = base.replacen("[bath]\n", "[bath]\nunexpected = 3\n", 1);
    assert_ne!(text, base);
    let err = Scenario::from_toml(&text).unwrap_err();
    assert!(matches!(err, ScenarioError::Parse { .. }), "{err:?}");
    assert!(err.to_string().contains("unexpected"), "{err}");
}

#[test]
fn parse_errors_carry_a_position() {
    let text = "label = \"x\"\n[bath]\nstates = = 3\n";
    match Scenario::from_toml(text) {
        Err(ScenarioError::Parse { line, column, .. }) => {
            assert_eq!(line, 3);
            assert!(column >= 1);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn load_accepts_presets_and_files() {
    assert_eq!(Scenario::load("regime-II").unwrap(), Scenario::preset("regime-II").unwrap());
    assert!(matches!(Scenario::load("no-such-thing.toml"), Err(ScenarioError::NotFound(_))));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, with_sigma("25.0")).unwrap();
    let sc = Scenario::load(path.to_str().unwrap()).unwrap();
    assert_eq!(sc.model().pulses().probe_duration, fs_to_s(25.0));
}

#[test]
fn delay_grammar() {
    let fs = |s: &str| -> Vec<f64> { parse_delays(s).unwrap().iter().map(|d| d * 1e15).collect() };
    assert_eq!(fs("2fs"), vec![2.0]);
    assert_eq!(fs("0"), vec![0.0]);
    let v = fs("50fs:950fs:50fs");
    assert_eq!(v.len(), 19);
    assert!((v[18] - 950.0).abs() < 1e-9);
    let v = fs("2fs,500fs:10ps:500fs,11ps:15ps:1ps");
    assert_eq!(v.len(), 26);
    // stop off the lattice is not reached
    assert_eq!(fs("0:1ps:300fs").len(), 4);
    for bad in ["", "2fs,,3fs", "1ps:0fs:100fs", "0:1ps:0", "0:1ps:-1fs", "1:2", "3ns", "x fs", "inf"] {
        assert!(parse_delays(bad).is_err(), "{bad}");
    }
}

fn toy(values: &[f64], delay: f64) -> Spectrum {
    Spectrum {
        shifts_cm: (0..values.len()).map(|i| 600.0 + i as f64).collect(),
        delay,
        values: values.to_vec(),
        label: "toy".into(),
        path: EvaluationPath::Analytic,
    }
}

#[test]
fn csv_layout() {
    let mut out = Vec::new();
    let n = emit_csv(&[toy(&[1.0, -2.5, 3.0], 2e-15)], None, &mut out).unwrap();
    assert_eq!(n, out.len());
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "raman_shift_cm,delay_fs,intensity,path");
    assert_eq!(lines[2], "6.01000000e2,2.00000000e0,-2.50000000e0,analytic");
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));

    let mut out = Vec::new();
    emit_csv(&[toy(&[1.0; 5], 0.0), toy(&[2.0; 5], 1e-12)], None, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 5);
    // delay-major order
    assert!(text.lines().nth(5).unwrap().contains(",0.00000000e0,"));
    assert!(text.lines().nth(6).unwrap().contains(",1.00000000e3,"));
}

#[test]
fn csv_rejects_inconsistent_input() {
    let mut out = Vec::new();
    assert!(emit_csv(&[], None, &mut out).is_err());
    let mut other = toy(&[1.0, 2.0], 0.0);
    other.shifts_cm[1] = 900.0;
    assert!(emit_csv(&[toy(&[1.0, 2.0], 0.0), other], None, &mut out).is_err());
    let a = toy(&[1.0, 2.0], 0.0);
    assert!(emit_csv(&[a.clone()], Some(&[toy(&[1.0, 2.0], 1.0)]), &mut out).is_err());
    assert!(out.is_empty());
    emit_csv(&[a.clone()], Some(&[a]), &mut out).unwrap();
    assert!(String::from_utf8(out).unwrap().starts_with("raman_shift_cm,delay_fs,intensity,path,static_intensity\n"));
}

#[test]
fn regime_one_two_femtosecond_golden_file() {
    let sc = Scenario::preset("regime-I").unwrap();
    let s = fsrs_spectrum(sc.model(), sc.grid(), 2e-15, EvaluationPath::Analytic).unwrap();
    let mut out = Vec::new();
    emit_csv(&[s], None, &mut out).unwrap();
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/regime_one_2fs.csv");
    if std::env::var_os("SLE_RAMAN_BLESS").is_some() {
        std::fs::write(&path, &out).unwrap();
    }
    let golden = std::fs::read(&path).expect("golden file present");
    assert!(golden == out, "output differs from {}", path.display());
}

#[test]
fn grid_follows_the_document() {
    let sc = Scenario::preset("regime-I").unwrap();
    assert_eq!(sc.grid(), &ShiftGrid::uniform(600.0, 1800.0, 1.0).unwrap());
    assert_eq!(sc.grid().len(), 1201);
    assert_eq!(sc.path(), EvaluationPath::Analytic);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_is_idempotent(
        sigma in 1.0f64..200.0,
        k1 in 1e10f64..1e14,
        states in 1usize..12,
        offset in -3000.0f64..3000.0,
        omega in 100.0f64..3000.0,
        delta_cm in -50.0f64..50.0,
    ) {
        let mut doc = regime_one();
        doc.pulses.probe_sigma_fs = sigma;
        doc.pulses.probe_center_offset_cm = offset;
        doc.bath.k1_per_s = k1;
        doc.bath.states = states;
        doc.modes[1].omega1_cm = omega;
        doc.modes[1].delta_per_s = None;
        doc.modes[1].delta_cm = Some(delta_cm);
        let sc = Scenario::from_document(doc).unwrap();
        let once = Scenario::from_toml(&sc.to_toml()).unwrap();
        let twice = Scenario::from_toml(&once.to_toml()).unwrap();
        prop_assert_eq!(&once, &sc);
        prop_assert_eq!(once.to_toml(), twice.to_toml());
    }
}
