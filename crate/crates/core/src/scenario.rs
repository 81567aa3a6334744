//! Scenario files (TOML), the two built-in parameter sets, the delay mini-grammar and CSV
//! output.
//!
//! Files use cm⁻¹ and fs with the unit in every key name; everything is converted to rad/s
//! and seconds on the way into the model.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinetics::{localized, RateMatrix};
use crate::pulses::{PulseSet, ShiftConvention};
use crate::signals::{EvaluationPath, OverlapQuadrature, ShiftGrid, Spectrum};
use crate::sle::{SleModel, VibrationalMode};
use crate::units::{cm_to_rad_per_s, fs_to_s, s_to_fs};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for '{key}': {constraint}")]
    Validation { key: String, constraint: String },
    #[error("unknown preset or unreadable file '{0}'")]
    NotFound(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid(key: impl Into<String>, constraint: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        key: key.into(),
        constraint: constraint.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub states: usize,
    pub k1_per_s: f64,
    pub k_last_per_s: f64,
    #[serde(default = "default_backward_ratio")]
    pub backward_ratio: f64,
    /// One-based index of the initially populated bath state.
    #[serde(default = "default_initial_state")]
    pub initial_state: usize,
}

fn default_backward_ratio() -> f64 {
    0.1
}

fn default_initial_state() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub omega1_cm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_per_s: Option<f64>,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub mu: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionKey {
    #[default]
    Stokes,
    Direct,
}

impl From<ConventionKey> for ShiftConvention {
    fn from(k: ConventionKey) -> Self {
        match k {
            ConventionKey::Stokes => ShiftConvention::Stokes,
            ConventionKey::Direct => ShiftConvention::Direct,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub probe_sigma_fs: f64,
    #[serde(default = "default_probe_offset")]
    pub probe_center_offset_cm: f64,
    #[serde(default)]
    pub shift_convention: ConventionKey,
}

fn default_probe_offset() -> f64 {
    -1000.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub shift_min_cm: f64,
    pub shift_max_cm: f64,
    pub step_cm: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            shift_min_cm: 600.0,
            shift_max_cm: 1800.0,
            step_cm: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySection {
    /// Items of the delay grammar, e.g. `"2fs"` or `"500fs:10ps:500fs"`.
    pub spans: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    #[serde(default = "default_quadrature_rel")]
    pub quadrature_rel: f64,
    #[serde(default = "default_window")]
    pub probe_window_sigmas: f64,
}

fn default_quadrature_rel() -> f64 {
    OverlapQuadrature::default().rel_tol
}

fn default_window() -> f64 {
    OverlapQuadrature::default().window_sigmas
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self {
            quadrature_rel: default_quadrature_rel(),
            probe_window_sigmas: default_window(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    #[serde(default)]
    pub path: PathKey,
    #[serde(default)]
    pub tolerances: ToleranceSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKey {
    #[default]
    Analytic,
    Quadrature,
    TimeDomain,
}

impl From<PathKey> for EvaluationPath {
    fn from(k: PathKey) -> Self {
        match k {
            PathKey::Analytic => EvaluationPath::Analytic,
            PathKey::Quadrature => EvaluationPath::Quadrature,
            PathKey::TimeDomain => EvaluationPath::TimeDomain,
        }
    }
}

/// The on-disk document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default)]
    pub label: String,
    pub bath: BathSection,
    pub modes: Vec<ModeSection>,
    pub pulses: PulseSection,
    #[serde(default)]
    pub grid: GridSection,
    pub delays: DelaySection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
}

/// A validated, immutable scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    doc: ScenarioDocument,
    model: SleModel,
    grid: ShiftGrid,
    delays: Vec<f64>,
}

pub const PRESETS: [&str; 2] = ["regime-I", "regime-II"];

impl Scenario {
    pub fn from_document(doc: ScenarioDocument) -> Result<Self, ScenarioError> {
        let model = build_model(&doc)?;
        let g = &doc.grid;
        let grid = ShiftGrid::uniform(g.shift_min_cm, g.shift_max_cm, g.step_cm)
            .map_err(|e| invalid("grid", e.to_string()))?;
        let mut delays = Vec::new();
        for item in &doc.delays.spans {
            delays.extend(parse_delays(item)?);
        }
        if delays.is_empty() {
            return Err(invalid("delays.spans", "at least one delay is required"));
        }
        let t = &doc.evaluation.tolerances;
        if !(t.quadrature_rel > 0.0 && t.quadrature_rel < 1.0) {
            return Err(invalid("evaluation.tolerances.quadrature_rel", "must lie in (0, 1)"));
        }
        if !(t.probe_window_sigmas >= 4.0 && t.probe_window_sigmas.is_finite()) {
            return Err(invalid(
                "evaluation.tolerances.probe_window_sigmas",
                "must be at least 4",
            ));
        }
        Ok(Self {
            doc,
            model,
            grid,
            delays,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let doc: ScenarioDocument = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_column(text, s.start))
                .unwrap_or((0, 0));
            ScenarioError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        Self::from_document(doc)
    }

    /// A built-in name or a path to a TOML file.
    pub fn load(name_or_path: &str) -> Result<Self, ScenarioError> {
        if let Some(s) = Self::preset(name_or_path) {
            return Ok(s);
        }
        let text = std::fs::read_to_string(name_or_path)
            .map_err(|_| ScenarioError::NotFound(name_or_path.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn preset(name: &str) -> Option<Self> {
        let doc = match name {
            "regime-I" => regime_one(),
            "regime-II" => regime_two(),
            _ => return None,
        };
        Some(Self::from_document(doc).expect("built-in scenarios are valid"))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.doc).expect("scenario documents serialize")
    }

    pub fn document(&self) -> &ScenarioDocument {
        &self.doc
    }

    pub fn model(&self) -> &SleModel {
        &self.model
    }

    pub fn grid(&self) -> &ShiftGrid {
        &self.grid
    }

    /// Seconds, in file order.
    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn path(&self) -> EvaluationPath {
        self.doc.evaluation.path.into()
    }

    pub fn quadrature(&self) -> OverlapQuadrature {
        let t = &self.doc.evaluation.tolerances;
        OverlapQuadrature {
            rel_tol: t.quadrature_rel,
            window_sigmas: t.probe_window_sigmas,
            ..OverlapQuadrature::default()
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn rate_or_wavenumber(
    key: &str,
    cm: Option<f64>,
    per_s: Option<f64>,
) -> Result<f64, ScenarioError> {
    match (cm, per_s) {
        (Some(v), None) => Ok(cm_to_rad_per_s(v)),
        (None, Some(v)) => Ok(v),
        (Some(_), Some(_)) => Err(invalid(key, "give either the _cm or the _per_s form, not both")),
        (None, None) => Err(invalid(key, "missing (use the _cm or _per_s form)")),
    }
}

fn build_model(doc: &ScenarioDocument) -> Result<SleModel, ScenarioError> {
    let b = &doc.bath;
    if b.states == 0 {
        return Err(invalid("bath.states", "must be at least 1"));
    }
    if !(1..=b.states).contains(&b.initial_state) {
        return Err(invalid(
            "bath.initial_state",
            format!("must lie in 1..={}", b.states),
        ));
    }
    for (key, v) in [("bath.k1_per_s", b.k1_per_s), ("bath.k_last_per_s", b.k_last_per_s)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(key, format!("must be positive, got {v}")));
        }
    }
    if !(b.backward_ratio.is_finite() && b.backward_ratio >= 0.0) {
        return Err(invalid("bath.backward_ratio", "must be nonnegative"));
    }
    let bath = if b.states == 1 {
        RateMatrix::frozen(1)
    } else {
        RateMatrix::chain(b.states, b.k1_per_s, b.k_last_per_s, b.backward_ratio)
            .map_err(|e| invalid("bath", e.to_string()))?
    };

    if doc.modes.is_empty() {
        return Err(invalid("modes", "at least one mode is required"));
    }
    let mut modes = Vec::with_capacity(doc.modes.len());
    for (i, m) in doc.modes.iter().enumerate() {
        let key = |k: &str| format!("modes[{i}].{k}");
        let mode = VibrationalMode {
            base_frequency: cm_to_rad_per_s(m.omega1_cm),
            shift_per_state: rate_or_wavenumber(&key("delta"), m.delta_cm, m.delta_per_s)?,
            dephasing: rate_or_wavenumber(&key("gamma"), m.gamma_cm, m.gamma_per_s)?,
            polarizability: m.alpha,
            dipole: m.mu,
        };
        mode.validate().map_err(|c| invalid(format!("modes[{i}]"), c))?;
        modes.push(mode);
    }

    let p = &doc.pulses;
    if !(p.probe_sigma_fs.is_finite() && p.probe_sigma_fs > 0.0) {
        return Err(invalid(
            "pulses.probe_sigma_fs",
            format!("must be positive, got {}", p.probe_sigma_fs),
        ));
    }
    if !p.probe_center_offset_cm.is_finite() {
        return Err(invalid("pulses.probe_center_offset_cm", "must be finite"));
    }
    let pulses = PulseSet::new(
        cm_to_rad_per_s(p.probe_center_offset_cm),
        fs_to_s(p.probe_sigma_fs),
        p.shift_convention.into(),
    )
    .map_err(|e| invalid("pulses", e.to_string()))?;

    let model = SleModel::new(bath, modes, localized(b.states, b.initial_state - 1), pulses)
        .map_err(|e| invalid("model", e.to_string()))?;
    Ok(model.with_label(doc.label.clone()))
}

fn preset_modes(base_cm: [f64; 4], delta1: f64, delta2: f64, gamma: f64) -> Vec<ModeSection> {
    base_cm
        .iter()
        .enumerate()
        .map(|(i, &w)| ModeSection {
            omega1_cm: w,
            delta_cm: None,
            delta_per_s: Some(if i < 2 { delta1 } else { delta2 }),
            gamma_cm: None,
            gamma_per_s: Some(gamma),
            alpha: 1.0,
            mu: 1.0,
        })
        .collect()
}

/// Fast bath (k₁ = 1.00e12, k₉ = 0.667e12 s⁻¹), 20 fs probe.
pub fn regime_one() -> ScenarioDocument {
    ScenarioDocument {
        label: "regime-I".into(),
        bath: BathSection {
            states: 10,
            k1_per_s: 1.00e12,
            k_last_per_s: 0.667e12,
            backward_ratio: 0.1,
            initial_state: 1,
        },
        modes: preset_modes([800.0, 1290.0, 1200.0, 1500.0], 3.76e12, 7.51e12, 1.88e12),
        pulses: PulseSection {
            probe_sigma_fs: 20.0,
            probe_center_offset_cm: -1000.0,
            shift_convention: ConventionKey::Stokes,
        },
        grid: GridSection::default(),
        delays: DelaySection {
            spans: vec!["2fs".into(), "500fs:10ps:500fs".into(), "11ps:15ps:1ps".into()],
        },
        evaluation: EvaluationSection::default(),
    }
}

/// Slower bath with smaller frequency jumps (k₉ = 0.333e12 s⁻¹), 30 fs probe.
pub fn regime_two() -> ScenarioDocument {
    ScenarioDocument {
        label: "regime-II".into(),
        bath: BathSection {
            states: 10,
            k1_per_s: 1.00e12,
            k_last_per_s: 0.333e12,
            backward_ratio: 0.1,
            initial_state: 1,
        },
        modes: preset_modes([800.0, 1267.5, 1200.0, 1500.0], 0.939e12, 3.76e12, 1.88e12),
        pulses: PulseSection {
            probe_sigma_fs: 30.0,
            probe_center_offset_cm: -1000.0,
            shift_convention: ConventionKey::Stokes,
        },
        grid: GridSection::default(),
        delays: DelaySection {
            spans: vec!["2fs".into(), "50fs:1ps:50fs".into()],
        },
        evaluation: EvaluationSection::default(),
    }
}

fn parse_time_fs(token: &str) -> Result<f64, ScenarioError> {
    let t = token.trim();
    let (num, scale) = if let Some(v) = t.strip_suffix("fs") {
        (v, 1.0)
    } else if let Some(v) = t.strip_suffix("ps") {
        (v, 1000.0)
    } else {
        (t, 1.0)
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| invalid("delays", format!("cannot read time '{t}'")))?;
    if !v.is_finite() {
        return Err(invalid("delays", format!("time '{t}' is not finite")));
    }
    Ok(v * scale)
}

/// Parses `2fs,500fs:10ps:500fs,11ps` style lists into delays in seconds. Bare numbers are
/// femtoseconds; `start:stop:step` includes `stop` when it lies on the lattice.
pub fn parse_delays(spec: &str) -> Result<Vec<f64>, ScenarioError> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(invalid("delays", format!("empty item in '{spec}'")));
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [single] => out.push(fs_to_s(parse_time_fs(single)?)),
            [start, stop, step] => {
                let (a, b, h) = (
                    parse_time_fs(start)?,
                    parse_time_fs(stop)?,
                    parse_time_fs(step)?,
                );
                if !(h > 0.0) {
                    return Err(invalid("delays", format!("step must be positive in '{item}'")));
                }
                if b < a {
                    return Err(invalid("delays", format!("stop precedes start in '{item}'")));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                if n > 1_000_000 {
                    return Err(invalid("delays", format!("too many delays in '{item}'")));
                }
                out.extend((0..=n).map(|i| fs_to_s(a + h * i as f64)));
            }
            _ => {
                return Err(invalid(
                    "delays",
                    format!("'{item}' is neither a time nor start:stop:step"),
                ))
            }
        }
    }
    Ok(out)
}

fn number(v: f64) -> String {
    format!("{v:.8e}")
}

/// Writes spectra as CSV rows in delay-major order. With `static_limit`, a
/// `static_intensity` column is appended; its spectra must match `spectra` one to one.
/// Returns the number of bytes written.
pub fn emit_csv<W: Write>(
    spectra: &[Spectrum],
    static_limit: Option<&[Spectrum]>,
    sink: &mut W,
) -> Result<usize, ScenarioError> {
    let first = spectra
        .first()
        .ok_or_else(|| invalid("spectra", "nothing to write"))?;
    for s in spectra {
        if s.shifts_cm != first.shifts_cm || s.values.len() != s.shifts_cm.len() {
            return Err(invalid("spectra", "all spectra must share one grid"));
        }
    }
    if let Some(st) = static_limit {
        if st.len() != spectra.len()
            || st
                .iter()
                .zip(spectra)
                .any(|(a, b)| a.shifts_cm != b.shifts_cm || a.delay != b.delay)
        {
            return Err(invalid("static_limit", "must pair with the main spectra"));
        }
    }
    let mut text = String::from("raman_shift_cm,delay_fs,intensity,path");
    if static_limit.is_some() {
        text.push_str(",static_intensity");
    }
    text.push('\n');
    for (k, s) in spectra.iter().enumerate() {
        let delay = number(s_to_fs(s.delay));
        for (i, (&x, &v)) in s.shifts_cm.iter().zip(&s.values).enumerate() {
            text.push_str(&number(x));
            text.push(',');
            text.push_str(&delay);
            text.push(',');
            text.push_str(&number(v));
            text.push(',');
            text.push_str(s.path.as_str());
            if let Some(st) = static_limit {
                text.push(',');
                text.push_str(&number(st[k].values[i]));
            }
            text.push('\n');
        }
    }
    sink.write_all(text.as_bytes())?;
    Ok(text.len())
}
