//! Scenario configuration: JSON, unknown keys rejected, every violation reported.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::{Path, PathBuf};

use lgatom::dynamics::{DriveSpec, Model, PulseStep, PulseTiming};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    /// Fock cutoff on `N = n_+ + n_-`.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Ground-state size; sets the length unit of grid dumps.
    #[serde(default = "one")]
    pub r0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    #[serde(default = "default_m_base")]
    pub m_base: u32,
    #[serde(default = "two")]
    pub level_count: usize,
    #[serde(default = "default_transitions")]
    pub transition_frequencies: Vec<f64>,
    #[serde(default)]
    pub dipole_scales: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(default = "default_l")]
    pub l: i32,
    #[serde(default = "one")]
    pub rabi: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub detuning: f64,
}

/// Per-step replacement of individual drive fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveOverride {
    pub l: Option<i32>,
    pub rabi: Option<f64>,
    pub phase: Option<f64>,
    pub eta: Option<f64>,
    pub detuning: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulsePreset {
    Pi,
    HalfPi,
}

/// One schedule entry; exactly one of `pulse`, `area`, `duration`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub pulse: Option<PulsePreset>,
    /// Half-angle `eta^|l| Omega t / 2`.
    pub area: Option<f64>,
    pub duration: Option<f64>,
    #[serde(default)]
    pub model: Option<Model>,
    #[serde(default)]
    pub transition: usize,
    #[serde(default)]
    pub drive: DriveOverride,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatePreset {
    Ground,
    Upper,
    Superposition,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeEntry {
    pub level: usize,
    pub n_plus: u32,
    pub n_minus: u32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Initial state: a preset name, or an object with `preset` (+ `c_m`, `c_m1`)
/// or an explicit `amplitudes` list. Presets sit on the trap ground state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateConfig {
    pub preset: Option<StatePreset>,
    pub c_m: Option<f64>,
    pub c_m1: Option<f64>,
    pub amplitudes: Option<Vec<AmplitudeEntry>>,
}

impl Default for InitialStateConfig {
    fn default() -> Self {
        Self {
            preset: Some(StatePreset::Upper),
            c_m: None,
            c_m1: None,
            amplitudes: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub max_step: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_samples")]
    pub samples_per_step: usize,
    /// Absolute schedule times; replaces uniform per-step sampling.
    #[serde(default)]
    pub sample_times: Option<Vec<f64>>,
    #[serde(default = "default_trajectory_file")]
    pub trajectory_file: String,
    #[serde(default = "default_analysis_file")]
    pub analysis_file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub transition: usize,
    #[serde(default)]
    pub drive: DriveOverride,
    pub pulse: Option<PulsePreset>,
    pub area: Option<f64>,
    pub duration: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// `eta^|l| Omega`; sets `rabi` with `eta` held.
    Coupling,
    Rabi,
    Eta,
    Detuning,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Forces every step onto this model.
    #[serde(default)]
    pub model: Option<Model>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_oracle_n")]
    pub max_n: usize,
    #[serde(default = "default_oracle_ls")]
    pub ls: Vec<i32>,
    /// Defaults to `drive.eta`.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "default_oracle_tolerance")]
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesConfig {
    #[serde(default = "default_points")]
    pub points: usize,
    /// Half-width of the mode grid; defaults to `2.5 w0`.
    #[serde(default)]
    pub mode_extent: Option<f64>,
    /// Half-width of the wavefunction grid; defaults to `5 r0`.
    #[serde(default)]
    pub state_extent: Option<f64>,
    #[serde(default = "default_momentum_points")]
    pub momentum_points: usize,
    /// `[n_plus, n_minus]` pairs; defaults to every state with `N <= 2`.
    #[serde(default)]
    pub states: Option<Vec<[u32; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub trap: TrapConfig,
    pub ladder: LadderConfig,
    pub drive: DriveConfig,
    pub schedule: Vec<StepConfig>,
    pub initial_state: InitialStateConfig,
    pub integrator: IntegratorConfig,
    pub outputs: OutputConfig,
    pub probe: Option<ProbeConfig>,
    pub sweep: Option<SweepConfig>,
    pub oracle: OracleConfig,
    pub modes: ModesConfig,
}

fn default_n_max() -> usize {
    4
}
fn one() -> f64 {
    1.0
}
fn two() -> usize {
    2
}
fn default_m_base() -> u32 {
    50
}
fn default_transitions() -> Vec<f64> {
    vec![100.0]
}
fn default_l() -> i32 {
    -1
}
fn default_eta() -> f64 {
    0.1
}
fn default_tolerance() -> f64 {
    1e-10
}
fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_samples() -> usize {
    50
}
fn default_trajectory_file() -> String {
    "trajectory.csv".into()
}
fn default_analysis_file() -> String {
    "analysis.json".into()
}
fn default_oracle_n() -> usize {
    3
}
fn default_oracle_ls() -> Vec<i32> {
    vec![1, 2]
}
fn default_oracle_tolerance() -> f64 {
    1e-8
}
fn default_points() -> usize {
    64
}
fn default_momentum_points() -> usize {
    128
}

macro_rules! defaults_from_empty_object {
    ($($ty:ty),*) => {$(
        impl Default for $ty {
            fn default() -> Self {
                serde_json::from_value(Value::Object(Default::default())).expect("all fields defaulted")
            }
        }
    )*};
}

defaults_from_empty_object!(
    TrapConfig,
    LadderConfig,
    DriveConfig,
    IntegratorConfig,
    OutputConfig,
    OracleConfig,
    ModesConfig
);

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            trap: TrapConfig::default(),
            ladder: LadderConfig::default(),
            drive: DriveConfig::default(),
            schedule: Vec::new(),
            initial_state: InitialStateConfig::default(),
            integrator: IntegratorConfig::default(),
            outputs: OutputConfig::default(),
            probe: None,
            sweep: None,
            oracle: OracleConfig::default(),
            modes: ModesConfig::default(),
        }
    }
}

impl DriveConfig {
    pub fn to_spec(self) -> DriveSpec {
        DriveSpec {
            l: self.l,
            rabi: self.rabi,
            phase: self.phase,
            eta: self.eta,
            detuning: self.detuning,
        }
    }

    pub fn apply(self, o: &DriveOverride) -> DriveConfig {
        DriveConfig {
            l: o.l.unwrap_or(self.l),
            rabi: o.rabi.unwrap_or(self.rabi),
            phase: o.phase.unwrap_or(self.phase),
            eta: o.eta.unwrap_or(self.eta),
            detuning: o.detuning.unwrap_or(self.detuning),
        }
    }
}

fn timing(
    pulse: Option<PulsePreset>,
    area: Option<f64>,
    duration: Option<f64>,
) -> std::result::Result<PulseTiming, String> {
    match (pulse, area, duration) {
        (Some(PulsePreset::Pi), None, None) => Ok(PulseTiming::Area(FRAC_PI_2)),
        (Some(PulsePreset::HalfPi), None, None) => Ok(PulseTiming::Area(FRAC_PI_4)),
        (None, Some(a), None) if a.is_finite() && a >= 0.0 => Ok(PulseTiming::Area(a)),
        (None, None, Some(d)) if d.is_finite() && d >= 0.0 => Ok(PulseTiming::Duration(d)),
        (None, Some(_), None) | (None, None, Some(_)) => Err("must be finite and non-negative".into()),
        _ => Err("needs exactly one of `pulse`, `area`, `duration`".into()),
    }
}

impl ScenarioConfig {
    /// Core pulse steps; only meaningful after validation.
    pub fn pulse_steps(&self) -> Vec<PulseStep> {
        self.schedule
            .iter()
            .map(|s| PulseStep {
                drive: self.drive.apply(&s.drive).to_spec(),
                transition: s.transition,
                timing: timing(s.pulse, s.area, s.duration).unwrap_or(PulseTiming::Duration(0.0)),
                model: s.model.unwrap_or(Model::Rwa),
            })
            .collect()
    }

    pub fn probe_step(&self) -> Option<(DriveSpec, usize, PulseTiming)> {
        self.probe.as_ref().map(|p| {
            (
                self.drive.apply(&p.drive).to_spec(),
                p.transition,
                timing(p.pulse, p.area, p.duration).unwrap_or(PulseTiming::Duration(0.0)),
            )
        })
    }

    /// Semantic checks; returns `(violations, warnings)`.
    pub fn check(&self) -> (Vec<String>, Vec<String>) {
        let mut bad = Vec::new();
        let mut warn = Vec::new();

        if !(self.trap.r0.is_finite() && self.trap.r0 > 0.0) {
            bad.push(format!("trap.r0: must be positive, got {}", self.trap.r0));
        }
        if self.trap.n_max > 40 {
            bad.push(format!("trap.n_max: {} exceeds the supported cutoff 40", self.trap.n_max));
        }

        let ladder = &self.ladder;
        if ladder.level_count < 2 {
            bad.push(format!("ladder.level_count: need at least 2 levels, got {}", ladder.level_count));
        }
        let transitions = ladder.level_count.saturating_sub(1);
        if ladder.transition_frequencies.len() != transitions {
            bad.push(format!(
                "ladder.transition_frequencies: expected {} entries for {} levels, got {}",
                transitions,
                ladder.level_count,
                ladder.transition_frequencies.len()
            ));
        }
        for (i, &w) in ladder.transition_frequencies.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                bad.push(format!("ladder.transition_frequencies[{i}]: must be positive, got {w}"));
            }
        }
        if let Some(d) = &ladder.dipole_scales {
            if d.len() != transitions {
                bad.push(format!(
                    "ladder.dipole_scales: expected {} entries, got {}",
                    transitions,
                    d.len()
                ));
            }
            for (i, &x) in d.iter().enumerate() {
                if !(x.is_finite() && x > 0.0) {
                    bad.push(format!("ladder.dipole_scales[{i}]: must be positive, got {x}"));
                }
            }
        }

        check_drive("drive", &self.drive, self.trap.n_max, &mut bad, &mut warn);

        for (i, step) in self.schedule.iter().enumerate() {
            let at = format!("schedule[{i}]");
            let drive = self.drive.apply(&step.drive);
            if step.drive != DriveOverride::default() {
                check_drive(&format!("{at}.drive"), &drive, self.trap.n_max, &mut bad, &mut warn);
            }
            if step.transition >= transitions.max(1) {
                bad.push(format!(
                    "{at}.transition: index {} out of range for {} transition(s)",
                    step.transition, transitions
                ));
            }
            match timing(step.pulse, step.area, step.duration) {
                Err(e) => bad.push(format!("{at}: {e}")),
                Ok(PulseTiming::Area(a)) if a > 0.0 && drive.to_spec().effective_coupling() == 0.0 => {
                    bad.push(format!("{at}: pulse area needs a non-zero coupling"));
                }
                Ok(_) => {}
            }
            if drive.to_spec().rwa_warning() && step.model.unwrap_or(Model::Rwa) == Model::Rwa {
                warn.push(format!("{at}: eta^|l| rabi >= 0.1; rotating-wave approximation is marginal"));
            }
        }

        self.check_initial_state(&mut bad);

        let tol = self.integrator.tolerance;
        if !(tol.is_finite() && tol > 0.0 && tol <= 1e-3) {
            bad.push(format!("integrator.tolerance: must lie in (0, 1e-3], got {tol}"));
        }
        if let Some(h) = self.integrator.max_step {
            if !(h.is_finite() && h > 0.0) {
                bad.push(format!("integrator.max_step: must be positive, got {h}"));
            }
        }

        if self.outputs.samples_per_step == 0 {
            bad.push("outputs.samples_per_step: must be at least 1".into());
        }
        if let Some(ts) = &self.outputs.sample_times {
            for (i, &t) in ts.iter().enumerate() {
                if !(t.is_finite() && t >= 0.0) {
                    bad.push(format!("outputs.sample_times[{i}]: must be finite and non-negative, got {t}"));
                }
            }
        }
        for (name, file) in [
            ("trajectory_file", &self.outputs.trajectory_file),
            ("analysis_file", &self.outputs.analysis_file),
        ] {
            if file.is_empty() || file.contains(['/', '\\']) {
                bad.push(format!("outputs.{name}: must be a plain file name, got {file:?}"));
            }
        }

        if let Some(probe) = &self.probe {
            if ladder.level_count < 3 {
                bad.push("probe: requires at least three internal levels".into());
            }
            if probe.transition >= transitions.max(1) {
                bad.push(format!(
                    "probe.transition: index {} out of range for {} transition(s)",
                    probe.transition, transitions
                ));
            }
            let drive = self.drive.apply(&probe.drive);
            check_drive("probe.drive", &drive, self.trap.n_max, &mut bad, &mut warn);
            match timing(probe.pulse, probe.area, probe.duration) {
                Err(e) => bad.push(format!("probe: {e}")),
                Ok(PulseTiming::Area(a)) if a > 0.0 && drive.to_spec().effective_coupling() == 0.0 => {
                    bad.push("probe: pulse area needs a non-zero coupling".into());
                }
                Ok(_) => {}
            }
        }

        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                bad.push("sweep.values: must not be empty".into());
            }
            for (i, &v) in sweep.values.iter().enumerate() {
                let ok = match sweep.parameter {
                    SweepParameter::Eta => v.is_finite() && v > 0.0,
                    SweepParameter::Coupling | SweepParameter::Rabi => v.is_finite() && v >= 0.0,
                    SweepParameter::Detuning => v.is_finite(),
                };
                if !ok {
                    bad.push(format!("sweep.values[{i}]: {v} is not valid for {:?}", sweep.parameter));
                }
            }
        }

        if self.oracle.ls.is_empty() {
            bad.push("oracle.ls: must not be empty".into());
        }
        for (i, &l) in self.oracle.ls.iter().enumerate() {
            if l == 0 || l.abs() > 4 {
                bad.push(format!("oracle.ls[{i}]: orbital index must satisfy 1 <= |l| <= 4, got {l}"));
            }
        }
        if self.oracle.max_n > 6 {
            bad.push(format!("oracle.max_n: at most 6 supported, got {}", self.oracle.max_n));
        }
        if let Some(eta) = self.oracle.eta {
            if !(eta.is_finite() && eta > 0.0) {
                bad.push(format!("oracle.eta: must be positive, got {eta}"));
            }
        }
        if !(self.oracle.tolerance.is_finite() && self.oracle.tolerance > 0.0) {
            bad.push("oracle.tolerance: must be positive".into());
        }

        let m = &self.modes;
        if m.points < 2 {
            bad.push("modes.points: need at least 2".into());
        }
        if m.momentum_points < 16 || m.momentum_points % 2 != 0 {
            bad.push(format!("modes.momentum_points: need an even count >= 16, got {}", m.momentum_points));
        }
        for (name, e) in [("mode_extent", m.mode_extent), ("state_extent", m.state_extent)] {
            if let Some(e) = e {
                if !(e.is_finite() && e > 0.0) {
                    bad.push(format!("modes.{name}: must be positive, got {e}"));
                }
            }
        }
        if let Some(states) = &m.states {
            for (i, [a, b]) in states.iter().enumerate() {
                if (a + b) as usize > self.trap.n_max {
                    bad.push(format!("modes.states[{i}]: ({a},{b}) exceeds trap.n_max"));
                }
            }
        }

        (bad, warn)
    }

    fn check_initial_state(&self, bad: &mut Vec<String>) {
        let s = &self.initial_state;
        match (s.preset, &s.amplitudes) {
            (Some(_), Some(_)) | (None, None) => {
                bad.push("initial_state: needs exactly one of `preset`, `amplitudes`".into());
            }
            (Some(StatePreset::Superposition), None) => match (s.c_m, s.c_m1) {
                (Some(a), Some(b)) => {
                    let norm = a * a + b * b;
                    if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
                        bad.push(format!("initial_state: c_m^2 + c_m1^2 = {norm}, must be 1"));
                    }
                }
                _ => bad.push("initial_state: superposition needs `c_m` and `c_m1`".into()),
            },
            (Some(_), None) => {
                if s.c_m.is_some() || s.c_m1.is_some() {
                    bad.push("initial_state: `c_m`/`c_m1` only apply to the superposition preset".into());
                }
            }
            (None, Some(list)) => {
                if s.c_m.is_some() || s.c_m1.is_some() {
                    bad.push("initial_state: `c_m`/`c_m1` only apply to the superposition preset".into());
                }
                if list.is_empty() {
                    bad.push("initial_state.amplitudes: must not be empty".into());
                }
                let mut seen = std::collections::BTreeSet::new();
                let mut norm = 0.0;
                for (i, e) in list.iter().enumerate() {
                    let at = format!("initial_state.amplitudes[{i}]");
                    if e.level >= self.ladder.level_count {
                        bad.push(format!("{at}: level {} out of range", e.level));
                    }
                    if (e.n_plus + e.n_minus) as usize > self.trap.n_max {
                        bad.push(format!("{at}: ({},{}) exceeds trap.n_max", e.n_plus, e.n_minus));
                    }
                    if !seen.insert((e.level, e.n_plus, e.n_minus)) {
                        bad.push(format!("{at}: duplicate basis state"));
                    }
                    norm += e.re * e.re + e.im * e.im;
                }
                if !list.is_empty() && (!norm.is_finite() || (norm - 1.0).abs() > 1e-9) {
                    bad.push(format!("initial_state.amplitudes: squared norm {norm}, must be 1"));
                }
            }
        }
    }
}

fn check_drive(at: &str, d: &DriveConfig, n_max: usize, bad: &mut Vec<String>, warn: &mut Vec<String>) {
    if d.eta == 0.0 {
        bad.push(format!(
            "{at}.eta: point-particle limit has no sideband coupling (eta = 0)"
        ));
    } else if !(d.eta.is_finite() && d.eta > 0.0) {
        bad.push(format!("{at}.eta: must be positive, got {}", d.eta));
    }
    if !(d.rabi.is_finite() && d.rabi >= 0.0) {
        bad.push(format!("{at}.rabi: must be non-negative, got {}", d.rabi));
    }
    if !d.phase.is_finite() {
        bad.push(format!("{at}.phase: must be finite"));
    }
    if !d.detuning.is_finite() {
        bad.push(format!("{at}.detuning: must be finite"));
    }
    if d.l.unsigned_abs() as usize > n_max {
        warn.push(format!(
            "{at}.l: |l| = {} exceeds trap.n_max = {n_max}; coupling is identically zero",
            d.l.unsigned_abs()
        ));
    }
}

fn section<T: DeserializeOwned>(name: &str, value: Value, bad: &mut Vec<String>) -> Option<T> {
    match serde_json::from_value(value) {
        Ok(v) => Some(v),
        Err(e) => {
            bad.push(format!("{name}: {e}"));
            None
        }
    }
}

const SECTIONS: [&str; 11] = [
    "trap",
    "ladder",
    "drive",
    "schedule",
    "initial_state",
    "integrator",
    "outputs",
    "probe",
    "sweep",
    "oracle",
    "modes",
];

/// A validated configuration plus non-fatal warnings.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub warnings: Vec<String>,
}

/// Parses and validates, collecting every schema and consistency violation.
pub fn parse_config(text: &str) -> CliResult<LoadedConfig> {
    let root: Value = serde_json::from_str(text).map_err(|e| CliError::config(vec![format!("json: {e}")]))?;
    let Value::Object(map) = root else {
        return Err(CliError::config(vec!["config: top level must be a JSON object".into()]));
    };
    let mut bad = Vec::new();
    for key in map.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            bad.push(format!("unknown field `{key}`, expected one of {}", SECTIONS.join(", ")));
        }
    }
    let mut cfg = ScenarioConfig::default();
    let mut complete = true;
    let take = |key: &str| map.get(key).cloned();

    macro_rules! load {
        ($field:ident) => {
            if let Some(v) = take(stringify!($field)) {
                match section(stringify!($field), v, &mut bad) {
                    Some(x) => cfg.$field = x,
                    None => complete = false,
                }
            }
        };
    }
    load!(trap);
    load!(ladder);
    load!(drive);
    load!(integrator);
    load!(outputs);
    load!(probe);
    load!(sweep);
    load!(oracle);
    load!(modes);

    if let Some(v) = take("initial_state") {
        let v = match v {
            Value::String(s) => serde_json::json!({ "preset": s }),
            other => other,
        };
        match section("initial_state", v, &mut bad) {
            Some(x) => cfg.initial_state = x,
            None => complete = false,
        }
    }
    if let Some(v) = take("schedule") {
        match v {
            Value::Array(items) => {
                for (i, item) in items.into_iter().enumerate() {
                    match section(&format!("schedule[{i}]"), item, &mut bad) {
                        Some(step) => cfg.schedule.push(step),
                        None => complete = false,
                    }
                }
            }
            _ => {
                bad.push("schedule: must be an array of steps".into());
                complete = false;
            }
        }
    }

    let mut warnings = Vec::new();
    if complete {
        let (violations, warn) = cfg.check();
        bad.extend(violations);
        warnings = warn;
    }
    if bad.is_empty() {
        Ok(LoadedConfig { config: cfg, warnings })
    } else {
        Err(CliError::config(bad))
    }
}

pub fn load_config(path: &Path) -> CliResult<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn violations(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(CliError::Config { violations }) => violations,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_object_takes_defaults() {
        let loaded = parse_config("{}").unwrap();
        assert_eq!(loaded.config, ScenarioConfig::default());
        assert!(loaded.warnings.is_empty());
        assert_eq!(loaded.config.trap.n_max, 4);
        assert_eq!(loaded.config.drive.l, -1);
    }

    #[test]
    fn eta_zero_is_point_particle() {
        let v = violations(r#"{"drive": {"eta": 0.0}}"#);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("point-particle"));
    }

    #[test]
    fn order_above_cutoff_warns() {
        let loaded = parse_config(r#"{"trap": {"n_max": 1}, "drive": {"l": 2}}"#).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert!(loaded.warnings[0].contains("identically zero"));
    }

    #[test]
    fn collects_every_violation() {
        let v = violations(
            r#"{"bogus": 1, "trap": {"n_max": 2, "extra": true}, "drive": {"eta": -1},
                "schedule": [{"pulse": "pi", "area": 1.0}, {"duration": 1.0, "what": 0}],
                "ladder": {"level_count": 3}}"#,
        );
        assert!(v.iter().any(|s| s.contains("`bogus`")));
        assert!(v.iter().any(|s| s.starts_with("trap:") && s.contains("extra")));
        assert!(v.iter().any(|s| s.starts_with("schedule[1]")));
        // Semantic checks wait for a schema-clean file.
        assert!(!v.iter().any(|s| s.contains("eta")));

        let v = violations(
            r#"{"drive": {"eta": -1}, "schedule": [{"pulse": "pi", "area": 1.0}, {"duration": 1, "transition": 2}],
                "ladder": {"level_count": 3}}"#,
        );
        assert_eq!(v.len(), 4, "{v:?}");
    }

    #[test]
    fn initial_state_forms() {
        let s = parse_config(r#"{"initial_state": "ground"}"#).unwrap();
        assert_eq!(s.config.initial_state.preset, Some(StatePreset::Ground));
        assert!(parse_config(r#"{"initial_state": {"preset": "superposition", "c_m": 0.6, "c_m1": 0.8}}"#).is_ok());
        let v = violations(r#"{"initial_state": {"preset": "superposition", "c_m": 0.6, "c_m1": 0.6}}"#);
        assert!(v[0].contains("must be 1"));
        let v = violations(
            r#"{"initial_state": {"amplitudes": [{"level": 2, "n_plus": 9, "n_minus": 0, "re": 1.0}]}}"#,
        );
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn probe_needs_three_levels() {
        let v = violations(r#"{"probe": {"transition": 0, "pulse": "pi"}}"#);
        assert!(v[0].contains("three internal levels"));
    }

    #[test]
    fn steps_map_to_pulses() {
        let cfg = parse_config(
            r#"{"drive": {"l": -2, "rabi": 2.0}, "schedule": [{"pulse": "half_pi", "drive": {"phase": 1.0}, "model": "full"}]}"#,
        )
        .unwrap()
        .config;
        let steps = cfg.pulse_steps();
        assert_eq!(steps[0].timing, PulseTiming::Area(FRAC_PI_4));
        assert_eq!(steps[0].drive.l, -2);
        assert_eq!(steps[0].drive.phase, 1.0);
        assert_eq!(steps[0].model, Model::Full);
    }

    #[test]
    fn not_an_object() {
        assert_eq!(violations("[1, 2]").len(), 1);
        assert!(violations("{").iter().all(|s| s.starts_with("json")));
    }
}
