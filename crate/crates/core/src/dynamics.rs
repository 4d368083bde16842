//! Interaction-picture Hamiltonians on the internal x trap space, unitary
//! evolution and pulse schedules.
//!
//! Units: hbar = 1, trap frequency nu = 1. Composite index is internal-major:
//! `index = level * trap_len + trap_index`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ode_solvers::{Dop853, OutputType, System};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::internal_ladder::InternalLadder;
use crate::operator::{BasisTag, OperatorMatrix, C64};
use crate::trap_fock::{FockBasis, FockLabel};

const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CompositeBasis {
    ladder: InternalLadder,
    trap: FockBasis,
}

impl CompositeBasis {
    pub fn new(ladder: InternalLadder, trap: FockBasis) -> Self {
        Self { ladder, trap }
    }

    pub fn ladder(&self) -> &InternalLadder {
        &self.ladder
    }

    pub fn trap(&self) -> &FockBasis {
        &self.trap
    }

    pub fn dim(&self) -> usize {
        self.ladder.level_count() * self.trap.len()
    }

    pub fn tag(&self) -> BasisTag {
        BasisTag::tensor(self.ladder.tag(), self.trap.tag()).expect("internal x trap")
    }

    pub fn index(&self, level: usize, label: FockLabel) -> Option<usize> {
        if level >= self.ladder.level_count() {
            return None;
        }
        Some(level * self.trap.len() + self.trap.index_of(label)?)
    }

    pub fn split(&self, index: usize) -> (usize, FockLabel) {
        (index / self.trap.len(), self.trap.label(index % self.trap.len()))
    }

    pub fn lift_internal(&self, op: &OperatorMatrix) -> Result<OperatorMatrix> {
        op.kron(&OperatorMatrix::identity(self.trap.tag()))
    }

    pub fn lift_trap(&self, op: &OperatorMatrix) -> Result<OperatorMatrix> {
        OperatorMatrix::identity(self.ladder.tag()).kron(op)
    }

    fn diagonal(&self, value: impl Fn(usize, FockLabel) -> f64) -> OperatorMatrix {
        OperatorMatrix::from_diagonal(
            self.tag(),
            (0..self.dim()).map(|i| {
                let (level, label) = self.split(i);
                value(level, label)
            }),
        )
        .expect("diagonal fits")
    }

    /// `L_Z / hbar` on the composite space.
    pub fn trap_angular_momentum(&self) -> OperatorMatrix {
        self.diagonal(|_, label| label.angular() as f64)
    }

    /// `l_z / hbar` on the composite space.
    pub fn internal_angular_momentum(&self) -> OperatorMatrix {
        self.diagonal(|level, _| self.ladder.level_angular_momentum(level) as f64)
    }

    /// Trap quanta `N = n_+ + n_-` on the composite space.
    pub fn trap_number(&self) -> OperatorMatrix {
        self.diagonal(|_, label| label.total() as f64)
    }

    pub fn level_projector(&self, level: usize) -> OperatorMatrix {
        self.diagonal(|k, _| if k == level { 1.0 } else { 0.0 })
    }

    pub fn product_state(&self, level: usize, label: FockLabel) -> Result<StateVector> {
        let index = self.index(level, label).ok_or_else(|| {
            Error::InvalidArgument(format!("level {level}, trap {label} outside {}", self.tag()))
        })?;
        let mut amps = DVector::zeros(self.dim());
        amps[index] = C64::new(1.0, 0.0);
        StateVector::new(self.tag(), amps)
    }

    /// Level populations `sum_trap |psi|^2` for each internal level.
    pub fn level_populations(&self, state: &StateVector) -> Vec<f64> {
        let t = self.trap.len();
        (0..self.ladder.level_count())
            .map(|k| state.amplitudes().rows(k * t, t).iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// `C1 = l l_z - L_Z` and `C2 = N + |l| sigma_k^dag sigma_k`, both conserved by the RWA Hamiltonian.
    pub fn conserved_quantities(&self, l: i32, transition: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
        self.ladder.check_transition(transition)?;
        let c1 = self.diagonal(|level, label| {
            l as f64 * self.ladder.level_angular_momentum(level) as f64 - label.angular() as f64
        });
        let c2 = self.diagonal(|level, label| {
            label.total() as f64 + if level == transition + 1 { l.unsigned_abs() as f64 } else { 0.0 }
        });
        Ok((c1, c2))
    }
}

/// Normalized amplitude vector on a declared basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    basis: BasisTag,
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Fails unless the norm is 1 within 1e-9.
    pub fn new(basis: BasisTag, amplitudes: DVector<C64>) -> Result<Self> {
        let state = Self::unchecked(basis, amplitudes)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(state)
    }

    fn unchecked(basis: BasisTag, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes on {basis} (dimension {})",
                amplitudes.len(),
                basis.dim()
            )));
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    fn check(&self, basis: BasisTag) -> Result<()> {
        if self.basis != basis {
            return Err(Error::BasisMismatch {
                left: self.basis,
                right: basis,
            });
        }
        Ok(())
    }

    /// `<psi|A|psi>` real part; callers pass Hermitian observables.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<f64> {
        self.check(op.basis())?;
        Ok(self.amplitudes.dotc(&op.apply(&self.amplitudes)?).re)
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &StateVector) -> Result<C64> {
        self.check(other.basis)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        self.check(other.basis)?;
        Ok((&self.amplitudes - &other.amplitudes).norm())
    }
}

/// Classical LG drive on one ladder transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    /// Orbital index; its sign is the handedness.
    pub l: i32,
    /// Rabi frequency magnitude, units of nu.
    pub rabi: f64,
    /// Rabi phase phi, radians.
    #[serde(default)]
    pub phase: f64,
    /// Lamb-Dicke parameter R_0 / w_0.
    pub eta: f64,
    /// Offset of the carrier from the |l|-th red sideband, units of nu.
    #[serde(default)]
    pub detuning: f64,
}

impl DriveSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.rabi.is_finite() && self.rabi >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rabi must be non-negative, got {}",
                self.rabi
            )));
        }
        if !self.phase.is_finite() || !self.detuning.is_finite() {
            return Err(Error::InvalidArgument("phase and detuning must be finite".into()));
        }
        Ok(())
    }

    pub fn order(&self) -> u32 {
        self.l.unsigned_abs()
    }

    /// `eta^|l| Omega`.
    pub fn effective_coupling(&self) -> f64 {
        self.eta.powi(self.l.abs()) * self.rabi
    }

    /// Complex factor multiplying `a sigma^dag`, `Omega e^{-i phi}`.
    ///
    /// With this sign a resonant pulse from the upper level builds the lower
    /// level amplitude `i e^{i phi} sin(eta^|l| Omega t / 2)`, so `phi = -pi/2`
    /// transfers with a real positive amplitude.
    pub fn coupling_factor(&self) -> C64 {
        C64::from_polar(self.rabi, -self.phase)
    }

    /// Carrier `omega = gap - |l| nu + delta`.
    pub fn carrier_frequency(&self, ladder: &InternalLadder, transition: usize) -> Result<f64> {
        Ok(ladder.gap(transition)? - self.order() as f64 + self.detuning)
    }

    /// True when `eta^|l| Omega >= 0.1 nu`, outside comfortable RWA validity.
    pub fn rwa_warning(&self) -> bool {
        self.effective_coupling() >= 0.1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Rwa,
    Full,
}

/// Pulse length either as an area `theta = eta^|l| Omega t / 2` or a duration.
///
/// `theta = pi/2` transfers the full population of a resonant two-state pair
/// (a "pi pulse" in the Rabi-rotation sense), `theta = pi/4` produces an equal
/// superposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseTiming {
    Area(f64),
    Duration(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseStep {
    pub drive: DriveSpec,
    pub transition: usize,
    pub timing: PulseTiming,
    pub model: Model,
}

impl PulseStep {
    pub fn pi_pulse(drive: DriveSpec, model: Model) -> Self {
        Self {
            drive,
            transition: 0,
            timing: PulseTiming::Area(PI / 2.0),
            model,
        }
    }

    pub fn half_pi_pulse(drive: DriveSpec, model: Model) -> Self {
        Self {
            drive,
            transition: 0,
            timing: PulseTiming::Area(PI / 4.0),
            model,
        }
    }

    pub fn duration(&self) -> Result<f64> {
        match self.timing {
            PulseTiming::Duration(t) if t.is_finite() && t >= 0.0 => Ok(t),
            PulseTiming::Area(theta) if theta.is_finite() && theta >= 0.0 => {
                let g = self.drive.effective_coupling();
                if theta == 0.0 {
                    Ok(0.0)
                } else if g > 0.0 {
                    Ok(2.0 * theta / g)
                } else {
                    Err(Error::InvalidArgument("pulse area with zero coupling".into()))
                }
            }
            other => Err(Error::InvalidArgument(format!("invalid pulse timing {other:?}"))),
        }
    }
}

/// Sideband-resonant RWA Hamiltonian
/// `H = -1/2 eta^|l| Omega e^{-i phi} a_-+^|l| sigma_k^dag + h.c. - delta sigma_k^dag sigma_k`.
///
/// `a_-` for `l > 0`, `a_+` for `l < 0`. The detuning term puts the frame in
/// co-rotation with the carrier; [`run_schedule`] converts back to the
/// interaction picture between steps.
pub fn build_rwa_hamiltonian(
    basis: &CompositeBasis,
    drive: &DriveSpec,
    transition: usize,
) -> Result<OperatorMatrix> {
    drive.validate()?;
    let sigma_dag = basis.ladder.lowering_operator(transition)?.adjoint();
    let motion = basis.trap.sideband_lowering(drive.l);
    let coefficient = drive.coupling_factor() * (-0.5 * drive.eta.powi(drive.l.abs()));
    let term = sigma_dag.kron(&motion)?.scale(coefficient);
    let mut h = term.plus(&term.adjoint())?;
    if drive.detuning != 0.0 {
        let upper = basis.level_projector(transition + 1).scale(C64::from(-drive.detuning));
        h = h.plus(&upper)?;
    }
    Ok(h)
}

/// One oscillating term `c e^{i w t} O + h.c.` with `O` stored sparse.
#[derive(Clone, Debug)]
struct FullTerm {
    coefficient: C64,
    frequency: f64,
    entries: Vec<(usize, usize, C64)>,
}

/// Interaction-picture Hamiltonian without the rotating-wave approximation.
///
/// `H(t) = -1/2 sum_j eta^|l| Omega_j e^{-i phi} (a_+-^dag e^{it} + a_-+ e^{-it})^|l|
/// sigma_j^dag e^{i(gap_j - omega) t} + h.c.` with the binomial expansion of
/// the motional factor (its two operators commute) and every ladder transition.
#[derive(Clone, Debug)]
pub struct FullHamiltonian {
    basis: BasisTag,
    dim: usize,
    terms: Vec<FullTerm>,
}

impl FullHamiltonian {
    pub fn build(basis: &CompositeBasis, drive: &DriveSpec, transition: usize) -> Result<Self> {
        drive.validate()?;
        let ladder = &basis.ladder;
        let carrier = drive.carrier_frequency(ladder, transition)?;
        let order = drive.order();
        let raise = basis.trap.sideband_raising_unit(drive.l);
        let lower = basis.trap.sideband_lowering_unit(drive.l);
        let scale = drive.coupling_factor() * (-0.5 * drive.eta.powi(order as i32));
        let mut terms = Vec::new();
        for j in 0..ladder.transition_count() {
            let sigma_dag = ladder.lowering_operator(j)?.adjoint();
            let rel = ladder.relative_dipole(j, transition);
            for k in 0..=order {
                let motion = raise.pow(k).compose(&lower.pow(order - k))?;
                let op = sigma_dag.kron(&motion)?;
                let entries: Vec<_> = op
                    .sparse_entries()
                    .into_iter()
                    .map(|(r, c, re, im)| (r, c, C64::new(re, im)))
                    .collect();
                if entries.is_empty() {
                    continue;
                }
                terms.push(FullTerm {
                    coefficient: scale * rel * binomial(order, k),
                    frequency: (2.0 * k as f64 - order as f64) + ladder.gap(j)? - carrier,
                    entries,
                });
            }
        }
        Ok(Self {
            basis: basis.tag(),
            dim: basis.dim(),
            terms,
        })
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    /// Dense matrix at time `t`.
    pub fn at(&self, t: f64) -> OperatorMatrix {
        let mut m = DMatrix::<C64>::zeros(self.dim, self.dim);
        for term in &self.terms {
            let z = term.coefficient * C64::from_polar(1.0, term.frequency * t);
            for &(r, c, v) in &term.entries {
                m[(r, c)] += z * v;
                m[(c, r)] += (z * v).conj();
            }
        }
        OperatorMatrix::new(self.basis, m).expect("dimension fixed at build")
    }

    /// `-i H(t) psi` on the real split `y = [Re psi; Im psi]`.
    fn rhs_split(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.dim;
        dy.iter_mut().for_each(|d| *d = 0.0);
        for term in &self.terms {
            let z = term.coefficient * C64::from_polar(1.0, term.frequency * t);
            for &(r, c, v) in &term.entries {
                let a = z * v;
                // H[r][c] = a, H[c][r] = conj(a)
                let psi_c = C64::new(y[c], y[n + c]);
                let psi_r = C64::new(y[r], y[n + r]);
                let hr = a * psi_c;
                let hc = a.conj() * psi_r;
                dy[r] += hr.im;
                dy[n + r] -= hr.re;
                dy[c] += hc.im;
                dy[n + c] -= hc.re;
            }
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

/// Dense full-model Hamiltonian at a single time.
pub fn build_full_hamiltonian(
    basis: &CompositeBasis,
    drive: &DriveSpec,
    transition: usize,
    t: f64,
) -> Result<OperatorMatrix> {
    Ok(FullHamiltonian::build(basis, drive, transition)?.at(t))
}

/// Exact propagator `exp(-i H t)` of a static Hermitian `H` via eigendecomposition.
#[derive(Clone, Debug)]
pub struct RwaPropagator {
    basis: BasisTag,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<C64>,
}

impl RwaPropagator {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        let deviation = h.hermiticity_defect();
        if deviation > 1e-12 * h.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        let eig = SymmetricEigen::new(h.entries().clone());
        Ok(Self {
            basis: h.basis(),
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn unitary(&self, t: f64) -> OperatorMatrix {
        let phases = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&e| C64::from_polar(1.0, -e * t)),
        );
        let u = &self.eigenvectors * DMatrix::from_diagonal(&phases) * self.eigenvectors.adjoint();
        OperatorMatrix::new(self.basis, u).expect("same dimension")
    }

    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        state.check(self.basis)?;
        let mut coeffs = self.eigenvectors.adjoint() * &state.amplitudes;
        for (c, &e) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        StateVector::new(self.basis, &self.eigenvectors * coeffs)
    }
}

/// `exp(-i H t) psi` for a static RWA Hamiltonian.
pub fn evolve_rwa(state: &StateVector, h: &OperatorMatrix, duration: f64) -> Result<StateVector> {
    RwaPropagator::new(h)?.evolve(state, duration)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    /// Absolute and relative local error tolerance.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Upper bound on the step size; unbounded when absent.
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: u32,
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_max_steps() -> u32 {
    50_000_000
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            max_step: None,
            max_steps: default_max_steps(),
        }
    }
}

impl IntegratorSettings {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

struct SplitSchrodinger<'a> {
    h: &'a FullHamiltonian,
}

impl System<f64, DVector<f64>> for SplitSchrodinger<'_> {
    fn system(&self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        self.h.rhs_split(t, y.as_slice(), dy.as_mut_slice());
    }
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
}

/// Integrates `i d psi/dt = H_full(t) psi` from `t_start`, returning the state
/// at each of `sample_times` (ascending, `>= t_start`).
///
/// Uses an adaptive 8(5,3) Dormand-Prince scheme. Fails if the norm drifts by
/// more than `10 * tolerance` or the step size underflows.
pub fn evolve_full(
    state: &StateVector,
    hamiltonian: &FullHamiltonian,
    t_start: f64,
    sample_times: &[f64],
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    state.check(hamiltonian.basis)?;
    if !(settings.tolerance.is_finite() && settings.tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "integrator tolerance must be positive, got {}",
            settings.tolerance
        )));
    }
    let n = hamiltonian.dim;
    let mut y = DVector::<f64>::zeros(2 * n);
    for (i, z) in state.amplitudes.iter().enumerate() {
        y[i] = z.re;
        y[n + i] = z.im;
    }
    let limit = 10.0 * settings.tolerance;
    let mut t = t_start;
    let mut out = Trajectory::default();
    for &target in sample_times {
        if target < t {
            return Err(Error::InvalidArgument(format!(
                "sample time {target} precedes {t}"
            )));
        }
        if target > t {
            let h_max = settings.max_step.unwrap_or(target - t).min(target - t);
            let mut solver = Dop853::from_param(
                SplitSchrodinger { h: hamiltonian },
                t,
                target,
                target - t,
                y.clone(),
                settings.tolerance,
                settings.tolerance,
                0.9,
                0.0,
                0.333,
                6.0,
                h_max,
                0.0,
                settings.max_steps,
                u32::MAX,
                OutputType::Sparse,
            );
            solver.integrate().map_err(|e| match e {
                ode_solvers::dop_shared::IntegrationError::StepSizeUnderflow { x } => {
                    Error::StepSizeUnderflow { t: x }
                }
                other => Error::Integration(other.to_string()),
            })?;
            y = solver
                .y_out()
                .last()
                .cloned()
                .ok_or_else(|| Error::Integration("solver produced no output".into()))?;
            t = target;
        }
        let amps = DVector::from_iterator(n, (0..n).map(|i| C64::new(y[i], y[n + i])));
        let sample = StateVector::unchecked(hamiltonian.basis, amps)?;
        let drift = (sample.norm() - state.norm()).abs();
        if drift > limit {
            return Err(Error::NormDrift { drift, limit });
        }
        out.times.push(target);
        out.states.push(sample);
    }
    Ok(out)
}

/// Observables recorded after each schedule step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub model: Option<Model>,
    pub transition: Option<usize>,
    pub l: Option<i32>,
    pub duration: f64,
    pub t_end: f64,
    /// `<L_Z>/hbar`
    pub trap_angular_momentum: f64,
    /// `<l_z>/hbar`
    pub internal_angular_momentum: f64,
    /// `<N>`
    pub trap_quanta: f64,
    pub level_populations: Vec<f64>,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct ScheduleOutcome {
    pub final_state: StateVector,
    /// Record 0 describes the initial state; record `i` follows step `i - 1`.
    pub records: Vec<StepRecord>,
    pub trajectory: Trajectory,
}

/// Sequential pulse execution with observable bookkeeping.
#[derive(Clone, Debug)]
pub struct ScheduleRunner<'a> {
    basis: &'a CompositeBasis,
    settings: IntegratorSettings,
    samples_per_step: usize,
    sample_times: Option<Vec<f64>>,
}

impl<'a> ScheduleRunner<'a> {
    pub fn new(basis: &'a CompositeBasis) -> Self {
        Self {
            basis,
            settings: IntegratorSettings::default(),
            samples_per_step: 1,
            sample_times: None,
        }
    }

    pub fn with_settings(mut self, settings: IntegratorSettings) -> Self {
        self.settings = settings;
        self
    }

    /// Trajectory samples per step, end point included; at least one.
    pub fn with_samples_per_step(mut self, samples: usize) -> Self {
        self.samples_per_step = samples.max(1);
        self
    }

    /// Absolute schedule times to sample instead of uniform per-step samples.
    /// Step end points are always included.
    pub fn with_sample_times(mut self, mut times: Vec<f64>) -> Self {
        times.sort_by(f64::total_cmp);
        times.dedup();
        self.sample_times = Some(times);
        self
    }

    fn record(&self, step: usize, pulse: Option<&PulseStep>, duration: f64, t_end: f64, state: &StateVector) -> Result<StepRecord> {
        Ok(StepRecord {
            step,
            model: pulse.map(|p| p.model),
            transition: pulse.map(|p| p.transition),
            l: pulse.map(|p| p.drive.l),
            duration,
            t_end,
            trap_angular_momentum: state.expectation(&self.basis.trap_angular_momentum())?,
            internal_angular_momentum: state.expectation(&self.basis.internal_angular_momentum())?,
            trap_quanta: state.expectation(&self.basis.trap_number())?,
            level_populations: self.basis.level_populations(state),
            norm: state.norm(),
        })
    }

    pub fn run(&self, initial: &StateVector, steps: &[PulseStep]) -> Result<ScheduleOutcome> {
        initial.check(self.basis.tag())?;
        let mut state = initial.clone();
        let mut t = 0.0;
        let mut records = vec![self.record(0, None, 0.0, 0.0, &state)?];
        let mut trajectory = Trajectory {
            times: vec![0.0],
            states: vec![state.clone()],
        };
        for (i, step) in steps.iter().enumerate() {
            let duration = step.duration()?;
            let end = t + duration;
            let samples: Vec<f64> = match &self.sample_times {
                Some(times) => times
                    .iter()
                    .copied()
                    .filter(|&s| s > t && s < end)
                    .chain(std::iter::once(end))
                    .collect(),
                None => (1..=self.samples_per_step)
                    .map(|s| t + duration * s as f64 / self.samples_per_step as f64)
                    .collect(),
            };
            let sampled = match step.model {
                Model::Rwa => self.rwa_step(&state, step, t, &samples)?,
                Model::Full => {
                    let h = FullHamiltonian::build(self.basis, &step.drive, step.transition)?;
                    evolve_full(&state, &h, t, &samples, &self.settings)?
                }
            };
            state = sampled.states.last().cloned().unwrap_or(state);
            t += duration;
            trajectory.times.extend(sampled.times);
            trajectory.states.extend(sampled.states);
            records.push(self.record(i + 1, Some(step), duration, t, &state)?);
        }
        Ok(ScheduleOutcome {
            final_state: state,
            records,
            trajectory,
        })
    }

    /// RWA evolution in the carrier frame, reported in the interaction picture:
    /// `psi_I(t) = exp(-i delta t P) psi_rot(t)` with `P` the upper-level projector.
    fn rwa_step(&self, state: &StateVector, step: &PulseStep, t0: f64, samples: &[f64]) -> Result<Trajectory> {
        let h = build_rwa_hamiltonian(self.basis, &step.drive, step.transition)?;
        let propagator = RwaPropagator::new(&h)?;
        let delta = step.drive.detuning;
        let upper = step.transition + 1;
        let frame = |psi: &StateVector, time: f64, sign: f64| -> Result<StateVector> {
            if delta == 0.0 {
                return Ok(psi.clone());
            }
            let t_len = self.basis.trap.len();
            let mut amps = psi.amplitudes.clone();
            let phase = C64::from_polar(1.0, -sign * delta * time);
            for z in amps.rows_mut(upper * t_len, t_len).iter_mut() {
                *z *= phase;
            }
            StateVector::new(psi.basis, amps)
        };
        let rotating = frame(state, t0, -1.0)?;
        let mut out = Trajectory::default();
        for &ts in samples {
            let evolved = propagator.evolve(&rotating, ts - t0)?;
            out.times.push(ts);
            out.states.push(frame(&evolved, ts, 1.0)?);
        }
        Ok(out)
    }
}

/// Runs `steps` with default integrator settings, recording only step end points.
pub fn run_schedule(
    basis: &CompositeBasis,
    initial: &StateVector,
    steps: &[PulseStep],
) -> Result<ScheduleOutcome> {
    ScheduleRunner::new(basis).run(initial, steps)
}
