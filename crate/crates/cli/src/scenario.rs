//! Scenario orchestration: single runs, sweeps, oracle tables and grid dumps.

use std::path::{Path, PathBuf};

use lgatom::analysis::{
    entanglement_entropy, momentum_distribution, partial_trace, probe_discrimination, schmidt, LogBase,
    MomentumGrid, ProbeReport, Subsystem,
};
use lgatom::dynamics::{
    CompositeBasis, DriveSpec, IntegratorSettings, Model, PulseStep, ScheduleOutcome, ScheduleRunner,
    StateVector, StepRecord,
};
use lgatom::internal_ladder::InternalLadder;
use lgatom::lg_field::{CartesianGrid, LgMode, QuadratureGrid, TrapWavefunction};
use lgatom::trap_fock::{FockBasis, FockLabel};
use lgatom::operator::OperatorDump;
use lgatom::C64;
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ScenarioConfig, StatePreset, SweepParameter};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_json, write_text, Csv, Units, UNITS};

pub fn build_basis(cfg: &ScenarioConfig) -> CliResult<CompositeBasis> {
    let ladder = InternalLadder::new(
        cfg.ladder.m_base,
        cfg.ladder.transition_frequencies.clone(),
        cfg.ladder.dipole_scales.clone(),
    )?;
    Ok(CompositeBasis::new(ladder, FockBasis::new(cfg.trap.n_max)))
}

pub fn initial_state(cfg: &ScenarioConfig, basis: &CompositeBasis) -> CliResult<StateVector> {
    let s = &cfg.initial_state;
    let mut amps = DVector::zeros(basis.dim());
    let mut set = |level: usize, label: FockLabel, z: C64| -> CliResult<()> {
        let i = basis
            .index(level, label)
            .ok_or_else(|| CliError::config(vec![format!("initial_state: |{level}> {label} not in basis")]))?;
        amps[i] = z;
        Ok(())
    };
    match (&s.amplitudes, s.preset) {
        (Some(list), _) => {
            for e in list {
                set(e.level, FockLabel::new(e.n_plus, e.n_minus), C64::new(e.re, e.im))?;
            }
        }
        (None, Some(StatePreset::Ground)) => set(0, FockLabel::VACUUM, C64::new(1.0, 0.0))?,
        (None, Some(StatePreset::Upper)) => set(1, FockLabel::VACUUM, C64::new(1.0, 0.0))?,
        (None, Some(StatePreset::Superposition)) => {
            set(0, FockLabel::VACUUM, C64::new(s.c_m.unwrap_or(0.0), 0.0))?;
            set(1, FockLabel::VACUUM, C64::new(s.c_m1.unwrap_or(0.0), 0.0))?;
        }
        (None, None) => return Err(CliError::config(vec!["initial_state: missing".into()])),
    }
    Ok(StateVector::new(basis.tag(), amps)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchProbability {
    pub level: usize,
    pub n_plus: u32,
    pub n_minus: u32,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateSummary {
    pub entropy_bits: f64,
    pub purity: f64,
    pub schmidt_coefficients: Vec<f64>,
    pub level_populations: Vec<f64>,
    pub trap_angular_momentum: f64,
    pub internal_angular_momentum: f64,
    pub trap_quanta: f64,
    pub norm: f64,
    /// Basis states with probability above 1e-15, in basis order.
    pub branch_probabilities: Vec<BranchProbability>,
}

/// Spread of the two conserved quantities over the samples of one step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationCheck {
    pub step: usize,
    pub model: Model,
    /// Max deviation of `<l l_z - L_Z>` from its value at the start of the step.
    pub spin_orbit_drift: f64,
    /// Max deviation of `<N + |l| P_upper>`.
    pub excitation_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub units: Units,
    pub warnings: Vec<String>,
    pub dimension: usize,
    pub total_duration: f64,
    #[serde(rename = "final")]
    pub final_state: StateSummary,
    pub records: Vec<StepRecord>,
    pub conservation: Vec<ConservationCheck>,
    pub probe: Option<ProbeReport>,
}

pub fn summarize(basis: &CompositeBasis, state: &StateVector) -> CliResult<StateSummary> {
    let rho = partial_trace(state, Subsystem::Internal)?;
    let sd = schmidt(state)?;
    let branch_probabilities = (0..basis.dim())
        .filter_map(|i| {
            let p = state.amplitude(i).norm_sqr();
            (p > 1e-15).then(|| {
                let (level, label) = basis.split(i);
                BranchProbability {
                    level,
                    n_plus: label.n_plus,
                    n_minus: label.n_minus,
                    probability: p,
                }
            })
        })
        .collect();
    Ok(StateSummary {
        entropy_bits: entanglement_entropy(&rho, LogBase::Two)?,
        purity: rho.purity(),
        schmidt_coefficients: sd.coefficients.clone(),
        level_populations: basis.level_populations(state),
        trap_angular_momentum: state.expectation(&basis.trap_angular_momentum())?,
        internal_angular_momentum: state.expectation(&basis.internal_angular_momentum())?,
        trap_quanta: state.expectation(&basis.trap_number())?,
        norm: state.norm(),
        branch_probabilities,
    })
}

/// Everything a single run produces, before any file is written.
pub struct ScenarioRun {
    pub basis: CompositeBasis,
    pub outcome: ScheduleOutcome,
    pub report: AnalysisReport,
}

fn integrator(cfg: &ScenarioConfig) -> IntegratorSettings {
    IntegratorSettings {
        max_step: cfg.integrator.max_step,
        ..IntegratorSettings::with_tolerance(cfg.integrator.tolerance)
    }
}

fn runner<'a>(cfg: &ScenarioConfig, basis: &'a CompositeBasis) -> ScheduleRunner<'a> {
    let r = ScheduleRunner::new(basis)
        .with_settings(integrator(cfg))
        .with_samples_per_step(cfg.outputs.samples_per_step);
    match &cfg.outputs.sample_times {
        Some(ts) => r.with_sample_times(ts.clone()),
        None => r,
    }
}

fn conservation(
    basis: &CompositeBasis,
    steps: &[PulseStep],
    outcome: &ScheduleOutcome,
) -> CliResult<Vec<ConservationCheck>> {
    let mut checks = Vec::new();
    for (i, step) in steps.iter().enumerate() {
        let (c1, c2) = basis.conserved_quantities(step.drive.l, step.transition)?;
        let (t0, t1) = (outcome.records[i].t_end, outcome.records[i + 1].t_end);
        // The sample at t0 closes the previous step and opens this one.
        let within: Vec<&StateVector> = outcome
            .trajectory
            .times
            .iter()
            .zip(&outcome.trajectory.states)
            .filter(|(t, _)| **t >= t0 && **t <= t1)
            .map(|(_, s)| s)
            .collect();
        let mut drift = (0.0f64, 0.0f64);
        if let Some(first) = within.first() {
            let (a0, b0) = (first.expectation(&c1)?, first.expectation(&c2)?);
            for s in &within {
                drift.0 = drift.0.max((s.expectation(&c1)? - a0).abs());
                drift.1 = drift.1.max((s.expectation(&c2)? - b0).abs());
            }
        }
        checks.push(ConservationCheck {
            step: i + 1,
            model: step.model,
            spin_orbit_drift: drift.0,
            excitation_drift: drift.1,
        });
    }
    Ok(checks)
}

/// Runs the schedule in memory.
pub fn run_scenario(cfg: &ScenarioConfig, steps: &[PulseStep], warnings: &[String]) -> CliResult<ScenarioRun> {
    let basis = build_basis(cfg)?;
    let psi = initial_state(cfg, &basis)?;
    let outcome = runner(cfg, &basis).run(&psi, steps)?;
    let probe = match cfg.probe_step() {
        Some((drive, transition, timing)) => {
            let duration = PulseStep {
                drive,
                transition,
                timing,
                model: Model::Rwa,
            }
            .duration()?;
            Some(probe_discrimination(&basis, &outcome.final_state, &drive, transition, duration)?)
        }
        None => None,
    };
    let report = AnalysisReport {
        units: UNITS,
        warnings: warnings.to_vec(),
        dimension: basis.dim(),
        total_duration: outcome.records.last().map_or(0.0, |r| r.t_end),
        final_state: summarize(&basis, &outcome.final_state)?,
        records: outcome.records.clone(),
        conservation: conservation(&basis, steps, &outcome)?,
        probe,
    };
    Ok(ScenarioRun { basis, outcome, report })
}

pub fn trajectory_csv(basis: &CompositeBasis, outcome: &ScheduleOutcome) -> CliResult<String> {
    let levels = basis.ladder().level_count();
    let pop_names: Vec<String> = (0..levels).map(|k| format!("pop_{k}")).collect();
    let mut columns: Vec<&str> = vec!["t"];
    columns.extend(pop_names.iter().map(String::as_str));
    columns.extend([
        "internal_angular_momentum",
        "trap_angular_momentum",
        "trap_quanta",
        "entropy_bits",
        "norm",
    ]);
    let comments = vec![format!(
        "levels m_base+0..m_base+{}; pop_k is the population of level k",
        levels - 1
    )];
    let mut csv = Csv::new(&comments, &columns);
    let (lz, big_lz, n) = (
        basis.internal_angular_momentum(),
        basis.trap_angular_momentum(),
        basis.trap_number(),
    );
    for (t, s) in outcome.trajectory.times.iter().zip(&outcome.trajectory.states) {
        let entropy = entanglement_entropy(&partial_trace(s, Subsystem::Internal)?, LogBase::Two)?;
        let mut row = vec![*t];
        row.extend(basis.level_populations(s));
        row.extend([s.expectation(&lz)?, s.expectation(&big_lz)?, s.expectation(&n)?, entropy, s.norm()]);
        csv.row(row);
    }
    Ok(csv.into_string())
}

fn write_run(cfg: &ScenarioConfig, run: &ScenarioRun, dir: &Path) -> CliResult<()> {
    ensure_dir(dir)?;
    write_text(
        &dir.join(&cfg.outputs.trajectory_file),
        &trajectory_csv(&run.basis, &run.outcome)?,
    )?;
    write_json(&dir.join(&cfg.outputs.analysis_file), &run.report)
}

/// `simulate`: run, then write the trajectory CSV and analysis JSON into `dir`.
pub fn simulate(cfg: &ScenarioConfig, warnings: &[String], dir: &Path) -> CliResult<AnalysisReport> {
    let run = run_scenario(cfg, &cfg.pulse_steps(), warnings)?;
    write_run(cfg, &run, dir)?;
    Ok(run.report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub dir: PathBuf,
    /// `1 - |<psi_model|psi_rwa>|^2` for the final states.
    pub rwa_error: f64,
    pub entropy_bits: f64,
    pub level_populations: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepManifest {
    pub units: Units,
    pub parameter: SweepParameter,
    pub model: Option<Model>,
    pub warnings: Vec<String>,
    pub points: Vec<SweepPoint>,
}

fn swept(step: &PulseStep, parameter: SweepParameter, value: f64, model: Option<Model>) -> PulseStep {
    let mut d: DriveSpec = step.drive;
    match parameter {
        SweepParameter::Coupling => d.rabi = value / d.eta.powi(d.l.abs()),
        SweepParameter::Rabi => d.rabi = value,
        SweepParameter::Eta => d.eta = value,
        SweepParameter::Detuning => d.detuning = value,
    }
    PulseStep {
        drive: d,
        model: model.unwrap_or(step.model),
        ..*step
    }
}

/// `sweep`: one scenario per value on the rayon pool; files under
/// `dir/point_NNN/`, manifest in input order at `dir/manifest.json`.
pub fn sweep(cfg: &ScenarioConfig, warnings: &[String], dir: &Path) -> CliResult<SweepManifest> {
    let Some(spec) = &cfg.sweep else {
        return Err(CliError::config(vec!["sweep: section required for the sweep command".into()]));
    };
    let base = cfg.pulse_steps();
    let points = spec
        .values
        .par_iter()
        .enumerate()
        .map(|(index, &value)| -> CliResult<SweepPoint> {
            let steps: Vec<PulseStep> = base.iter().map(|s| swept(s, spec.parameter, value, spec.model)).collect();
            for s in &steps {
                s.drive.validate()?;
            }
            let run = run_scenario(cfg, &steps, warnings)?;
            let reference: Vec<PulseStep> = steps
                .iter()
                .map(|s| PulseStep {
                    model: Model::Rwa,
                    ..*s
                })
                .collect();
            let rwa_error = if reference == steps {
                0.0
            } else {
                let basis = build_basis(cfg)?;
                let psi = initial_state(cfg, &basis)?;
                let ideal = ScheduleRunner::new(&basis).run(&psi, &reference)?;
                1.0 - run.outcome.final_state.fidelity(&ideal.final_state)?
            };
            let sub = PathBuf::from(format!("point_{index:03}"));
            write_run(cfg, &run, &dir.join(&sub))?;
            Ok(SweepPoint {
                index,
                value,
                dir: sub,
                rwa_error,
                entropy_bits: run.report.final_state.entropy_bits,
                level_populations: run.report.final_state.level_populations,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let manifest = SweepManifest {
        units: UNITS,
        parameter: spec.parameter,
        model: spec.model,
        warnings: warnings.to_vec(),
        points,
    };
    ensure_dir(dir)?;
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub l: i32,
    pub bra: FockLabel,
    pub ket: FockLabel,
    pub algebraic: [f64; 2],
    pub quadrature: [f64; 2],
    pub difference: f64,
    pub tail_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub eta: f64,
    pub r0: f64,
    pub max_n: usize,
    pub tolerance: f64,
    pub max_difference: f64,
    pub passed: bool,
    pub rows: Vec<OracleRow>,
}

/// Leading-order mode elements by quadrature against `eta^|l| (a^dag + a)^|l|`.
pub fn oracle_table(cfg: &ScenarioConfig) -> CliResult<OracleReport> {
    let oc = &cfg.oracle;
    let eta = oc.eta.unwrap_or(cfg.drive.eta);
    let r0 = cfg.trap.r0;
    let labels = FockBasis::new(oc.max_n).labels().to_vec();
    let mut rows = Vec::new();
    for &l in &oc.ls {
        let mode = LgMode::from_eta(l, r0, eta)?;
        let grid = QuadratureGrid::for_scales(r0, mode.waist())?;
        let trap = FockBasis::new(oc.max_n + l.unsigned_abs() as usize);
        let power = trap.position_power(l).scale(C64::from(eta.powi(l.abs())));
        let u = grid.tabulate_mode(&mode, true);
        let tables: Vec<Vec<C64>> = labels
            .iter()
            .map(|&lab| Ok(grid.tabulate_wavefunction(&TrapWavefunction::from_label(lab, r0)?)))
            .collect::<CliResult<_>>()?;
        for (a, &bra) in labels.iter().enumerate() {
            for (b, &ket) in labels.iter().enumerate() {
                let product: Vec<C64> = tables[a]
                    .iter()
                    .zip(&u)
                    .zip(&tables[b])
                    .map(|((x, m), y)| x.conj() * m * y)
                    .collect();
                let quad = grid.integrate_table(&product);
                let alg = power.get(
                    trap.index_of(bra).expect("label in basis"),
                    trap.index_of(ket).expect("label in basis"),
                );
                rows.push(OracleRow {
                    l,
                    bra,
                    ket,
                    algebraic: [alg.re, alg.im],
                    quadrature: [quad.re, quad.im],
                    difference: (quad - alg).norm(),
                    tail_estimate: grid.tail_estimate(&product),
                });
            }
        }
    }
    let max_difference = rows.iter().map(|r| r.difference.max(r.tail_estimate)).fold(0.0, f64::max);
    Ok(OracleReport {
        eta,
        r0,
        max_n: oc.max_n,
        tolerance: oc.tolerance,
        max_difference,
        passed: max_difference <= oc.tolerance,
        rows,
    })
}

/// `oracle`: writes `oracle.csv` and `oracle.json`; mismatch is an error.
pub fn oracle(cfg: &ScenarioConfig, dir: &Path) -> CliResult<OracleReport> {
    let report = oracle_table(cfg)?;
    ensure_dir(dir)?;
    let mut csv = Csv::new(
        &[format!("eta = {:?}, tolerance = {:?}", report.eta, report.tolerance)],
        &[
            "l",
            "bra_n_plus",
            "bra_n_minus",
            "ket_n_plus",
            "ket_n_minus",
            "algebraic_re",
            "algebraic_im",
            "quadrature_re",
            "quadrature_im",
            "abs_difference",
            "tail_estimate",
        ],
    );
    for r in &report.rows {
        csv.row([
            r.l as f64,
            r.bra.n_plus as f64,
            r.bra.n_minus as f64,
            r.ket.n_plus as f64,
            r.ket.n_minus as f64,
            r.algebraic[0],
            r.algebraic[1],
            r.quadrature[0],
            r.quadrature[1],
            r.difference,
            r.tail_estimate,
        ]);
    }
    write_text(&dir.join("oracle.csv"), &csv.into_string())?;
    write_json(&dir.join("oracle.json"), &report)?;
    if !report.passed {
        return Err(CliError::OracleMismatch {
            max_difference: report.max_difference,
            tolerance: report.tolerance,
        });
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModesReport {
    pub units: Units,
    pub waist: f64,
    pub files: Vec<String>,
}

fn write_grid(
    dir: &Path,
    name: &str,
    comment: &str,
    grid: CartesianGrid,
    f: impl Fn(f64, f64) -> C64,
) -> CliResult<String> {
    let mut csv = Csv::new(&[comment.to_string()], &["x", "y", "re", "im", "abs2"]);
    for s in grid.sample(f) {
        csv.row([s.x, s.y, s.re, s.im, s.abs2]);
    }
    write_text(&dir.join(name), &csv.into_string())?;
    Ok(name.to_string())
}

/// `modes`: field and wavefunction grids, momentum densities, operator dumps.
pub fn modes(cfg: &ScenarioConfig, dir: &Path) -> CliResult<ModesReport> {
    ensure_dir(dir)?;
    let mc = &cfg.modes;
    let r0 = cfg.trap.r0;
    let drive = cfg.drive.to_spec();
    let mode = LgMode::from_eta(drive.l, r0, drive.eta)?;
    let mut files = Vec::new();

    let mode_grid = CartesianGrid {
        extent: mc.mode_extent.unwrap_or(2.5 * mode.waist()),
        points: mc.points,
    };
    let header = format!("LG mode l = {}, waist = {:?}, unit amplitude", drive.l, mode.waist());
    files.push(write_grid(dir, "mode_full.csv", &header, mode_grid, |r, p| mode.eval(r, p))?);
    files.push(write_grid(
        dir,
        "mode_leading.csv",
        &format!("{header}, leading order"),
        mode_grid,
        |r, p| mode.eval_leading(r, p),
    )?);

    let states: Vec<FockLabel> = match &mc.states {
        Some(list) => list.iter().map(|[a, b]| FockLabel::new(*a, *b)).collect(),
        None => FockBasis::new(cfg.trap.n_max.min(2)).labels().to_vec(),
    };
    let top = states.iter().map(|s| s.total()).max().unwrap_or(0) as f64;
    let state_grid = CartesianGrid {
        extent: mc.state_extent.unwrap_or(r0 * (3.0 + (2.0 * top + 1.0).sqrt())),
        points: mc.points,
    };
    let momentum_grid = MomentumGrid {
        points: mc.momentum_points,
    };
    for label in states {
        let wf = TrapWavefunction::from_label(label, r0)?;
        let tag = format!("{}_{}", label.n_plus, label.n_minus);
        let comment = format!(
            "trap state (n_plus, n_minus) = {label}, N = {}, M = {}",
            label.total(),
            label.angular()
        );
        files.push(write_grid(dir, &format!("state_{tag}.csv"), &comment, state_grid, |r, p| {
            wf.eval(r, p)
        })?);

        let dist = momentum_distribution(&wf, &momentum_grid)?;
        let mut csv = Csv::new(&[format!("{comment}; density normalized to 1")], &["px", "py", "density"]);
        for (iy, &py) in dist.momenta.iter().enumerate() {
            for (ix, &px) in dist.momenta.iter().enumerate() {
                csv.row([px, py, dist.at_index(ix, iy)]);
            }
        }
        let name = format!("momentum_{tag}.csv");
        write_text(&dir.join(&name), &csv.into_string())?;
        files.push(name);
    }

    let basis = build_basis(cfg)?;
    let dumps: Vec<OperatorDump> = vec![
        lgatom::dynamics::build_rwa_hamiltonian(&basis, &drive, 0)?.dump("rwa_hamiltonian"),
        basis.trap().position_power(drive.l).dump("position_power"),
        basis.trap_angular_momentum().dump("trap_angular_momentum"),
        basis.internal_angular_momentum().dump("internal_angular_momentum"),
    ];
    write_json(&dir.join("operators.json"), &dumps)?;
    files.push("operators.json".into());

    let report = ModesReport {
        units: UNITS,
        waist: mode.waist(),
        files,
    };
    write_json(&dir.join("modes.json"), &report)?;
    Ok(report)
}

/// Duration of every step, for `validate` output.
pub fn step_durations(cfg: &ScenarioConfig) -> CliResult<Vec<f64>> {
    cfg.pulse_steps().iter().map(|s| Ok(s.duration()?)).collect()
}
