//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use lgatom::analysis::*;
use lgatom::dynamics::*;
use lgatom::internal_ladder::InternalLadder;
use lgatom::lg_field::{LgMode, QuadratureGrid, TrapWavefunction};
use lgatom::trap_fock::{FockBasis, FockLabel};
use lgatom::C64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LOWER: usize = 0;
const UPPER: usize = 1;
const SEED: u64 = 0x5eed_0f_1a;

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

fn basis(n_max: usize) -> CompositeBasis {
    CompositeBasis::new(InternalLadder::two_level(50, 100.0).unwrap(), FockBasis::new(n_max))
}

fn drive(l: i32, eta: f64, rabi: f64, phase: f64) -> DriveSpec {
    DriveSpec {
        l,
        rabi,
        phase,
        eta,
        detuning: 0.0,
    }
}

fn idx(b: &CompositeBasis, level: usize, n_plus: u32, n_minus: u32) -> usize {
    b.index(level, FockLabel::new(n_plus, n_minus)).unwrap()
}

fn stationary_state() -> Outcome {
    let start = Instant::now();
    let b = basis(4);
    let h = build_rwa_hamiltonian(&b, &drive(-1, 0.1, 1.0, 0.0), 0).unwrap();
    let prop = RwaPropagator::new(&h).unwrap();
    let psi = b.product_state(LOWER, FockLabel::VACUUM).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let worst = (0..20)
        .map(|_| {
            let t: f64 = rng.gen_range(0.0..1.0e4);
            prop.evolve(&psi, t).unwrap().distance(&psi).unwrap()
        })
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-12 && elapsed < Duration::from_secs(1),
        format!("max ||U(t)psi - psi|| = {worst:.2e} over 20 durations, {elapsed:.2?}"),
    )
}

fn rabi_law() -> Outcome {
    let start = Instant::now();
    let b = basis(4);
    let (eta, rabi) = (0.1, 1.0);
    let g = eta * rabi;
    let step = PulseStep {
        drive: drive(-1, eta, rabi, -FRAC_PI_2),
        transition: 0,
        timing: PulseTiming::Duration(6.0 * PI / g),
        model: Model::Rwa,
    };
    let psi = b.product_state(UPPER, FockLabel::VACUUM).unwrap();
    let out = ScheduleRunner::new(&b).with_samples_per_step(200).run(&psi, &[step]).unwrap();
    let target = idx(&b, LOWER, 1, 0);
    let times = &out.trajectory.times[1..];
    let pops: Vec<f64> = out.trajectory.states[1..]
        .iter()
        .map(|s| s.amplitude(target).norm_sqr())
        .collect();
    let worst = times
        .iter()
        .zip(&pops)
        .map(|(t, p)| (p - (g * t / 2.0).sin().powi(2)).abs())
        .fold(0.0, f64::max);
    let fit = fit_rabi_frequency(times, &pops).unwrap();
    let rel = (fit - g).abs() / g;
    let elapsed = start.elapsed();
    outcome(
        times.len() == 200 && worst < 1e-10 && rel < 1e-6 && elapsed < Duration::from_secs(1),
        format!(
            "{} samples, max |P - sin^2| = {worst:.2e}, fitted g rel. error {rel:.2e}, {elapsed:.2?}",
            times.len()
        ),
    )
}

fn pi_pulse_transfer() -> Outcome {
    let b = basis(4);
    let mut amps = DVector::zeros(b.dim());
    amps[idx(&b, LOWER, 0, 0)] = C64::new(0.6, 0.0);
    amps[idx(&b, UPPER, 0, 0)] = C64::new(0.8, 0.0);
    let psi = StateVector::new(b.tag(), amps).unwrap();
    let step = PulseStep::pi_pulse(drive(-1, 0.1, 1.0, -FRAC_PI_2), Model::Rwa);
    let out = run_schedule(&b, &psi, &[step]).unwrap().final_state;
    let mut target = DVector::zeros(b.dim());
    target[idx(&b, LOWER, 0, 0)] = C64::new(0.6, 0.0);
    target[idx(&b, LOWER, 1, 0)] = C64::new(0.8, 0.0);
    let target = StateVector::new(b.tag(), target).unwrap();
    let f = out.fidelity(&target).unwrap();
    outcome(f >= 1.0 - 1e-10, format!("fidelity 1 - {:.2e}", 1.0 - f))
}

fn maximal_entanglement() -> Outcome {
    let b = basis(4);
    let psi = b.product_state(UPPER, FockLabel::VACUUM).unwrap();
    let step = PulseStep::half_pi_pulse(drive(-1, 0.1, 1.0, -FRAC_PI_2), Model::Rwa);
    let out = run_schedule(&b, &psi, &[step]).unwrap().final_state;
    let s = entanglement_entropy(&partial_trace(&out, Subsystem::Internal).unwrap(), LogBase::Two).unwrap();
    let sd = schmidt(&out).unwrap();
    let c = &sd.coefficients;
    let coeff_err = (c[0] - FRAC_1_SQRT_2).abs().max((c[1] - FRAC_1_SQRT_2).abs());
    outcome(
        (s - 1.0).abs() <= 1e-9 && coeff_err <= 1e-9,
        format!("S = 1 {:+.2e} bit, Schmidt ({:.12}, {:.12})", s - 1.0, c[0], c[1]),
    )
}

fn conservation_laws() -> Outcome {
    let b = basis(6);
    let mut worst_comm: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    for l in [-2, -1, 1, 2] {
        let d = drive(l, 0.1, 1.0, 0.3);
        let h = build_rwa_hamiltonian(&b, &d, 0).unwrap();
        let (c1, c2) = b.conserved_quantities(l, 0).unwrap();
        worst_comm = worst_comm
            .max(h.commutator(&c1).unwrap().max_abs())
            .max(h.commutator(&c2).unwrap().max_abs());

        // Trajectories from several starting points, including a superposition.
        let mut amps = DVector::zeros(b.dim());
        amps[idx(&b, UPPER, 0, 0)] = C64::new(0.6, 0.0);
        amps[idx(&b, LOWER, 2, 1)] = C64::new(0.0, 0.8);
        let starts = [
            b.product_state(UPPER, FockLabel::VACUUM).unwrap(),
            b.product_state(LOWER, FockLabel::new(2, 2)).unwrap(),
            StateVector::new(b.tag(), amps).unwrap(),
        ];
        for psi in &starts {
            let step = PulseStep {
                drive: d,
                transition: 0,
                timing: PulseTiming::Duration(150.0),
                model: Model::Rwa,
            };
            let out = ScheduleRunner::new(&b).with_samples_per_step(100).run(psi, &[step]).unwrap();
            let (a0, b0) = (psi.expectation(&c1).unwrap(), psi.expectation(&c2).unwrap());
            for s in &out.trajectory.states {
                worst_drift = worst_drift
                    .max((s.expectation(&c1).unwrap() - a0).abs())
                    .max((s.expectation(&c2).unwrap() - b0).abs());
            }
        }
    }
    outcome(
        worst_comm <= 1e-14 && worst_drift < 1e-10,
        format!("max commutator entry {worst_comm:.1e}, max trajectory drift {worst_drift:.2e}"),
    )
}

fn angular_momentum_deltas(l: i32, level: usize, trap: FockLabel) -> (f64, f64) {
    let b = basis(4);
    let psi = b.product_state(level, trap).unwrap();
    let step = PulseStep::pi_pulse(drive(l, 0.1, 1.0, -FRAC_PI_2), Model::Rwa);
    let out = run_schedule(&b, &psi, &[step]).unwrap();
    let (r0, r1) = (&out.records[0], &out.records[1]);
    (
        r1.internal_angular_momentum - r0.internal_angular_momentum,
        r1.trap_angular_momentum - r0.trap_angular_momentum,
    )
}

fn angular_momentum_signs() -> Outcome {
    let close = |(a, b): (f64, f64), (x, y): (f64, f64)| (a - x).abs() < 1e-10 && (b - y).abs() < 1e-10;
    let chi_11 = FockLabel::new(1, 0);
    let chi_1m1 = FockLabel::new(0, 1);
    // l = -1 from |m+1> chi_00: spin down, orbit up.
    let neg = angular_momentum_deltas(-1, UPPER, FockLabel::VACUUM);
    // l = +1 from the same state: orbital sign mirrored.
    let pos = angular_momentum_deltas(1, UPPER, FockLabel::VACUUM);
    // Absorption from the lower level: l = -1 needs chi_11, l = +1 needs chi_1,-1.
    let neg_abs = angular_momentum_deltas(-1, LOWER, chi_11);
    let pos_abs = angular_momentum_deltas(1, LOWER, chi_1m1);
    // l = +1 cannot remove an n_+ quantum: |m> chi_11 is dark.
    let dark = angular_momentum_deltas(1, LOWER, chi_11);
    let pass = close(neg, (-1.0, 1.0))
        && close(pos, (-1.0, -1.0))
        && close(neg_abs, (1.0, -1.0))
        && close(pos_abs, (1.0, 1.0))
        && close(dark, (0.0, 0.0));
    outcome(
        pass,
        format!(
            "l=-1: (dl_z, dL_Z) = ({:+.0}, {:+.0}); l=+1: ({:+.0}, {:+.0}); \
             absorption l=-1 from |m>chi_11: ({:+.0}, {:+.0}), l=+1 from |m>chi_1,-1: ({:+.0}, {:+.0}); \
             l=+1 on |m>chi_11 is dark",
            neg.0, neg.1, pos.0, pos.1, neg_abs.0, neg_abs.1, pos_abs.0, pos_abs.1
        ),
    )
}

/// Max |quadrature - algebra| over the `N <= 3` block, plus the relative
/// Frobenius deviation of the full mode from the leading term.
fn quadrature_block(l: i32, eta: f64) -> (f64, f64) {
    let r0 = 1.0;
    let mode = LgMode::from_eta(l, r0, eta).unwrap();
    let grid = QuadratureGrid::for_scales(r0, mode.waist()).unwrap();
    let labels = FockBasis::new(3).labels().to_vec();
    let trap = FockBasis::new(3 + l.unsigned_abs() as usize);
    let power = trap.position_power(l).scale(C64::from(eta.powi(l.abs())));
    let tables: Vec<Vec<C64>> = labels
        .iter()
        .map(|&lab| grid.tabulate_wavefunction(&TrapWavefunction::from_label(lab, r0).unwrap()))
        .collect();
    let lead = grid.tabulate_mode(&mode, true);
    let full = grid.tabulate_mode(&mode, false);
    let (mut worst, mut dev2, mut norm2) = (0.0f64, 0.0, 0.0);
    for (a, &bra) in labels.iter().enumerate() {
        for (c, &ket) in labels.iter().enumerate() {
            let q_lead = grid.matrix_element(&tables[a], &lead, &tables[c]);
            let q_full = grid.matrix_element(&tables[a], &full, &tables[c]);
            let alg = power.get(trap.index_of(bra).unwrap(), trap.index_of(ket).unwrap());
            worst = worst.max((q_lead - alg).norm());
            dev2 += (q_full - q_lead).norm_sqr();
            norm2 += q_lead.norm_sqr();
        }
    }
    (worst, (dev2 / norm2).sqrt())
}

fn quadrature_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for l in [1, 2] {
        let devs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&eta| {
                let (w, dev) = quadrature_block(l, eta);
                worst = worst.max(w);
                dev
            })
            .collect();
        ratios.push(devs[0] / devs[1]);
        ratios.push(devs[1] / devs[2]);
    }
    let elapsed = start.elapsed();
    // eta halves, so an eta^2 law gives 4; factor-2 window.
    let scaling_ok = ratios.iter().all(|r| (2.0..=8.0).contains(r));
    outcome(
        worst < 1e-8 && scaling_ok && elapsed < Duration::from_secs(30),
        format!(
            "max |quad - algebra| = {worst:.2e}; deviation ratios per eta halving {:?}; {elapsed:.2?}",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn full_model_infidelity(coupling: f64) -> f64 {
    let b = basis(3);
    let eta = 0.1;
    let d = drive(-1, eta, coupling / eta, -FRAC_PI_2);
    let psi = b.product_state(UPPER, FockLabel::VACUUM).unwrap();
    let out = ScheduleRunner::new(&b)
        .with_settings(IntegratorSettings::with_tolerance(1e-10))
        .run(&psi, &[PulseStep::pi_pulse(d, Model::Full)])
        .unwrap();
    1.0 - out.final_state.amplitude(idx(&b, LOWER, 1, 0)).norm_sqr()
}

fn rwa_scaling() -> Outcome {
    let start = Instant::now();
    let eps: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&g| full_model_infidelity(g)).collect();
    let elapsed = start.elapsed();
    let ratio = eps[1] / eps[2];
    outcome(
        eps[0] > eps[1] && eps[1] > eps[2] && (2.5..=6.0).contains(&ratio) && elapsed < Duration::from_secs(120),
        format!(
            "eps = {:.3e}, {:.3e}, {:.3e}; eps(0.01)/eps(0.005) = {ratio:.3}; {elapsed:.2?}",
            eps[0], eps[1], eps[2]
        ),
    )
}

fn two_quantum_sideband() -> Outcome {
    let b = basis(6);
    let (eta, rabi) = (0.1, 1.0);
    let expected = 2f64.sqrt() * eta * eta * rabi;
    let h = build_rwa_hamiltonian(&b, &drive(-2, eta, rabi, 0.0), 0).unwrap();
    let (i, j) = (idx(&b, UPPER, 0, 0), idx(&b, LOWER, 2, 0));

    // Brute force: Hermitian eigenproblem of the whole matrix through its real embedding.
    let n = b.dim();
    let m = h.entries();
    let mut real = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = m[(r, c)];
            real[(r, c)] = z.re;
            real[(r + n, c + n)] = z.re;
            real[(r, c + n)] = -z.im;
            real[(r + n, c)] = z.im;
        }
    }
    let eig = real.symmetric_eigen();
    // Eigenvalues carrying weight on |m+1> chi_00 (each appears twice in the embedding).
    let mut weighted: Vec<f64> = (0..2 * n)
        .filter(|&k| {
            let v = eig.eigenvectors.column(k);
            v[i].powi(2) + v[i + n].powi(2) > 1e-6
        })
        .map(|k| eig.eigenvalues[k])
        .collect();
    weighted.sort_by(f64::total_cmp);
    let split = weighted.last().unwrap() - weighted.first().unwrap();
    let eig_err = (split - expected).abs();

    // Time-domain check against the same matrix.
    let psi = b.product_state(UPPER, FockLabel::VACUUM).unwrap();
    let prop = RwaPropagator::new(&h).unwrap();
    let times: Vec<f64> = (1..=200).map(|k| k as f64 * 4.0 * PI / expected / 200.0).collect();
    let pops: Vec<f64> = times
        .iter()
        .map(|&t| prop.evolve(&psi, t).unwrap().amplitude(j).norm_sqr())
        .collect();
    let fit = fit_rabi_frequency(&times, &pops).unwrap();
    let fit_err = (fit - expected).abs();
    outcome(
        eig_err < 1e-8 && fit_err < 1e-8,
        format!(
            "sqrt2 eta^2 Omega = {expected:.12}; eigen splitting error {eig_err:.2e}; fitted error {fit_err:.2e}"
        ),
    )
}

fn random_state(b: &CompositeBasis, rng: &mut ChaCha8Rng) -> StateVector {
    let mut amps: DVector<C64> =
        DVector::from_fn(b.dim(), |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let norm = amps.norm();
    amps /= C64::from(norm);
    StateVector::new(b.tag(), amps).unwrap()
}

fn analysis_consistency() -> Outcome {
    let ladder = InternalLadder::new(50, vec![100.0, 104.0], None).unwrap();
    let b = CompositeBasis::new(ladder, FockBasis::new(3));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xa11);
    let (mut entropy_gap, mut recon): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let psi = random_state(&b, &mut rng);
        let s_int = entanglement_entropy(&partial_trace(&psi, Subsystem::Internal).unwrap(), LogBase::E).unwrap();
        let s_trap = entanglement_entropy(&partial_trace(&psi, Subsystem::Trap).unwrap(), LogBase::E).unwrap();
        entropy_gap = entropy_gap.max((s_int - s_trap).abs());
        recon = recon.max((schmidt(&psi).unwrap().reconstruct() - psi.amplitudes()).norm());
    }
    let grid = MomentumGrid { points: 128 };
    let mut integral_err: f64 = 0.0;
    let mut chi11_origin = f64::NAN;
    for label in FockBasis::new(3).labels() {
        let dist = momentum_distribution(&TrapWavefunction::from_label(*label, 1.0).unwrap(), &grid).unwrap();
        integral_err = integral_err.max((dist.raw_integral - 1.0).abs());
        if *label == FockLabel::new(1, 0) {
            chi11_origin = dist.at_index(dist.origin(), dist.origin());
        }
    }
    outcome(
        entropy_gap <= 1e-10 && recon <= 1e-10 && integral_err <= 1e-8 && chi11_origin < 1e-20,
        format!(
            "entropy gap {entropy_gap:.1e}, reconstruction {recon:.1e}, |integral - 1| {integral_err:.1e}, \
             chi_11 density at p=0 {chi11_origin:.1e}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("stationary lower-level ground state", stationary_state),
        ("sideband Rabi law and frequency fit", rabi_law),
        ("pi-pulse coherence transfer", pi_pulse_transfer),
        ("maximal entanglement after half transfer", maximal_entanglement),
        ("conservation laws", conservation_laws),
        ("angular-momentum transfer signs", angular_momentum_signs),
        ("quadrature oracle equivalence", quadrature_oracle),
        ("rotating-wave validity scaling", rwa_scaling),
        ("two-quantum sideband frequency", two_quantum_sideband),
        ("analysis self-consistency", analysis_consistency),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failures += 1;
        }
        println!(
            "[{}] criterion {:>2}: {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            k + 1,
            result.detail
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
