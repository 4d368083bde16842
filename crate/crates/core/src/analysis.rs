//! Bipartite entanglement of internal x trap states, momentum-space release
//! distributions and probe-pulse branch discrimination.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_rwa_hamiltonian, CompositeBasis, DriveSpec, RwaPropagator, StateVector};
use crate::error::{Error, Result};
use crate::lg_field::TrapWavefunction;
use crate::operator::{BasisTag, C64};
use crate::trap_fock::FockLabel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    Internal,
    Trap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    /// Bits.
    Two,
    /// Nats.
    E,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensity {
    pub subsystem: Subsystem,
    pub matrix: DMatrix<C64>,
}

impl ReducedDensity {
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }
}

fn dims(tag: BasisTag) -> Result<(usize, usize)> {
    match tag {
        BasisTag::Composite { levels, .. } => Ok((levels, tag.dim() / levels)),
        other => Err(Error::NotComposite(other)),
    }
}

/// Amplitudes reshaped as `levels x trap`.
fn amplitude_matrix(state: &StateVector) -> Result<DMatrix<C64>> {
    let (levels, trap) = dims(state.basis())?;
    Ok(DMatrix::from_fn(levels, trap, |k, t| state.amplitude(k * trap + t)))
}

pub fn partial_trace(state: &StateVector, keep: Subsystem) -> Result<ReducedDensity> {
    let a = amplitude_matrix(state)?;
    let matrix = match keep {
        Subsystem::Internal => &a * a.adjoint(),
        Subsystem::Trap => a.transpose() * a.map(|z| z.conj()),
    };
    Ok(ReducedDensity {
        subsystem: keep,
        matrix,
    })
}

/// Von Neumann entropy `-sum lambda log lambda`, `0 log 0 = 0`.
pub fn entanglement_entropy(rho: &ReducedDensity, base: LogBase) -> Result<f64> {
    let mut entropy = 0.0;
    for lambda in rho.eigenvalues() {
        if lambda < -1e-10 {
            return Err(Error::NegativeEigenvalue(lambda));
        }
        if lambda > 0.0 {
            entropy -= lambda * lambda.ln();
        }
    }
    Ok(match base {
        LogBase::Two => entropy / std::f64::consts::LN_2,
        LogBase::E => entropy,
    }
    .max(0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtDecomposition {
    /// Descending, non-negative.
    pub coefficients: Vec<f64>,
    pub internal_vectors: Vec<DVector<C64>>,
    pub trap_vectors: Vec<DVector<C64>>,
    basis: BasisTag,
}

impl SchmidtDecomposition {
    pub fn rank(&self, threshold: f64) -> usize {
        self.coefficients.iter().filter(|&&c| c > threshold).count()
    }

    /// `sum_i c_i |u_i> (x) |v_i>` as a composite amplitude vector.
    pub fn reconstruct(&self) -> DVector<C64> {
        let mut out = DVector::zeros(self.basis.dim());
        let trap = self.trap_vectors.first().map_or(0, |v| v.len());
        for ((c, u), v) in self.coefficients.iter().zip(&self.internal_vectors).zip(&self.trap_vectors) {
            for (k, uk) in u.iter().enumerate() {
                for (t, vt) in v.iter().enumerate() {
                    out[k * trap + t] += uk * vt * *c;
                }
            }
        }
        out
    }
}

pub fn schmidt(state: &StateVector) -> Result<SchmidtDecomposition> {
    let a = amplitude_matrix(state)?;
    let svd = a.svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    Ok(SchmidtDecomposition {
        coefficients: order.iter().map(|&i| svd.singular_values[i]).collect(),
        internal_vectors: order.iter().map(|&i| u.column(i).into_owned()).collect(),
        trap_vectors: order.iter().map(|&i| v_t.row(i).transpose()).collect(),
        basis: state.basis(),
    })
}

/// Square momentum grid sized from the position grid by `dx dp = 2 pi / points`
/// with equal extent in both spaces (in units of `R0` and `hbar / R0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    pub points: usize,
}

impl Default for MomentumGrid {
    fn default() -> Self {
        Self { points: 256 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentumDistribution {
    /// Ascending momentum axis, shared by `p_x` and `p_y`.
    pub momenta: Vec<f64>,
    /// `|psi(p)|^2`, row-major with `p_y` outer; integrates to one.
    pub density: Vec<f64>,
    pub spacing: f64,
    /// `sum |psi(p)|^2 dp^2` before normalization (Parseval: the position norm).
    pub raw_integral: f64,
    /// Fraction of the mass on the outermost ring of grid cells.
    pub edge_mass: f64,
}

impl MomentumDistribution {
    pub fn at_index(&self, ix: usize, iy: usize) -> f64 {
        self.density[iy * self.momenta.len() + ix]
    }

    /// Index of `p = 0` on the axis.
    pub fn origin(&self) -> usize {
        self.momenta.len() / 2
    }
}

/// `|FT chi_{N,M}|^2` on a square momentum grid by 2D FFT of the sampled
/// position wavefunction.
pub fn momentum_distribution(wf: &TrapWavefunction, grid: &MomentumGrid) -> Result<MomentumDistribution> {
    let n = grid.points;
    if n < 16 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "momentum grid needs an even point count >= 16, got {n}"
        )));
    }
    let r0 = wf.r0();
    let dx = r0 * (2.0 * PI / n as f64).sqrt();
    let dp = 2.0 * PI / (n as f64 * dx);
    let half = (n / 2) as f64;
    let coord = |j: usize| (j as f64 - half) * dx;

    let mut data: Vec<C64> = Vec::with_capacity(n * n);
    for iy in 0..n {
        let y = coord(iy);
        for ix in 0..n {
            let x = coord(ix);
            data.push(wf.eval(x.hypot(y), y.atan2(x)));
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut column = vec![C64::new(0.0, 0.0); n];
    for ix in 0..n {
        for iy in 0..n {
            column[iy] = data[iy * n + ix];
        }
        fft.process(&mut column);
        for iy in 0..n {
            data[iy * n + ix] = column[iy];
        }
    }

    // FFT bin k carries p = k dp for k < n/2 and (k - n) dp otherwise; the
    // offset phase of the position grid drops out of |.|^2.
    let scale = dx * dx / (2.0 * PI);
    let shift = |k: usize| (k + n / 2) % n;
    let mut density = vec![0.0; n * n];
    for ky in 0..n {
        for kx in 0..n {
            density[shift(ky) * n + shift(kx)] = (data[ky * n + kx] * scale).norm_sqr();
        }
    }
    let raw_integral: f64 = density.iter().sum::<f64>() * dp * dp;
    let edge: f64 = (0..n)
        .flat_map(|i| [(i, 0), (i, n - 1), (0, i), (n - 1, i)])
        .map(|(a, b)| density[a * n + b])
        .sum::<f64>()
        * dp
        * dp;
    let edge_mass = edge / raw_integral;
    if edge_mass > 1e-6 {
        return Err(Error::Aliasing { tail_mass: edge_mass });
    }
    density.iter_mut().for_each(|d| *d /= raw_integral);
    Ok(MomentumDistribution {
        momenta: (0..n).map(|k| (k as f64 - half) * dp).collect(),
        density,
        spacing: dp,
        raw_integral,
        edge_mass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchAbsorption {
    pub trap: FockLabel,
    /// Probability of this trap branch in the input state.
    pub weight: f64,
    /// Joint probability: branch weight times excitation of the branch alone.
    pub absorption: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub transition: usize,
    pub target_level: usize,
    pub duration: f64,
    pub total_absorption: f64,
    pub branches: Vec<BranchAbsorption>,
}

/// Evolves `state` under a probe on `transition` (levels `transition` and
/// `transition + 1`) and reports the excitation of the upper level, in total
/// and separately for each trap branch of the input state.
pub fn probe_discrimination(
    basis: &CompositeBasis,
    state: &StateVector,
    probe: &DriveSpec,
    transition: usize,
    duration: f64,
) -> Result<ProbeReport> {
    let levels = basis.ladder().level_count();
    if levels < 3 {
        return Err(Error::LadderTooSmall(levels));
    }
    let h = build_rwa_hamiltonian(basis, probe, transition)?;
    let propagator = RwaPropagator::new(&h)?;
    let target = transition + 1;
    let excited = |psi: &StateVector| -> Result<f64> {
        Ok(basis.level_populations(&propagator.evolve(psi, duration)?)[target])
    };
    let total_absorption = excited(state)?;

    let t_len = basis.trap().len();
    let mut branches = Vec::new();
    for (t, &label) in basis.trap().labels().iter().enumerate() {
        let weight: f64 = (0..levels).map(|k| state.amplitude(k * t_len + t).norm_sqr()).sum();
        if weight <= 1e-15 {
            continue;
        }
        let mut amps = DVector::zeros(basis.dim());
        for k in 0..levels {
            amps[k * t_len + t] = state.amplitude(k * t_len + t) / weight.sqrt();
        }
        let branch = StateVector::new(basis.tag(), amps)?;
        branches.push(BranchAbsorption {
            trap: label,
            weight,
            absorption: weight * excited(&branch)?,
        });
    }
    Ok(ProbeReport {
        transition,
        target_level: target,
        duration,
        total_absorption,
        branches,
    })
}

/// Least-squares Rabi frequency `g` of `p(t) = sin^2(g t / 2)`.
///
/// Coarse scan up to the sampling Nyquist limit, then golden-section refinement.
pub fn fit_rabi_frequency(times: &[f64], populations: &[f64]) -> Result<f64> {
    if times.len() != populations.len() || times.len() < 3 {
        return Err(Error::InvalidArgument("need at least three matching samples".into()));
    }
    let residual = |g: f64| -> f64 {
        times
            .iter()
            .zip(populations)
            .map(|(&t, &p)| {
                let model = (g * t / 2.0).sin().powi(2);
                (model - p).powi(2)
            })
            .sum()
    };
    let min_dt = times
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !min_dt.is_finite() {
        return Err(Error::InvalidArgument("sample times are degenerate".into()));
    }
    let g_max = PI / min_dt;
    let scan = 20 * times.len();
    let step = g_max / scan as f64;
    let best = (1..=scan)
        .map(|i| i as f64 * step)
        .min_by(|a, b| residual(*a).total_cmp(&residual(*b)))
        .expect("non-empty scan");
    let (mut lo, mut hi) = ((best - step).max(0.0), best + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (residual(c), residual(d));
    for _ in 0..200 {
        if (hi - lo) <= 1e-15 * best {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = residual(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = residual(d);
        }
    }
    Ok((lo + hi) / 2.0)
}
