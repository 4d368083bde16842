//! Laguerre-Gaussian beam profile, trap eigenfunctions in real space, and a
//! 2D quadrature oracle for beam-induced coupling matrix elements.
//!
//! Lengths are in units of the caller's choice as long as `r0` and `waist`
//! share them; the Lamb-Dicke parameter is `eta = r0 / waist`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::C64;
use crate::trap_fock::FockLabel;

/// Transverse profile of a `p = 0` LG mode at the waist.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LgMode {
    l: i32,
    waist: f64,
    amplitude: f64,
}

impl LgMode {
    pub fn new(l: i32, waist: f64, amplitude: f64) -> Result<Self> {
        if !(waist.is_finite() && waist > 0.0) {
            return Err(Error::InvalidArgument(format!("waist must be positive, got {waist}")));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mode amplitude must be positive, got {amplitude}"
            )));
        }
        Ok(Self { l, waist, amplitude })
    }

    /// Mode of unit amplitude whose waist gives Lamb-Dicke parameter `eta` for trap size `r0`.
    pub fn from_eta(l: i32, r0: f64, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
        }
        Self::new(l, r0 / eta, 1.0)
    }

    pub fn l(&self) -> i32 {
        self.l
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `E (R/w0)^|l| exp(-R^2/w0^2 + i l Phi)`.
    pub fn eval(&self, r: f64, phi: f64) -> C64 {
        let x = r / self.waist;
        self.eval_leading(r, phi) * (-x * x).exp()
    }

    /// Leading Lamb-Dicke term `E (R/w0)^|l| exp(i l Phi)`.
    pub fn eval_leading(&self, r: f64, phi: f64) -> C64 {
        let x = r / self.waist;
        C64::from_polar(self.amplitude * x.powi(self.l.abs()), self.l as f64 * phi)
    }

    /// Radius of maximal `|u|`, `w0 sqrt(|l|/2)`.
    pub fn peak_radius(&self) -> f64 {
        self.waist * (self.l.unsigned_abs() as f64 / 2.0).sqrt()
    }

    pub fn truncate(&self) -> ModeTruncation {
        ModeTruncation {
            leading_coefficient: self.amplitude,
            next_order_coefficient: -1.0,
            order: self.l.unsigned_abs(),
            waist: self.waist,
        }
    }
}

/// Leading-order Lamb-Dicke expansion of an LG mode.
///
/// `u = c0 (R/w0)^|l| e^{il Phi} [1 + c1 (R/w0)^2 + ...]` with `c1 = -1` from
/// the Gaussian envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeTruncation {
    pub leading_coefficient: f64,
    pub next_order_coefficient: f64,
    pub order: u32,
    pub waist: f64,
}

impl ModeTruncation {
    /// First-order estimate of `|u - u_leading| / |u_leading|` at radius `r`.
    pub fn estimated_relative_error(&self, r: f64) -> f64 {
        let x = r / self.waist;
        self.next_order_coefficient.abs() * x * x
    }

    /// Exact `|u - u_leading| / |u_leading| = 1 - exp(-(R/w0)^2)`.
    pub fn exact_relative_error(&self, r: f64) -> f64 {
        let x = r / self.waist;
        -(-x * x).exp_m1()
    }
}

/// Normalized eigenfunction `chi_{N,M}` of the 2D isotropic oscillator.
///
/// Phases follow the Fock construction `(a_+^dag)^{n+} (a_-^dag)^{n-} |0,0>`
/// with positive-real ladder amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrapWavefunction {
    n: u32,
    m: i32,
    r0: f64,
}

impl TrapWavefunction {
    pub fn new(n: u32, m: i32, r0: f64) -> Result<Self> {
        if FockLabel::from_nm(n, m).is_none() {
            return Err(Error::InvalidTrapState { n, m });
        }
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::InvalidArgument(format!("r0 must be positive, got {r0}")));
        }
        Ok(Self { n, m, r0 })
    }

    pub fn from_label(label: FockLabel, r0: f64) -> Result<Self> {
        Self::new(label.total(), label.angular(), r0)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn label(&self) -> FockLabel {
        FockLabel::from_nm(self.n, self.m).expect("validated at construction")
    }

    /// Value of the radial factor times `e^{iM Phi}`, using the associated
    /// Laguerre form `(-1)^k sqrt(k!/(k+|M|)!) rho^|M| L_k^|M|(rho^2) e^{-rho^2/2}`,
    /// `k = (N - |M|)/2`, `rho = R/R0`.
    pub fn eval(&self, r: f64, phi: f64) -> C64 {
        C64::from_polar(1.0, self.m as f64 * phi) * self.radial(r)
    }

    pub fn radial(&self, r: f64) -> f64 {
        let abs_m = self.m.unsigned_abs();
        let k = (self.n - abs_m) / 2;
        let rho = r / self.r0;
        let rho2 = rho * rho;
        // sqrt(k! / (k + |M|)!)
        let ratio: f64 = (k + 1..=k + abs_m).map(|j| j as f64).product::<f64>().sqrt().recip();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * ratio * rho.powi(abs_m as i32) * assoc_laguerre(k, abs_m as f64, rho2) * (-rho2 / 2.0).exp()
            / (self.r0 * PI.sqrt())
    }
}

/// Generalized Laguerre polynomial `L_k^alpha(x)` by three-term recurrence.
pub fn assoc_laguerre(k: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for j in 1..k {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + alpha - x) * cur - (j + alpha) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Polar product grid: Gauss-Legendre in `R` on `[0, r_max]`, uniform
/// trapezoid in `Phi`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    r_max: f64,
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
    azimuths: Vec<f64>,
}

impl QuadratureGrid {
    pub const DEFAULT_RADIAL: usize = 400;
    pub const DEFAULT_AZIMUTHAL: usize = 256;

    pub fn new(r_max: f64, n_radial: usize, n_azimuthal: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) || n_radial == 0 || n_azimuthal == 0 {
            return Err(Error::InvalidArgument(format!(
                "quadrature grid needs r_max > 0 and nonzero node counts (r_max={r_max}, {n_radial}x{n_azimuthal})"
            )));
        }
        let (x, w) = gauss_legendre(n_radial);
        let half = r_max / 2.0;
        let radii = x.iter().map(|xi| half * (xi + 1.0)).collect();
        let radial_weights = w.iter().map(|wi| half * wi).collect();
        let azimuths = (0..n_azimuthal)
            .map(|j| 2.0 * PI * j as f64 / n_azimuthal as f64)
            .collect();
        Ok(Self {
            r_max,
            radii,
            radial_weights,
            azimuths,
        })
    }

    /// Default grid: 400 x 256 nodes out to `8 max(r0, waist)`.
    pub fn for_scales(r0: f64, waist: f64) -> Result<Self> {
        Self::new(8.0 * r0.max(waist), Self::DEFAULT_RADIAL, Self::DEFAULT_AZIMUTHAL)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn node_count(&self) -> usize {
        self.radii.len() * self.azimuths.len()
    }

    /// Values of `f` at every node, radial-major.
    pub fn tabulate(&self, f: impl Fn(f64, f64) -> C64) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.node_count());
        for &r in &self.radii {
            for &phi in &self.azimuths {
                out.push(f(r, phi));
            }
        }
        out
    }

    /// `int f R dR dPhi` over the disk `R <= r_max`.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> C64) -> C64 {
        let table = self.tabulate(f);
        self.integrate_table(&table)
    }

    pub fn integrate_table(&self, table: &[C64]) -> C64 {
        let dphi = 2.0 * PI / self.azimuths.len() as f64;
        let na = self.azimuths.len();
        let mut total = C64::new(0.0, 0.0);
        for (i, (&r, &w)) in self.radii.iter().zip(&self.radial_weights).enumerate() {
            let ring: C64 = table[i * na..(i + 1) * na].iter().sum();
            total += ring * (w * r * dphi);
        }
        total
    }

    /// `<bra| mode |ket>` from pre-tabulated values (bra is conjugated here).
    pub fn matrix_element(&self, bra: &[C64], mode: &[C64], ket: &[C64]) -> C64 {
        let product: Vec<C64> = bra
            .iter()
            .zip(mode)
            .zip(ket)
            .map(|((b, u), k)| b.conj() * u * k)
            .collect();
        self.integrate_table(&product)
    }

    /// Magnitude of the integrand on the outermost ring times the annulus
    /// area out to `r_max`, a crude bound on the neglected tail.
    pub fn tail_estimate(&self, table: &[C64]) -> f64 {
        let na = self.azimuths.len();
        let last = self.radii.len() - 1;
        let edge = table[last * na..].iter().map(|z| z.norm()).fold(0.0, f64::max);
        edge * 2.0 * PI * self.r_max * self.r_max
    }

    pub fn tabulate_wavefunction(&self, wf: &TrapWavefunction) -> Vec<C64> {
        self.tabulate(|r, phi| wf.eval(r, phi))
    }

    /// Mode divided by its amplitude, either full or leading-order.
    pub fn tabulate_mode(&self, mode: &LgMode, truncated: bool) -> Vec<C64> {
        let inv = mode.amplitude().recip();
        if truncated {
            self.tabulate(|r, phi| mode.eval_leading(r, phi) * inv)
        } else {
            self.tabulate(|r, phi| mode.eval(r, phi) * inv)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureEstimate {
    pub value: C64,
    pub tail_estimate: f64,
}

/// `<bra| u_l / E |ket>` by 2D quadrature, with the full or leading-order mode.
///
/// Independent of the ladder algebra; its truncated value should equal
/// `eta^|l| <bra| (a_+-^dag + a_-+)^|l| |ket>`.
pub fn coupling_element_quadrature(
    bra: &TrapWavefunction,
    ket: &TrapWavefunction,
    mode: &LgMode,
    grid: &QuadratureGrid,
    truncated: bool,
) -> QuadratureEstimate {
    let inv = mode.amplitude().recip();
    let table = grid.tabulate(|r, phi| {
        let u = if truncated {
            mode.eval_leading(r, phi)
        } else {
            mode.eval(r, phi)
        };
        bra.eval(r, phi).conj() * u * inv * ket.eval(r, phi)
    });
    QuadratureEstimate {
        value: grid.integrate_table(&table),
        tail_estimate: grid.tail_estimate(&table),
    }
}

/// Square Cartesian sampling for CSV dumps: `points x points` over `[-extent, extent]^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartesianGrid {
    pub extent: f64,
    pub points: usize,
}

/// One row of a grid dump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSample {
    pub x: f64,
    pub y: f64,
    pub re: f64,
    pub im: f64,
    pub abs2: f64,
}

impl CartesianGrid {
    pub fn coordinates(&self) -> Vec<f64> {
        if self.points < 2 {
            return vec![0.0; self.points];
        }
        let step = 2.0 * self.extent / (self.points - 1) as f64;
        (0..self.points).map(|i| -self.extent + step * i as f64).collect()
    }

    /// Samples `f(R, Phi)` row-major (`y` outer, `x` inner).
    pub fn sample(&self, f: impl Fn(f64, f64) -> C64) -> Vec<GridSample> {
        let axis = self.coordinates();
        let mut out = Vec::with_capacity(axis.len() * axis.len());
        for &y in &axis {
            for &x in &axis {
                let z = f(x.hypot(y), y.atan2(x));
                out.push(GridSample {
                    x,
                    y,
                    re: z.re,
                    im: z.im,
                    abs2: z.norm_sqr(),
                });
            }
        }
        out
    }
}
