//! Truncated 2D isotropic oscillator in the circular-quanta basis.
//!
//! Labels `(n_plus, n_minus)` count right and left circular quanta; the
//! energy quantum number is `N = n_plus + n_minus` and the angular momentum
//! is `M = n_plus - n_minus` (units of hbar). The basis keeps every label
//! with `N <= n_max`, ordered by ascending `N` and then ascending `n_plus`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::operator::{trap_dim, BasisTag, OperatorMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockLabel {
    pub n_plus: u32,
    pub n_minus: u32,
}

impl FockLabel {
    pub const VACUUM: FockLabel = FockLabel {
        n_plus: 0,
        n_minus: 0,
    };

    pub fn new(n_plus: u32, n_minus: u32) -> Self {
        Self { n_plus, n_minus }
    }

    /// Label with energy quantum number `n` and angular momentum `m`, if valid.
    pub fn from_nm(n: u32, m: i32) -> Option<Self> {
        if m.unsigned_abs() > n || (n as i64 - m as i64) % 2 != 0 {
            return None;
        }
        let n_plus = ((n as i64 + m as i64) / 2) as u32;
        Some(Self::new(n_plus, n - n_plus))
    }

    pub fn total(&self) -> u32 {
        self.n_plus + self.n_minus
    }

    pub fn angular(&self) -> i32 {
        self.n_plus as i32 - self.n_minus as i32
    }
}

impl fmt::Display for FockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n_plus, self.n_minus)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockBasis {
    n_max: usize,
    labels: Vec<FockLabel>,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Self {
        let mut labels = Vec::with_capacity(trap_dim(n_max));
        for total in 0..=n_max as u32 {
            for n_plus in 0..=total {
                labels.push(FockLabel::new(n_plus, total - n_plus));
            }
        }
        Self { n_max, labels }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[FockLabel] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> FockLabel {
        self.labels[index]
    }

    pub fn index_of(&self, label: FockLabel) -> Option<usize> {
        let total = label.total() as usize;
        (total <= self.n_max).then(|| total * (total + 1) / 2 + label.n_plus as usize)
    }

    pub fn tag(&self) -> BasisTag {
        BasisTag::Trap { n_max: self.n_max }
    }

    fn ladder(&self, lower: impl Fn(FockLabel) -> Option<(FockLabel, u32)>) -> OperatorMatrix {
        let mut op = OperatorMatrix::zeros(self.tag());
        for (col, &label) in self.labels.iter().enumerate() {
            if let Some((target, quanta)) = lower(label) {
                if let Some(row) = self.index_of(target) {
                    op.set(row, col, C64::from((quanta as f64).sqrt()));
                }
            }
        }
        op
    }

    /// `a_+`: removes one right-circular quantum, amplitude `sqrt(n_plus)`.
    pub fn annihilate_plus(&self) -> OperatorMatrix {
        self.ladder(|l| (l.n_plus > 0).then(|| (FockLabel::new(l.n_plus - 1, l.n_minus), l.n_plus)))
    }

    /// `a_-`: removes one left-circular quantum, amplitude `sqrt(n_minus)`.
    pub fn annihilate_minus(&self) -> OperatorMatrix {
        self.ladder(|l| (l.n_minus > 0).then(|| (FockLabel::new(l.n_plus, l.n_minus - 1), l.n_minus)))
    }

    pub fn create_plus(&self) -> OperatorMatrix {
        self.annihilate_plus().adjoint()
    }

    pub fn create_minus(&self) -> OperatorMatrix {
        self.annihilate_minus().adjoint()
    }

    /// Cartesian annihilators `a_X = (a_+ + a_-)/sqrt2`, `a_Y = i(a_+ - a_-)/sqrt2`.
    pub fn cartesian_ladder(&self, axis: Axis) -> OperatorMatrix {
        let plus = self.annihilate_plus();
        let minus = self.annihilate_minus();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (sum, factor) = match axis {
            Axis::X => (plus.plus(&minus), C64::new(s, 0.0)),
            Axis::Y => (plus.minus(&minus), C64::new(0.0, s)),
        };
        sum.expect("same basis").scale(factor)
    }

    /// Diagonal `n_plus` and `n_minus` number operators.
    pub fn number_operators(&self) -> (OperatorMatrix, OperatorMatrix) {
        let plus = OperatorMatrix::from_diagonal(self.tag(), self.labels.iter().map(|l| l.n_plus as f64));
        let minus = OperatorMatrix::from_diagonal(self.tag(), self.labels.iter().map(|l| l.n_minus as f64));
        (plus.expect("diagonal fits"), minus.expect("diagonal fits"))
    }

    pub fn total_number(&self) -> OperatorMatrix {
        OperatorMatrix::from_diagonal(self.tag(), self.labels.iter().map(|l| l.total() as f64))
            .expect("diagonal fits")
    }

    /// `H_CM / (hbar nu) = n_plus + n_minus + 1`.
    pub fn hamiltonian_cm(&self) -> OperatorMatrix {
        OperatorMatrix::from_diagonal(self.tag(), self.labels.iter().map(|l| l.total() as f64 + 1.0))
            .expect("diagonal fits")
    }

    /// `L_Z / hbar = n_plus - n_minus`.
    pub fn angular_momentum(&self) -> OperatorMatrix {
        OperatorMatrix::from_diagonal(self.tag(), self.labels.iter().map(|l| l.angular() as f64))
            .expect("diagonal fits")
    }

    /// `(a_+^dag + a_-)^|l|` for `l > 0`, `(a_-^dag + a_+)^|l|` for `l < 0`,
    /// identity for `l = 0`. This is `((X +- iY)/R_0)^|l|` on the truncated space.
    pub fn position_power(&self, l: i32) -> OperatorMatrix {
        let step = if l >= 0 {
            self.create_plus().plus(&self.annihilate_minus())
        } else {
            self.create_minus().plus(&self.annihilate_plus())
        };
        step.expect("same basis").pow(l.unsigned_abs())
    }

    /// Resonant sideband monomial `a_-^|l|` for `l > 0`, `a_+^|l|` for `l < 0`.
    pub fn sideband_lowering(&self, l: i32) -> OperatorMatrix {
        if l >= 0 {
            self.annihilate_minus().pow(l as u32)
        } else {
            self.annihilate_plus().pow(l.unsigned_abs())
        }
    }

    /// Raising partner of [`FockBasis::sideband_lowering`]: `a_+^dag` for `l > 0`, `a_-^dag` for `l < 0`.
    pub fn sideband_raising_unit(&self, l: i32) -> OperatorMatrix {
        if l >= 0 {
            self.create_plus()
        } else {
            self.create_minus()
        }
    }

    /// Unit lowering factor `a_-` for `l > 0`, `a_+` for `l < 0`.
    pub fn sideband_lowering_unit(&self, l: i32) -> OperatorMatrix {
        if l >= 0 {
            self.annihilate_minus()
        } else {
            self.annihilate_plus()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

pub fn basis_vector(basis: &FockBasis, label: FockLabel) -> Option<nalgebra::DVector<Complex64>> {
    let index = basis.index_of(label)?;
    let mut v = nalgebra::DVector::zeros(basis.len());
    v[index] = C64::new(1.0, 0.0);
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn basis_sizes_and_degeneracy() {
        let b0 = FockBasis::new(0);
        assert_eq!(b0.len(), 1);
        assert_eq!(b0.label(0), FockLabel::VACUUM);
        assert_eq!(FockBasis::new(2).len(), 6);
        let b1 = FockBasis::new(1);
        let sector: Vec<_> = b1.labels().iter().filter(|l| l.total() == 1).collect();
        assert_eq!(sector.len(), 2);
        let mut ms: Vec<i32> = sector.iter().map(|l| l.angular()).collect();
        ms.sort();
        assert_eq!(ms, vec![-1, 1]);
        let b7 = FockBasis::new(7);
        for n in 0..=7u32 {
            assert_eq!(b7.labels().iter().filter(|l| l.total() == n).count(), n as usize + 1);
        }
    }

    #[test]
    fn ordering_is_ascending_total_then_n_plus() {
        let b = FockBasis::new(4);
        for w in b.labels().windows(2) {
            let (a, z) = (w[0], w[1]);
            assert!(a.total() < z.total() || (a.total() == z.total() && a.n_plus < z.n_plus));
        }
    }

    #[test]
    fn ladder_on_vacuum() {
        let b = FockBasis::new(3);
        let vac = basis_vector(&b, FockLabel::VACUUM).unwrap();
        let ap = b.annihilate_plus();
        assert!(ap.apply(&vac).unwrap().iter().all(|z| z.norm() == 0.0));
        let one = b.create_plus().apply(&vac).unwrap();
        assert_eq!(one[b.index_of(FockLabel::new(1, 0)).unwrap()], c(1.0));
        assert!((one.norm() - 1.0).abs() < 1e-15);
        let two = b.create_plus().apply(&one).unwrap();
        let idx = b.index_of(FockLabel::new(2, 0)).unwrap();
        assert!((two[idx] - c(2f64.sqrt())).norm() < 1e-15);
        assert!((two.norm() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn raising_twice_matches_explicit_small_matrix_product() {
        // 1D ladder restricted to the n_minus = 0 column: a^dag has sqrt(1), sqrt(2) below the diagonal.
        let b = FockBasis::new(2);
        let ad2 = b.create_plus().pow(2);
        let explicit = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2f64.sqrt(), 0.0]];
        let mut product = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    product[i][j] += explicit[i][k] * explicit[k][j];
                }
            }
        }
        let labels = [FockLabel::new(0, 0), FockLabel::new(1, 0), FockLabel::new(2, 0)];
        for (i, li) in labels.iter().enumerate() {
            for (j, lj) in labels.iter().enumerate() {
                let got = ad2.get(b.index_of(*li).unwrap(), b.index_of(*lj).unwrap());
                assert!((got - c(product[i][j])).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cartesian_canonical_commutator_on_interior() {
        let b = FockBasis::new(5);
        for axis in [Axis::X, Axis::Y] {
            let a = b.cartesian_ladder(axis);
            let comm = a.commutator(&a.adjoint()).unwrap();
            for (i, li) in b.labels().iter().enumerate() {
                if li.total() as usize >= b.n_max() {
                    continue;
                }
                for j in 0..b.len() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((comm.get(i, j) - c(expected)).norm() < 1e-14, "{axis:?} {i} {j}");
                }
            }
        }
        let ax = b.cartesian_ladder(Axis::X);
        let vac = basis_vector(&b, FockLabel::VACUUM).unwrap();
        assert!(ax.apply(&vac).unwrap().norm() == 0.0);
    }

    #[test]
    fn circular_operators_reconstruct_from_cartesian() {
        let b = FockBasis::new(4);
        let ax = b.cartesian_ladder(Axis::X);
        let ay = b.cartesian_ladder(Axis::Y);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = C64::new(0.0, 1.0);
        let plus = ax.minus(&ay.scale(i)).unwrap().scale(c(s));
        let minus = ax.plus(&ay.scale(i)).unwrap().scale(c(s));
        assert!(plus.minus(&b.annihilate_plus()).unwrap().max_abs() < 1e-15);
        assert!(minus.minus(&b.annihilate_minus()).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn number_energy_and_angular_momentum() {
        let b = FockBasis::new(3);
        let (np, nm) = b.number_operators();
        let h = b.hamiltonian_cm();
        let lz = b.angular_momentum();
        let at = |l: FockLabel| b.index_of(l).unwrap();
        let vac = at(FockLabel::VACUUM);
        assert_eq!((np.get(vac, vac), nm.get(vac, vac)), (c(0.0), c(0.0)));
        assert_eq!(h.get(vac, vac), c(1.0));
        assert_eq!(lz.get(vac, vac), c(0.0));
        let s10 = at(FockLabel::new(1, 0));
        assert_eq!(h.get(s10, s10), c(2.0));
        assert_eq!(lz.get(s10, s10), c(1.0));
        let s21 = at(FockLabel::new(2, 1));
        assert_eq!((np.get(s21, s21), nm.get(s21, s21)), (c(2.0), c(1.0)));
        let s12 = at(FockLabel::new(1, 2));
        assert_eq!(lz.get(s12, s12), c(-1.0));
        assert_eq!(h.commutator(&lz).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn distinct_modes_commute_exactly() {
        let b = FockBasis::new(5);
        let ap = b.annihilate_plus();
        let am = b.annihilate_minus();
        assert_eq!(ap.commutator(&am).unwrap().max_abs(), 0.0);
        // [a_+, a_-^dag] only fails on the N = n_max edge, where a_-^dag is cut off.
        let mixed = ap.commutator(&am.adjoint()).unwrap();
        for (col, label) in b.labels().iter().enumerate() {
            for row in 0..b.len() {
                if (label.total() as usize) < b.n_max() {
                    assert_eq!(mixed.get(row, col), c(0.0));
                }
            }
        }
    }

    #[test]
    fn ladder_grading() {
        // a_+ lowers M by one, a_- raises it; both lower N by one.
        let b = FockBasis::new(4);
        for (op, dm) in [(b.annihilate_plus(), -1), (b.annihilate_minus(), 1)] {
            for (row, col, _, _) in op.sparse_entries() {
                let (to, from) = (b.label(row), b.label(col));
                assert_eq!(to.total() + 1, from.total());
                assert_eq!(to.angular() - from.angular(), dm);
            }
        }
    }

    #[test]
    fn from_nm_validates_parity() {
        assert_eq!(FockLabel::from_nm(1, 1), Some(FockLabel::new(1, 0)));
        assert_eq!(FockLabel::from_nm(1, -1), Some(FockLabel::new(0, 1)));
        assert_eq!(FockLabel::from_nm(2, 1), None);
        assert_eq!(FockLabel::from_nm(1, 3), None);
    }

    proptest! {
        #[test]
        fn index_round_trip(n_max in 0usize..25) {
            let b = FockBasis::new(n_max);
            prop_assert_eq!(b.len(), (n_max + 1) * (n_max + 2) / 2);
            for i in 0..b.len() {
                let l = b.label(i);
                prop_assert!(l.angular().unsigned_abs() <= l.total());
                prop_assert_eq!((l.total() as i32 - l.angular()) % 2, 0);
                prop_assert_eq!(b.index_of(l), Some(i));
            }
        }
    }
}
