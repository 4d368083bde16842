//! Circular-state ladder of the atom's internal degree of freedom.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{BasisTag, OperatorMatrix, C64};

/// Levels `|m_base>, |m_base+1>, ...` connected by `Delta m = 1` transitions.
///
/// Level `k` carries internal angular momentum `(m_base + k) hbar`. Transition
/// `k` couples levels `k` and `k+1`; its gap is `transition_frequencies[k]`
/// in units of the trap frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalLadder {
    m_base: u32,
    transition_frequencies: Vec<f64>,
    dipole_scales: Option<Vec<f64>>,
}

impl InternalLadder {
    pub fn new(
        m_base: u32,
        transition_frequencies: Vec<f64>,
        dipole_scales: Option<Vec<f64>>,
    ) -> Result<Self> {
        if transition_frequencies.is_empty() {
            return Err(Error::InvalidLadder("need at least two levels".into()));
        }
        if let Some(bad) = transition_frequencies.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidLadder(format!(
                "transition frequencies must be positive, got {bad}"
            )));
        }
        if let Some(d) = &dipole_scales {
            if d.len() != transition_frequencies.len() {
                return Err(Error::InvalidLadder(format!(
                    "{} dipole scales for {} transitions",
                    d.len(),
                    transition_frequencies.len()
                )));
            }
            if let Some(bad) = d.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return Err(Error::InvalidLadder(format!(
                    "dipole scales must be positive, got {bad}"
                )));
            }
        }
        Ok(Self {
            m_base,
            transition_frequencies,
            dipole_scales,
        })
    }

    pub fn two_level(m_base: u32, gap: f64) -> Result<Self> {
        Self::new(m_base, vec![gap], None)
    }

    pub fn m_base(&self) -> u32 {
        self.m_base
    }

    pub fn level_count(&self) -> usize {
        self.transition_frequencies.len() + 1
    }

    pub fn transition_count(&self) -> usize {
        self.transition_frequencies.len()
    }

    pub fn transition_frequencies(&self) -> &[f64] {
        &self.transition_frequencies
    }

    pub fn dipole_scales(&self) -> Option<&[f64]> {
        self.dipole_scales.as_deref()
    }

    pub fn gap(&self, transition: usize) -> Result<f64> {
        self.check_transition(transition)?;
        Ok(self.transition_frequencies[transition])
    }

    /// Internal angular momentum of level `k`, units of hbar.
    pub fn level_angular_momentum(&self, level: usize) -> i64 {
        self.m_base as i64 + level as i64
    }

    /// Ratio `d_j / d_target` used to scale the Rabi frequency of transition `j`
    /// when the drive is specified on `target`. Equal scaling without metadata.
    pub fn relative_dipole(&self, transition: usize, target: usize) -> f64 {
        match &self.dipole_scales {
            Some(d) => d[transition] / d[target],
            None => 1.0,
        }
    }

    pub fn tag(&self) -> BasisTag {
        BasisTag::Internal {
            m_base: self.m_base,
            levels: self.level_count(),
        }
    }

    pub fn check_transition(&self, transition: usize) -> Result<()> {
        if transition >= self.transition_count() {
            return Err(Error::TransitionOutOfRange {
                index: transition,
                transitions: self.transition_count(),
            });
        }
        Ok(())
    }

    /// `sigma_k = |k><k+1|`.
    pub fn lowering_operator(&self, transition: usize) -> Result<OperatorMatrix> {
        self.check_transition(transition)?;
        let mut op = OperatorMatrix::zeros(self.tag());
        op.set(transition, transition + 1, C64::new(1.0, 0.0));
        Ok(op)
    }

    /// Projector onto a single level.
    pub fn projector(&self, level: usize) -> Result<OperatorMatrix> {
        if level >= self.level_count() {
            return Err(Error::InvalidArgument(format!(
                "level {level} outside ladder of {} levels",
                self.level_count()
            )));
        }
        let mut op = OperatorMatrix::zeros(self.tag());
        op.set(level, level, C64::new(1.0, 0.0));
        Ok(op)
    }

    /// `l_z / hbar = diag(m_base, m_base + 1, ...)`.
    pub fn angular_momentum(&self) -> OperatorMatrix {
        OperatorMatrix::from_diagonal(
            self.tag(),
            (0..self.level_count()).map(|k| self.level_angular_momentum(k) as f64),
        )
        .expect("diagonal fits")
    }

    /// Checks `rabi == 2 d field_amplitude / hbar` for the given transition,
    /// relative tolerance 1e-12, with `hbar = 1`.
    pub fn dipole_consistency(
        &self,
        transition: usize,
        field_amplitude: f64,
        rabi: f64,
    ) -> Result<bool> {
        self.check_transition(transition)?;
        let d = self
            .dipole_scales
            .as_ref()
            .ok_or(Error::MissingDipoleMetadata)?[transition];
        let expected = 2.0 * d * field_amplitude;
        Ok((rabi - expected).abs() <= 1e-12 * expected.abs().max(rabi.abs()))
    }
}
