//! Shared domain types: system configuration, power allocations, and SNR
//! conventions used by every other module.
//!
//! SNR is stored in linear scale internally; decibels appear only at the
//! CLI boundary. All types are immutable values and safe to share across
//! threads.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::special::{db_to_linear, linear_to_db};
use crate::{Error, Result};

/// Relative tolerance on the total-power constraint `sum(alpha) = m`.
///
/// Tight enough to catch construction bugs, loose enough for the outputs
/// of iterative optimizers.
pub const POWER_SUM_REL_TOL: f64 = 1e-9;

/// Modulation format.
///
/// Noncoherent BFSK exists solely for the low-SNR gain analysis (its
/// MacLaurin slope is half the BPSK one); every error-rate and optimizer
/// path rejects it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    BpskCoherent,
    BfskNoncoherent,
}

/// Fixed parameters of one experiment: antenna counts, average per-Tx SNR,
/// and modulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    m: usize,
    n: usize,
    gamma0: f64,
    modulation: Modulation,
}

impl SystemConfig {
    /// Builds a configuration, enforcing `n >= m >= 1` and `gamma0 > 0`.
    pub fn new(m: usize, n: usize, gamma0: f64, modulation: Modulation) -> Result<Self> {
        if m < 1 || n < m {
            return Err(Error::InvalidAntennaCounts { m, n });
        }
        if !(gamma0 > 0.0) || !gamma0.is_finite() {
            return Err(Error::NonPositiveSnr(gamma0));
        }
        Ok(SystemConfig { m, n, gamma0, modulation })
    }

    /// Coherent-BPSK configuration.
    pub fn bpsk(m: usize, n: usize, gamma0: f64) -> Result<Self> {
        Self::new(m, n, gamma0, Modulation::BpskCoherent)
    }

    /// Transmitter count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Receiver count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Average per-transmitter SNR, linear scale.
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// Per-receiver noise variance; derived so that `sigma0_sq * gamma0 = 1`
    /// holds exactly.
    pub fn sigma0_sq(&self) -> f64 {
        1.0 / self.gamma0
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    /// Diversity (MRC) order of detection step `i` (1-based): `n - m + i`.
    pub fn mrc_order(&self, step: usize) -> usize {
        self.n - self.m + step
    }

    /// Same configuration with the SNR replaced.
    pub fn with_gamma0(&self, gamma0: f64) -> Result<Self> {
        Self::new(self.m, self.n, gamma0, self.modulation)
    }

    /// Rejects noncoherent modulation for operations that only exist for
    /// coherent BPSK.
    pub(crate) fn require_bpsk(&self, op: &'static str) -> Result<()> {
        match self.modulation {
            Modulation::BpskCoherent => Ok(()),
            Modulation::BfskNoncoherent => Err(Error::UnsupportedModulation(op)),
        }
    }
}

/// A transmit power allocation `alpha = [alpha_1, ..., alpha_m]` under the
/// total power constraint `sum(alpha_i) = m` with `alpha_i >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    alpha: Vec<f64>,
}

impl PowerAllocation {
    /// Validates and wraps an allocation vector for an `m`-transmitter
    /// system.
    pub fn new(alpha: Vec<f64>, m: usize) -> Result<Self> {
        validate_allocation(&alpha, m)?;
        Ok(PowerAllocation { alpha })
    }

    /// The unoptimized allocation: every entry equal to one.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidAntennaCounts { m: 0, n: 0 });
        }
        Ok(PowerAllocation { alpha: vec![1.0; m] })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Power of stream `i` (1-based step index).
    pub fn power(&self, step: usize) -> f64 {
        self.alpha[step - 1]
    }

    /// True when `alpha_1 >= alpha_2 >= ... >= alpha_m`.
    pub fn is_ordered(&self) -> bool {
        self.alpha.windows(2).all(|w| w[0] >= w[1])
    }
}

/// The constraint check behind [`PowerAllocation::new`], usable on raw
/// slices: both the total-power sum and non-negativity must hold.
pub fn validate_allocation(alpha: &[f64], m: usize) -> Result<()> {
    if alpha.len() != m {
        return Err(Error::AllocationLength { len: alpha.len(), m });
    }
    for (i, &a) in alpha.iter().enumerate() {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::NegativePower { index: i, value: a });
        }
    }
    let sum: f64 = alpha.iter().sum();
    let expected = m as f64;
    if math::abs(sum - expected) > POWER_SUM_REL_TOL * expected {
        return Err(Error::PowerSumMismatch { sum, expected });
    }
    Ok(())
}

/// An SNR value carried in both decibel and linear form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    pub value_db: f64,
    pub value_linear: f64,
}

impl SnrPoint {
    pub fn from_db(db: f64) -> Self {
        SnrPoint { value_db: db, value_linear: db_to_linear(db) }
    }

    pub fn from_linear(linear: f64) -> Self {
        SnrPoint { value_db: linear_to_db(linear), value_linear: linear }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_allocation_all_ones() {
        for m in [1, 2, 3, 8] {
            let a = PowerAllocation::uniform(m).unwrap();
            assert_eq!(a.as_slice(), vec![1.0; m].as_slice());
            assert!(validate_allocation(a.as_slice(), m).is_ok());
        }
        assert!(PowerAllocation::uniform(0).is_err());
    }

    #[test]
    fn validate_accepts_preset_from_robustness_study() {
        assert!(validate_allocation(&[2.0, 0.6, 0.4], 3).is_ok());
    }

    #[test]
    fn validate_rejects_bad_sum_and_negative_entries() {
        match validate_allocation(&[1.5, 1.0], 2) {
            Err(Error::PowerSumMismatch { sum, expected }) => {
                assert_eq!(sum, 2.5);
                assert_eq!(expected, 2.0);
            }
            other => panic!("expected sum mismatch, got {other:?}"),
        }
        match validate_allocation(&[2.5, -0.5], 2) {
            Err(Error::NegativePower { index, value }) => {
                assert_eq!(index, 1);
                assert_eq!(value, -0.5);
            }
            other => panic!("expected negative entry, got {other:?}"),
        }
    }

    #[test]
    fn config_invariants() {
        assert!(SystemConfig::bpsk(0, 2, 1.0).is_err());
        assert!(SystemConfig::bpsk(3, 2, 1.0).is_err());
        assert!(SystemConfig::bpsk(2, 2, 0.0).is_err());
        assert!(SystemConfig::bpsk(2, 2, -3.0).is_err());
        let c = SystemConfig::bpsk(2, 4, 12.5).unwrap();
        assert_eq!(c.sigma0_sq() * c.gamma0(), 1.0);
        assert_eq!(c.mrc_order(1), 3);
        assert_eq!(c.mrc_order(2), 4);
    }

    #[test]
    fn snr_point_round_trip() {
        for &db in &[-20.0, 0.0, 3.0, 35.0] {
            let p = SnrPoint::from_db(db);
            let q = SnrPoint::from_linear(p.value_linear);
            assert!((q.value_db - db).abs() <= 1e-12 * db.abs().max(1.0));
        }
        let p = SnrPoint::from_linear(10.0);
        assert!((p.value_db - 10.0).abs() < 1e-12);
    }
}
