use alloc::string::String;
use core::fmt;

/// Errors reported by the analysis, optimization, and simulation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Antenna counts must satisfy `n >= m >= 1`.
    InvalidAntennaCounts { m: usize, n: usize },
    /// Average SNR must be strictly positive (linear scale).
    NonPositiveSnr(f64),
    /// Power allocation does not sum to the transmitter count.
    PowerSumMismatch { sum: f64, expected: f64 },
    /// Power allocation has a negative entry.
    NegativePower { index: usize, value: f64 },
    /// Allocation length does not match the transmitter count.
    AllocationLength { len: usize, m: usize },
    /// Step power is zero where a positive value is required.
    ZeroPower { index: usize },
    /// Step index out of `1..=m`.
    StepOutOfRange { step: usize, m: usize },
    /// The operation is not defined for this modulation.
    UnsupportedModulation(&'static str),
    /// Combinatorial enumeration guard exceeded.
    EnumerationGuard { size: usize, limit: usize },
    /// The simplified high-SNR allocation produced a non-positive first
    /// coefficient; the SNR is too low for that form.
    SnrTooLowForSimplifiedForm { alpha1: f64 },
    /// Channel matrix is rank deficient.
    RankDeficient,
    /// Iterative solver did not converge.
    NonConvergence { residual: f64, iterations: usize },
    /// Root bracketing failed: the target lies outside the bracket.
    BracketFailure { target: f64, lo: f64, hi: f64 },
    /// Monte Carlo noise exceeds the requested resolution; raise the budget.
    McNoiseTooLarge { half_width: f64, needed: f64 },
    /// Trial count must be at least one.
    ZeroTrials,
    /// Perturbation would drive a power negative.
    InvalidPerturbation(String),
    /// Invalid strategy or preset description.
    InvalidStrategy(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidAntennaCounts { m, n } => {
                write!(f, "invalid antenna counts: need n >= m >= 1, got m={m}, n={n}")
            }
            Error::NonPositiveSnr(g) => write!(f, "average SNR must be > 0, got {g}"),
            Error::PowerSumMismatch { sum, expected } => write!(
                f,
                "allocation sum {sum} differs from required total {expected} by {}",
                sum - expected
            ),
            Error::NegativePower { index, value } => {
                write!(f, "allocation entry {index} is negative: {value}")
            }
            Error::AllocationLength { len, m } => {
                write!(f, "allocation has {len} entries, expected m={m}")
            }
            Error::ZeroPower { index } => {
                write!(f, "allocation entry {index} is zero; a positive power is required here")
            }
            Error::StepOutOfRange { step, m } => {
                write!(f, "step {step} outside 1..={m}")
            }
            Error::UnsupportedModulation(op) => {
                write!(f, "{op} is only defined for coherent BPSK")
            }
            Error::EnumerationGuard { size, limit } => {
                write!(f, "pattern enumeration size {size} exceeds guard {limit}")
            }
            Error::SnrTooLowForSimplifiedForm { alpha1 } => {
                write!(f, "SNR too low for simplified form: first coefficient {alpha1} <= 0")
            }
            Error::RankDeficient => write!(f, "channel matrix is rank deficient"),
            Error::NonConvergence { residual, iterations } => {
                write!(f, "no convergence after {iterations} iterations (residual {residual:e})")
            }
            Error::BracketFailure { target, lo, hi } => {
                write!(f, "target {target:e} is not bracketed by [{lo:e}, {hi:e}]")
            }
            Error::McNoiseTooLarge { half_width, needed } => write!(
                f,
                "Monte Carlo confidence half-width {half_width:e} exceeds required \
                 resolution {needed:e}; increase the trial budget"
            ),
            Error::ZeroTrials => write!(f, "trial count must be at least 1"),
            Error::InvalidPerturbation(msg) => write!(f, "invalid perturbation: {msg}"),
            Error::InvalidStrategy(msg) => write!(f, "invalid strategy: {msg}"),
        }
    }
}

#[cfg(test)]
impl std::error::Error for Error {}
