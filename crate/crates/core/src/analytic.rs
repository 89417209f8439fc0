//! Closed-form average error rates of the unordered V-BLAST detector:
//! per-step MRC BERs, average block error rate, average total bit error
//! rate with error propagation, and the high-SNR approximations of all
//! three.
//!
//! Step `i` of the detector sees an `(n - m + i)`-order maximum ratio
//! combining channel after nulling; all expressions below build on that
//! equivalence. Error propagation is modeled by adding the interference
//! power of past wrong decisions to the noise floor when computing the
//! effective step SNR.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::model::{PowerAllocation, SystemConfig};
use crate::special::binomial;
use crate::{Error, Result};

/// Pattern enumeration guard: at most `2^20` supports (or `3^20` signed
/// vectors are refused well before this).
pub const PATTERN_GUARD: usize = 20;

/// Step-count guard for the average TBER enumeration.
pub const TBER_MAX_STREAMS: usize = 12;

/// A demodulation-error pattern over the steps preceding some step `i`:
/// entries are `0` (correct) or `+-2` (wrong BPSK decision).
///
/// Sign-collapsed patterns carry the number of signed vectors they stand
/// for (`2^|support|`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorVector {
    entries: Vec<i8>,
    multiplicity: u64,
}

impl ErrorVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.iter().any(|e| !matches!(e, 0 | 2 | -2)) {
            return Err(Error::InvalidStrategy(alloc::format!(
                "error vector entries must be 0 or +-2, got {entries:?}"
            )));
        }
        Ok(ErrorVector { entries, multiplicity: 1 })
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    /// Indices (0-based) of the nonzero entries.
    pub fn support(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(k, &e)| (e != 0).then_some(k))
            .collect()
    }

    /// Number of signed vectors collapsed into this pattern.
    pub fn multiplicity(&self) -> u64 {
        self.multiplicity
    }

    /// Interference power `|E A|^2 = 4 sum_{k in support} alpha_k`.
    pub fn interference_power(&self, alloc: &PowerAllocation) -> f64 {
        self.entries
            .iter()
            .zip(alloc.as_slice())
            .map(|(&e, &a)| if e != 0 { 4.0 * a } else { 0.0 })
            .sum()
    }
}

/// Per-step summary inside a [`RateReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepErrorProfile {
    /// Detection step, 1-based.
    pub step: usize,
    /// Average conditional BER (no earlier errors).
    pub p_cond: f64,
    /// Average unconditional BER, propagated errors included.
    pub p_uncond: f64,
    /// Propagation multiplier `a_i`; `a_m = 1` exactly.
    pub propagation_factor: f64,
}

/// Which evaluation path produced a [`RateReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    ExactEnumeration,
    HighSnrApprox,
}

/// Average error rates of one configuration under one allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub bler: f64,
    pub tber: f64,
    pub steps: Vec<StepErrorProfile>,
    pub method: RateMethod,
}

/// Average BER of `order`-branch maximum ratio combining of BPSK in i.i.d.
/// Rayleigh fading at average branch SNR `snr`.
///
/// `snr = 0` is allowed and gives exactly 1/2.
pub fn mrc_ber_bpsk(order: usize, snr: f64) -> Result<f64> {
    if order < 1 {
        return Err(Error::StepOutOfRange { step: 0, m: 0 });
    }
    if !(snr >= 0.0) {
        return Err(Error::NonPositiveSnr(snr));
    }
    if snr == 0.0 {
        return Ok(0.5);
    }
    let mu = math::sqrt(snr / (1.0 + snr));
    // (1 - mu)/2 without cancellation: 1 - mu^2 = 1/(1+snr)
    let u = 0.5 / ((1.0 + snr) * (1.0 + mu));
    let v = (1.0 + mu) / 2.0;
    let mut sum = 0.0;
    let mut vk = 1.0;
    for k in 0..order {
        sum += binomial(order - 1 + k, k) * vk;
        vk *= v;
    }
    Ok(math::powi(u, order as i32) * sum)
}

/// Analytic derivative of [`mrc_ber_bpsk`] with respect to the SNR.
///
/// Strictly negative for `snr > 0`; diverges like `-1/sqrt(snr)` at the
/// origin.
pub(crate) fn mrc_ber_bpsk_dsnr(order: usize, snr: f64) -> f64 {
    let g = snr;
    let mu = math::sqrt(g / (1.0 + g));
    let u = 0.5 / ((1.0 + g) * (1.0 + mu));
    let v = (1.0 + mu) / 2.0;
    let l = order as i32;
    let mut s = 0.0;
    let mut sp = 0.0;
    let mut vk = 1.0; // v^k
    for k in 0..order {
        let c = binomial(order - 1 + k, k);
        s += c * vk;
        if k >= 1 {
            sp += c * (k as f64) * vk / v;
        }
        vk *= v;
    }
    let dp_dmu = -0.5 * (order as f64) * math::powi(u, l - 1) * s + 0.5 * math::powi(u, l) * sp;
    let dmu_dg = 1.0 / (2.0 * mu * (1.0 + g) * (1.0 + g));
    dp_dmu * dmu_dg
}

/// Leading high-SNR term of the MRC BER: `C(2L-1, L) / (4 snr)^L`.
pub fn mrc_ber_high_snr(order: usize, snr: f64) -> Result<f64> {
    if order < 1 {
        return Err(Error::StepOutOfRange { step: 0, m: 0 });
    }
    if !(snr > 0.0) {
        return Err(Error::NonPositiveSnr(snr));
    }
    Ok(binomial(2 * order - 1, order) / math::powi(4.0 * snr, order as i32))
}

/// Average conditional BER of detection step `i`: MRC of order `n - m + i`
/// at SNR `alpha_i * gamma0`.
pub fn avg_step_ber(config: &SystemConfig, alloc: &PowerAllocation, step: usize) -> Result<f64> {
    config.require_bpsk("per-step average BER")?;
    if step < 1 || step > config.m() {
        return Err(Error::StepOutOfRange { step, m: config.m() });
    }
    mrc_ber_bpsk(config.mrc_order(step), alloc.power(step) * config.gamma0())
}

fn check_raw(config: &SystemConfig, alpha: &[f64]) -> Result<()> {
    if alpha.len() != config.m() {
        return Err(Error::AllocationLength { len: alpha.len(), m: config.m() });
    }
    for (i, &a) in alpha.iter().enumerate() {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::NegativePower { index: i, value: a });
        }
    }
    Ok(())
}

/// BLER of a raw power vector, without the total-power check.
///
/// The optimizers and the robustness analysis evaluate derivatives off the
/// constraint surface; this is their entry point.
pub(crate) fn avg_bler_raw(config: &SystemConfig, alpha: &[f64]) -> Result<f64> {
    config.require_bpsk("average BLER")?;
    check_raw(config, alpha)?;
    let mut no_error = 1.0;
    for i in 1..=config.m() {
        no_error *= 1.0 - mrc_ber_bpsk(config.mrc_order(i), alpha[i - 1] * config.gamma0())?;
    }
    Ok(1.0 - no_error)
}

/// Average block error rate: `1 - prod_i (1 - P_ei)`.
pub fn avg_bler(config: &SystemConfig, alloc: &PowerAllocation) -> Result<f64> {
    avg_bler_raw(config, alloc.as_slice())
}

/// High-SNR BLER approximation: sum of the per-step leading terms.
///
/// Any zero step power makes a term diverge and is rejected.
pub fn avg_bler_high_snr(config: &SystemConfig, alloc: &PowerAllocation) -> Result<f64> {
    config.require_bpsk("high-SNR average BLER")?;
    let mut sum = 0.0;
    for i in 1..=config.m() {
        let a = alloc.power(i);
        if a <= 0.0 {
            return Err(Error::ZeroPower { index: i - 1 });
        }
        sum += binomial(2 * i - 1, i)
            / math::powi(4.0 * a * config.gamma0(), config.mrc_order(i) as i32);
    }
    Ok(sum)
}

/// All error patterns over the `i - 1` steps before step `i`.
///
/// `signed` enumerates the full `3^(i-1)` vectors over `{0, +2, -2}`;
/// otherwise the `2^(i-1)` sign-collapsed support patterns are returned,
/// each carrying multiplicity `2^|support|`.
pub fn enumerate_error_patterns(step: usize, signed: bool) -> Result<Vec<ErrorVector>> {
    if step < 1 {
        return Err(Error::StepOutOfRange { step, m: 0 });
    }
    let len = step - 1;
    if len > PATTERN_GUARD {
        return Err(Error::EnumerationGuard { size: len, limit: PATTERN_GUARD });
    }
    if signed {
        let total = 3usize.pow(len as u32);
        let mut out = Vec::with_capacity(total);
        for code in 0..total {
            let mut c = code;
            let mut entries = Vec::with_capacity(len);
            for _ in 0..len {
                entries.push(match c % 3 {
                    0 => 0i8,
                    1 => 2,
                    _ => -2,
                });
                c /= 3;
            }
            out.push(ErrorVector { entries, multiplicity: 1 });
        }
        Ok(out)
    } else {
        let total = 1usize << len;
        let mut out = Vec::with_capacity(total);
        for mask in 0..total {
            let entries: Vec<i8> =
                (0..len).map(|k| if mask >> k & 1 == 1 { 2 } else { 0 }).collect();
            let mult = 1u64 << (mask.count_ones() as u64);
            out.push(ErrorVector { entries, multiplicity: mult });
        }
        Ok(out)
    }
}

/// Effective SNR of step `i` given the interference power of past wrong
/// decisions: `alpha_i / (|E A|^2 + sigma0^2)`.
#[inline]
fn effective_snr(alpha_i: f64, interference: f64, sigma0_sq: f64) -> f64 {
    alpha_i / (interference + sigma0_sq)
}

fn guard_streams(config: &SystemConfig) -> Result<()> {
    if config.m() > TBER_MAX_STREAMS {
        return Err(Error::EnumerationGuard { size: config.m(), limit: TBER_MAX_STREAMS });
    }
    Ok(())
}

/// Walks the support tree once, accumulating the unconditional per-step
/// BERs. Node state: next step (0-based), accumulated interference power,
/// chain probability of the history.
fn accumulate_unconditional(
    config: &SystemConfig,
    alpha: &[f64],
    step: usize,
    interference: f64,
    weight: f64,
    p_uncond: &mut [f64],
) {
    if step == config.m() {
        return;
    }
    let g_eff = effective_snr(alpha[step], interference, config.sigma0_sq());
    let p = mrc_ber_bpsk(config.mrc_order(step + 1), g_eff).expect("order >= 1, snr >= 0");
    p_uncond[step] += weight * p;
    accumulate_unconditional(
        config,
        alpha,
        step + 1,
        interference + 4.0 * alpha[step],
        weight * p,
        p_uncond,
    );
    accumulate_unconditional(config, alpha, step + 1, interference, weight * (1.0 - p), p_uncond);
}

/// Propagation multiplier `a_i`: one plus the expected follow-on errors of
/// a first error at step `i` (1-based), chained over the continuation
/// patterns.
fn propagation_factor(
    config: &SystemConfig,
    alpha: &[f64],
    first_error_step: usize,
    sigma0_sq: f64,
) -> f64 {
    fn walk(
        config: &SystemConfig,
        alpha: &[f64],
        step: usize,
        interference: f64,
        weight: f64,
        sigma0_sq: f64,
        acc: &mut f64,
    ) {
        if step > config.m() {
            return;
        }
        let g_eff = effective_snr(alpha[step - 1], interference, sigma0_sq);
        let p = mrc_ber_bpsk(config.mrc_order(step), g_eff).expect("order >= 1, snr >= 0");
        *acc += weight * p;
        walk(config, alpha, step + 1, interference + 4.0 * alpha[step - 1], weight * p, sigma0_sq, acc);
        walk(config, alpha, step + 1, interference, weight * (1.0 - p), sigma0_sq, acc);
    }
    let mut a_i = 1.0;
    walk(
        config,
        alpha,
        first_error_step + 1,
        4.0 * alpha[first_error_step - 1],
        1.0,
        sigma0_sq,
        &mut a_i,
    );
    a_i
}

fn step_profiles(
    config: &SystemConfig,
    alpha: &[f64],
    p_uncond: &[f64],
) -> Result<Vec<StepErrorProfile>> {
    (1..=config.m())
        .map(|i| {
            Ok(StepErrorProfile {
                step: i,
                p_cond: mrc_ber_bpsk(config.mrc_order(i), alpha[i - 1] * config.gamma0())?,
                p_uncond: p_uncond[i - 1],
                propagation_factor: propagation_factor(config, alpha, i, config.sigma0_sq()),
            })
        })
        .collect()
}

/// TBER of a raw power vector, without the total-power check; see
/// [`avg_bler_raw`].
pub(crate) fn avg_tber_value_raw(config: &SystemConfig, alpha: &[f64]) -> Result<f64> {
    config.require_bpsk("average TBER")?;
    guard_streams(config)?;
    check_raw(config, alpha)?;
    let mut p_uncond = vec![0.0; config.m()];
    accumulate_unconditional(config, alpha, 0, 0.0, 1.0, &mut p_uncond);
    Ok(p_uncond.iter().sum::<f64>() / config.m() as f64)
}

/// Average total bit error rate via the unconditional-BER sum: each step's
/// BER is marginalized over all prior error patterns, then the per-step
/// rates are averaged.
///
/// Sign-collapsed patterns suffice because the effective SNR depends on
/// the interference power only.
pub fn avg_tber(config: &SystemConfig, alloc: &PowerAllocation) -> Result<RateReport> {
    config.require_bpsk("average TBER")?;
    guard_streams(config)?;
    let alpha = alloc.as_slice();
    let mut p_uncond = vec![0.0; config.m()];
    accumulate_unconditional(config, alpha, 0, 0.0, 1.0, &mut p_uncond);
    let tber = p_uncond.iter().sum::<f64>() / config.m() as f64;
    Ok(RateReport {
        bler: avg_bler(config, alloc)?,
        tber,
        steps: step_profiles(config, alpha, &p_uncond)?,
        method: RateMethod::ExactEnumeration,
    })
}

/// Average TBER through the regrouped first-error form
/// `(1/m) sum_i a_i P_ei prod_{k<i} (1 - P_ek)`.
///
/// Algebraically identical to [`avg_tber`]; kept as an independent route
/// for cross-checking.
pub fn avg_tber_grouped(config: &SystemConfig, alloc: &PowerAllocation) -> Result<RateReport> {
    config.require_bpsk("average TBER")?;
    guard_streams(config)?;
    let m = config.m();
    let alpha = alloc.as_slice();
    let mut tber = 0.0;
    let mut no_error_prefix = 1.0;
    let mut factors = Vec::with_capacity(m);
    for i in 1..=m {
        let p_ei = avg_step_ber(config, alloc, i)?;
        let a_i = propagation_factor(config, alpha, i, config.sigma0_sq());
        factors.push(a_i);
        tber += a_i * p_ei * no_error_prefix;
        no_error_prefix *= 1.0 - p_ei;
    }
    tber /= m as f64;
    let mut p_uncond = vec![0.0; m];
    accumulate_unconditional(config, alpha, 0, 0.0, 1.0, &mut p_uncond);
    let steps = (1..=m)
        .map(|i| {
            Ok(StepErrorProfile {
                step: i,
                p_cond: avg_step_ber(config, alloc, i)?,
                p_uncond: p_uncond[i - 1],
                propagation_factor: factors[i - 1],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateReport { bler: avg_bler(config, alloc)?, tber, steps, method: RateMethod::ExactEnumeration })
}

/// High-SNR propagation factor of the first step, `a1_bar`, for the
/// uniform allocation: the noise floor is dropped from the effective SNR,
/// which makes the value independent of the average SNR.
pub fn error_propagation_factor(config: &SystemConfig) -> Result<f64> {
    config.require_bpsk("error propagation factor")?;
    guard_streams(config)?;
    if config.m() == 1 {
        return Ok(1.0);
    }
    let uniform = vec![1.0; config.m()];
    Ok(propagation_factor(config, &uniform, 1, 0.0))
}

/// High-SNR TBER approximation for near-optimal allocations, where the
/// BER after a propagated error saturates at 1/2:
/// `(1/2m) sum_i (m - i + 2) C(2i-1, i) / (4 alpha_i gamma0)^(n-m+i)`.
pub fn avg_tber_high_snr(config: &SystemConfig, alloc: &PowerAllocation) -> Result<f64> {
    config.require_bpsk("high-SNR average TBER")?;
    let m = config.m();
    let mut sum = 0.0;
    for i in 1..=m {
        let a = alloc.power(i);
        if a <= 0.0 {
            return Err(Error::ZeroPower { index: i - 1 });
        }
        sum += (m - i + 2) as f64 * binomial(2 * i - 1, i)
            / math::powi(4.0 * a * config.gamma0(), config.mrc_order(i) as i32);
    }
    Ok(sum / (2.0 * m as f64))
}

/// First-order MacLaurin coefficients of the per-step BERs about zero SNR.
///
/// Coherent BPSK expands in `sqrt(alpha_i gamma0)`; noncoherent BFSK
/// expands in `alpha_i gamma0` with half the BPSK slope.
pub fn maclaurin_coeffs(config: &SystemConfig) -> Vec<f64> {
    use crate::model::Modulation;
    (1..=config.m())
        .map(|i| {
            let l = config.mrc_order(i);
            let mut s = 0.0;
            for k in 1..l {
                s += binomial(l + k - 1, k) * k as f64 / math::powi(2.0, k as i32);
            }
            let a = -(l as f64) / 2.0 + s / math::powi(2.0, l as i32);
            match config.modulation() {
                Modulation::BpskCoherent => a,
                Modulation::BfskNoncoherent => a / 2.0,
            }
        })
        .collect()
}
