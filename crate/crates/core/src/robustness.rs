//! Sensitivity of the optimized error rates to perturbations in the total
//! and per-transmitter powers: the local measure `delta' = lambda u / P`,
//! its finite-difference counterpart, the global convexity bounds, and
//! pre-set allocation evaluation.

use alloc::vec::Vec;

use crate::allocator::{numerical_allocation, numerical_allocation_with_total, Criterion};
use crate::analytic::{avg_bler, avg_bler_raw, avg_tber, avg_tber_value_raw};
use crate::math;
use crate::model::{PowerAllocation, SystemConfig};
use crate::{Error, Result};

/// Which system parameter is perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    /// The total transmit power `u = sum(alpha_i) = m`.
    TotalPower,
    /// The power of one stream (1-based); perturbing it deliberately
    /// breaks the sum constraint, which is how the per-coefficient
    /// derivative is defined.
    Stream(usize),
}

/// Relative perturbation sizes used by the standard reports: the small
/// ones probe the convergence of the finite measure to the local one, the
/// large ones exercise the global bounds.
pub const PERTURBATION_GRID: [f64; 5] = [1e-4, 1e-2, 0.1, 0.3, 0.5];

/// Outcome of one global-bound check at a (not necessarily small)
/// total-power perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub du_rel: f64,
    pub delta_u: f64,
    /// Optimized error-rate change `P(u + du) - P(u)`.
    pub delta_p: f64,
    /// Slack of the convexity inequality: `delta_p + lambda * delta_u`,
    /// nonnegative when the bound holds (zero at `du = 0`).
    pub slack: f64,
    pub holds: bool,
    /// The equivalent normalized (sign-split) form of the same bound.
    pub normalized_holds: bool,
}

/// Aggregated sensitivity report for one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    pub parameter: Parameter,
    pub criterion: Criterion,
    pub delta_prime: f64,
    pub lambda: f64,
    pub error_rate: f64,
    /// `(du_rel, delta)` pairs over the perturbation grid; entries whose
    /// perturbation would be infeasible are skipped.
    pub finite: Vec<(f64, f64)>,
    /// Global bound checks (total-power, BLER criterion only).
    pub bounds: Vec<BoundCheck>,
}

fn optimum(config: &SystemConfig, criterion: Criterion) -> Result<(PowerAllocation, f64, f64)> {
    let sol = numerical_allocation(config, criterion)?;
    Ok((sol.alloc, sol.lambda, sol.objective))
}

/// Local robustness `delta' = lambda u / P` at the optimum of the chosen
/// criterion.
pub fn local_robustness(
    config: &SystemConfig,
    criterion: Criterion,
    parameter: Parameter,
) -> Result<f64> {
    let (alloc, lambda, p_bar) = optimum(config, criterion)?;
    if p_bar <= 0.0 {
        return Err(Error::NonPositiveSnr(p_bar));
    }
    let u = match parameter {
        Parameter::TotalPower => config.m() as f64,
        Parameter::Stream(i) => {
            if i < 1 || i > config.m() {
                return Err(Error::StepOutOfRange { step: i, m: config.m() });
            }
            alloc.power(i)
        }
    };
    Ok(lambda * u / p_bar)
}

fn perturbed_total_optimum(config: &SystemConfig, criterion: Criterion, total: f64) -> Result<f64> {
    match criterion {
        Criterion::AvgBler => Ok(numerical_allocation_with_total(config, total)?.objective),
        Criterion::AvgTber => {
            // allocating `total` at gamma0 is the m-budget problem at
            // gamma0 * total / m, for the TBER as well
            let scaled = config.with_gamma0(config.gamma0() * total / config.m() as f64)?;
            Ok(numerical_allocation(&scaled, criterion)?.objective)
        }
    }
}

/// Finite-difference robustness `|dP/P| / |du/u|` at relative perturbation
/// `du_rel`.
///
/// Total-power perturbations re-optimize under the new budget; stream
/// perturbations hold the other coefficients fixed.
pub fn finite_robustness(
    config: &SystemConfig,
    criterion: Criterion,
    parameter: Parameter,
    du_rel: f64,
) -> Result<f64> {
    if du_rel == 0.0 {
        return Err(Error::InvalidPerturbation(alloc::format!(
            "perturbation must be nonzero"
        )));
    }
    let (alloc, _lambda, p_bar) = optimum(config, criterion)?;
    let perturbed = match parameter {
        Parameter::TotalPower => {
            let total = config.m() as f64 * (1.0 + du_rel);
            if total <= 0.0 {
                return Err(Error::InvalidPerturbation(alloc::format!(
                    "total power {total} not positive"
                )));
            }
            perturbed_total_optimum(config, criterion, total)?
        }
        Parameter::Stream(i) => {
            if i < 1 || i > config.m() {
                return Err(Error::StepOutOfRange { step: i, m: config.m() });
            }
            let mut alpha = alloc.as_slice().to_vec();
            alpha[i - 1] *= 1.0 + du_rel;
            if alpha[i - 1] < 0.0 {
                return Err(Error::InvalidPerturbation(alloc::format!(
                    "stream {i} power would be {}",
                    alpha[i - 1]
                )));
            }
            match criterion {
                Criterion::AvgBler => avg_bler_raw(config, &alpha)?,
                Criterion::AvgTber => avg_tber_value_raw(config, &alpha)?,
            }
        }
    };
    Ok(math::abs((perturbed - p_bar) / p_bar) / math::abs(du_rel))
}

/// Convexity bounds on the optimized BLER under total-power changes:
/// `P(u + du) - P(u) >= -lambda du`, with equality at `du = 0`, plus the
/// equivalent normalized form.
pub fn global_bound_check(config: &SystemConfig, du_rels: &[f64]) -> Result<Vec<BoundCheck>> {
    let base = numerical_allocation(config, Criterion::AvgBler)?;
    let u = config.m() as f64;
    let delta_prime = base.lambda * u / base.objective;
    let mut out = Vec::with_capacity(du_rels.len());
    for &du_rel in du_rels {
        let delta_u = du_rel * u;
        let delta_p = if du_rel == 0.0 {
            0.0
        } else {
            let total = u + delta_u;
            if total <= 0.0 {
                return Err(Error::InvalidPerturbation(alloc::format!(
                    "total power {total} not positive"
                )));
            }
            perturbed_total_optimum(config, Criterion::AvgBler, total)? - base.objective
        };
        let slack = delta_p + base.lambda * delta_u;
        let ratio = (delta_p / base.objective) / (delta_u / u);
        let normalized_holds = if du_rel == 0.0 {
            true
        } else if du_rel > 0.0 {
            math::abs(delta_p / base.objective) / (delta_u / u) <= delta_prime + 1e-9
        } else {
            (delta_p / base.objective) / math::abs(delta_u / u) >= delta_prime - 1e-9
        };
        let _ = ratio;
        out.push(BoundCheck {
            du_rel,
            delta_u,
            delta_p,
            slack,
            holds: slack >= -1e-12 * base.objective.max(base.lambda * math::abs(delta_u)),
            normalized_holds,
        });
    }
    Ok(out)
}

/// Full sensitivity report for one parameter over the perturbation grid.
pub fn robustness_report(
    config: &SystemConfig,
    criterion: Criterion,
    parameter: Parameter,
    du_rels: &[f64],
) -> Result<RobustnessReport> {
    let (_, lambda, p_bar) = optimum(config, criterion)?;
    let delta_prime = local_robustness(config, criterion, parameter)?;
    let mut finite = Vec::new();
    for &du in du_rels {
        if du == 0.0 {
            continue;
        }
        match finite_robustness(config, criterion, parameter, du) {
            Ok(d) => finite.push((du, d)),
            Err(Error::InvalidPerturbation(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let bounds = if parameter == Parameter::TotalPower && criterion == Criterion::AvgBler {
        let signed: Vec<f64> = du_rels.iter().flat_map(|&d| [d, -d]).collect();
        global_bound_check(config, &signed)?
    } else {
        Vec::new()
    };
    Ok(RobustnessReport {
        parameter,
        criterion,
        delta_prime,
        lambda,
        error_rate: p_bar,
        finite,
        bounds,
    })
}

/// One grid point of a pre-set allocation study: the fixed vector's rates
/// against the per-SNR optimized ones.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetPoint {
    pub gamma0: f64,
    pub preset_bler: f64,
    pub preset_tber: f64,
    pub optimized_bler: f64,
    pub optimized_tber: f64,
    pub bler_ratio: f64,
    pub tber_ratio: f64,
}

/// Evaluates a fixed allocation across an SNR grid next to the per-point
/// optimized curves.
pub fn preset_allocation_eval(
    m: usize,
    n: usize,
    gamma0_grid: &[f64],
    preset: &PowerAllocation,
) -> Result<Vec<PresetPoint>> {
    if preset.len() != m {
        return Err(Error::AllocationLength { len: preset.len(), m });
    }
    let mut out = Vec::with_capacity(gamma0_grid.len());
    for &g0 in gamma0_grid {
        let config = SystemConfig::bpsk(m, n, g0)?;
        let preset_bler = avg_bler(&config, preset)?;
        let preset_tber = avg_tber(&config, preset)?.tber;
        let optimized_bler = numerical_allocation(&config, Criterion::AvgBler)?.objective;
        let optimized_tber = numerical_allocation(&config, Criterion::AvgTber)?.objective;
        out.push(PresetPoint {
            gamma0: g0,
            preset_bler,
            preset_tber,
            optimized_bler,
            optimized_tber,
            bler_ratio: preset_bler / optimized_bler,
            tber_ratio: preset_tber / optimized_tber,
        });
    }
    Ok(out)
}
