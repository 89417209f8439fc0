//! Optimum transmit power allocation under the total power constraint
//! `sum(alpha_i) = m`, for the average BLER and average TBER criteria:
//! closed-form high-SNR solutions, exact numerical optimizers, and the
//! low-SNR boundary solutions.

use alloc::vec;
use alloc::vec::Vec;

use crate::analytic::{
    avg_bler, avg_tber, avg_tber_value_raw, maclaurin_coeffs, mrc_ber_bpsk, mrc_ber_bpsk_dsnr,
};
use crate::math;
use crate::model::{Modulation, PowerAllocation, SystemConfig};
use crate::special::binomial;
use crate::{Error, Result};

/// Optimization criterion: which average error rate is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    AvgBler,
    AvgTber,
}

/// Which solver produced an [`AllocationSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocMethod {
    /// Newton-corrected high-SNR closed form with renormalization.
    ClosedForm,
    /// Leading-order closed form; the first coefficient absorbs the rest.
    Simplified,
    /// Exact numerical optimizer.
    Numerical,
    /// Boundary/interior solution of the zero-SNR expansion.
    LowSnr,
}

/// Coefficients of the closed-form allocation: `alpha_i ~ b_i /
/// (4 gamma0)^((i-1)/(n-m+i+1))` with Newton correction exponents `c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocCoefficients {
    pub criterion: Criterion,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// An allocation together with the criterion, solver, Lagrange multiplier,
/// and objective value that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSolution {
    pub alloc: PowerAllocation,
    pub lambda: f64,
    pub criterion: Criterion,
    pub method: AllocMethod,
    pub objective: f64,
    /// Stationarity residual of the numerical paths; zero for the closed
    /// forms.
    pub kkt_residual: f64,
    /// Set when the closed form fell back to the simplified form because
    /// the Newton correction factor went non-positive.
    pub fell_back: bool,
}

/// Lower bound kept on every power during numerical searches; the
/// high-SNR objective diverges at zero.
const ALPHA_FLOOR: f64 = 1e-12;

/// The `b_i`, `c_i` coefficient tables for a given antenna pair and
/// criterion. `b_1 = m` for both criteria.
pub fn alloc_coefficients(m: usize, n: usize, criterion: Criterion) -> Result<AllocCoefficients> {
    if m < 1 || n < m {
        return Err(Error::InvalidAntennaCounts { m, n });
    }
    let nm = n - m;
    let mf = m as f64;
    let b = (1..=m)
        .map(|i| {
            if i == 1 {
                // the radical collapses to m^((n-m+2)/(n-m+2)) exactly
                return mf;
            }
            let root = (nm + i + 1) as f64;
            let common = (nm + i) as f64 * math::powi(mf, nm as i32 + 2) * binomial(2 * i - 1, i)
                / (nm + 1) as f64;
            match criterion {
                Criterion::AvgBler => math::powf(common, 1.0 / root),
                Criterion::AvgTber => {
                    math::powf(common * (m - i + 2) as f64 / (m + 1) as f64, 1.0 / root)
                }
            }
        })
        .collect();
    // c_i = (n+1)! / ((n-m+1)! (n-m+i+1))
    let mut rising = 1.0;
    for k in (nm + 2)..=(n + 1) {
        rising *= k as f64;
    }
    let c = (1..=m).map(|i| rising / (nm + i + 1) as f64).collect();
    Ok(AllocCoefficients { criterion, b, c })
}

fn renormalize(mut alpha: Vec<f64>, m: usize) -> Result<PowerAllocation> {
    let sum: f64 = alpha.iter().sum();
    for a in &mut alpha {
        *a *= m as f64 / sum;
    }
    PowerAllocation::new(alpha, m)
}

fn objective(config: &SystemConfig, alloc: &PowerAllocation, criterion: Criterion) -> Result<f64> {
    match criterion {
        Criterion::AvgBler => avg_bler(config, alloc),
        Criterion::AvgTber => Ok(avg_tber(config, alloc)?.tber),
    }
}

/// High-SNR Lagrange multiplier of the BLER-based optimization:
/// `(n-m+1) / (m^(n-m+2) (4 gamma0)^(n-m+1))`.
pub fn lagrange_high_snr(config: &SystemConfig) -> f64 {
    let nm = (config.n() - config.m()) as i32;
    let mf = config.m() as f64;
    (nm as f64 + 1.0)
        / (math::powi(mf, nm + 2) * math::powi(4.0 * config.gamma0(), nm + 1))
}

/// Newton-corrected closed-form allocation with renormalization onto the
/// power constraint. Falls back to [`simplified_allocation`] (flagged)
/// when the correction factor is non-positive.
pub fn closed_form_allocation(
    config: &SystemConfig,
    criterion: Criterion,
) -> Result<AllocationSolution> {
    config.require_bpsk("closed-form allocation")?;
    let m = config.m();
    let nm = config.n() - m;
    let coef = alloc_coefficients(m, config.n(), criterion)?;
    let g4 = 4.0 * config.gamma0();
    let correction = if m >= 2 {
        1.0 - coef.b[1] / (m as f64 * coef.c[0] * math::powf(g4, 1.0 / (nm + 3) as f64))
    } else {
        1.0
    };
    if correction <= 0.0 {
        let mut sol = simplified_allocation(config, criterion)?;
        sol.fell_back = true;
        return Ok(sol);
    }
    let alpha: Vec<f64> = (1..=m)
        .map(|i| {
            coef.b[i - 1]
                * math::powf(g4, (1.0 - i as f64) / (nm + i + 1) as f64)
                * math::powf(correction, coef.c[i - 1])
        })
        .collect();
    let alloc = renormalize(alpha, m)?;
    // multiplier from the same Newton step: leading term times the
    // correction raised to -(n-m+2) c_1
    let a1 = math::powf((nm + 1) as f64, 1.0 / (nm + 2) as f64);
    let lambda_lead = math::powi(a1 / m as f64, nm as i32 + 2) / math::powi(g4, nm as i32 + 1);
    let lambda_bler = lambda_lead * math::powf(correction, -((nm + 2) as f64) * coef.c[0]);
    let lambda = match criterion {
        Criterion::AvgBler => lambda_bler,
        // the TBER objective carries the (m-i+2)/(2m) weights; its leading
        // multiplier is (m+1)/(2m) times the BLER one
        Criterion::AvgTber => lambda_bler * (m + 1) as f64 / (2.0 * m as f64),
    };
    Ok(AllocationSolution {
        objective: objective(config, &alloc, criterion)?,
        alloc,
        lambda,
        criterion,
        method: AllocMethod::ClosedForm,
        kkt_residual: 0.0,
        fell_back: false,
    })
}

/// Leading-order closed form: `alpha_i = b_i / (4 gamma0)^((i-1)/(n-m+i+1))`
/// for `i >= 2`, with `alpha_1` absorbing the remainder of the budget.
///
/// Errors when the SNR is too low for `alpha_1` to stay positive.
pub fn simplified_allocation(
    config: &SystemConfig,
    criterion: Criterion,
) -> Result<AllocationSolution> {
    config.require_bpsk("simplified allocation")?;
    let m = config.m();
    let nm = config.n() - m;
    let coef = alloc_coefficients(m, config.n(), criterion)?;
    let g4 = 4.0 * config.gamma0();
    let mut alpha = vec![0.0; m];
    for i in 2..=m {
        alpha[i - 1] = coef.b[i - 1] * math::powf(g4, -((i - 1) as f64) / (nm + i + 1) as f64);
    }
    let rest: f64 = alpha[1..].iter().sum();
    let alpha1 = m as f64 - rest;
    if alpha1 <= 0.0 {
        return Err(Error::SnrTooLowForSimplifiedForm { alpha1 });
    }
    alpha[0] = alpha1;
    let alloc = PowerAllocation::new(alpha, m)?;
    let lambda = match criterion {
        Criterion::AvgBler => lagrange_high_snr(config),
        Criterion::AvgTber => lagrange_high_snr(config) * (m + 1) as f64 / (2.0 * m as f64),
    };
    Ok(AllocationSolution {
        objective: objective(config, &alloc, criterion)?,
        alloc,
        lambda,
        criterion,
        method: AllocMethod::Simplified,
        kkt_residual: 0.0,
        fell_back: false,
    })
}

/// Normalized derivative of step `i` at power `a`:
/// `-(dP_ei/da) / (1 - P_ei)`, strictly decreasing in `a`.
fn normalized_derivative(config: &SystemConfig, step: usize, a: f64) -> f64 {
    let l = config.mrc_order(step);
    let g0 = config.gamma0();
    let p = mrc_ber_bpsk(l, a * g0).expect("valid order and snr");
    -g0 * mrc_ber_bpsk_dsnr(l, a * g0) / (1.0 - p)
}

/// Per-coordinate inversion: the power at which the normalized derivative
/// equals the trial multiplier.
fn power_for_multiplier(config: &SystemConfig, step: usize, lambda_tilde: f64) -> f64 {
    let mut lo = ALPHA_FLOOR;
    let mut hi = 1e9;
    for _ in 0..110 {
        let mid = 0.5 * (lo + hi);
        if normalized_derivative(config, step, mid) > lambda_tilde {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn bler_numerical(config: &SystemConfig, total: f64) -> Result<AllocationSolution> {
    let m = config.m();
    let alphas_for = |lt: f64| -> Vec<f64> {
        (1..=m).map(|i| power_for_multiplier(config, i, lt)).collect()
    };
    // sum(alpha(lt)) is strictly decreasing in lt; geometric bisection
    let mut lo = 1e-30f64;
    let mut hi = 1e12f64;
    let mut lt = 0.0;
    let mut converged = false;
    for _ in 0..220 {
        lt = math::sqrt(lo * hi);
        let sum: f64 = alphas_for(lt).iter().sum();
        if math::abs(sum - total) <= 1e-8 * total {
            converged = true;
            break;
        }
        if sum > total {
            lo = lt;
        } else {
            hi = lt;
        }
    }
    let alpha = alphas_for(lt);
    let sum: f64 = alpha.iter().sum();
    if !converged && math::abs(sum - total) > 1e-8 * total {
        return Err(Error::NonConvergence { residual: math::abs(sum - total), iterations: 220 });
    }
    let alpha: Vec<f64> = alpha.iter().map(|a| a * total / sum).collect();
    // residual against the common multiplier after the exact rescale
    let derivs: Vec<f64> = (1..=m).map(|i| normalized_derivative(config, i, alpha[i - 1])).collect();
    let mean = derivs.iter().sum::<f64>() / m as f64;
    let resid = derivs.iter().map(|d| math::abs(d - mean)).fold(0.0, f64::max);
    let bler = crate::analytic::avg_bler_raw(config, &alpha)?;
    let alloc = PowerAllocation::new(
        alpha.iter().map(|a| a * m as f64 / total).collect(),
        m,
    )?;
    Ok(AllocationSolution {
        objective: bler,
        lambda: mean * (1.0 - bler),
        alloc,
        criterion: Criterion::AvgBler,
        method: AllocMethod::Numerical,
        kkt_residual: resid,
        fell_back: false,
    })
}

/// Projection onto `{x_i >= floor, sum x_i = total}`.
pub(crate) fn project_onto_simplex(x: &[f64], total: f64, floor: f64) -> Vec<f64> {
    let n = x.len();
    let budget = total - floor * n as f64;
    let shifted: Vec<f64> = x.iter().map(|v| v - floor).collect();
    let mut sorted = shifted.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    let mut rho = 0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (budget - cumsum) / (j + 1) as f64;
        if u + t > 0.0 {
            theta = t;
            rho = j;
        }
    }
    let _ = rho;
    shifted.iter().map(|&v| (v + theta).max(0.0) + floor).collect()
}

struct PgdOutcome {
    x: Vec<f64>,
    value: f64,
    pg_norm: f64,
    gradient: Vec<f64>,
    iterations: usize,
}

/// Projected gradient descent with central finite differences and
/// backtracking, on `{alpha >= floor, sum = total}`.
fn projected_gradient_descent<F>(
    f: &F,
    start: &[f64],
    total: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PgdOutcome>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = start.len();
    let mut x = project_onto_simplex(start, total, ALPHA_FLOOR);
    let mut fx = f(&x)?;
    let h = 1e-6 * total;
    let mut step = 0.25 * total;
    let mut grad = vec![0.0; n];
    let mut pg_norm = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        for i in 0..n {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] = (xm[i] - h).max(ALPHA_FLOOR);
            grad[i] = (f(&xp)? - f(&xm)?) / (xp[i] - xm[i]);
        }
        // projected-gradient residual at unit step
        let trial: Vec<f64> = x.iter().zip(&grad).map(|(&xi, &g)| xi - g).collect();
        let proj = project_onto_simplex(&trial, total, ALPHA_FLOOR);
        pg_norm = math::sqrt(
            proj.iter().zip(&x).map(|(&p, &xi)| (p - xi) * (p - xi)).sum::<f64>(),
        );
        if pg_norm < tol {
            return Ok(PgdOutcome { x, value: fx, pg_norm, gradient: grad, iterations });
        }
        let gmax = grad.iter().fold(0.0f64, |a, &g| a.max(math::abs(g)));
        if gmax == 0.0 {
            break;
        }
        let mut st = step;
        let mut improved = false;
        for _ in 0..60 {
            let cand: Vec<f64> =
                x.iter().zip(&grad).map(|(&xi, &g)| xi - st * g / gmax * total).collect();
            let cand = project_onto_simplex(&cand, total, ALPHA_FLOOR);
            let fc = f(&cand)?;
            if fc < fx {
                x = cand;
                fx = fc;
                step = st * 1.6;
                improved = true;
                break;
            }
            st *= 0.5;
        }
        if !improved {
            // stalled below the line-search resolution
            break;
        }
    }
    Ok(PgdOutcome { x, value: fx, pg_norm, gradient: grad, iterations })
}

fn tber_numerical(config: &SystemConfig) -> Result<AllocationSolution> {
    let m = config.m();
    let f = |a: &[f64]| -> Result<f64> { avg_tber_value_raw(config, a) };
    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(vec![1.0; m]);
    if let Ok(cf) = closed_form_allocation(config, Criterion::AvgTber) {
        starts.push(cf.alloc.as_slice().to_vec());
    }
    let mut vertex = vec![0.01; m];
    vertex[0] = m as f64 - 0.01 * (m as f64 - 1.0);
    starts.push(vertex);
    let mut best: Option<PgdOutcome> = None;
    for s in &starts {
        let out = projected_gradient_descent(&f, s, m as f64, 1e-8, 4000)?;
        if best.as_ref().map_or(true, |b| out.value < b.value) {
            best = Some(out);
        }
    }
    let out = best.expect("at least one start");
    if out.pg_norm > 1e-8 {
        return Err(Error::NonConvergence { residual: out.pg_norm, iterations: out.iterations });
    }
    // common multiplier estimate: mean coordinate gradient at the optimum
    let lambda = -out.gradient.iter().sum::<f64>() / m as f64;
    let alloc = PowerAllocation::new(out.x, m)?;
    Ok(AllocationSolution {
        objective: out.value,
        alloc,
        lambda: lambda.max(0.0),
        criterion: Criterion::AvgTber,
        method: AllocMethod::Numerical,
        kkt_residual: out.pg_norm,
        fell_back: false,
    })
}

/// Exact numerical optimum of the average criterion.
///
/// The BLER path solves the stationarity system by nested bisection (the
/// normalized derivatives are strictly decreasing in the powers); the TBER
/// path runs projected gradient descent from multiple starts.
pub fn numerical_allocation(config: &SystemConfig, criterion: Criterion) -> Result<AllocationSolution> {
    config.require_bpsk("numerical allocation")?;
    match criterion {
        Criterion::AvgBler => bler_numerical(config, config.m() as f64),
        Criterion::AvgTber => tber_numerical(config),
    }
}

/// BLER optimum under a perturbed total power budget `sum(alpha) = total`
/// (used by the robustness analysis).
///
/// The solution's stored allocation is normalized to sum `m` as usual; the
/// physical powers are that vector scaled by `total / m`, and the
/// objective and multiplier are those of the perturbed-budget problem.
pub(crate) fn numerical_allocation_with_total(
    config: &SystemConfig,
    total: f64,
) -> Result<AllocationSolution> {
    config.require_bpsk("numerical allocation")?;
    bler_numerical(config, total)
}

/// Zero-SNR limit of the optimum allocation.
///
/// Coherent detection has an interior solution proportional to the squared
/// MacLaurin slopes; noncoherent detection puts the whole budget on the
/// stream with the largest slope magnitude (uniformly split across ties).
pub fn low_snr_allocation(config: &SystemConfig) -> Result<AllocationSolution> {
    let m = config.m();
    let coeffs = maclaurin_coeffs(config);
    match config.modulation() {
        Modulation::BpskCoherent => {
            let sum_sq: f64 = coeffs.iter().map(|a| a * a).sum();
            let alpha: Vec<f64> =
                coeffs.iter().map(|a| m as f64 * a * a / sum_sq).collect();
            let alloc = PowerAllocation::new(alpha, m)?;
            let lambda = math::sqrt(config.gamma0() * sum_sq / m as f64)
                / math::powi(2.0, m as i32);
            Ok(AllocationSolution {
                objective: avg_bler(config, &alloc)?,
                alloc,
                lambda,
                criterion: Criterion::AvgBler,
                method: AllocMethod::LowSnr,
                kkt_residual: 0.0,
                fell_back: false,
            })
        }
        Modulation::BfskNoncoherent => {
            let max_mag = coeffs.iter().fold(0.0f64, |a, &b| a.max(math::abs(b)));
            let winners: Vec<usize> = coeffs
                .iter()
                .enumerate()
                .filter_map(|(i, &b)| (math::abs(b) == max_mag).then_some(i))
                .collect();
            let share = m as f64 / winners.len() as f64;
            let mut alpha = vec![0.0; m];
            for &w in &winners {
                alpha[w] = share;
            }
            let alloc = PowerAllocation::new(alpha, m)?;
            // boundary solution: the multiplier of the active linear bound
            let lambda = max_mag * config.gamma0() / math::powi(2.0, m as i32 - 1);
            // zero-SNR BLER expansion value at the boundary point
            let objective = 1.0 - math::powi(0.5, m as i32)
                + math::powi(0.5, m as i32 - 1)
                    * coeffs.iter().zip(alloc.as_slice()).map(|(&b, &a)| b * a).sum::<f64>()
                    * config.gamma0();
            Ok(AllocationSolution {
                objective,
                alloc,
                lambda,
                criterion: Criterion::AvgBler,
                method: AllocMethod::LowSnr,
                kkt_residual: 0.0,
                fell_back: false,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m: usize, n: usize, g0: f64) -> SystemConfig {
        SystemConfig::bpsk(m, n, g0).unwrap()
    }

    #[test]
    fn coefficients_2x2() {
        let c = alloc_coefficients(2, 2, Criterion::AvgBler).unwrap();
        assert_eq!(c.b[0], 2.0);
        assert!((c.b[1] - 24.0f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert_eq!(c.c, vec![3.0, 2.0]);
        // b2/(4 g0)^(1/3) = (6/g0)^(1/3)
        let g0 = 123.0f64;
        let a2 = c.b[1] / (4.0 * g0).powf(1.0 / 3.0);
        assert!((a2 - (6.0 / g0).powf(1.0 / 3.0)).abs() < 1e-15);
        let t = alloc_coefficients(2, 2, Criterion::AvgTber).unwrap();
        assert!((t.b[1] - 16.0f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert_eq!(t.c, c.c);
    }

    #[test]
    fn coefficients_b1_is_m() {
        for (m, n) in [(1, 1), (2, 3), (3, 3), (4, 6)] {
            for crit in [Criterion::AvgBler, Criterion::AvgTber] {
                let c = alloc_coefficients(m, n, crit).unwrap();
                assert_eq!(c.b[0], m as f64);
                assert!(c.b.iter().all(|&b| b > 0.0));
                assert!(c.c.iter().all(|&x| x > 0.0));
            }
        }
        assert!(alloc_coefficients(3, 2, Criterion::AvgBler).is_err());
    }

    #[test]
    fn simplified_matches_paper_forms() {
        let g0 = 400.0;
        let s = simplified_allocation(&cfg(2, 2, g0), Criterion::AvgBler).unwrap();
        let a2 = (6.0 / g0).powf(1.0 / 3.0);
        assert!((s.alloc.power(2) - a2).abs() < 1e-14);
        assert!((s.alloc.power(1) - (2.0 - a2)).abs() < 1e-12);
        let t = simplified_allocation(&cfg(2, 2, g0), Criterion::AvgTber).unwrap();
        assert!((t.alloc.power(2) - (4.0 / g0).powf(1.0 / 3.0)).abs() < 1e-14);
        let one = simplified_allocation(&cfg(1, 1, g0), Criterion::AvgBler).unwrap();
        assert_eq!(one.alloc.as_slice(), &[1.0]);
        // too low an SNR drives alpha_1 negative
        assert!(matches!(
            simplified_allocation(&cfg(2, 2, 1e-3), Criterion::AvgBler),
            Err(Error::SnrTooLowForSimplifiedForm { .. })
        ));
    }

    #[test]
    fn closed_form_tracks_numerical() {
        // 2x2 at gamma0 = 1e3: alpha_2 within 2% of the numerical optimum
        let c = cfg(2, 2, 1e3);
        let cf = closed_form_allocation(&c, Criterion::AvgBler).unwrap();
        let nu = numerical_allocation(&c, Criterion::AvgBler).unwrap();
        let rel = (cf.alloc.power(2) - nu.alloc.power(2)).abs() / nu.alloc.power(2);
        assert!(rel < 0.02, "rel gap {rel}");
        assert!(!cf.fell_back);
    }

    #[test]
    fn closed_form_concentrates_at_high_snr() {
        for (m, n) in [(2, 2), (3, 4)] {
            let c = cfg(m, n, 1e12);
            let cf = closed_form_allocation(&c, Criterion::AvgBler).unwrap();
            assert!((cf.alloc.power(1) - m as f64).abs() < 1e-2);
            for i in 2..=m {
                assert!(cf.alloc.power(i) < 1e-2);
            }
        }
    }

    #[test]
    fn closed_form_gap_shrinks_with_snr() {
        let mut prev = f64::INFINITY;
        for &g0 in &[1e2, 1e3, 1e4] {
            let c = cfg(3, 3, g0);
            let cf = closed_form_allocation(&c, Criterion::AvgBler).unwrap();
            let nu = numerical_allocation(&c, Criterion::AvgBler).unwrap();
            let gap = cf
                .alloc
                .as_slice()
                .iter()
                .zip(nu.alloc.as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(gap < prev, "gap {gap} did not shrink (prev {prev})");
            prev = gap;
        }
    }

    #[test]
    fn closed_form_low_snr_fallback() {
        // correction factor goes non-positive near gamma0 ~ 0.01 for 2x2
        let c = cfg(2, 2, 0.005);
        let sol = closed_form_allocation(&c, Criterion::AvgBler);
        match sol {
            Ok(s) => assert!(s.fell_back),
            Err(Error::SnrTooLowForSimplifiedForm { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn numerical_bler_stationarity_and_constraint() {
        for (m, n, g0) in [(2, 2, 10.0), (3, 3, 5.0), (2, 4, 100.0), (4, 5, 50.0)] {
            let c = cfg(m, n, g0);
            let sol = numerical_allocation(&c, Criterion::AvgBler).unwrap();
            let lt = sol.lambda / (1.0 - sol.objective);
            assert!(
                sol.kkt_residual < 1e-6 * lt,
                "{m}x{n} g0={g0}: residual {} vs multiplier {lt}",
                sol.kkt_residual
            );
            assert!(sol.lambda >= 0.0);
            let sum: f64 = sol.alloc.as_slice().iter().sum();
            assert!((sum - m as f64).abs() < 1e-9 * m as f64);
        }
    }

    #[test]
    fn numerical_bler_matches_reference_point() {
        // frozen from an independent constrained optimizer run
        let sol = numerical_allocation(&cfg(3, 3, 10.0), Criterion::AvgBler).unwrap();
        let want = [1.8413113, 0.7343456, 0.4243430];
        for (a, w) in sol.alloc.as_slice().iter().zip(want) {
            assert!((a - w).abs() < 1e-5, "{a} vs {w}");
        }
        // lambda at 3x3, gamma0 = 1 (frozen the same way)
        let sol = numerical_allocation(&cfg(3, 3, 1.0), Criterion::AvgBler).unwrap();
        assert!((sol.lambda - 5.916198e-2).abs() < 1e-6);
    }

    #[test]
    fn numerical_bler_low_snr_limit() {
        // approaches the zero-SNR interior solution m a_i^2 / sum a^2
        let sol = numerical_allocation(&cfg(2, 2, 1e-6), Criterion::AvgBler).unwrap();
        let want = [8.0 / 13.0, 18.0 / 13.0];
        for (a, w) in sol.alloc.as_slice().iter().zip(want) {
            assert!((a - w).abs() / w < 2e-3, "{a} vs {w}");
        }
    }

    #[test]
    fn numerical_2x2_alpha2_law_at_40db() {
        let g0 = 1e4;
        let sol = numerical_allocation(&cfg(2, 2, g0), Criterion::AvgBler).unwrap();
        let t = (6.0 / g0).powf(1.0 / 3.0);
        assert!((sol.alloc.power(2) - t).abs() / sol.alloc.power(2) < 0.05);
    }

    #[test]
    fn criteria_agree_closely() {
        let c = cfg(3, 3, 10.0);
        let b = numerical_allocation(&c, Criterion::AvgBler).unwrap();
        let t = numerical_allocation(&c, Criterion::AvgTber).unwrap();
        let gap = b
            .alloc
            .as_slice()
            .iter()
            .zip(t.alloc.as_slice())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        assert!(gap < 0.15, "max-norm {gap}");
    }

    #[test]
    fn tber_coefficient_scaling_at_moderate_snr() {
        // alpha_2 (4 g0)^(1/3) is near b_2 = 16^(1/3) around gamma0 = 100;
        // the exact optimizer drifts above it as the SNR grows because the
        // propagation slope keeps contributing to the gradient
        let g0 = 100.0;
        let sol = numerical_allocation(&cfg(2, 2, g0), Criterion::AvgTber).unwrap();
        let b2 = 16.0f64.powf(1.0 / 3.0);
        let scaled = sol.alloc.power(2) * (4.0 * g0).powf(1.0 / 3.0);
        assert!((scaled - b2).abs() / b2 < 0.05, "scaled {scaled} vs {b2}");
    }

    #[test]
    fn optimum_never_worse_than_uniform() {
        for (m, n, g0) in [(2, 2, 1.0), (2, 3, 10.0), (3, 3, 100.0)] {
            let c = cfg(m, n, g0);
            let uni = PowerAllocation::uniform(m).unwrap();
            let b = numerical_allocation(&c, Criterion::AvgBler).unwrap();
            assert!(b.objective <= avg_bler(&c, &uni).unwrap() + 1e-15);
            let t = numerical_allocation(&c, Criterion::AvgTber).unwrap();
            assert!(t.objective <= avg_tber(&c, &uni).unwrap().tber + 1e-15);
        }
    }

    #[test]
    fn ordering_on_moderate_snr_grid_with_findings_log() {
        // power ordering alpha_1 >= ... >= alpha_m holds from 0 dB up; the
        // zero-SNR solution reverses it, so counterexamples below 0 dB are
        // reported rather than asserted
        let mut findings = Vec::new();
        for (m, n) in [(2, 2), (3, 3), (2, 4)] {
            for &g0 in &[1.0, 3.16, 10.0, 100.0, 1e3] {
                let c = cfg(m, n, g0);
                for crit in [Criterion::AvgBler, Criterion::AvgTber] {
                    let sol = numerical_allocation(&c, crit).unwrap();
                    assert!(
                        sol.alloc.is_ordered(),
                        "{m}x{n} g0={g0} {crit:?}: {:?}",
                        sol.alloc.as_slice()
                    );
                }
                let cf = closed_form_allocation(&c, Criterion::AvgBler).unwrap();
                assert!(cf.alloc.is_ordered());
            }
            // below the crossover: log, do not fail
            let c = cfg(m, n, 0.05);
            let sol = numerical_allocation(&c, Criterion::AvgBler).unwrap();
            if !sol.alloc.is_ordered() {
                findings.push((m, n, sol.alloc.as_slice().to_vec()));
            }
        }
        for (m, n, alloc) in &findings {
            println!("finding: ordering reversed at low SNR for {m}x{n}: {alloc:?}");
        }
        assert!(!findings.is_empty(), "expected the documented low-SNR reversal");
    }

    #[test]
    fn low_snr_solutions() {
        let sol = low_snr_allocation(&cfg(2, 2, 1.0)).unwrap();
        let want = [8.0 / 13.0, 18.0 / 13.0];
        for (a, w) in sol.alloc.as_slice().iter().zip(want) {
            assert!((a - w).abs() < 1e-12);
        }
        let bfsk = SystemConfig::new(2, 2, 1.0, Modulation::BfskNoncoherent).unwrap();
        let sol = low_snr_allocation(&bfsk).unwrap();
        assert_eq!(sol.alloc.as_slice(), &[0.0, 2.0]);
        // all-equal slopes split the budget uniformly
        let flat = SystemConfig::new(1, 1, 1.0, Modulation::BfskNoncoherent).unwrap();
        assert_eq!(low_snr_allocation(&flat).unwrap().alloc.as_slice(), &[1.0]);
    }

    #[test]
    fn lagrange_high_snr_values() {
        let g0 = 17.0;
        assert!((lagrange_high_snr(&cfg(2, 2, g0)) - 1.0 / (16.0 * g0)).abs() < 1e-18);
        assert!((lagrange_high_snr(&cfg(3, 3, 1.0)) - 1.0 / 36.0).abs() < 1e-18);
    }

    #[test]
    fn lambda_ratio_improves_with_snr() {
        // numerical lambda over the high-SNR form approaches one from above
        let r = |g0: f64| {
            let c = cfg(3, 3, g0);
            numerical_allocation(&c, Criterion::AvgBler).unwrap().lambda / lagrange_high_snr(&c)
        };
        let r2 = r(1e2);
        let r4 = r(1e4);
        assert!(r4 < r2, "ratio should tighten: {r2} -> {r4}");
        assert!((r4 - 1.0).abs() < 0.1);
    }

    #[test]
    fn simplex_projection_basics() {
        let p = project_onto_simplex(&[2.0, 2.0], 2.0, 0.0);
        assert!((p[0] - 1.0).abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
        let p = project_onto_simplex(&[5.0, -3.0, 0.1], 3.0, 1e-12);
        let sum: f64 = p.iter().sum();
        assert!((sum - 3.0).abs() < 1e-12);
        assert!(p.iter().all(|&v| v >= 0.0));
    }
}
