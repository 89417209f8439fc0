//! SNR gain of power optimization: the uniform-power SNR scaling that
//! matches the optimized error rate, solved from the definition by
//! bisection, plus its closed-form low/high-SNR limits and
//! approximations.

use alloc::vec::Vec;

use crate::allocator::{alloc_coefficients, numerical_allocation, Criterion};
use crate::analytic::{
    avg_bler_raw, avg_tber_value_raw, error_propagation_factor, maclaurin_coeffs,
};
use crate::math;
use crate::model::{Modulation, SystemConfig};
use crate::sim::mc_average_instantaneous_rate;
use crate::special::linear_to_db;
use crate::{Error, Result};

/// How the optimized error rate entering the gain definition is produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainStrategy {
    /// Analytic average-criterion optimum.
    Average,
    /// Monte Carlo average of the per-realization optimum.
    Instantaneous { draws: u64, seed: u64 },
}

/// Result of the definition-based gain solve.
#[derive(Debug, Clone, PartialEq)]
pub struct GainResult {
    pub gain_linear: f64,
    pub gain_db: f64,
    pub criterion: Criterion,
    pub strategy: GainStrategy,
    pub gamma0: f64,
    /// `|P_uniform(G) - P*| / P*` at the returned gain.
    pub residual: f64,
    /// Present for the Monte Carlo strategy: the gain interval obtained by
    /// inverting the 95% confidence band of the optimized rate.
    pub gain_linear_ci: Option<(f64, f64)>,
}

/// Low/high-SNR limits of the gain and the finite-SNR correction
/// coefficient of the closed-form approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainLimits {
    /// Zero-SNR limit (MacLaurin-based, BLER criterion).
    pub g0: f64,
    /// Infinite-SNR limit: `m` for the BLER criterion, strictly below `m`
    /// for the TBER criterion.
    pub g_inf: f64,
    /// Correction coefficient of the high-SNR approximation.
    pub c_mn: f64,
}

/// The gain bisection bracket, deliberately wider than the `[1, m]` bound
/// so violations would be detected rather than masked.
const BRACKET_LO: f64 = 0.5;
fn bracket_hi(m: usize) -> f64 {
    4.0 * m as f64
}

/// Error rate of the uniform allocation with every stream at power
/// `scale`: identical to evaluating the uniform system at `scale * gamma0`.
pub fn uniform_scaled_rate(config: &SystemConfig, criterion: Criterion, scale: f64) -> Result<f64> {
    let scaled = config.with_gamma0(config.gamma0() * scale)?;
    let ones = alloc::vec![1.0; config.m()];
    match criterion {
        Criterion::AvgBler => avg_bler_raw(&scaled, &ones),
        Criterion::AvgTber => avg_tber_value_raw(&scaled, &ones),
    }
}

fn invert_uniform_curve(config: &SystemConfig, criterion: Criterion, target: f64) -> Result<f64> {
    let mut lo = BRACKET_LO;
    let mut hi = bracket_hi(config.m());
    let p_lo = uniform_scaled_rate(config, criterion, lo)?;
    let p_hi = uniform_scaled_rate(config, criterion, hi)?;
    // the curve is strictly decreasing in the scale
    if target > p_lo || target < p_hi {
        return Err(Error::BracketFailure { target, lo: p_hi, hi: p_lo });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if uniform_scaled_rate(config, criterion, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-8 * 0.5 * (hi + lo) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves the gain definition: the scale `G` at which the uniform system
/// matches the optimized error rate `P*`.
pub fn snr_gain(
    config: &SystemConfig,
    criterion: Criterion,
    strategy: GainStrategy,
) -> Result<GainResult> {
    config.require_bpsk("SNR gain")?;
    if config.m() == 1 {
        return Ok(GainResult {
            gain_linear: 1.0,
            gain_db: 0.0,
            criterion,
            strategy,
            gamma0: config.gamma0(),
            residual: 0.0,
            gain_linear_ci: None,
        });
    }
    let (p_star, half_width) = match strategy {
        GainStrategy::Average => (numerical_allocation(config, criterion)?.objective, 0.0),
        GainStrategy::Instantaneous { draws, seed } => {
            mc_average_instantaneous_rate(config, criterion, draws, seed)?
        }
    };
    let gain = invert_uniform_curve(config, criterion, p_star)?;
    let residual =
        math::abs(uniform_scaled_rate(config, criterion, gain)? - p_star) / p_star;
    let gain_linear_ci = if let GainStrategy::Instantaneous { .. } = strategy {
        let lo = invert_uniform_curve(config, criterion, p_star + half_width);
        let hi = invert_uniform_curve(config, criterion, (p_star - half_width).max(0.0));
        match (lo, hi) {
            (Ok(l), Ok(h)) => Some((l, h)),
            _ => {
                return Err(Error::McNoiseTooLarge {
                    half_width,
                    needed: p_star,
                })
            }
        }
    } else {
        None
    };
    Ok(GainResult {
        gain_linear: gain,
        gain_db: linear_to_db(gain),
        criterion,
        strategy,
        gamma0: config.gamma0(),
        residual,
        gain_linear_ci,
    })
}

/// Zero-SNR limit of the gain.
///
/// Coherent detection: `m sum(a_i^2) / (sum a_i)^2`; noncoherent:
/// `m max|b_i| / sum|b_i|`. Equals one exactly when all slopes coincide.
pub fn gain_low_snr_limit(config: &SystemConfig) -> f64 {
    let coeffs = maclaurin_coeffs(config);
    let m = config.m() as f64;
    match config.modulation() {
        Modulation::BpskCoherent => {
            let sum: f64 = coeffs.iter().sum();
            let sum_sq: f64 = coeffs.iter().map(|a| a * a).sum();
            m * sum_sq / (sum * sum)
        }
        Modulation::BfskNoncoherent => {
            let max_mag = coeffs.iter().fold(0.0f64, |a, &b| a.max(math::abs(b)));
            let sum_mag: f64 = coeffs.iter().map(|b| math::abs(*b)).sum();
            m * max_mag / sum_mag
        }
    }
}

/// Infinite-SNR limit of the TBER-defined gain:
/// `m (2 a1_bar / (m+1))^(1/(n-m+1))`, strictly below `m`.
pub fn tber_high_snr_limit(config: &SystemConfig) -> Result<f64> {
    let a1 = error_propagation_factor(config)?;
    let m = config.m() as f64;
    let inv_order = 1.0 / (config.n() - config.m() + 1) as f64;
    Ok(m * math::powf(2.0 * a1 / (m + 1.0), inv_order))
}

/// Limits and correction coefficient feeding [`gain_high_snr_approx`].
pub fn gain_limits(config: &SystemConfig, criterion: Criterion) -> Result<GainLimits> {
    let m = config.m();
    let nm = config.n() - m;
    let g0 = gain_low_snr_limit(config);
    if m == 1 {
        return Ok(GainLimits { g0, g_inf: 1.0, c_mn: 0.0 });
    }
    let coef = alloc_coefficients(m, config.n(), criterion)?;
    let b2 = coef.b[1];
    let mf = m as f64;
    let (g_inf, c_mn) = match criterion {
        Criterion::AvgBler => {
            let c = ((nm + 1) as f64 * math::powi(b2, nm as i32 + 3)
                + 3.0 * math::powi(mf, nm as i32 + 2))
                / (mf * math::powi(b2, nm as i32 + 2));
            (mf, c)
        }
        Criterion::AvgTber => {
            let c = ((m + 1) as f64 * (nm + 1) as f64 * math::powi(b2, nm as i32 + 3)
                + 3.0 * math::powi(mf, nm as i32 + 3))
                / (mf * (m + 1) as f64 * math::powi(b2, nm as i32 + 2));
            (tber_high_snr_limit(config)?, c)
        }
    };
    Ok(GainLimits { g0, g_inf, c_mn })
}

/// Closed-form high-SNR gain approximation:
/// `G_inf / (1 + c_mn / (4 gamma0)^(1/(n-m+3)))^(1/(n-m+1))`.
pub fn gain_high_snr_approx(config: &SystemConfig, criterion: Criterion) -> Result<f64> {
    let limits = gain_limits(config, criterion)?;
    if config.m() == 1 {
        return Ok(1.0);
    }
    let nm = config.n() - config.m();
    let x = limits.c_mn / math::powf(4.0 * config.gamma0(), 1.0 / (nm + 3) as f64);
    Ok(limits.g_inf / math::powf(1.0 + x, 1.0 / (nm + 1) as f64))
}

/// One row of a monotonicity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GainPoint {
    pub gamma0: f64,
    pub gain_linear: f64,
}

/// Gain-vs-SNR report over a grid, with the nondecreasing check
/// precomputed. The BLER-criterion gain is provably monotone in the total
/// power; the TBER behavior is recorded as an observation.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub criterion: Criterion,
    pub points: Vec<GainPoint>,
    pub nondecreasing: bool,
}

/// Evaluates the average-strategy gain across a grid of linear SNRs.
pub fn verify_gain_monotonicity(
    config: &SystemConfig,
    criterion: Criterion,
    gamma0_grid: &[f64],
) -> Result<MonotonicityReport> {
    let mut points = Vec::with_capacity(gamma0_grid.len());
    for &g0 in gamma0_grid {
        let cfg = config.with_gamma0(g0)?;
        let gain = snr_gain(&cfg, criterion, GainStrategy::Average)?;
        points.push(GainPoint { gamma0: g0, gain_linear: gain.gain_linear });
    }
    let nondecreasing = points
        .windows(2)
        .all(|w| w[1].gain_linear >= w[0].gain_linear - 1e-9);
    Ok(MonotonicityReport { criterion, points, nondecreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::numerical_allocation_with_total;
    use crate::special::db_to_linear;

    fn cfg(m: usize, n: usize, g0: f64) -> SystemConfig {
        SystemConfig::bpsk(m, n, g0).unwrap()
    }

    #[test]
    fn single_stream_gain_is_exactly_one() {
        let g = snr_gain(&cfg(1, 1, 10.0), Criterion::AvgBler, GainStrategy::Average).unwrap();
        assert_eq!(g.gain_linear, 1.0);
        assert_eq!(g.gain_db, 0.0);
    }

    #[test]
    fn bler_gain_near_three_db_at_35db() {
        let c = cfg(2, 2, db_to_linear(35.0));
        let g = snr_gain(&c, Criterion::AvgBler, GainStrategy::Average).unwrap();
        assert!(
            (2.5..=3.0).contains(&g.gain_db),
            "gain {} dB outside [2.5, 3.0]",
            g.gain_db
        );
        assert!(g.residual < 1e-6);
    }

    #[test]
    fn tber_gain_near_two_db_at_30db() {
        let c = cfg(2, 2, 1e3);
        let g = snr_gain(&c, Criterion::AvgTber, GainStrategy::Average).unwrap();
        assert!((g.gain_db - 2.0).abs() <= 0.3, "gain {} dB", g.gain_db);
    }

    #[test]
    fn low_snr_constants() {
        let g0 = gain_low_snr_limit(&cfg(2, 2, 1.0));
        assert!((g0 - 26.0 / 25.0).abs() < 1e-12);
        assert!((linear_to_db(g0) - 0.17).abs() < 0.005);
        let bfsk = SystemConfig::new(2, 2, 1.0, Modulation::BfskNoncoherent).unwrap();
        let g0 = gain_low_snr_limit(&bfsk);
        assert!((g0 - 1.2).abs() < 1e-12);
        assert!((linear_to_db(g0) - 0.79).abs() < 0.005);
        // all slopes equal (single stream): no gain
        assert_eq!(gain_low_snr_limit(&cfg(1, 1, 1.0)), 1.0);
    }

    #[test]
    fn gain_approaches_low_snr_limit() {
        let c = cfg(2, 2, 1e-3);
        let g = snr_gain(&c, Criterion::AvgBler, GainStrategy::Average).unwrap();
        let g0 = gain_low_snr_limit(&c);
        assert!((g.gain_linear - g0).abs() / g0 < 0.02, "{} vs {g0}", g.gain_linear);
    }

    #[test]
    fn high_snr_approx_reduces_to_2x2_forms() {
        for &g0 in &[1e2, 1e3, 1e5] {
            let c = cfg(2, 2, g0);
            let bler = gain_high_snr_approx(&c, Criterion::AvgBler).unwrap();
            let want = 2.0 / (1.0 + 9.0 / (2.0 * (36.0 * g0).powf(1.0 / 3.0)));
            assert!((bler - want).abs() < 1e-12, "{bler} vs {want}");
            // the TBER form in the worked example rounds a1_bar to 6/5; the
            // implementation carries the exact propagation factor
            let tber = gain_high_snr_approx(&c, Criterion::AvgTber).unwrap();
            let rounded = 1.6 / (1.0 + 3.0 / (2.0 * (2.0 * g0).powf(1.0 / 3.0)));
            assert!((tber - rounded).abs() / rounded < 0.02, "{tber} vs {rounded}");
        }
    }

    #[test]
    fn approx_tends_to_limits() {
        for crit in [Criterion::AvgBler, Criterion::AvgTber] {
            let c = cfg(2, 2, 1e15);
            let lim = gain_limits(&c, crit).unwrap();
            let g = gain_high_snr_approx(&c, crit).unwrap();
            assert!((g - lim.g_inf).abs() / lim.g_inf < 2e-5);
        }
    }

    #[test]
    fn tber_limit_values() {
        let c = cfg(2, 2, 1.0);
        let lim = tber_high_snr_limit(&c).unwrap();
        let a1 = error_propagation_factor(&c).unwrap();
        assert!((lim - 2.0 * (2.0 * a1 / 3.0)).abs() < 1e-12);
        assert!((lim - 1.6).abs() / 1.6 < 0.02);
        assert_eq!(tber_high_snr_limit(&cfg(1, 1, 1.0)).unwrap(), 1.0);
        let lim3 = tber_high_snr_limit(&cfg(3, 3, 1.0)).unwrap();
        assert!(lim3 < 3.0);
        assert!(lim3 > 1.0);
    }

    #[test]
    fn limits_respect_bounds() {
        for (m, n) in [(2, 2), (2, 3), (3, 3)] {
            let c = cfg(m, n, 1.0);
            for crit in [Criterion::AvgBler, Criterion::AvgTber] {
                let lim = gain_limits(&c, crit).unwrap();
                assert!(lim.g0 >= 1.0 && lim.g0 <= m as f64);
                assert!(lim.g_inf >= 1.0 && lim.g_inf <= m as f64);
            }
        }
    }

    #[test]
    fn monotonicity_report_2x2() {
        let c = cfg(2, 2, 1.0);
        let grid = [1.0, 10.0, 100.0, 1000.0];
        let r = verify_gain_monotonicity(&c, Criterion::AvgBler, &grid).unwrap();
        assert!(r.nondecreasing);
        for w in r.points.windows(2) {
            assert!(w[1].gain_linear > w[0].gain_linear);
        }
        let r = verify_gain_monotonicity(&c, Criterion::AvgTber, &grid).unwrap();
        assert!(r.nondecreasing, "TBER gain decreased: {:?}", r.points);
        let last = r.points.last().unwrap().gain_linear;
        assert!((last - 1.6).abs() < 0.15, "TBER gain at 30 dB: {last}");
        // single stream: constant one
        let r = verify_gain_monotonicity(&cfg(1, 1, 1.0), Criterion::AvgBler, &grid).unwrap();
        assert!(r.points.iter().all(|p| p.gain_linear == 1.0));
    }

    #[test]
    fn instantaneous_gain_at_least_average() {
        let c = cfg(2, 2, 10.0);
        let avg = snr_gain(&c, Criterion::AvgBler, GainStrategy::Average).unwrap();
        let inst = snr_gain(
            &c,
            Criterion::AvgBler,
            GainStrategy::Instantaneous { draws: 300, seed: 11 },
        )
        .unwrap();
        let (lo, _hi) = inst.gain_linear_ci.unwrap();
        assert!(
            inst.gain_linear >= avg.gain_linear || lo <= avg.gain_linear,
            "instantaneous {} below average {} beyond CI",
            inst.gain_linear,
            avg.gain_linear
        );
        assert!(inst.gain_linear >= avg.gain_linear - 0.05);
    }

    #[test]
    fn gain_derivative_identity_in_total_power() {
        // dG/du = -lambda / dP_unif/dalpha, checked by finite differences
        let c = cfg(2, 2, 10.0);
        let m = 2.0;
        let gain_at = |u: f64| -> f64 {
            let sol = numerical_allocation_with_total(&c, u).unwrap();
            invert_uniform_curve(&c, Criterion::AvgBler, sol.objective).unwrap()
        };
        for &u in &[1.6, 2.0, 2.5] {
            let h = 1e-4 * m;
            let dg_du = (gain_at(u + h) - gain_at(u - h)) / (2.0 * h);
            let sol = numerical_allocation_with_total(&c, u).unwrap();
            let g = gain_at(u);
            let hh = 1e-6;
            let dp_dalpha = (uniform_scaled_rate(&c, Criterion::AvgBler, g + hh).unwrap()
                - uniform_scaled_rate(&c, Criterion::AvgBler, g - hh).unwrap())
                / (2.0 * hh);
            let want = -sol.lambda / dp_dalpha;
            assert!(
                (dg_du - want).abs() / want.abs() < 1e-2,
                "u={u}: fd {dg_du} vs identity {want}"
            );
            assert!(dg_du >= 0.0);
        }
    }

    #[test]
    fn bracket_failure_reported() {
        // a target above the whole uniform curve cannot be bracketed
        let c = cfg(2, 2, 10.0);
        assert!(matches!(
            invert_uniform_curve(&c, Criterion::AvgBler, 0.9999),
            Err(Error::BracketFailure { .. })
        ));
    }
}
