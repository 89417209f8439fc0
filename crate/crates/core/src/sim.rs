//! Monte Carlo engine: Rayleigh channel sampling, the unordered ZF-SIC
//! detector, instantaneous (per-realization) error rates, per-realization
//! power optimization, and rate estimation with confidence intervals.
//!
//! Determinism contract: a trial at index `t` of a run seeded with `s`
//! draws everything from `Rng::substream(s, t)`, so estimates are
//! reproducible and independent of how trials are scheduled across
//! workers.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::allocator::{
    closed_form_allocation, numerical_allocation, project_onto_simplex, AllocMethod,
    AllocationSolution, Criterion,
};
use crate::math;
use crate::model::{PowerAllocation, SystemConfig};
use crate::rng::Rng;
use crate::special::q_function;
use crate::{Error, Result};

/// Signed-pattern guard: the instantaneous TBER enumerates `3^(m-1)`
/// error vectors per step.
pub const INSTANT_TBER_MAX_STREAMS: usize = 8;

/// Relative rank tolerance: a column whose out-of-span residual is below
/// `RANK_TOL * sigma_max` makes the matrix rank deficient.
pub const RANK_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Complex vector helpers
// ---------------------------------------------------------------------------

fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    math::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass; near-zero
/// residuals are skipped (the caller decides whether that is an error).
fn orthonormal_basis(cols: &[&[Complex64]], scale: f64) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(cols.len());
    for col in cols {
        let mut v = col.to_vec();
        for _ in 0..2 {
            for q in &basis {
                let c = dot_conj(q, &v);
                axpy(&mut v, -c, q);
            }
        }
        let nv = norm(&v);
        if nv > RANK_TOL * scale {
            let inv = Complex64::new(1.0 / nv, 0.0);
            for z in &mut v {
                *z *= inv;
            }
            basis.push(v);
        }
    }
    basis
}

// ---------------------------------------------------------------------------
// Channel
// ---------------------------------------------------------------------------

/// One realization of the `n x m` complex channel matrix, stored by
/// columns (`h_1 ... h_m`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    n: usize,
    m: usize,
    cols: Vec<Vec<Complex64>>,
}

impl ChannelRealization {
    /// Wraps explicit columns; rejects rank-deficient matrices.
    pub fn from_columns(cols: Vec<Vec<Complex64>>) -> Result<Self> {
        let m = cols.len();
        if m == 0 {
            return Err(Error::InvalidAntennaCounts { m: 0, n: 0 });
        }
        let n = cols[0].len();
        if n < m || cols.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidAntennaCounts { m, n });
        }
        if cols.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::RankDeficient);
        }
        let ch = ChannelRealization { n, m, cols };
        if !ch.is_full_rank() {
            return Err(Error::RankDeficient);
        }
        Ok(ch)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.cols[j]
    }

    /// Largest singular value by power iteration on `H^H H`.
    pub fn sigma_max(&self) -> f64 {
        let mut x = vec![Complex64::new(1.0, 0.0); self.m];
        let mut value = 0.0;
        for _ in 0..60 {
            // y = H x
            let mut y = vec![Complex64::default(); self.n];
            for (j, col) in self.cols.iter().enumerate() {
                axpy(&mut y, x[j], col);
            }
            // x = H^H y
            let mut next = vec![Complex64::default(); self.m];
            for (j, col) in self.cols.iter().enumerate() {
                next[j] = dot_conj(col, &y);
            }
            let nn = norm(&next);
            if nn == 0.0 {
                return 0.0;
            }
            for z in &mut next {
                *z /= nn;
            }
            x = next;
            value = nn; // converges to sigma_max^2
        }
        math::sqrt(value)
    }

    fn is_full_rank(&self) -> bool {
        let scale = self.sigma_max();
        if scale == 0.0 {
            return false;
        }
        let refs: Vec<&[Complex64]> = self.cols.iter().map(|c| c.as_slice()).collect();
        orthonormal_basis(&refs, scale).len() == self.m
    }
}

/// Draws an i.i.d. Rayleigh channel: entries CN(0, 1). The probability-zero
/// rank failure is handled by resampling.
pub fn sample_channel(rng: &mut Rng, n: usize, m: usize) -> Result<ChannelRealization> {
    if m == 0 || n < m {
        return Err(Error::InvalidAntennaCounts { m, n });
    }
    loop {
        let cols: Vec<Vec<Complex64>> = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let (re, im) = rng.next_complex_unit();
                        Complex64::new(re, im)
                    })
                    .collect()
            })
            .collect();
        if let Ok(ch) = ChannelRealization::from_columns(cols) {
            return Ok(ch);
        }
    }
}

// ---------------------------------------------------------------------------
// Nulling weights and detection
// ---------------------------------------------------------------------------

/// Nulling weight of one detection step: unit norm, orthogonal to all
/// yet-to-be-detected columns, with `w^H h_i` real and positive.
#[derive(Debug, Clone)]
pub struct NullingWeight {
    pub w: Vec<Complex64>,
    /// `|P_i h_i|`: the length of `h_i` after projecting out the
    /// later columns. The after-processing SNR of the step is
    /// `alpha_i * residual_norm^2 / sigma0^2`.
    pub residual_norm: f64,
}

/// Computes the step-`i` (1-based) weight for the unordered detector:
/// project `h_i` onto the orthogonal complement of
/// `span{h_(i+1), ..., h_m}` and normalize.
pub fn nulling_weights(h: &ChannelRealization, step: usize) -> Result<NullingWeight> {
    if step < 1 || step > h.m() {
        return Err(Error::StepOutOfRange { step, m: h.m() });
    }
    let scale = h.sigma_max();
    let later: Vec<&[Complex64]> = (step..h.m()).map(|j| h.column(j)).collect();
    let basis = orthonormal_basis(&later, scale);
    if basis.len() != later.len() {
        return Err(Error::RankDeficient);
    }
    let mut r = h.column(step - 1).to_vec();
    for _ in 0..2 {
        for q in &basis {
            let c = dot_conj(q, &r);
            axpy(&mut r, -c, q);
        }
    }
    let rn = norm(&r);
    if rn <= RANK_TOL * scale {
        return Err(Error::RankDeficient);
    }
    let inv = Complex64::new(1.0 / rn, 0.0);
    for z in &mut r {
        *z *= inv;
    }
    Ok(NullingWeight { w: r, residual_norm: rn })
}

fn all_weights(h: &ChannelRealization) -> Result<Vec<NullingWeight>> {
    (1..=h.m()).map(|i| nulling_weights(h, i)).collect()
}

/// Full per-trial record of one detection pass.
#[derive(Debug, Clone)]
pub struct DetectionTrace {
    pub transmitted: Vec<i8>,
    pub detected: Vec<i8>,
    /// Per-step combining weights.
    pub weights: Vec<Vec<Complex64>>,
    /// Per-step decision statistics `w_i^H (residual)`.
    pub decision_stats: Vec<Complex64>,
    /// `detected - transmitted`, entries in `{0, +2, -2}`.
    pub error_vector: Vec<i8>,
}

fn detect_inner(
    h: &ChannelRealization,
    alpha: &[f64],
    s: &[i8],
    noise: &[Complex64],
    sigma0: f64,
    genie: bool,
) -> Result<DetectionTrace> {
    let m = h.m();
    let n = h.n();
    if s.len() != m || alpha.len() != m {
        return Err(Error::AllocationLength { len: alpha.len(), m });
    }
    if noise.len() != n {
        return Err(Error::InvalidStrategy(alloc::format!(
            "noise vector length {} does not match n={n}",
            noise.len()
        )));
    }
    let weights = all_weights(h)?;
    // received vector r = sum_j h_j sqrt(alpha_j) s_j + sigma0 * noise
    let mut residual: Vec<Complex64> = noise.iter().map(|z| z * sigma0).collect();
    for j in 0..m {
        let gain = Complex64::new(math::sqrt(alpha[j]) * s[j] as f64, 0.0);
        axpy(&mut residual, gain, h.column(j));
    }
    let mut detected = vec![0i8; m];
    let mut stats = Vec::with_capacity(m);
    for i in 0..m {
        let stat = dot_conj(&weights[i].w, &residual);
        stats.push(stat);
        // exact zero decides +1
        detected[i] = if stat.re >= 0.0 { 1 } else { -1 };
        // cancel this stream before the next step
        let cancel = if genie { s[i] } else { detected[i] };
        let gain = Complex64::new(-math::sqrt(alpha[i]) * cancel as f64, 0.0);
        axpy(&mut residual, gain, h.column(i));
    }
    let error_vector: Vec<i8> = detected.iter().zip(s).map(|(&d, &t)| d - t).collect();
    Ok(DetectionTrace {
        transmitted: s.to_vec(),
        detected,
        weights: weights.into_iter().map(|nw| nw.w).collect(),
        decision_stats: stats,
        error_vector,
    })
}

/// Runs the unordered ZF-SIC detector on one received vector.
///
/// `noise` carries unit-variance CN(0,1) samples; it is scaled by `sigma0`
/// internally. Detected symbols are cancelled as decided (possibly
/// wrongly), so errors propagate exactly as in a real receiver.
pub fn detect(
    h: &ChannelRealization,
    alloc: &PowerAllocation,
    s: &[i8],
    noise: &[Complex64],
    sigma0: f64,
) -> Result<DetectionTrace> {
    detect_inner(h, alloc.as_slice(), s, noise, sigma0, false)
}

/// Genie-aided variant: the true symbols are cancelled regardless of the
/// decisions, isolating the per-step BERs from propagation.
pub fn detect_genie(
    h: &ChannelRealization,
    alloc: &PowerAllocation,
    s: &[i8],
    noise: &[Complex64],
    sigma0: f64,
) -> Result<DetectionTrace> {
    detect_inner(h, alloc.as_slice(), s, noise, sigma0, true)
}

// ---------------------------------------------------------------------------
// Instantaneous (per-realization) error rates
// ---------------------------------------------------------------------------

pub(crate) fn instantaneous_bler_raw(
    h: &ChannelRealization,
    alpha: &[f64],
    sigma0: f64,
) -> Result<f64> {
    let weights = all_weights(h)?;
    let mut ok = 1.0;
    for (i, nw) in weights.iter().enumerate() {
        let gamma_i = alpha[i] * nw.residual_norm * nw.residual_norm / (sigma0 * sigma0);
        ok *= 1.0 - q_function(math::sqrt(2.0 * gamma_i));
    }
    Ok(1.0 - ok)
}

/// Instantaneous BLER of one channel realization:
/// `1 - prod_i (1 - Q(sqrt(2 gamma_i)))`.
pub fn instantaneous_bler(
    h: &ChannelRealization,
    alloc: &PowerAllocation,
    sigma0: f64,
) -> Result<f64> {
    instantaneous_bler_raw(h, alloc.as_slice(), sigma0)
}

fn instantaneous_tber_impl(
    h: &ChannelRealization,
    alpha: &[f64],
    sigma0: f64,
    qmin_shortcut: bool,
) -> Result<f64> {
    let m = h.m();
    if m > INSTANT_TBER_MAX_STREAMS {
        return Err(Error::EnumerationGuard { size: m, limit: INSTANT_TBER_MAX_STREAMS });
    }
    let weights = all_weights(h)?;
    // signal levels w_i^H h_i sqrt(alpha_i) (real by construction)
    let signal: Vec<f64> =
        (0..m).map(|i| weights[i].residual_norm * math::sqrt(alpha[i])).collect();
    let inv_scale = core::f64::consts::SQRT_2 / sigma0;
    // Walk the signed error tree. State: step index, accumulated
    // interference sum_j h_j sqrt(alpha_j) e_j, chain probability.
    struct Walker<'a> {
        h: &'a ChannelRealization,
        weights: &'a [NullingWeight],
        signal: &'a [f64],
        alpha: &'a [f64],
        inv_scale: f64,
        qmin: bool,
        p_uncond: Vec<f64>,
    }
    impl Walker<'_> {
        fn go(&mut self, step: usize, interference: &mut Vec<Complex64>, weight: f64) {
            let m = self.h.m();
            if step > m || weight == 0.0 {
                return;
            }
            let q = dot_conj(&self.weights[step - 1].w, interference).re;
            let s = self.signal[step - 1];
            // error probabilities for the two transmitted symbols
            let (p_plus_err, p_minus_err) = if self.qmin {
                let xmin = math::abs(s - q).min(math::abs(s + q));
                let p = 0.5 * q_function(xmin * self.inv_scale);
                (p, p)
            } else {
                (
                    0.5 * q_function((s + q) * self.inv_scale),
                    0.5 * q_function((s - q) * self.inv_scale),
                )
            };
            let p_err = p_plus_err + p_minus_err;
            self.p_uncond[step - 1] += weight * p_err;
            if step == m {
                return;
            }
            let amp = math::sqrt(self.alpha[step - 1]);
            let col = self.h.column(step - 1);
            // e = +2 (transmitted -1, detected +1)
            axpy(interference, Complex64::new(2.0 * amp, 0.0), col);
            self.go(step + 1, interference, weight * p_minus_err);
            // e = -2
            axpy(interference, Complex64::new(-4.0 * amp, 0.0), col);
            self.go(step + 1, interference, weight * p_plus_err);
            // restore and take the no-error branch
            axpy(interference, Complex64::new(2.0 * amp, 0.0), col);
            self.go(step + 1, interference, weight * (1.0 - p_err));
        }
    }
    let mut walker = Walker {
        h,
        weights: &weights,
        signal: &signal,
        alpha,
        inv_scale,
        qmin: qmin_shortcut,
        p_uncond: vec![0.0; m],
    };
    let mut interference = vec![Complex64::default(); h.n()];
    walker.go(1, &mut interference, 1.0);
    Ok(walker.p_uncond.iter().sum::<f64>() / m as f64)
}

pub(crate) fn instantaneous_tber_raw(
    h: &ChannelRealization,
    alpha: &[f64],
    sigma0: f64,
) -> Result<f64> {
    instantaneous_tber_impl(h, alpha, sigma0, false)
}

/// Instantaneous TBER of one channel realization, chaining the signed
/// error vectors through the two-sided conditional error probability of
/// each step.
pub fn instantaneous_tber(
    h: &ChannelRealization,
    alloc: &PowerAllocation,
    sigma0: f64,
) -> Result<f64> {
    instantaneous_tber_impl(h, alloc.as_slice(), sigma0, false)
}

/// Fast variant that replaces the two-sided conditional probability with
/// `Q(x_min)/2`. Accurate at high SNR; the exact form is the reference.
pub fn instantaneous_tber_qmin(
    h: &ChannelRealization,
    alloc: &PowerAllocation,
    sigma0: f64,
) -> Result<f64> {
    instantaneous_tber_impl(h, alloc.as_slice(), sigma0, true)
}

// ---------------------------------------------------------------------------
// Instantaneous power optimization
// ---------------------------------------------------------------------------

fn instantaneous_pgd<F>(f: &F, start: &[f64], m: usize) -> Result<(Vec<f64>, f64, f64, Vec<f64>, usize)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    const FLOOR: f64 = 1e-12;
    let total = m as f64;
    let mut x = project_onto_simplex(start, total, FLOOR);
    let mut fx = f(&x)?;
    let h = 1e-6 * total;
    let mut step = 0.25 * total;
    let mut grad = vec![0.0; m];
    let mut pg_norm = f64::INFINITY;
    let mut iters = 0;
    for it in 0..3000 {
        iters = it + 1;
        for i in 0..m {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] = (xm[i] - h).max(FLOOR);
            grad[i] = (f(&xp)? - f(&xm)?) / (xp[i] - xm[i]);
        }
        let trial: Vec<f64> = x.iter().zip(&grad).map(|(&xi, &g)| xi - g).collect();
        let proj = project_onto_simplex(&trial, total, FLOOR);
        pg_norm = math::sqrt(proj.iter().zip(&x).map(|(&p, &xi)| (p - xi) * (p - xi)).sum());
        if pg_norm < 1e-8 {
            return Ok((x, fx, pg_norm, grad, iters));
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
            let cand = project_onto_simplex(&cand, total, FLOOR);
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
            break;
        }
    }
    Ok((x, fx, pg_norm, grad, iters))
}

/// Optimum allocation for one channel realization.
///
/// The instantaneous BLER is convex, so a single projected-gradient run
/// suffices; the instantaneous TBER may be non-convex, so several starting
/// points are tried and the best local minimum is returned.
pub fn instantaneous_allocation(
    h: &ChannelRealization,
    config: &SystemConfig,
    criterion: Criterion,
) -> Result<AllocationSolution> {
    config.require_bpsk("instantaneous allocation")?;
    let m = config.m();
    if h.m() != m || h.n() != config.n() {
        return Err(Error::InvalidAntennaCounts { m: h.m(), n: h.n() });
    }
    let sigma0 = math::sqrt(config.sigma0_sq());
    let eval = |a: &[f64]| -> Result<f64> {
        match criterion {
            Criterion::AvgBler => instantaneous_bler_raw(h, a, sigma0),
            Criterion::AvgTber => instantaneous_tber_raw(h, a, sigma0),
        }
    };
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0; m]];
    if criterion == Criterion::AvgTber {
        if let Ok(cf) = closed_form_allocation(config, criterion) {
            starts.push(cf.alloc.as_slice().to_vec());
        }
        let mut vertex = vec![0.01; m];
        vertex[0] = m as f64 - 0.01 * (m as f64 - 1.0);
        starts.push(vertex);
    }
    let mut best: Option<(Vec<f64>, f64, f64, Vec<f64>, usize)> = None;
    for s in &starts {
        let out = instantaneous_pgd(&eval, s, m)?;
        if best.as_ref().map_or(true, |b| out.1 < b.1) {
            best = Some(out);
        }
    }
    let (x, value, pg_norm, grad, iters) = best.expect("at least one start");
    if pg_norm > 1e-8 {
        return Err(Error::NonConvergence { residual: pg_norm, iterations: iters });
    }
    let lambda = (-grad.iter().sum::<f64>() / m as f64).max(0.0);
    Ok(AllocationSolution {
        objective: value,
        alloc: PowerAllocation::new(x, m)?,
        lambda,
        criterion,
        method: AllocMethod::Numerical,
        kkt_residual: pg_norm,
        fell_back: false,
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo rate estimation
// ---------------------------------------------------------------------------

/// Power allocation policy of a simulated link.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    Uniform,
    AvgClosedForm(Criterion),
    AvgNumerical(Criterion),
    Instantaneous(Criterion),
    Preset(PowerAllocation),
}

/// Raw event counts of a trial range; summable across disjoint ranges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct McCounts {
    pub trials: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
}

impl core::ops::Add for McCounts {
    type Output = McCounts;
    fn add(self, rhs: McCounts) -> McCounts {
        McCounts {
            trials: self.trials + rhs.trials,
            block_errors: self.block_errors + rhs.block_errors,
            bit_errors: self.bit_errors + rhs.bit_errors,
        }
    }
}

/// A Monte Carlo estimate with its 95% binomial confidence half-width and
/// the seed that reproduces it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub trials: u64,
    pub events: u64,
    /// Bernoulli opportunities behind the estimate (`trials` for block
    /// errors, `trials * m` for bit errors).
    pub opportunities: u64,
    pub estimate: f64,
    pub half_width: f64,
    pub seed: u64,
}

impl McEstimate {
    fn from_events(trials: u64, events: u64, opportunities: u64, seed: u64) -> Self {
        let p = events as f64 / opportunities as f64;
        let half_width = if events == 0 || events == opportunities {
            0.0
        } else {
            1.96 * math::sqrt(p * (1.0 - p) / opportunities as f64)
        };
        McEstimate { trials, events, opportunities, estimate: p, half_width, seed }
    }
}

fn resolve_fixed_allocation(config: &SystemConfig, strategy: &Strategy) -> Result<Option<Vec<f64>>> {
    Ok(match strategy {
        Strategy::Uniform => Some(vec![1.0; config.m()]),
        Strategy::AvgClosedForm(c) => {
            Some(closed_form_allocation(config, *c)?.alloc.as_slice().to_vec())
        }
        Strategy::AvgNumerical(c) => {
            Some(numerical_allocation(config, *c)?.alloc.as_slice().to_vec())
        }
        Strategy::Preset(p) => {
            if p.len() != config.m() {
                return Err(Error::InvalidStrategy(alloc::format!(
                    "preset of length {} for m={}",
                    p.len(),
                    config.m()
                )));
            }
            Some(p.as_slice().to_vec())
        }
        Strategy::Instantaneous(_) => None,
    })
}

/// Accumulates detection outcomes over the trial index range
/// `[start, end)`. Disjoint ranges of the same run can be evaluated in any
/// order (or concurrently by a `std` caller) and summed.
pub fn monte_carlo_counts(
    config: &SystemConfig,
    strategy: &Strategy,
    seed: u64,
    start: u64,
    end: u64,
) -> Result<McCounts> {
    config.require_bpsk("Monte Carlo simulation")?;
    let m = config.m();
    let n = config.n();
    let sigma0 = math::sqrt(config.sigma0_sq());
    let fixed = resolve_fixed_allocation(config, strategy)?;
    let mut counts = McCounts::default();
    let mut s = vec![0i8; m];
    let mut noise = vec![Complex64::default(); n];
    for trial in start..end {
        let mut rng = Rng::substream(seed, trial);
        let h = sample_channel(&mut rng, n, m)?;
        for sym in &mut s {
            *sym = rng.next_symbol();
        }
        for z in &mut noise {
            let (re, im) = rng.next_complex_unit();
            *z = Complex64::new(re, im);
        }
        let alpha_storage;
        let alpha: &[f64] = match &fixed {
            Some(a) => a,
            None => {
                let criterion = match strategy {
                    Strategy::Instantaneous(c) => *c,
                    _ => unreachable!(),
                };
                alpha_storage = instantaneous_allocation(&h, config, criterion)?;
                alpha_storage.alloc.as_slice()
            }
        };
        let trace = detect_inner(&h, alpha, &s, &noise, sigma0, false)?;
        let bit_errors = trace.error_vector.iter().filter(|&&e| e != 0).count() as u64;
        counts.trials += 1;
        counts.bit_errors += bit_errors;
        if bit_errors > 0 {
            counts.block_errors += 1;
        }
    }
    Ok(counts)
}

/// Estimates the average BLER and TBER of a strategy over `trials`
/// channel-and-noise draws. Deterministic in `(config, strategy, trials,
/// seed)`.
pub fn monte_carlo_rates(
    config: &SystemConfig,
    strategy: &Strategy,
    trials: u64,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let counts = monte_carlo_counts(config, strategy, seed, 0, trials)?;
    let bler = McEstimate::from_events(trials, counts.block_errors, trials, seed);
    let tber =
        McEstimate::from_events(trials, counts.bit_errors, trials * config.m() as u64, seed);
    Ok((bler, tber))
}

/// Genie-aided per-step BER estimates: true symbols are cancelled, so step
/// `i`'s count follows the `(n-m+i)`-order MRC law exactly.
pub fn genie_step_error_counts(
    config: &SystemConfig,
    alloc: &PowerAllocation,
    trials: u64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    config.require_bpsk("Monte Carlo simulation")?;
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let m = config.m();
    let n = config.n();
    let sigma0 = math::sqrt(config.sigma0_sq());
    let mut errors = vec![0u64; m];
    let mut s = vec![0i8; m];
    let mut noise = vec![Complex64::default(); n];
    for trial in 0..trials {
        let mut rng = Rng::substream(seed, trial);
        let h = sample_channel(&mut rng, n, m)?;
        for sym in &mut s {
            *sym = rng.next_symbol();
        }
        for z in &mut noise {
            let (re, im) = rng.next_complex_unit();
            *z = Complex64::new(re, im);
        }
        let trace = detect_genie(&h, alloc, &s, &noise, sigma0)?;
        for (i, &e) in trace.error_vector.iter().enumerate() {
            if e != 0 {
                errors[i] += 1;
            }
        }
    }
    Ok(errors
        .into_iter()
        .map(|e| McEstimate::from_events(trials, e, trials, seed))
        .collect())
}

/// Mean and 95% half-width of the per-realization optimized instantaneous
/// error rate over `draws` channel realizations: the Monte Carlo side of
/// the instantaneous-optimization comparisons.
pub fn mc_average_instantaneous_rate(
    config: &SystemConfig,
    criterion: Criterion,
    draws: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if draws == 0 {
        return Err(Error::ZeroTrials);
    }
    let sigma0 = math::sqrt(config.sigma0_sq());
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for trial in 0..draws {
        let mut rng = Rng::substream(seed, trial);
        let h = sample_channel(&mut rng, config.n(), config.m())?;
        let sol = instantaneous_allocation(&h, config, criterion)?;
        let rate = match criterion {
            Criterion::AvgBler => instantaneous_bler_raw(&h, sol.alloc.as_slice(), sigma0)?,
            Criterion::AvgTber => instantaneous_tber_raw(&h, sol.alloc.as_slice(), sigma0)?,
        };
        sum += rate;
        sum_sq += rate * rate;
    }
    let mean = sum / draws as f64;
    let var = (sum_sq / draws as f64 - mean * mean).max(0.0);
    Ok((mean, 1.96 * math::sqrt(var / draws as f64)))
}

/// Average rate of a fixed allocation over channel draws, via the
/// instantaneous closed forms (no symbol-level noise). Used for
/// like-for-like comparisons against [`mc_average_instantaneous_rate`].
pub fn mc_average_fixed_rate(
    config: &SystemConfig,
    alloc: &PowerAllocation,
    criterion: Criterion,
    draws: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if draws == 0 {
        return Err(Error::ZeroTrials);
    }
    let sigma0 = math::sqrt(config.sigma0_sq());
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for trial in 0..draws {
        let mut rng = Rng::substream(seed, trial);
        let h = sample_channel(&mut rng, config.n(), config.m())?;
        let rate = match criterion {
            Criterion::AvgBler => instantaneous_bler(&h, alloc, sigma0)?,
            Criterion::AvgTber => instantaneous_tber(&h, alloc, sigma0)?,
        };
        sum += rate;
        sum_sq += rate * rate;
    }
    let mean = sum / draws as f64;
    let var = (sum_sq / draws as f64 - mean * mean).max(0.0);
    Ok((mean, 1.96 * math::sqrt(var / draws as f64)))
}
