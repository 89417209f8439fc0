//! Small special-function helpers shared by the analytic and simulation
//! modules.

use crate::math;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
///
/// Evaluated through `erfc` for full accuracy in both tails.
#[inline]
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// Binomial coefficient `C(n, k)` as `f64`, exact in integer arithmetic.
///
/// The enumeration guards elsewhere keep `n` small (tens), far below the
/// range where the `u128` accumulator could overflow.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for j in 0..k {
        num *= (n - j) as u128;
        den *= (j + 1) as u128;
        // keep intermediate values small; the running product is always
        // divisible at each step once reduced
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    (num / den) as f64
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `10^(db/10)`.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    math::powf(10.0, db / 10.0)
}

/// `10 log10(x)`.
#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * math::log10(x)
}
