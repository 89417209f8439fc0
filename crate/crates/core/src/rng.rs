//! Deterministic random number generation for the Monte Carlo engine.
//!
//! Every trial draws from its own substream, derived from the master seed
//! and the trial index alone, so estimates do not depend on execution
//! order or worker count. Replay with the same seed is bit-exact.

use crate::math;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64: seed expander and mixing function.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

/// xoshiro256++ with SplitMix64 seeding.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        let mut s = [0u64; 4];
        for slot in &mut s {
            *slot = sm.next_u64();
        }
        // the all-zero state is invalid
        if s.iter().all(|&w| w == 0) {
            s[0] = GOLDEN;
        }
        Rng { s }
    }

    /// Independent substream for one trial of a seeded experiment.
    pub fn substream(master_seed: u64, index: u64) -> Self {
        let mut sm = SplitMix64::new(master_seed ^ index.wrapping_add(1).wrapping_mul(GOLDEN));
        Self::from_seed(sm.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// A pair of independent standard normal samples (Box-Muller).
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        loop {
            let u1 = self.next_f64();
            let u2 = self.next_f64();
            if u1 > 0.0 {
                let r = math::sqrt(-2.0 * math::ln(u1));
                let theta = 2.0 * core::f64::consts::PI * u2;
                return (r * math::cos(theta), r * math::sin(theta));
            }
        }
    }

    /// A circularly-symmetric complex Gaussian sample of unit variance
    /// (each component has variance 1/2).
    pub fn next_complex_unit(&mut self) -> (f64, f64) {
        let (a, b) = self.next_gaussian_pair();
        let s = math::sqrt(0.5);
        (a * s, b * s)
    }

    /// A uniform BPSK symbol, `+1` or `-1`.
    pub fn next_symbol(&mut self) -> i8 {
        if self.next_u64() & 1 == 0 {
            1
        } else {
            -1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_is_bit_exact() {
        let mut a = Rng::from_seed(42);
        let mut b = Rng::from_seed(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn substreams_differ_and_replay() {
        let mut a = Rng::substream(7, 0);
        let mut b = Rng::substream(7, 1);
        let mut a2 = Rng::substream(7, 0);
        let x: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let y: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let x2: Vec<u64> = (0..8).map(|_| a2.next_u64()).collect();
        assert_eq!(x, x2);
        assert_ne!(x, y);
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = Rng::from_seed(1);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let (a, b) = rng.next_gaussian_pair();
            sum += a + b;
            sum_sq += a * a + b * b;
        }
        let mean = sum / (2 * n) as f64;
        let var = sum_sq / (2 * n) as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn uniform_in_range_and_symbols_balanced() {
        let mut rng = Rng::from_seed(3);
        let mut pos = 0i64;
        for _ in 0..100_000 {
            let u = rng.next_f64();
            assert!((0.0..1.0).contains(&u));
            pos += rng.next_symbol() as i64;
        }
        assert!(pos.abs() < 2_000);
    }
}
