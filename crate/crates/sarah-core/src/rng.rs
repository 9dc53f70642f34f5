//! Counter-based pseudo-random generation and index sampling.
//!
//! Every stochastic run in this crate draws from one documented generator so
//! that traces are bit-reproducible from a seed alone, across platforms and
//! implementations in other languages.
//!
//! # Generator
//!
//! SplitMix64. The draw at counter value `c` (1-based) is
//!
//! ```text
//! output(seed, c) = mix64(seed + c * 0x9E3779B97F4A7C15)   (mod 2^64)
//! ```
//!
//! where `mix64` is the finalizer
//!
//! ```text
//! z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9;
//! z ^= z >> 27;  z *= 0x94D049BB133111EB;
//! z ^= z >> 31;
//! ```
//!
//! (all arithmetic mod 2^64). Because the output is a pure function of
//! `(seed, counter)`, any draw can be re-derived without replaying the
//! stream.
//!
//! # Test vectors
//!
//! | seed | draws 1..3 |
//! |------|------------|
//! | 0    | `0xE220A8397B1DCDAF`, `0x6E789E6AA1B965F4`, `0x06C45D188009454F` |
//! | 42   | `0xBDD732262FEB6E95`, `0x28EFE333B266F103`, `0x47526757130F9F52` |
//!
//! # Derived draws
//!
//! * uniform index in `[0, n)`: `next_u64() % n` (one draw; the modulo bias
//!   is below 2^-50 for every `n` used here and is accepted for the sake of
//!   a one-draw-per-index contract),
//! * uniform `f64` in `[0, 1)`: top 53 bits scaled by 2^-53,
//! * standard gaussian: Box-Muller on two draws, cosine branch only, so one
//!   gaussian always consumes exactly two `u64` draws,
//! * `b`-subset of `[0, n)` without replacement: Floyd's algorithm, exactly
//!   `b` draws, result sorted ascending.

use alloc::vec::Vec;
use core::f64::consts::TAU;

/// Golden-ratio increment of the SplitMix64 counter stream.
pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// 2^-53, the scale mapping 53 random bits onto the unit interval.
const TWO_NEG_53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// SplitMix64 finalizer; bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic counter-based generator: output depends only on
/// `(seed, counter)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
}

impl CounterRng {
    /// Generator positioned before its first draw.
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    /// Generator positioned after `counter` draws have been consumed.
    pub fn with_counter(seed: u64, counter: u64) -> Self {
        Self { seed, counter }
    }

    /// Number of draws consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Next raw draw.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.seed.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform in `[0, 1)`; one draw.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_NEG_53
    }

    /// Uniform in the open interval `(0, 1)`; one draw. Never 0, so it is
    /// safe under `ln`.
    #[inline]
    fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * TWO_NEG_53
    }

    /// Standard normal via Box-Muller (cosine branch); exactly two draws.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_open01();
        let u2 = self.next_open01();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(TAU * u2)
    }

    /// Uniform index in `[0, n)`; exactly one draw.
    #[inline]
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    /// Uniform `b`-subset of `[0, n)` without replacement, sorted ascending.
    /// Floyd's algorithm: exactly `b` draws regardless of collisions.
    pub fn sample_without_replacement(&mut self, n: usize, b: usize) -> Vec<usize> {
        debug_assert!(b >= 1 && b <= n);
        let mut chosen: Vec<usize> = Vec::with_capacity(b);
        for j in (n - b)..n {
            let t = (self.next_u64() % (j as u64 + 1)) as usize;
            if chosen.contains(&t) {
                chosen.push(j);
            } else {
                chosen.push(t);
            }
        }
        chosen.sort_unstable();
        chosen
    }
}
