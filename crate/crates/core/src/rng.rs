//! Deterministic pseudo-random numbers.
//!
//! Every random decision in the toolkit (split shuffles, weight init,
//! mini-batch order) goes through [`XorShift64Star`] so that results are
//! reproducible bit-for-bit, including from other languages. The generator
//! is fully specified here:
//!
//! * Seeding: the user seed is passed once through SplitMix64
//!   (`z += 0x9E3779B97F4A7C15; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//!   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^ (z >> 31)`, wrapping
//!   arithmetic). A zero result is replaced by `0x9E3779B97F4A7C15`.
//! * Step (xorshift64*): `x ^= x >> 12; x ^= x << 25; x ^= x >> 27;`
//!   output `x * 0x2545F4914F6CDD1D` (wrapping).
//! * `below(n)`: `(next_u64() as u128 * n as u128) >> 64`.
//! * `next_f64()`: `(next_u64() >> 11) * 2^-53`, uniform in `[0, 1)`.
//! * `shuffle`: Fisher-Yates from the back, `for i in (1..n).rev() { swap(i, below(i + 1)) }`.

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const XORSHIFT_MULT: u64 = 0x2545_F491_4F6C_DD1D;

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(SPLITMIX_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        let s = splitmix64(seed);
        Self {
            state: if s == 0 { SPLITMIX_GAMMA } else { s },
        }
    }

    /// Independent stream for a named purpose derived from one user seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self::new(splitmix64(seed) ^ stream.wrapping_mul(XORSHIFT_MULT))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(XORSHIFT_MULT)
    }

    /// Uniform integer in `[0, n)`. `n` must be non-zero.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-limit, limit)`.
    pub fn symmetric(&mut self, limit: f64) -> f64 {
        (2.0 * self.next_f64() - 1.0) * limit
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
