//! Counter-based generation: Philox4x32 with 10 rounds, plus the fixed
//! uniform and Gaussian transforms layered on top of it.
//!
//! Every draw is a pure function of `(key, counter)`, so coefficients can be
//! produced in any order and on any number of threads.

use std::f64::consts::TAU;

use num_complex::Complex64;

/// Identifier recorded in every output that depends on random draws.
pub const PRNG_ID: &str = "philox4x32-10/boxmuller-v1";

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// One Philox4x32-10 block.
pub fn philox4x32_10(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(W0);
            key[1] = key[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, ctr[0]);
        let (hi1, lo1) = mulhilo(M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

#[inline]
pub fn key_of(seed: u64) -> [u32; 2] {
    [seed as u32, (seed >> 32) as u32]
}

/// Uniform in the open interval (0, 1) from the top 52 bits.
#[inline]
pub fn to_unit(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Two open-interval uniforms from one block.
#[inline]
pub fn uniforms(block: [u32; 4]) -> (f64, f64) {
    let a = (block[1] as u64) << 32 | block[0] as u64;
    let b = (block[3] as u64) << 32 | block[2] as u64;
    (to_unit(a), to_unit(b))
}

/// Complex Gaussian with `E|g|^2 = 1` via Box-Muller: `|g| = sqrt(-ln u1)`,
/// `arg g = 2 pi u2`.
#[inline]
pub fn complex_gaussian(u1: f64, u2: f64) -> Complex64 {
    Complex64::from_polar((-u1.ln()).sqrt(), TAU * u2)
}

/// splitmix64 finalizer applied to `seed ^ golden * (stream + 1)`, used to
/// derive independent keys for auxiliary streams.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sequential view of one Philox stream: counter `(index lo, index hi, 0, 0)`
/// under a key derived from `(seed, stream)`.
#[derive(Clone, Debug)]
pub struct StreamRng {
    key: [u32; 2],
    index: u64,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            key: key_of(derive_seed(seed, stream)),
            index: 0,
        }
    }

    fn block(&mut self) -> [u32; 4] {
        let i = self.index;
        self.index += 1;
        philox4x32_10([i as u32, (i >> 32) as u32, 0, 0], self.key)
    }

    /// Uniform in (0, 1); one block per call.
    pub fn uniform(&mut self) -> f64 {
        uniforms(self.block()).0
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n` (n > 0); the modulo bias is below 2^-32.
    pub fn below(&mut self, n: u64) -> u64 {
        let b = self.block();
        ((b[1] as u64) << 32 | b[0] as u64) % n
    }

    pub fn gaussian(&mut self) -> Complex64 {
        let (u1, u2) = uniforms(self.block());
        complex_gaussian(u1, u2)
    }

    /// Pick one element uniformly.
    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len() as u64) as usize]
    }
}
