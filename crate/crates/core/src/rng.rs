//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator. Its 256-bit key is derived from
//! `(seed, stream_id)` with the SplitMix64 finalizer:
//!
//! ```text
//! s        = mix64(stream_id ^ 0xD1B5_4A32_D192_ED03)
//! key[j]   = mix64(seed + (j + 1) * 0x9E37_79B9_7F4A_7C15  ^  s)     j = 0..3
//! ```
//!
//! and the ChaCha stream (nonce) word is set to `stream_id`, so two distinct
//! stream ids never share a keystream even under a key collision.
//!
//! Variates:
//! * uniforms take the top 53 bits of one `u64`, giving `[0, 1)`;
//! * normals use the Marsaglia polar method, caching the second variate;
//! * exponentials use inversion `-ln(1 - U)`.
//!
//! These choices are part of the regression contract: changing any of them
//! changes every seeded result.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 output function (Vigna). Full avalanche on 64 bits.
#[inline]
pub fn mix64(x: u64) -> u64 {
    let x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    let x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn derive_key(seed: u64, stream_id: u64) -> [u8; 32] {
    let s = mix64(stream_id ^ STREAM_SALT);
    let mut key = [0u8; 32];
    for (j, chunk) in key.chunks_exact_mut(8).enumerate() {
        let w = mix64(seed.wrapping_add(GOLDEN.wrapping_mul(j as u64 + 1)) ^ s);
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    key
}

/// A seeded, independent random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    core: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut core = ChaCha8Rng::from_seed(derive_key(seed, stream_id));
        core.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            core,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`.
    #[inline]
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Standard normal variate.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * f);
                return u * f;
            }
        }
    }

    /// Unit-rate exponential variate.
    #[inline]
    pub fn standard_exponential(&mut self) -> f64 {
        -self.uniform_open0().ln()
    }
}
