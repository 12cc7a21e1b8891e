//! Named, counter-based random streams.
//!
//! Every random draw in the crate comes from a stream derived as
//! `ChaCha12(SHA-256(master seed, part, part, ...))`. Streams are pure
//! functions of their name: deriving the same name twice yields the same
//! stream from its start, which is what coupling-from-the-past needs when it
//! re-reads the randomness of a time index at a deeper start. No stream is
//! ever advanced and handed to an unrelated consumer.

use num_bigint::BigInt;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use crate::scalar::Scalar;

/// One component of a stream name.
#[derive(Debug, Clone, Copy)]
pub enum StreamPart<'a> {
    Tag(&'a str),
    Int(i64),
    Bytes(&'a [u8]),
}

/// Derives the stream named by `parts` under `master`.
///
/// The encoding is injective: each part is framed with a type byte and a
/// little-endian length, so distinct part lists never collide.
pub fn derive_stream(master: u64, parts: &[StreamPart<'_>]) -> ChaCha12Rng {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for part in parts {
        match part {
            StreamPart::Tag(s) => {
                h.update([0x01]);
                h.update((s.len() as u64).to_le_bytes());
                h.update(s.as_bytes());
            }
            StreamPart::Int(n) => {
                h.update([0x02]);
                h.update(n.to_le_bytes());
            }
            StreamPart::Bytes(b) => {
                h.update([0x03]);
                h.update((b.len() as u64).to_le_bytes());
                h.update(b);
            }
        }
    }
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(seed)
}

/// Fractional bits of dyadic uniform draws; matches double-precision
/// sampling resolution.
pub const DYADIC_BITS: u32 = 53;

/// Uniform dyadic rational in `[0, 1)` with [`DYADIC_BITS`] fractional bits.
///
/// The draw lives in the exact kernel: offsets built from it are exact
/// rationals, so clipping along them is exact.
pub fn dyadic_u01(rng: &mut impl RngCore) -> Scalar {
    let k = rng.next_u64() >> (64 - DYADIC_BITS);
    Scalar::new(BigInt::from(k), BigInt::from(1u64 << DYADIC_BITS))
}

/// Uniform f64 in `[0, 1)` with 53-bit resolution.
pub fn u01_f64(rng: &mut impl RngCore) -> f64 {
    let k = rng.next_u64() >> (64 - DYADIC_BITS);
    k as f64 / (1u64 << DYADIC_BITS) as f64
}

/// Standard exponential variate, strictly positive.
pub fn exp_std(rng: &mut impl RngCore) -> f64 {
    loop {
        let u = u01_f64(rng);
        // u == 0 would give a zero lifetime and a non-increasing event time.
        if u > 0.0 {
            return -(1.0 - u).ln();
        }
    }
}
