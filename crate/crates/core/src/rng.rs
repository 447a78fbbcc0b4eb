//! Seed derivation.
//!
//! A master seed expands into independent ChaCha streams addressed by a
//! domain tag and a key (a candidate id, a draw index, ...). Streams depend
//! only on `(seed, domain, key)`, never on iteration order, so work can be
//! split across threads or candidates relabeled without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(state, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with a domain tag and key into a derived 64-bit seed.
pub fn derive_seed(seed: u64, domain: &str, key: &[u8]) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, domain.as_bytes());
    // separator so ("ab", "c") and ("a", "bc") differ
    h = fnv1a(h, &[0xff]);
    h = fnv1a(h, key);
    splitmix64(splitmix64(seed) ^ h)
}

pub fn stream(seed: u64, domain: &str, key: &[u8]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, domain, key))
}
