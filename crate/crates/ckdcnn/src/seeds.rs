//! Sub-seed derivation: one master seed deterministically fans out to every
//! randomized pipeline stage, so a single integer reproduces a whole run.

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Seed for a named pipeline stage.
pub fn derive_seed(base: u64, stage: &str) -> u64 {
    splitmix64(base ^ fnv1a(stage.as_bytes()))
}

/// Seed for the `index`-th use of a named stage (e.g. per-epoch shuffles).
pub fn derive_seed_indexed(base: u64, stage: &str, index: u64) -> u64 {
    splitmix64(derive_seed(base, stage) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
