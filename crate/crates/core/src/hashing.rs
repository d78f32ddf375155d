//! Small stable hash helpers. Everything that needs determinism across
//! runs and platforms goes through these instead of `std`'s `RandomState`.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded hash over a sequence of string parts. Parts are length-prefixed
/// so ("ab","c") and ("a","bc") differ.
pub fn seeded_hash(seed: u64, parts: &[&str]) -> u64 {
    let mut h = mix64(seed);
    for part in parts {
        h = mix64(h ^ part.len() as u64);
        h = mix64(h ^ fnv1a64(part.as_bytes()));
    }
    h
}
