//! Counter-based keyed hashing.
//!
//! Every random quantity in a trial is a pure function of
//! `(master_seed, trial_index, key)`, so values can be produced lazily, in
//! any order, from any thread, and replayed bit for bit.

/// SplitMix64 finaliser; a bijection on `u64` with full avalanche.
#[inline]
pub const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const LANE_A: u64 = 0x9e37_79b9_7f4a_7c15;
const LANE_B: u64 = 0xc2b2_ae3d_27d4_eb4f;

/// Absorb one word into a 128-bit fingerprint. The two lanes use
/// unrelated constants so a collision needs both to collide.
#[inline]
pub const fn absorb(fp: u128, word: u64) -> u128 {
    let a = (fp >> 64) as u64;
    let b = fp as u64;
    let a2 = mix64(a ^ mix64(word ^ LANE_A));
    let b2 = mix64(
        b.rotate_left(23)
            .wrapping_add(mix64(word.wrapping_add(LANE_B))),
    );
    ((a2 as u128) << 64) | b2 as u128
}

/// Stream identifier for a (master seed, trial index) pair.
#[inline]
pub const fn stream_id(master_seed: u64, trial_index: u64) -> u64 {
    mix64(mix64(master_seed ^ 0x5851_f42d_4c95_7f2d).wrapping_add(trial_index.wrapping_mul(LANE_A)))
}

/// 64 uniform bits for `(stream, tag, loc)`.
#[inline]
pub const fn keyed_bits(stream: u64, tag: u64, loc: u128) -> u64 {
    let mut h = mix64(stream ^ tag.wrapping_mul(LANE_B));
    h = mix64(h ^ (loc >> 64) as u64);
    h = mix64(h.wrapping_add(loc as u64));
    h
}

/// Map 64 bits to the open interval (0, 1) using the top 52 bits.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_unit_stays_inside() {
        assert!(open_unit(0) > 0.0);
        assert!(open_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn absorb_order_matters() {
        let a = absorb(absorb(0, 1), 2);
        let b = absorb(absorb(0, 2), 1);
        assert_ne!(a, b);
    }
}
