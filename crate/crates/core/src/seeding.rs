/// Derives an independent sub-seed from a master seed and a work-unit key.
///
/// Uses the SplitMix64 finaliser over the running state, so that
/// `(master, [n_p, replicate])` cells map to well-separated generator seeds.
pub fn derive_seed(master: u64, key: &[u64]) -> u64 {
    let mut state = splitmix64(master ^ 0x6a09_e667_f3bc_c909);
    for &k in key {
        state = splitmix64(state ^ splitmix64(k.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    state
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
