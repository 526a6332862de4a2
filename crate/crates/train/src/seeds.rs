//! Deterministic seed derivation so every episode, worker and shuffle draws
//! from its own stream.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index)
}

pub const ENV_RESET: u64 = 1;
pub const ACTION_NOISE: u64 = 2;
pub const SHUFFLE: u64 = 3;
pub const EVAL: u64 = 4;
pub const INIT: u64 = 5;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ() {
        let a = derive(7, ENV_RESET, 0);
        assert_eq!(a, derive(7, ENV_RESET, 0));
        assert_ne!(a, derive(7, ACTION_NOISE, 0));
        assert_ne!(a, derive(7, ENV_RESET, 1));
        assert_ne!(a, derive(8, ENV_RESET, 0));
    }
}
