//! Seeded generators. Everything random in the crate goes through
//! Xoshiro256** seeded by SplitMix64, so a seed fully determines output.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;

pub type Rng = Xoshiro256StarStar;

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Independent generator for sub-stream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> Rng {
    seeded(splitmix64(
        seed ^ splitmix64(stream.wrapping_add(0x632b_e59b_d9b4_e019)),
    ))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
