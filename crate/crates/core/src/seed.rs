//! Seed derivation. Every random stream in the pipeline is keyed by the
//! top-level seed plus a stage name and an index, so parallel and serial
//! schedules draw identical numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// FNV-1a
fn hash_name(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn derive_seed(seed: u64, stage: &str, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ hash_name(stage)) ^ index)
}

pub fn rng_for(seed: u64, stage: &str, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, stage, index))
}

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
