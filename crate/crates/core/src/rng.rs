//! Seeded random streams.
//!
//! Every stochastic routine takes either an explicit `&mut impl Rng` or a
//! master seed. Parallel work never shares a generator: item `i` of a job
//! seeded with `seed` draws from [`substream`]`(seed, i)`, so results do not
//! depend on the thread count or scheduling order.
//!
//! Pinned algorithms (CSV goldens depend on them):
//! - generator: ChaCha8 (`rand_chacha` 0.9), seeded via `seed_from_u64`;
//! - seed mixing: SplitMix64 finalizer over `seed ^ rotl(index)`, see [`derive_seed`];
//! - normal variates: the Ziggurat sampler of `rand_distr::StandardNormal` (0.5),
//!   which consumes 64-bit words of the stream and uses only table lookups,
//!   `exp` and `ln` in its tail branches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Stream = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministically mixes a master seed with an item index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.rotate_left(29).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Stream for item `index` of a job seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> Stream {
    Stream::seed_from_u64(derive_seed(seed, index))
}

/// Stream for a whole job.
pub fn stream(seed: u64) -> Stream {
    Stream::seed_from_u64(seed)
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normal_vec<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| standard_normal(rng)).collect()
}
