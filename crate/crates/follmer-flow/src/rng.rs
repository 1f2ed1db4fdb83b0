//! Seeded RNG streams.
//!
//! Every randomized routine in this crate takes an explicit seed and derives
//! independent substreams from `(seed, stream index)`. Results are therefore
//! identical regardless of evaluation order or thread count.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A decorrelated child seed for phase `tag` of an experiment (splitmix64
/// step). Routines that internally consume whole substream ranges, such as
/// per-particle ensembles, should each get their own derived seed.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed
        .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An independent RNG for substream `stream` of a master `seed`.
///
/// Streams with different indices never overlap, so one particle (or one
/// repeat, or one projection batch) can own `substream(seed, i)` while
/// another owns `substream(seed, j)` and they may run in any order.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A standard Gaussian vector in `R^dim`.
pub fn standard_normal_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// A uniformly distributed unit vector in `R^dim` (normalized Gaussian).
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = standard_normal_vector(rng, dim);
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}
