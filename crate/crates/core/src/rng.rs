//! Seeded random streams.
//!
//! Every draw is addressed by `(seed, stream)`: the stream index selects an
//! independent ChaCha sequence, so per-slider multipliers do not depend on
//! the order in which sliders or sweep rows are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Mixes a base seed with an index (splitmix64 finalizer).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream `stream` of generator `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mean-one log-normal multiplier `exp(sigma * Z - sigma^2 / 2)`.
pub fn lognormal_multiplier(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    let z: f64 = StandardNormal.sample(rng);
    (sigma * z - 0.5 * sigma * sigma).exp()
}

/// One multiplier per slider, slider `i` drawn from stream `i`.
pub fn slider_multipliers(seed: u64, sigma: f64, n_sliders: usize) -> Vec<f64> {
    (0..n_sliders)
        .map(|i| lognormal_multiplier(&mut stream(seed, i as u64), sigma))
        .collect()
}
