//! Seeded random streams and the loss samplers used by the simulator.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::ig::IGParams;
use super::poisson::FrequencyModel;

/// Independent stream `index` under a master seed. Scenario `i` always sees
/// the same draws regardless of thread scheduling.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One IG draw (Michael, Schucany and Haas transformation).
pub fn sample_ig<R: Rng + ?Sized>(params: IGParams, rng: &mut R) -> f64 {
    let IGParams { mu, lambda } = params;
    let z: f64 = rng.sample(StandardNormal);
    let y = z * z;
    // mu + mu^2 y/(2 lambda) - mu/(2 lambda) sqrt(4 mu lambda y + mu^2 y^2),
    // rewritten so that no two large terms are subtracted.
    let r = mu * y / lambda;
    let s = r + (r * r + 4.0 * r).sqrt();
    let x = mu * 4.0 * r / (s * s);
    let x = x.max(f64::MIN_POSITIVE);
    let u: f64 = rng.random();
    if u <= mu / (mu + x) {
        x
    } else {
        mu * mu / x
    }
}

/// Poisson count draw.
pub fn sample_count<R: Rng + ?Sized>(freq: FrequencyModel, rng: &mut R) -> usize {
    let d = Poisson::new(freq.rate).expect("validated Poisson rate");
    let n: f64 = d.sample(rng);
    n as usize
}
