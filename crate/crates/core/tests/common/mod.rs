#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, InverseGaussian, Poisson};
use rayon::prelude::*;

/// Pathwise simulation of compound Poisson IG years, with the retained loss
/// of both aggregate policies computed straight from their definitions.
pub struct Years {
    pub total: Vec<f64>,
    pub alp_retained: Vec<f64>,
    pub pap_retained: Vec<f64>,
}

pub fn simulate_years(rate: f64, mu: f64, lambda: f64, cap: f64, attachment: f64, years: usize, seed: u64) -> Years {
    const CHUNK: usize = 10_000;
    let chunks: Vec<Vec<(f64, f64, f64)>> = (0..years.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64 + 1);
            let pois = Poisson::new(rate).unwrap();
            let ig = InverseGaussian::new(mu, lambda).unwrap();
            let len = CHUNK.min(years - c * CHUNK);
            (0..len)
                .map(|_| {
                    let n = pois.sample(&mut rng) as usize;
                    let mut z = 0.0;
                    let mut kept = 0.0;
                    let mut crossed = false;
                    for _ in 0..n {
                        let x: f64 = ig.sample(&mut rng);
                        z += x;
                        if !crossed && z > attachment {
                            crossed = true;
                        }
                        if !crossed {
                            kept = z;
                        }
                    }
                    (z, (z - cap).max(0.0), kept)
                })
                .collect()
        })
        .collect();
    let flat: Vec<(f64, f64, f64)> = chunks.into_iter().flatten().collect();
    Years {
        total: flat.iter().map(|t| t.0).collect(),
        alp_retained: flat.iter().map(|t| t.1).collect(),
        pap_retained: flat.iter().map(|t| t.2).collect(),
    }
}

/// Sample mean and standard error of `g(w)`.
pub fn mc_mean(w: &[f64], g: impl Fn(f64) -> f64 + Sync) -> (f64, f64) {
    let n = w.len() as f64;
    let (s, s2) = w
        .par_iter()
        .map(|&x| {
            let v = g(x);
            (v, v * v)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = s / n;
    let var = ((s2 - n * m * m) / (n - 1.0)).max(0.0);
    (m, (var / n).sqrt())
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
