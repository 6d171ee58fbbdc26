#![allow(dead_code)]

use elci::{CensoredObservation, CensoredSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exponential lifetimes against exponential censoring of random severity;
/// times are continuous so ties have probability zero.
pub fn random_sample(rng: &mut ChaCha8Rng, n: usize) -> CensoredSample {
    let cmean = rng.random_range(0.3..5.0);
    loop {
        let obs: Vec<CensoredObservation> = (0..n)
            .map(|_| {
                let y = -(1.0 - rng.random::<f64>()).ln();
                let c = -cmean * (1.0 - rng.random::<f64>()).ln();
                CensoredObservation::new(y.min(c), y <= c)
            })
            .collect();
        if let Ok(s) = CensoredSample::new(obs) {
            return s;
        }
    }
}

/// Polynomial of degree at most 3 with coefficients in [-2, 2].
pub fn random_poly(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let deg = rng.random_range(0..=3);
    (0..=deg).map(|_| rng.random_range(-2.0..2.0)).collect()
}

pub fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn sample(pairs: &[(f64, u8)]) -> CensoredSample {
    CensoredSample::new(pairs.iter().map(|&(t, e)| CensoredObservation::new(t, e == 1)).collect()).unwrap()
}
