//! Seeded random densities used by the experiments.
//!
//! Every draw comes from a ChaCha8 stream derived from one 64-bit seed, and
//! members are drawn sequentially so that ensembles do not depend on threading.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::density::CircleDensity;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-stream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Random zero-average density with `E|c_n|^2 ~ (1 + |n|)^{-4}`, normalized to unit `W^{1,1}` norm.
pub fn random_zero_average(max_mode: usize, rng: &mut SeededRng) -> CircleDensity {
    let mut nonneg = vec![Complex64::new(0.0, 0.0); max_mode + 1];
    for (n, c) in nonneg.iter_mut().enumerate().skip(1) {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let s = (1.0 + n as f64).powi(-2) / std::f64::consts::SQRT_2;
        *c = Complex64::new(a * s, b * s);
    }
    let g = CircleDensity::from_nonnegative(max_mode, &nonneg).expect("shape");
    let norm = g.w11();
    g.scale(1.0 / norm)
}

pub fn zero_average_ensemble(
    max_mode: usize,
    count: usize,
    rng: &mut SeededRng,
) -> Vec<CircleDensity> {
    (0..count)
        .map(|_| random_zero_average(max_mode, rng))
        .collect()
}

/// Unit-`W^{1,1}` single modes `cos(2 pi m x + theta_m)` for `m = 1..N` with random phases.
///
/// These are the extreme points of the weighted coefficient ball, so worst cases
/// over an ensemble that includes them track the operator norm on high modes that
/// smooth random draws barely excite.
pub fn mode_probes(max_mode: usize, rng: &mut SeededRng) -> Vec<CircleDensity> {
    (1..=max_mode)
        .map(|m| {
            let theta = rng.random::<f64>() * TAU;
            let g = CircleDensity::cosine(max_mode, m, theta);
            let norm = g.w11();
            g.scale(1.0 / norm)
        })
        .collect()
}

/// `count` random zero-average members followed by the mode probes.
pub fn probe_ensemble(max_mode: usize, count: usize, seed: u64) -> Vec<CircleDensity> {
    let mut r = rng(seed);
    let mut out = zero_average_ensemble(max_mode, count, &mut r);
    out.extend(mode_probes(max_mode, &mut r));
    out
}

/// `1 + amplitude * g / max|g|` for a random zero-average `g`; the grid minimum is at least `1 - amplitude`.
pub fn random_probability(max_mode: usize, amplitude: f64, rng: &mut SeededRng) -> CircleDensity {
    let g = random_zero_average(max_mode, rng);
    let sup = g
        .evaluate(8 * max_mode)
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    &CircleDensity::constant(max_mode, 1.0) + &g.scale(amplitude / sup)
}
