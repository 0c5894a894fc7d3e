//! Finite mean-field particle systems compared with the self-consistent operator.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::uniform_fixed_point;
use crate::coupling::{self, CouplingModel, Diffeo};
use crate::density::CircleDensity;
use crate::ensemble;
use crate::error::{Result, StoError};
use crate::exec;
use crate::spectral;
use crate::sto::StoModel;

/// Histogram bins used for the smoothed empirical density.
pub const BINS: usize = 4096;

#[derive(Clone, Debug, Serialize)]
pub struct Crosscheck {
    pub particles: usize,
    pub steps: usize,
    pub seed: u64,
    pub bandwidth: f64,
    /// `L^1` distance to the fixed density after each step, starting with the initial cloud.
    pub distances: Vec<f64>,
    pub distance: f64,
}

/// Highest `|q|` of the kernel's `y`-dependence.
fn kernel_y_modes(c: &CouplingModel) -> Result<usize> {
    match c {
        CouplingModel::Translation { h, .. } => Ok(h.max_mode()),
        CouplingModel::GeneralKernel { kernel, .. } => Ok(kernel
            .terms()
            .iter()
            .map(|t| t.q.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
            .max(1)),
        CouplingModel::Stochastic { .. } => Err(StoError::Unsupported(
            "particle simulation needs a deterministic coupling".into(),
        )),
    }
}

/// Empirical coefficients `(1/P) sum_j e^{-2 pi i k x_j}` for `k = 0..=k_max`, summed over fixed-size
/// chunks so the result does not depend on the thread count.
fn empirical_coeffs(xs: &[f64], k_max: usize) -> Vec<Complex64> {
    let partial = exec::map_indexed(exec::chunk_count(xs.len()), |c| {
        let lo = c * exec::CHUNK;
        let hi = (lo + exec::CHUNK).min(xs.len());
        let mut acc = vec![Complex64::new(0.0, 0.0); k_max + 1];
        for &x in &xs[lo..hi] {
            let step = spectral::e(-x);
            let mut w = Complex64::new(1.0, 0.0);
            for a in acc.iter_mut() {
                *a += w;
                w *= step;
            }
        }
        acc
    });
    let mut out = vec![Complex64::new(0.0, 0.0); k_max + 1];
    for p in partial {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    let scale = 1.0 / xs.len() as f64;
    out.iter().map(|c| c * scale).collect()
}

/// Wrapped-Gaussian smoothed histogram of the cloud, sampled on the `BINS`-point grid.
fn smoothed_density(xs: &[f64], bandwidth: f64) -> Vec<f64> {
    let mut counts = vec![0u64; BINS];
    for &x in xs {
        counts[((x * BINS as f64).round() as usize) % BINS] += 1;
    }
    let scale = 1.0 / xs.len() as f64;
    let mut buf: Vec<Complex64> = counts
        .iter()
        .map(|&c| Complex64::new(c as f64 * scale, 0.0))
        .collect();
    spectral::fft_forward(&mut buf);
    let s = 2.0 * std::f64::consts::PI.powi(2) * bandwidth * bandwidth;
    let half = BINS as i64 / 2;
    for (i, b) in buf.iter_mut().enumerate() {
        let k = if (i as i64) < half {
            i as i64
        } else {
            i as i64 - BINS as i64
        };
        *b *= (-s * (k * k) as f64).exp();
    }
    spectral::fft_inverse(&mut buf);
    buf.iter().map(|v| v.re).collect()
}

fn l1_distance(values: &[f64], h: &[f64]) -> f64 {
    values
        .iter()
        .zip(h)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / values.len() as f64
}

fn simulate(
    m: &StoModel,
    h_grid: &[f64],
    particles: usize,
    steps: usize,
    seed: u64,
) -> Result<Crosscheck> {
    if particles == 0 {
        return Err(StoError::InvalidInput(
            "at least one particle is needed".into(),
        ));
    }
    let k_max = kernel_y_modes(m.coupling())?;
    let map = m.map();
    let mut r = ensemble::rng(seed);
    // initial law with density 1/(2 sqrt x), far from equilibrium
    let mut xs: Vec<f64> = (0..particles).map(|_| r.random::<f64>().powi(2)).collect();
    let bandwidth = 4.0 / (particles as f64).sqrt();
    let mut distances = Vec::with_capacity(steps + 1);
    distances.push(l1_distance(&smoothed_density(&xs, bandwidth), h_grid));
    for _ in 0..steps {
        let c = empirical_coeffs(&xs, k_max);
        let empirical = CircleDensity::from_nonnegative(k_max, &c)?;
        let phi = coupling::mean_field_map(m.coupling(), &empirical)?;
        xs = exec::map_slice(&xs, |&x| {
            let y = match &phi {
                Diffeo::Shift { a } => x + a,
                Diffeo::Sampled(s) => s.eval_lift(x),
            };
            map.lift(y).rem_euclid(1.0)
        });
        distances.push(l1_distance(&smoothed_density(&xs, bandwidth), h_grid));
    }
    Ok(Crosscheck {
        particles,
        steps,
        seed,
        bandwidth,
        distance: *distances.last().expect("initial distance"),
        distances,
    })
}

fn fixed_density_grid(m: &StoModel) -> Result<Vec<f64>> {
    let fp = uniform_fixed_point(m, 1e-12)?;
    m.require_fixed(&fp.h)?;
    Ok(fp.h.evaluate(BINS))
}

/// `particles` points updated by `x <- T(x + delta int H(x, y) d mu_P(y))` with `mu_P` the empirical
/// measure, compared after each step with the fixed density of the self-consistent operator.
pub fn ensemble_crosscheck(
    m: &StoModel,
    particles: usize,
    steps: usize,
    seed: u64,
) -> Result<Crosscheck> {
    kernel_y_modes(m.coupling())?;
    simulate(m, &fixed_density_grid(m)?, particles, steps, seed)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub particles: usize,
    pub mean: f64,
    pub std_err: f64,
    pub distances: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Scaling {
    pub steps: usize,
    pub rows: Vec<ScalingRow>,
    /// Each mean is at most the previous one plus two combined standard errors.
    pub monotone: bool,
}

/// Final distances over `seeds` repetitions (seeds `seed, seed + 1, ...`) for each particle count.
pub fn crosscheck_scaling(
    m: &StoModel,
    counts: &[usize],
    steps: usize,
    seeds: usize,
    seed: u64,
) -> Result<Scaling> {
    kernel_y_modes(m.coupling())?;
    if seeds == 0 {
        return Err(StoError::InvalidInput("at least one seed is needed".into()));
    }
    let h_grid = fixed_density_grid(m)?;
    let mut rows = Vec::with_capacity(counts.len());
    for &p in counts {
        let distances = (0..seeds)
            .map(|s| {
                simulate(m, &h_grid, p, steps, seed.wrapping_add(s as u64)).map(|c| c.distance)
            })
            .collect::<Result<Vec<f64>>>()?;
        let k = distances.len() as f64;
        let mean = distances.iter().sum::<f64>() / k;
        let var = if seeds > 1 {
            distances.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        rows.push(ScalingRow {
            particles: p,
            mean,
            std_err: (var / k).sqrt(),
            distances,
        });
    }
    let monotone = rows.windows(2).all(|w| {
        w[1].mean <= w[0].mean + 2.0 * (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt()
    });
    Ok(Scaling {
        steps,
        rows,
        monotone,
    })
}
