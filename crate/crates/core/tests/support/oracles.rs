//! Reference computations that share no code path with the library's FFT-based assembly.

use num_complex::Complex64;
use sto_lab::{CircleDensity, ExpandingMapSpec};

/// Direct trigonometric sum `f(x) = sum_n c_n e^{2 pi i n x}`.
pub fn eval_direct(f: &CircleDensity, x: f64) -> f64 {
    let n = f.max_mode() as i64;
    (-n..=n)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 * x;
            (f.coeff(k) * Complex64::new(th.cos(), th.sin())).re
        })
        .sum()
}

/// The `k` preimages of `x` under `T`, by bisection on the monotone lift.
pub fn preimages(map: &ExpandingMapSpec, x: f64) -> Vec<f64> {
    let k = map.degree() as usize;
    let l0 = map.lift(0.0);
    let base = l0 + (x - l0).rem_euclid(1.0);
    (0..k)
        .map(|j| {
            let target = base + j as f64;
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if map.lift(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// `T_* f (x) = sum_{T y = x} f(y) / T'(y)`.
pub fn preimage_transfer(map: &ExpandingMapSpec, f: &CircleDensity, x: f64) -> f64 {
    preimages(map, x)
        .into_iter()
        .map(|y| eval_direct(f, y) / map.map_eval(y, 1).unwrap())
        .sum()
}

/// Coefficients `c_{-n..n}` of samples on the uniform grid by a direct DFT.
pub fn direct_dft(values: &[f64], n: usize) -> Vec<Complex64> {
    let m = values.len() as f64;
    (-(n as i64)..=n as i64)
        .map(|k| {
            values
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let th = -std::f64::consts::TAU * k as f64 * j as f64 / m;
                    Complex64::new(th.cos(), th.sin()) * v
                })
                .sum::<Complex64>()
                / m
        })
        .collect()
}

/// Bin masses pushed forward by `y -> T(y + a)`, each bin image treated as uniformly covered.
fn ulam_step(map: &ExpandingMapSpec, a: f64, p: &[f64]) -> Vec<f64> {
    let k = p.len();
    let kf = k as f64;
    let mut q = vec![0.0; k];
    for (i, &mass) in p.iter().enumerate() {
        let start = map.lift(i as f64 / kf + a) * kf;
        let end = map.lift((i + 1) as f64 / kf + a) * kf;
        let len = end - start;
        let mut c = start.floor();
        while c < end {
            let overlap = (c + 1.0).min(end) - c.max(start);
            q[(c as i64).rem_euclid(k as i64) as usize] += mass * overlap / len;
            c += 1.0;
        }
    }
    q
}

/// Ulam approximation of the self-consistent density for translation coupling with kernel `h`:
/// bin-centre density values after `iters` steps from the uniform density.
pub fn ulam_fixed_density(
    map: &ExpandingMapSpec,
    h: &CircleDensity,
    delta: f64,
    bins: usize,
    iters: usize,
) -> Vec<f64> {
    let kf = bins as f64;
    let centres: Vec<f64> = (0..bins).map(|i| (i as f64 + 0.5) / kf).collect();
    let hv: Vec<f64> = centres.iter().map(|&x| eval_direct(h, x)).collect();
    let mut p = vec![1.0 / kf; bins];
    for _ in 0..iters {
        let a = delta * p.iter().zip(&hv).map(|(m, v)| m * v).sum::<f64>();
        p = ulam_step(map, a, &p);
    }
    p.iter().map(|m| m * kf).collect()
}
