use rand::Rng;
use serde::Serialize;

use super::audit::sequential_ly;
use super::AUDIT_STEPS;
use crate::density::{CircleDensity, POINTWISE_TOLERANCE};
use crate::ensemble;
use crate::error::{Result, StoError};
use crate::exec;
use crate::fit::{fit_decay, DecayFit};
use crate::operator::OperatorMatrix;
use crate::sto::StoModel;

/// Number of distinct operators the random sequences draw from.
pub const POOL_SIZE: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct MemoryRow {
    pub n: usize,
    /// `max_g ||L^{(1,n)} g - L_0^n g||_{L^1}`.
    pub distance: f64,
    /// `max_g distance(g) / bound(g)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MemoryLoss {
    pub decay: DecayFit,
    pub rows: Vec<MemoryRow>,
    /// Closeness level the pool was checked against.
    pub epsilon: f64,
    /// Sampled `max_i ||L_{f_i} - L_0||_{s -> w}` over the pool.
    pub epsilon_measured: f64,
    pub lambda: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub max_ratio: f64,
    pub flag: Option<String>,
}

/// Sampled `||D||_{s -> w}` over unit-strong members and the constant density.
fn sampled_strong_to_weak(d: &OperatorMatrix, members: &[CircleDensity]) -> f64 {
    let one = CircleDensity::constant(d.max_mode(), 1.0);
    members
        .iter()
        .chain(std::iter::once(&one))
        .map(|g| d.apply(g).l1() / g.w11())
        .fold(0.0, f64::max)
}

/// Random densities `h + eta u_i` with unit-strong zero-average `u_i`, kept nonnegative.
fn perturbation_pool(
    h: &CircleDensity,
    eta: f64,
    directions: &[CircleDensity],
) -> Vec<CircleDensity> {
    directions
        .iter()
        .map(|u| {
            let mut t = eta;
            while (h + &u.scale(t)).grid_min() < -POINTWISE_TOLERANCE && t > 1e-14 {
                t *= 0.5;
            }
            h + &u.scale(t)
        })
        .collect()
}

/// Sequential compositions of operators frozen near `h` against the iterates of `L_0 = L_{delta,h}`.
///
/// The pool is built from densities `h + eta u_i` with `eta = epsilon`; when the sampled closeness
/// `||L_{f_i} - L_0||_{s -> w}` exceeds `epsilon`, `eta` is rescaled once. The bound uses the
/// constant `C = 1 + A/(1 - lambda)` with `(lambda, A, B)` from a sequential Lasota-Yorke fit on the
/// same pool and `M = max(1, sampled weak growth)`.
pub fn memory_loss_experiment(
    m: &StoModel,
    h: &CircleDensity,
    epsilon: f64,
    n_steps: usize,
    ensemble: usize,
    seed: u64,
) -> Result<MemoryLoss> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(StoError::InvalidInput(format!(
            "epsilon must be finite and nonnegative, got {epsilon}"
        )));
    }
    m.require_fixed(h)?;
    let n0 = m.max_mode();
    let l0 = m.frozen_operator(h)?;
    let mut r = ensemble::substream(seed, 1);
    let directions = ensemble::zero_average_ensemble(n0, POOL_SIZE, &mut r);
    let probes = ensemble::probe_ensemble(n0, ensemble, seed);

    let build = |eta: f64| -> Result<(Vec<OperatorMatrix>, f64)> {
        let pool = perturbation_pool(h, eta, &directions);
        let ops = exec::try_map_indexed(pool.len(), |i| m.frozen_operator(&pool[i]))?;
        let measured = ops
            .iter()
            .map(|op| sampled_strong_to_weak(&op.sub(&l0), &probes))
            .fold(0.0, f64::max);
        Ok((ops, measured))
    };
    let mut flag = None;
    let (mut pool, mut measured) = build(epsilon)?;
    if measured > epsilon {
        (pool, measured) = build(epsilon * epsilon / measured)?;
        if measured > epsilon {
            flag = Some(format!(
                "closeness {measured:.3e} still exceeds epsilon {epsilon:.3e} after rescaling"
            ));
        }
    }

    let mut ly_members = probes.clone();
    ly_members.extend((0..ensemble).map(|_| ensemble::random_probability(n0, 0.5, &mut r)));
    let ly = sequential_ly(&pool, &ly_members, AUDIT_STEPS.max(n_steps), seed)?;
    let lambda = ly.fit.lambda_tilde;
    let a = ly.fit.c4;
    let b = ly.b;
    let mm = ly.weak_bound.max(1.0);
    let c = 1.0 + a / (1.0 - lambda);

    let sequences: Vec<Vec<usize>> = probes
        .iter()
        .map(|_| {
            (0..n_steps)
                .map(|_| r.random_range(0..pool.len()))
                .collect()
        })
        .collect();
    let per_member = exec::map_indexed(probes.len(), |i| {
        let g = &probes[i];
        let (s, w) = (g.w11(), g.l1());
        let mut x = g.clone();
        let mut y = g.clone();
        let mut strong = Vec::with_capacity(n_steps + 1);
        let mut dist = Vec::with_capacity(n_steps);
        let mut ratio = Vec::with_capacity(n_steps);
        strong.push(s);
        for (k, &j) in sequences[i].iter().enumerate() {
            let n = (k + 1) as f64;
            x = pool[j].apply(&x);
            y = l0.apply(&y);
            strong.push(x.w11());
            let d = (&x - &y).l1();
            let bound = mm.powf(n) * epsilon * (c * s + n * b / (1.0 - lambda) * w);
            dist.push(d);
            ratio.push(if bound > 0.0 {
                d / bound
            } else if d > 0.0 {
                f64::INFINITY
            } else {
                0.0
            });
        }
        (strong, dist, ratio)
    });

    let trace: Vec<f64> = (0..=n_steps)
        .map(|n| {
            per_member
                .iter()
                .map(|p| p.0[n] / p.0[0])
                .fold(0.0, f64::max)
        })
        .collect();
    let rows: Vec<MemoryRow> = (0..n_steps)
        .map(|k| MemoryRow {
            n: k + 1,
            distance: per_member.iter().map(|p| p.1[k]).fold(0.0, f64::max),
            ratio: per_member.iter().map(|p| p.2[k]).fold(0.0, f64::max),
        })
        .collect();
    Ok(MemoryLoss {
        decay: fit_decay(&trace),
        max_ratio: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        rows,
        epsilon,
        epsilon_measured: measured,
        lambda,
        a,
        b,
        m: mm,
        c,
        flag,
    })
}
