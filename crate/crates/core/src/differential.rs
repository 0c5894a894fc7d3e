//! The derivative of the self-consistent operator at a fixed point and its
//! contraction / Lasota-Yorke structure on zero-average densities.

use serde::Serialize;

use crate::density::{CircleDensity, POINTWISE_TOLERANCE};
use crate::ensemble;
use crate::error::{Result, StoError};
use crate::exec;
use crate::fit::{self, LyFit, LyRecord};
use crate::operator::OperatorMatrix;
use crate::sto::StoModel;

/// `L_{delta,h}`: the linear operator with the coupling frozen at `h`.
pub fn frozen_linear_matrix(m: &StoModel, h: &CircleDensity) -> Result<OperatorMatrix> {
    m.frozen_operator(h)
}

/// The coupling-response term of the derivative at a fixed point `h`.
pub fn coupling_derivative_matrix(m: &StoModel, h: &CircleDensity) -> Result<OperatorMatrix> {
    m.require_fixed(h)?;
    m.coupling_jacobian(h)
}

/// `dL = L_{delta,h} + dL_{delta,h}` at a fixed point `h`.
pub fn differential_matrix(m: &StoModel, h: &CircleDensity) -> Result<OperatorMatrix> {
    Ok(frozen_linear_matrix(m, h)?.add(&coupling_derivative_matrix(m, h)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct FdRow {
    pub t: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FdTable {
    pub rows: Vec<FdRow>,
    /// Steps that had to be reduced so that `h + t g` stays a density: `(requested, used)`.
    pub shrunk: Vec<(f64, f64)>,
    /// `+inf` when every error is at the rounding floor.
    pub slope: f64,
    pub passed: bool,
}

/// Errors at or below this are treated as exact.
pub const FD_FLOOR: f64 = 1e-13;
pub const FD_MIN_SLOPE: f64 = 0.9;

/// `e(t) = ||(L(h + t g) - L(h))/t - dL(g)||_{L^1}` for each step.
pub fn fd_validate_differential(
    m: &StoModel,
    h: &CircleDensity,
    g: &CircleDensity,
    steps: &[f64],
) -> Result<FdTable> {
    if g.mass().abs() > 1e-12 {
        return Err(StoError::InvalidInput(
            "direction must have zero average".into(),
        ));
    }
    if steps.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(StoError::InvalidInput("steps must lie in (0, 1]".into()));
    }
    let d = differential_matrix(m, h)?;
    let dg = d.apply(g);
    let lh = m.apply(h)?;
    let mut rows = Vec::with_capacity(steps.len());
    let mut shrunk = Vec::new();
    for &t0 in steps {
        let mut t = t0;
        while (h + &g.scale(t)).grid_min() < -POINTWISE_TOLERANCE && t > 1e-12 {
            t *= 0.1;
        }
        if t != t0 {
            shrunk.push((t0, t));
        }
        let moved = m.apply(&(h + &g.scale(t)))?;
        let quotient = (&moved - &lh).scale(1.0 / t);
        rows.push(FdRow {
            t,
            error: (&quotient - &dg).l1(),
        });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let slope = fit::loglog_slope(&ts, &es, FD_FLOOR);
    Ok(FdTable {
        passed: slope >= FD_MIN_SLOPE,
        rows,
        shrunk,
        slope,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    pub n_max: usize,
    /// Weighted coefficient norms of `A^n` on zero-average densities, `n = 1..n_max`.
    pub proxy_norms: Vec<f64>,
    /// Worst `||A^n g||_{W^{1,1}} / ||g||_{W^{1,1}}` over the ensemble.
    pub empirical_norms: Vec<f64>,
    pub spectral_radius: f64,
    pub first_contracting_n: Option<usize>,
}

impl ContractionReport {
    /// `min_n proxy_n^{1/n}`, an upper bound for the asymptotic contraction per step.
    pub fn contraction_factor(&self) -> f64 {
        self.proxy_norms
            .iter()
            .enumerate()
            .map(|(i, p)| p.powf(1.0 / (i + 1) as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Per-member `||A^n g||_{W^{1,1}}` for `n = 0..=n_max`.
fn strong_trajectories(
    a: &OperatorMatrix,
    members: &[CircleDensity],
    n_max: usize,
) -> Vec<Vec<f64>> {
    exec::map_slice(members, |g| {
        let mut out = Vec::with_capacity(n_max + 1);
        let mut x = g.clone();
        out.push(x.w11());
        for _ in 0..n_max {
            x = a.apply(&x);
            out.push(x.w11());
        }
        out
    })
}

/// Random members used alongside the mode probes.
pub const DEFAULT_ENSEMBLE: usize = 64;

pub fn contraction_report(
    a: &OperatorMatrix,
    n_max: usize,
    ensemble: usize,
    seed: u64,
) -> ContractionReport {
    let proxy_norms = a.block_power_norms(n_max);
    let members = ensemble::probe_ensemble(a.max_mode(), ensemble, seed);
    let traj = strong_trajectories(a, &members, n_max);
    let empirical_norms = (1..=n_max)
        .map(|n| traj.iter().map(|t| t[n] / t[0]).fold(0.0, f64::max))
        .collect();
    let first_contracting_n = proxy_norms.iter().position(|&p| p < 1.0).map(|i| i + 1);
    ContractionReport {
        n_max,
        proxy_norms,
        empirical_norms,
        spectral_radius: a.zero_average_spectral_radius(),
        first_contracting_n,
    }
}

/// Training data for a Lasota-Yorke fit: `n = 1..=n_max` over the given members.
pub fn ly_records(a: &OperatorMatrix, members: &[CircleDensity], n_max: usize) -> Vec<LyRecord> {
    let traj = strong_trajectories(a, members, n_max);
    let weak: Vec<f64> = exec::map_slice(members, |g| g.l1());
    let mut out = Vec::with_capacity(members.len() * n_max);
    for (t, w) in traj.iter().zip(weak) {
        for (n, &v) in t.iter().enumerate().skip(1) {
            out.push(LyRecord {
                n,
                value: v,
                strong: t[0],
                weak: w,
            });
        }
    }
    out
}

/// Training members for [`ly_fit`]: a large random set plus the mode probes.
pub const LY_TRAINING_MIN: usize = 256;

/// Fits `||A^n g||_s <= lambda^n C4 ||g||_s + C5 ||g||_w` on `max(ensemble, 256)` random
/// zero-average members plus the mode probes.
pub fn ly_fit(a: &OperatorMatrix, n_max: usize, ensemble: usize, seed: u64) -> Result<LyFit> {
    let members = ensemble::probe_ensemble(a.max_mode(), ensemble.max(LY_TRAINING_MIN), seed);
    fit::fit_lasota_yorke(&ly_records(a, &members, n_max))
}

/// Largest `||A^n g||_s / bound` over a fresh ensemble drawn from `seed`.
pub fn ly_validate(
    a: &OperatorMatrix,
    fit: &LyFit,
    n_max: usize,
    ensemble: usize,
    seed: u64,
) -> f64 {
    let mut r = ensemble::rng(seed);
    let members = ensemble::zero_average_ensemble(a.max_mode(), ensemble, &mut r);
    fit.max_ratio(&ly_records(a, &members, n_max))
}
