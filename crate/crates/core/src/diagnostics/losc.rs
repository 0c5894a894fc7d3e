use serde::Serialize;

use crate::density::{CircleDensity, POINTWISE_TOLERANCE};
use crate::ensemble;
use crate::error::{Result, StoError};
use crate::exec;
use crate::fit::{fit_decay, DecayFit};
use crate::sto::{Solver, StoModel};

#[derive(Clone, Debug, Serialize)]
pub struct LoscOutcome {
    pub fit: DecayFit,
    pub epsilon_requested: f64,
    pub epsilon: f64,
    pub members: usize,
    /// Set when some trajectory still left the density cone after shrinking `epsilon`;
    /// the fit then uses the trajectories that stayed inside.
    pub flag: Option<String>,
}

/// Factor applied to `epsilon` when a trajectory leaves the density cone.
pub const LOSC_SHRINK: f64 = 0.25;

/// `||L^n(h + g) - h||_{W^{1,1}}` for `n = 0..=n_steps`, or the reason the orbit left the cone.
fn orbit_distances(
    m: &StoModel,
    h: &CircleDensity,
    g: &CircleDensity,
    n_steps: usize,
) -> std::result::Result<Vec<f64>, String> {
    let mut f = h + g;
    let mut out = Vec::with_capacity(n_steps + 1);
    for n in 0..=n_steps {
        if n > 0 {
            f = m.apply(&f).map_err(|e| format!("step {n}: {e}"))?;
        }
        let low = f.grid_min();
        if low < -POINTWISE_TOLERANCE {
            return Err(format!("step {n}: density minimum {low:.3e}"));
        }
        out.push((&f - h).w11());
    }
    Ok(out)
}

/// Worst-case decay of `||L^n(h + g) - h||_{W^{1,1}}` over `ensemble` random zero-average
/// perturbations plus the unit mode probes, each scaled to `||g||_{W^{1,1}} = epsilon`.
pub fn losc_experiment(
    m: &StoModel,
    h: &CircleDensity,
    epsilon: f64,
    ensemble: usize,
    n_steps: usize,
    seed: u64,
) -> Result<LoscOutcome> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(StoError::InvalidInput(format!(
            "epsilon must be finite and nonnegative, got {epsilon}"
        )));
    }
    m.require_fixed(h)?;
    let members = ensemble::probe_ensemble(m.max_mode(), ensemble, seed);
    let run =
        |eps: f64| exec::map_slice(&members, |g| orbit_distances(m, h, &g.scale(eps), n_steps));
    let mut eps = epsilon;
    let mut orbits = run(eps);
    if orbits.iter().any(|o| o.is_err()) {
        eps *= LOSC_SHRINK;
        orbits = run(eps);
    }
    let flag = orbits.iter().enumerate().find_map(|(i, o)| {
        o.as_ref()
            .err()
            .map(|e| format!("member {i} left the cone ({e})"))
    });
    let valid: Vec<&Vec<f64>> = orbits.iter().filter_map(|o| o.as_ref().ok()).collect();
    let trace: Vec<f64> = (0..=n_steps)
        .map(|n| valid.iter().map(|o| o[n]).fold(0.0, f64::max))
        .collect();
    Ok(LoscOutcome {
        fit: fit_decay(&trace),
        epsilon_requested: epsilon,
        epsilon: eps,
        members: members.len(),
        flag,
    })
}

/// `a_n = max_g ||L_{delta,h}^n g||_{L^1} / ||g||_{W^{1,1}}` for `n = 1..=n_steps`
/// (entry `n - 1`) over random zero-average members and the mode probes.
pub fn equilibrium_decay(
    m: &StoModel,
    h: &CircleDensity,
    n_steps: usize,
    ensemble: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    m.require_fixed(h)?;
    let l = m.frozen_operator(h)?;
    let members = ensemble::probe_ensemble(m.max_mode(), ensemble, seed);
    let ratios = exec::map_slice(&members, |g| {
        let s = g.w11();
        let mut x = g.clone();
        (0..n_steps)
            .map(|_| {
                x = l.apply(&x);
                x.l1() / s
            })
            .collect::<Vec<f64>>()
    });
    Ok((0..n_steps)
        .map(|n| ratios.iter().map(|r| r[n]).fold(0.0, f64::max))
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiStart {
    pub starts: usize,
    pub converged: Vec<bool>,
    pub residuals: Vec<f64>,
    /// Barycenter weight `W` of each limit.
    pub weights: Vec<f64>,
    /// Largest pairwise `||h_i - h_j||_{W^{1,1}}`.
    pub max_disagreement: f64,
    pub unique: bool,
    pub h: CircleDensity,
}

/// Fixed points from `starts` random probability densities; `unique` when all converge and
/// agree to within `10 tol`.
pub fn multi_start(
    m: &StoModel,
    starts: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<MultiStart> {
    if starts == 0 {
        return Err(StoError::InvalidInput(
            "at least one start is needed".into(),
        ));
    }
    let mut r = ensemble::rng(seed);
    let initial: Vec<CircleDensity> = (0..starts)
        .map(|_| ensemble::random_probability(m.max_mode(), 0.9, &mut r))
        .collect();
    let reports = exec::try_map_indexed(starts, |i| {
        m.fixed_point(&initial[i], tol, max_iter, Solver::Newton)
    })?;
    let mut max_disagreement = 0.0f64;
    for (i, a) in reports.iter().enumerate() {
        for b in &reports[i + 1..] {
            max_disagreement = max_disagreement.max((&a.h - &b.h).w11());
        }
    }
    let converged: Vec<bool> = reports.iter().map(|r| r.converged).collect();
    Ok(MultiStart {
        starts,
        unique: converged.iter().all(|&c| c) && max_disagreement <= 10.0 * tol,
        residuals: reports.iter().map(|r| r.residual).collect(),
        weights: reports
            .iter()
            .map(|r| crate::coupling::barycenter_stats(&r.h).weight)
            .collect(),
        converged,
        max_disagreement,
        h: reports[0].h.clone(),
    })
}
