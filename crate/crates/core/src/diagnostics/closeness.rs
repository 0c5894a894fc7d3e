use serde::Serialize;

use super::uniform_fixed_point;
use crate::density::CircleDensity;
use crate::differential::differential_matrix;
use crate::ensemble;
use crate::error::{Result, StoError};
use crate::exec;
use crate::fit::loglog_slope;
use crate::sto::StoModel;

fn perturbed(base: &StoModel, epsilon: f64) -> Result<StoModel> {
    StoModel::new(
        base.map().with_epsilon(epsilon)?,
        base.coupling().clone(),
        base.max_mode(),
    )
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn check_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(StoError::InvalidInput(
            "epsilons must be positive and nonempty".into(),
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosenessRow {
    pub epsilon: f64,
    /// `||h_eps - 1||_{W^{1,1}}`.
    pub distance: f64,
    /// `distance / eps`.
    pub ratio: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Closeness {
    pub rows: Vec<ClosenessRow>,
    /// `max ratio / min ratio` over the grid.
    pub spread: f64,
    /// Log-log slope of `distance` against `eps`.
    pub order: f64,
}

/// Distance of the fixed density of the `eps`-perturbed map from the uniform density.
pub fn fixed_density_closeness(base: &StoModel, epsilons: &[f64], tol: f64) -> Result<Closeness> {
    check_epsilons(epsilons)?;
    let one = CircleDensity::constant(base.max_mode(), 1.0);
    let rows = exec::try_map_indexed(epsilons.len(), |i| {
        let eps = epsilons[i];
        let fp = uniform_fixed_point(&perturbed(base, eps)?, tol)?;
        let distance = (&fp.h - &one).w11();
        Ok::<_, StoError>(ClosenessRow {
            epsilon: eps,
            distance,
            ratio: distance / eps,
            residual: fp.residual,
            iterations: fp.iterations,
            converged: fp.converged,
        })
    })?;
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let dist: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    Ok(Closeness {
        spread: spread(rows.iter().map(|r| r.ratio)),
        order: loglog_slope(&eps, &dist, 0.0),
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct KlRow {
    pub epsilon: f64,
    /// Sampled `sup ||dL_eps g - dL_0 g||_{L^1}` over unit `W^{1,1}` zero-average `g`.
    pub sup_difference: f64,
    pub c3: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KlCloseness {
    pub rows: Vec<KlRow>,
    pub spread: f64,
}

/// Weak closeness of the differentials at the perturbed and unperturbed fixed points.
pub fn kl_weak_closeness(
    base: &StoModel,
    epsilons: &[f64],
    ensemble: usize,
    seed: u64,
    tol: f64,
) -> Result<KlCloseness> {
    check_epsilons(epsilons)?;
    let at = |eps: f64| -> Result<_> {
        let m = perturbed(base, eps)?;
        let fp = uniform_fixed_point(&m, tol)?;
        differential_matrix(&m, &fp.h)
    };
    let d0 = at(0.0)?;
    let members = ensemble::probe_ensemble(base.max_mode(), ensemble, seed);
    let rows = exec::try_map_indexed(epsilons.len(), |i| {
        let eps = epsilons[i];
        let diff = at(eps)?.sub(&d0);
        let sup = members
            .iter()
            .map(|g| diff.apply(g).l1() / g.w11())
            .fold(0.0, f64::max);
        Ok::<_, StoError>(KlRow {
            epsilon: eps,
            sup_difference: sup,
            c3: sup / eps,
        })
    })?;
    Ok(KlCloseness {
        spread: spread(rows.iter().map(|r| r.c3)),
        rows,
    })
}
