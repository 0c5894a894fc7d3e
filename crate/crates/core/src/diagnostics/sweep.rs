use serde::Serialize;

use super::{losc_experiment, uniform_fixed_point};
use crate::coupling::{barycenter_stats, psi_dot_norms, wrapped_gaussian, CouplingModel};
use crate::density::CircleDensity;
use crate::differential::{contraction_report, coupling_derivative_matrix, differential_matrix};
use crate::error::{Result, StoError};
use crate::exec;
use crate::maps::ExpandingMapSpec;
use crate::sto::{StoModel, FIXED_POINT_GATE};

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub converged: bool,
    pub residual: f64,
    pub first_contracting_n: Option<usize>,
    /// Proxy norm of `dL^n` for the sweep's `n`.
    pub proxy_norm: Option<f64>,
    /// Strong coefficient norm of the coupling term alone.
    pub coupling_norm: Option<f64>,
    pub flag: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Sweep {
    pub n: usize,
    pub rows: Vec<SweepRow>,
    /// Largest `delta` such that every row up to it has proxy norm below one.
    pub delta_one: Option<f64>,
}

fn sweep_row(base: &StoModel, delta: f64, n: usize, tol: f64) -> SweepRow {
    let mut row = SweepRow {
        delta,
        converged: false,
        residual: f64::NAN,
        first_contracting_n: None,
        proxy_norm: None,
        coupling_norm: None,
        flag: None,
    };
    let result = (|| -> Result<()> {
        let m = base.with_delta(delta)?;
        let fp = uniform_fixed_point(&m, tol)?;
        row.converged = fp.converged;
        row.residual = fp.residual;
        if !fp.converged {
            return Err(StoError::NotFixedPoint {
                residual: fp.residual,
            });
        }
        let dl = differential_matrix(&m, &fp.h)?;
        let norms = dl.block_power_norms(n);
        row.first_contracting_n = norms.iter().position(|&p| p < 1.0).map(|i| i + 1);
        row.proxy_norm = norms.last().copied();
        row.coupling_norm = Some(coupling_derivative_matrix(&m, &fp.h)?.strong_coefficient_norm());
        Ok(())
    })();
    if let Err(e) = result {
        row.flag = Some(e.to_string());
    }
    row
}

/// Fixed point, differential and `||dL^n||` proxy for each `delta`; rows that fail are flagged.
pub fn weak_coupling_sweep(base: &StoModel, deltas: &[f64], n: usize, tol: f64) -> Result<Sweep> {
    if deltas.windows(2).any(|w| w[1] < w[0]) {
        return Err(StoError::InvalidInput(
            "deltas must be sorted ascending".into(),
        ));
    }
    if n == 0 {
        return Err(StoError::InvalidInput("n must be at least 1".into()));
    }
    let rows = exec::map_indexed(deltas.len(), |i| sweep_row(base, deltas[i], n, tol));
    let delta_one = rows
        .iter()
        .take_while(|r| r.proxy_norm.is_some_and(|p| p < 1.0))
        .last()
        .map(|r| r.delta)
        .filter(|&d| d > 0.0);
    Ok(Sweep { n, rows, delta_one })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanParams {
    pub max_mode: usize,
    /// Perturbation size for the local contraction experiments.
    pub epsilon: f64,
    pub ensemble: usize,
    pub n_steps: usize,
    /// Powers of the differential examined at the concentrated candidate.
    pub n_max: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongRow {
    pub sigma: f64,
    pub delta: f64,
    /// `W` of the concentrated candidate.
    pub weight: f64,
    pub delta_weight: f64,
    pub psi_residual: f64,
    pub psi_fixed: bool,
    /// Exact `L^1 -> W^{1,1}` norm of the barycenter response.
    pub psi_dot_weak_to_strong: Option<f64>,
    /// `min_n proxy_n^{1/n}` for the differential at the candidate.
    pub psi_dot_contraction: Option<f64>,
    pub psi_dot_proxy: Vec<f64>,
    pub psi_dot_empirical: Vec<f64>,
    pub psi_dot_spectral_radius: Option<f64>,
    pub admissible: bool,
    pub h0_gamma: f64,
    pub h0_pass: bool,
    pub psi_gamma: Option<f64>,
    pub flag: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongScan {
    pub rows: Vec<StrongRow>,
    /// First admissible `(sigma, delta)` where both fixed points contract, if any.
    pub admissible: Option<(f64, f64)>,
    pub h0_pass_all: bool,
}

fn strong_row(map: &ExpandingMapSpec, sigma: f64, delta: f64, p: &ScanParams) -> Result<StrongRow> {
    let m = StoModel::new(
        map.clone(),
        CouplingModel::stochastic(sigma, delta)?,
        p.max_mode,
    )?;
    let h0 = CircleDensity::constant(p.max_mode, 1.0);
    let h0_fit = losc_experiment(&m, &h0, p.epsilon, p.ensemble, p.n_steps, p.seed)?;
    let h0_gamma = h0_fit.fit.gamma;
    // any centre works: the candidate's barycenter is its centre
    let psi = wrapped_gaussian(0.25, sigma, p.max_mode);
    let weight = barycenter_stats(&psi).weight;
    let psi_residual = m.residual(&psi)?;
    let mut row = StrongRow {
        sigma,
        delta,
        weight,
        delta_weight: delta * weight,
        psi_residual,
        psi_fixed: psi_residual <= FIXED_POINT_GATE && delta * weight > 1.0,
        psi_dot_weak_to_strong: None,
        psi_dot_contraction: None,
        psi_dot_proxy: Vec::new(),
        psi_dot_empirical: Vec::new(),
        psi_dot_spectral_radius: None,
        admissible: false,
        h0_gamma,
        h0_pass: h0_gamma > 0.0 && h0_fit.flag.is_none(),
        psi_gamma: None,
        flag: h0_fit.flag,
    };
    if !row.psi_fixed {
        return Ok(row);
    }
    row.psi_dot_weak_to_strong = Some(psi_dot_norms(&psi, sigma, p.max_mode)?.0);
    let report = contraction_report(&differential_matrix(&m, &psi)?, p.n_max, p.ensemble, p.seed);
    let factor = report.contraction_factor();
    row.psi_dot_contraction = Some(factor);
    row.psi_dot_spectral_radius = Some(report.spectral_radius);
    row.psi_dot_proxy = report.proxy_norms;
    row.psi_dot_empirical = report.empirical_norms;
    if factor < 1.0 {
        let fit = losc_experiment(&m, &psi, p.epsilon, p.ensemble, p.n_steps, p.seed)?;
        row.psi_gamma = Some(fit.fit.gamma);
        row.admissible = fit.fit.gamma > 0.0 && fit.flag.is_none();
    }
    Ok(row)
}

/// Looks for `(sigma, delta)` where the concentrated wrapped Gaussian is a fixed point in the
/// strong branch (`delta W > 1`) whose differential contracts, and checks the uniform
/// density's local contraction at every grid point.
pub fn strong_regime_scan(
    map: &ExpandingMapSpec,
    sigmas: &[f64],
    deltas: &[f64],
    params: &ScanParams,
) -> Result<StrongScan> {
    let grid: Vec<(f64, f64)> = sigmas
        .iter()
        .flat_map(|&s| deltas.iter().map(move |&d| (s, d)))
        .collect();
    let rows = exec::map_indexed(grid.len(), |i| {
        let (s, d) = grid[i];
        strong_row(map, s, d, params)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(StrongScan {
        admissible: rows
            .iter()
            .find(|r| r.admissible && r.h0_pass)
            .map(|r| (r.sigma, r.delta)),
        h0_pass_all: rows.iter().all(|r| r.h0_pass),
        rows,
    })
}
