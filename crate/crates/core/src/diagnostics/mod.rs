//! Experiments on the self-consistent operator: local contraction, convergence
//! to equilibrium, the standing-assumption audit, coupling sweeps, sequential
//! loss of memory and a finite-particle cross-check.

mod audit;
mod closeness;
mod losc;
mod memory;
pub mod particles;
mod sweep;

pub use audit::{
    assumption_audit, sequential_ly, AuditReport, SequentialLy, AUDIT_STEPS, EQ_STEPS,
};
pub use closeness::{
    fixed_density_closeness, kl_weak_closeness, Closeness, ClosenessRow, KlCloseness, KlRow,
};
pub use losc::{
    equilibrium_decay, losc_experiment, multi_start, LoscOutcome, MultiStart, LOSC_SHRINK,
};
pub use memory::{memory_loss_experiment, MemoryLoss, MemoryRow, POOL_SIZE};
pub use particles::{crosscheck_scaling, ensemble_crosscheck, Crosscheck, Scaling, ScalingRow};
pub use sweep::{
    strong_regime_scan, weak_coupling_sweep, ScanParams, StrongRow, StrongScan, Sweep, SweepRow,
};

pub use crate::fit::DecayFit;

use crate::density::CircleDensity;
use crate::error::Result;
use crate::sto::{FixedPointReport, Solver, StoModel};

/// Iteration cap for the fixed points computed inside experiments.
pub const FIXED_POINT_MAX_ITER: usize = 500;

/// Fixed point from the uniform density, Newton where available.
pub fn uniform_fixed_point(m: &StoModel, tol: f64) -> Result<FixedPointReport> {
    let one = CircleDensity::constant(m.max_mode(), 1.0);
    m.fixed_point(&one, tol, FIXED_POINT_MAX_ITER, Solver::Newton)
}
