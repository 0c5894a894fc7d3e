//! The self-consistent transfer operator `f -> L_{delta,f} f` and its fixed points.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::{
    self, barycenter_stats, psi_dot_matrix, weight_gradient, wrapped_gaussian, CouplingModel,
    Diffeo,
};
use crate::density::CircleDensity;
use crate::error::{Result, StoError};
use crate::maps::ExpandingMapSpec;
use crate::operator::{zero_average_block, OperatorMatrix};

/// Residual below which a density counts as a fixed point for differential assembly.
pub const FIXED_POINT_GATE: f64 = 1e-8;
/// Newton falls back to Picard above this condition number.
pub const MAX_CONDITION: f64 = 1e12;
const MASS_DRIFT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct StoModel {
    map: ExpandingMapSpec,
    coupling: CouplingModel,
    max_mode: usize,
    transfer: OperatorMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Picard,
    Newton,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPointReport {
    pub h: CircleDensity,
    /// `||L h - h||` in `W^{1,1}`.
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub solver: Solver,
    pub converged: bool,
    /// Why Newton handed over to Picard, if it did.
    pub fallback: Option<String>,
}

impl StoModel {
    pub fn new(map: ExpandingMapSpec, coupling: CouplingModel, max_mode: usize) -> Result<Self> {
        if max_mode == 0 {
            return Err(StoError::InvalidInput(
                "truncation must be at least 1".into(),
            ));
        }
        map.expansion_audit(coupling.shift_bound())?;
        let transfer = map.transfer_matrix(max_mode)?;
        Ok(StoModel {
            map,
            coupling,
            max_mode,
            transfer,
        })
    }

    /// Same map and truncation with a different coupling strength.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        let coupling = self.coupling.with_delta(delta)?;
        self.map.expansion_audit(coupling.shift_bound())?;
        Ok(StoModel {
            map: self.map.clone(),
            coupling,
            max_mode: self.max_mode,
            transfer: self.transfer.clone(),
        })
    }

    pub fn map(&self) -> &ExpandingMapSpec {
        &self.map
    }

    pub fn coupling(&self) -> &CouplingModel {
        &self.coupling
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn delta(&self) -> f64 {
        self.coupling.delta()
    }

    /// Transfer matrix of the uncoupled map.
    pub fn transfer(&self) -> &OperatorMatrix {
        &self.transfer
    }

    fn check_dim(&self, f: &CircleDensity) -> Result<()> {
        if f.max_mode() == self.max_mode {
            Ok(())
        } else {
            Err(StoError::DimensionMismatch {
                expected: self.max_mode,
                found: f.max_mode(),
            })
        }
    }

    pub fn apply(&self, f: &CircleDensity) -> Result<CircleDensity> {
        self.check_dim(f)?;
        let out = match &self.coupling {
            CouplingModel::Stochastic { sigma, delta } => {
                let b = barycenter_stats(f);
                let psi = wrapped_gaussian(b.xbar, *sigma, self.max_mode).scale(f.mass());
                let s = delta * b.weight;
                if s <= 1.0 {
                    &self.transfer.apply(f).scale(1.0 - s) + &psi.scale(s)
                } else {
                    psi
                }
            }
            _ => {
                let d = coupling::mean_field_map(&self.coupling, f)?;
                self.transfer.apply(&coupling::pushforward(f, &d)?)
            }
        };
        let drift = (out.mass() - f.mass()).abs();
        if drift > MASS_DRIFT_TOL {
            return Err(StoError::MassDrift { drift });
        }
        Ok(out.with_mass(f.mass()))
    }

    /// `||L f - f||_{W^{1,1}}`.
    pub fn residual(&self, f: &CircleDensity) -> Result<f64> {
        Ok((&self.apply(f)? - f).analytic_norms().strong)
    }

    /// Errors unless `h` is a fixed point to within [`FIXED_POINT_GATE`].
    pub fn require_fixed(&self, h: &CircleDensity) -> Result<f64> {
        let residual = self.residual(h)?;
        if residual <= FIXED_POINT_GATE {
            Ok(residual)
        } else {
            Err(StoError::NotFixedPoint { residual })
        }
    }

    /// Matrix of the linear operator `g -> L_{delta,f} g` with the coupling frozen at `f`.
    pub fn frozen_operator(&self, f: &CircleDensity) -> Result<OperatorMatrix> {
        self.check_dim(f)?;
        match &self.coupling {
            CouplingModel::Translation { .. } => {
                let Diffeo::Shift { a } = coupling::mean_field_map(&self.coupling, f)? else {
                    unreachable!("translation coupling yields a shift")
                };
                let phases: Vec<Complex64> = f
                    .modes()
                    .map(|n| crate::spectral::e(-(n as f64 * a).rem_euclid(1.0)))
                    .collect();
                Ok(self
                    .transfer
                    .compose(&OperatorMatrix::diagonal(self.max_mode, &phases)))
            }
            CouplingModel::GeneralKernel { .. } => {
                let Diffeo::Sampled(s) = coupling::mean_field_map(&self.coupling, f)? else {
                    unreachable!("kernel coupling yields a sampled diffeomorphism")
                };
                Ok(self.transfer.compose(&s.pushforward_matrix(self.max_mode)))
            }
            CouplingModel::Stochastic { sigma, delta } => {
                let b = barycenter_stats(f);
                let s = delta * b.weight;
                let psi = wrapped_gaussian(b.xbar, *sigma, self.max_mode);
                let mass_part = OperatorMatrix::rank_one(&psi, &mass_functional(self.max_mode));
                if s <= 1.0 {
                    Ok(self.transfer.scale(1.0 - s).add(&mass_part.scale(s)))
                } else {
                    Ok(mass_part)
                }
            }
        }
    }

    /// Derivative of `f' -> L_{delta,f'} f` at `f' = f` (no fixed-point gate).
    pub fn coupling_jacobian(&self, f: &CircleDensity) -> Result<OperatorMatrix> {
        self.check_dim(f)?;
        let n0 = self.max_mode;
        match &self.coupling {
            CouplingModel::Translation { h, delta } => {
                let a = delta * coupling::pairing(h, f);
                // d/da [f(x - a)] = -f'(x - a)
                let u = self
                    .transfer
                    .apply(&coupling::shift(&f.derivative(), a))
                    .scale(-delta);
                let v: Vec<Complex64> = f.modes().map(|m| h.coeff(-m)).collect();
                Ok(OperatorMatrix::rank_one(&u, &v))
            }
            CouplingModel::GeneralKernel { .. } => Err(StoError::Unsupported(
                "the coupling derivative is only assembled for translation and stochastic couplings"
                    .into(),
            )),
            CouplingModel::Stochastic { sigma, delta } => {
                let b = barycenter_stats(f);
                if b.degenerate {
                    return Ok(OperatorMatrix::zeros(n0));
                }
                let s = delta * b.weight;
                let psi_dot = psi_dot_matrix(f, *sigma, n0)?.scale(f.mass());
                if s > 1.0 {
                    return Ok(psi_dot);
                }
                let psi = wrapped_gaussian(b.xbar, *sigma, n0).scale(f.mass());
                let direction = &psi - &self.transfer.apply(f);
                let dw = weight_gradient(f);
                Ok(OperatorMatrix::rank_one(&direction.scale(*delta), &dw).add(&psi_dot.scale(s)))
            }
        }
    }

    /// Full derivative of the nonlinear operator at `f` (no fixed-point gate).
    pub fn jacobian(&self, f: &CircleDensity) -> Result<OperatorMatrix> {
        Ok(self.frozen_operator(f)?.add(&self.coupling_jacobian(f)?))
    }

    pub fn fixed_point(
        &self,
        f0: &CircleDensity,
        tol: f64,
        max_iter: usize,
        solver: Solver,
    ) -> Result<FixedPointReport> {
        self.check_dim(f0)?;
        if !(tol > 0.0) {
            return Err(StoError::InvalidInput(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let mut report = FixedPointReport {
            h: f0.clone(),
            residual: f64::INFINITY,
            iterations: 0,
            history: Vec::new(),
            solver,
            converged: false,
            fallback: None,
        };
        let mut f = f0.clone();
        let mut use_newton = solver == Solver::Newton;
        if use_newton
            && !matches!(
                self.coupling,
                CouplingModel::Translation { .. } | CouplingModel::Stochastic { .. }
            )
        {
            use_newton = false;
            report.fallback = Some("no coupling derivative for this kernel".into());
        }
        loop {
            let lf = self.apply(&f)?;
            let residual = (&lf - &f).analytic_norms().strong;
            report.history.push(residual);
            report.h = f.clone();
            report.residual = residual;
            if residual <= tol {
                report.converged = true;
                return Ok(report);
            }
            if report.iterations >= max_iter || !residual.is_finite() {
                return Ok(report);
            }
            report.iterations += 1;
            if use_newton {
                match self.newton_step(&f, &lf)? {
                    NewtonStep::Step(next) => {
                        f = next;
                        continue;
                    }
                    NewtonStep::IllConditioned(cond) => {
                        use_newton = false;
                        report.fallback = Some(format!("condition estimate {cond:.3e}"));
                    }
                }
            }
            f = lf;
        }
    }

    fn newton_step(&self, f: &CircleDensity, lf: &CircleDensity) -> Result<NewtonStep> {
        let n0 = self.max_mode;
        let j = self.jacobian(f)?;
        let block = zero_average_block(j.matrix(), n0);
        let d = block.nrows();
        let system = DMatrix::<Complex64>::identity(d, d) - block;
        let sv = system.clone().singular_values();
        let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
        let smin = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let cond = if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        };
        if !(cond <= MAX_CONDITION) {
            return Ok(NewtonStep::IllConditioned(cond));
        }
        let r = lf - f;
        let rhs: Vec<Complex64> = r
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != n0)
            .map(|(_, c)| *c)
            .collect();
        let Some(delta) = system.lu().solve(&DVector::from_vec(rhs)) else {
            return Ok(NewtonStep::IllConditioned(f64::INFINITY));
        };
        let mut full = Vec::with_capacity(2 * n0 + 1);
        full.extend_from_slice(&delta.as_slice()[..n0]);
        full.push(Complex64::new(0.0, 0.0));
        full.extend_from_slice(&delta.as_slice()[n0..]);
        let step = CircleDensity::from_coeffs(n0, full)?;
        Ok(NewtonStep::Step(f + &step))
    }
}

enum NewtonStep {
    Step(CircleDensity),
    IllConditioned(f64),
}

/// The functional `g -> mass(g)`.
pub fn mass_functional(max_mode: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 2 * max_mode + 1];
    v[max_mode] = Complex64::new(1.0, 0.0);
    v
}

pub fn sto_apply(m: &StoModel, f: &CircleDensity) -> Result<CircleDensity> {
    m.apply(f)
}

pub fn fixed_point(
    m: &StoModel,
    f0: &CircleDensity,
    tol: f64,
    max_iter: usize,
    solver: Solver,
) -> Result<FixedPointReport> {
    m.fixed_point(f0, tol, max_iter, solver)
}
