//! Mean-field coupling maps, their pushforwards, barycenter statistics and
//! the wrapped-Gaussian target of the variance-type (stochastic) coupling.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::CircleDensity;
use crate::error::{Result, StoError};
use crate::exec;
use crate::maps::oscillatory_matrix;
use crate::operator::OperatorMatrix;
use crate::spectral;

/// Barycenter weights below this are treated as zero.
pub const W_FLOOR: f64 = 1e-12;

/// One term `cos * cos(2 pi (p x + q y)) + sin * sin(2 pi (p x + q y))` of a kernel `H(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTerm {
    pub p: i32,
    pub q: i32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BivariateKernel {
    terms: Vec<KernelTerm>,
    // complex coefficients H_{pq} of e^{2 pi i (p x + q y)}
    coeffs: Vec<(i32, i32, Complex64)>,
}

impl BivariateKernel {
    pub fn new(terms: Vec<KernelTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(StoError::InvalidInput(
                "kernel needs at least one term".into(),
            ));
        }
        let mut coeffs: Vec<(i32, i32, Complex64)> = Vec::new();
        let mut push = |p: i32, q: i32, c: Complex64| {
            if let Some(e) = coeffs.iter_mut().find(|e| e.0 == p && e.1 == q) {
                e.2 += c;
            } else {
                coeffs.push((p, q, c));
            }
        };
        for t in &terms {
            if !(t.cos.is_finite() && t.sin.is_finite()) {
                return Err(StoError::InvalidInput(
                    "non-finite kernel coefficient".into(),
                ));
            }
            push(t.p, t.q, Complex64::new(0.5 * t.cos, -0.5 * t.sin));
            push(-t.p, -t.q, Complex64::new(0.5 * t.cos, 0.5 * t.sin));
        }
        Ok(BivariateKernel { terms, coeffs })
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    pub fn max_x_mode(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.p.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let th = TAU * (t.p as f64 * x + t.q as f64 * y);
                t.cos * th.cos() + t.sin * th.sin()
            })
            .sum()
    }

    /// Upper bound for `sup |d^j/dx^j H|` from the term amplitudes.
    pub fn x_derivative_bound(&self, order: i32) -> f64 {
        self.terms
            .iter()
            .map(|t| t.cos.hypot(t.sin) * (TAU * t.p.unsigned_abs() as f64).powi(order))
            .sum()
    }

    /// Coefficients of `x -> int H(x, y) f(y) dy`.
    pub fn integrate_against(&self, f: &CircleDensity) -> CircleDensity {
        let pmax = self.max_x_mode().max(1);
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * pmax + 1];
        for &(p, q, c) in &self.coeffs {
            out[(p as i64 + pmax as i64) as usize] += c * f.coeff(-(q as i64));
        }
        CircleDensity::from_coeffs(pmax, out).expect("kernel integral has the right shape")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CouplingModel {
    /// `H(x, y) = H(y)`: every point moves by the same amount.
    Translation {
        h: CircleDensity,
        delta: f64,
    },
    GeneralKernel {
        kernel: BivariateKernel,
        delta: f64,
    },
    /// `(1 - delta W_f) L_T f + delta W_f psi_f` with `psi_f` a wrapped Gaussian at the barycenter.
    Stochastic {
        sigma: f64,
        delta: f64,
    },
}

fn check_delta(delta: f64) -> Result<()> {
    if delta >= 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(StoError::InvalidInput(format!(
            "coupling strength must be finite and nonnegative, got {delta}"
        )))
    }
}

impl CouplingModel {
    pub fn translation(h: CircleDensity, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(CouplingModel::Translation { h, delta })
    }

    pub fn general_kernel(terms: Vec<KernelTerm>, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        let kernel = BivariateKernel::new(terms)?;
        let bound = delta * kernel.x_derivative_bound(1);
        if bound >= 1.0 {
            return Err(StoError::InvalidInput(format!(
                "delta * sup|d_x H| = {bound} must be below 1"
            )));
        }
        Ok(CouplingModel::GeneralKernel { kernel, delta })
    }

    pub fn stochastic(sigma: f64, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(StoError::InvalidInput(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(CouplingModel::Stochastic { sigma, delta })
    }

    pub fn delta(&self) -> f64 {
        match self {
            CouplingModel::Translation { delta, .. }
            | CouplingModel::GeneralKernel { delta, .. }
            | CouplingModel::Stochastic { delta, .. } => *delta,
        }
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        match self {
            CouplingModel::Translation { h, .. } => Self::translation(h.clone(), delta),
            CouplingModel::GeneralKernel { kernel, .. } => {
                Self::general_kernel(kernel.terms.clone(), delta)
            }
            CouplingModel::Stochastic { sigma, .. } => Self::stochastic(*sigma, delta),
        }
    }

    /// Worst-case deviation of the coupling map's derivative from 1.
    pub fn shift_bound(&self) -> f64 {
        match self {
            CouplingModel::GeneralKernel { kernel, delta } => delta * kernel.x_derivative_bound(1),
            _ => 0.0,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, CouplingModel::Stochastic { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CouplingModel::Translation { .. } => "translation",
            CouplingModel::GeneralKernel { .. } => "general-kernel",
            CouplingModel::Stochastic { .. } => "stochastic",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Diffeo {
    /// `x -> x + a`.
    Shift {
        a: f64,
    },
    Sampled(SampledDiffeo),
}

/// `x -> x + u(x)` with `u` a trigonometric polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledDiffeo {
    displacement: CircleDensity,
    min_derivative: f64,
    max_derivative: f64,
    max_second_derivative: f64,
}

impl SampledDiffeo {
    pub fn new(displacement: CircleDensity) -> Result<Self> {
        let m = 512 * displacement.max_mode();
        let d1 = displacement.derivative();
        let d2 = d1.derivative();
        let v1 = d1.evaluate(m);
        let min_derivative = v1.iter().fold(f64::INFINITY, |a, v| a.min(1.0 + v));
        let max_derivative = v1.iter().fold(0.0f64, |a, v| a.max((1.0 + v).abs()));
        let max_second_derivative = d2.evaluate(m).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(min_derivative > 0.0) {
            return Err(StoError::NotDiffeomorphism { min_derivative });
        }
        Ok(SampledDiffeo {
            displacement,
            min_derivative,
            max_derivative,
            max_second_derivative,
        })
    }

    pub fn identity() -> Self {
        Self::new(CircleDensity::zero(1)).expect("identity is a diffeomorphism")
    }

    pub fn displacement(&self) -> &CircleDensity {
        &self.displacement
    }

    pub fn min_derivative(&self) -> f64 {
        self.min_derivative
    }

    pub fn max_derivative(&self) -> f64 {
        self.max_derivative
    }

    pub fn max_second_derivative(&self) -> f64 {
        self.max_second_derivative
    }

    pub fn eval_lift(&self, x: f64) -> f64 {
        x + self.displacement.value_at(x)
    }

    /// Lifted values on the uniform `m`-point grid.
    pub fn lift_on_grid(&self, m: usize) -> Vec<f64> {
        let u = self.displacement.evaluate(m);
        spectral::grid(m).zip(u).map(|(x, v)| x + v).collect()
    }

    /// Grid size resolving `e^{-2 pi i n Phi} f` for `|n| <= N` and `f` with modes up to `N`.
    fn quadrature_size(&self, max_mode: usize) -> usize {
        let p = self.displacement.max_mode();
        let amp: f64 = self.displacement.coeffs().iter().map(|c| c.norm()).sum();
        let spread = (TAU * max_mode as f64 * amp).ceil() as usize + 8;
        (8 * (2 * max_mode + p * spread)).next_power_of_two()
    }

    /// Matrix of `f -> [Phi]_* f` at truncation `N`.
    pub fn pushforward_matrix(&self, max_mode: usize) -> OperatorMatrix {
        let m = self.quadrature_size(max_mode);
        oscillatory_matrix(&self.lift_on_grid(m), max_mode)
    }
}

/// The coupling map for the current state `f`.
pub fn mean_field_map(c: &CouplingModel, f: &CircleDensity) -> Result<Diffeo> {
    match c {
        CouplingModel::Translation { h, delta } => Ok(Diffeo::Shift {
            a: delta * pairing(h, f),
        }),
        CouplingModel::GeneralKernel { kernel, delta } => {
            let u = kernel.integrate_against(f).scale(*delta);
            Ok(Diffeo::Sampled(SampledDiffeo::new(u)?))
        }
        CouplingModel::Stochastic { .. } => Err(StoError::Unsupported(
            "the stochastic coupling has no coupling diffeomorphism".into(),
        )),
    }
}

/// `int H(y) f(y) dy = sum_n H_n f_{-n}`.
pub fn pairing(h: &CircleDensity, f: &CircleDensity) -> f64 {
    let k = h.max_mode().min(f.max_mode()) as i64;
    (-k..=k)
        .map(|n| h.coeff(n) * f.coeff(-n))
        .sum::<Complex64>()
        .re
}

pub fn pushforward(f: &CircleDensity, d: &Diffeo) -> Result<CircleDensity> {
    match d {
        Diffeo::Shift { a } => Ok(shift(f, *a)),
        Diffeo::Sampled(s) => {
            let n0 = f.max_mode();
            let m = s.quadrature_size(n0);
            let fv = f.evaluate(m);
            let lift = s.lift_on_grid(m);
            let scale = 1.0 / m as f64;
            let upper: Vec<Complex64> = exec::map_indexed(n0 + 1, |n| {
                fv.iter()
                    .zip(&lift)
                    .map(|(v, t)| *v * spectral::e(-((n as f64 * t).rem_euclid(1.0))))
                    .sum::<Complex64>()
                    * scale
            });
            let drift = (upper[0].re - f.mass()).abs();
            if drift > 1e-8 {
                return Err(StoError::Quadrature(format!(
                    "pushforward mass drift {drift:e}"
                )));
            }
            let mut upper = upper;
            upper[0] = Complex64::new(f.mass(), 0.0);
            CircleDensity::from_nonnegative(n0, &upper)
        }
    }
}

/// `f(x - a)`.
pub fn shift(f: &CircleDensity, a: f64) -> CircleDensity {
    f.map_coeffs(|n, c| c * spectral::e(-(n as f64 * a).rem_euclid(1.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Barycenter {
    pub z: Complex64,
    pub weight: f64,
    pub xbar: f64,
    pub degenerate: bool,
}

pub fn barycenter_stats(f: &CircleDensity) -> Barycenter {
    let z = f.coeff(-1);
    let weight = z.norm_sqr();
    let degenerate = weight <= W_FLOOR;
    let xbar = if degenerate {
        0.0
    } else {
        (z.arg() / TAU).rem_euclid(1.0)
    };
    Barycenter {
        z,
        weight,
        xbar,
        degenerate,
    }
}

/// Wrapped normal density centred at `xbar` with standard deviation `sigma` (circle units).
pub fn wrapped_gaussian(xbar: f64, sigma: f64, max_mode: usize) -> CircleDensity {
    let s = 2.0 * PI * PI * sigma * sigma;
    let mut nonneg = Vec::with_capacity(max_mode + 1);
    for n in 0..=max_mode {
        let nf = n as f64;
        nonneg.push(spectral::e(-(nf * xbar).rem_euclid(1.0)) * (-s * nf * nf).exp());
    }
    CircleDensity::from_nonnegative(max_mode, &nonneg).expect("wrapped Gaussian shape")
}

/// Linear functional `g -> dW(g) = 2 Re(conj(z) g_{-1})` as coefficient weights.
pub fn weight_gradient(f: &CircleDensity) -> Vec<Complex64> {
    let n0 = f.max_mode();
    let z = f.coeff(-1);
    let mut v = vec![Complex64::new(0.0, 0.0); 2 * n0 + 1];
    v[n0 - 1] = z.conj();
    v[n0 + 1] = z;
    v
}

/// Linear functional `g -> d xbar(g)` as coefficient weights.
pub fn barycenter_gradient(f: &CircleDensity) -> Result<Vec<Complex64>> {
    let b = barycenter_stats(f);
    if b.degenerate {
        return Err(StoError::DegenerateBarycenter { weight: b.weight });
    }
    let n0 = f.max_mode();
    let r = b.z.norm();
    let zhat = b.z / r;
    let denom = Complex64::new(0.0, 4.0 * PI * r * r);
    let mut v = vec![Complex64::new(0.0, 0.0); 2 * n0 + 1];
    v[n0 - 1] = zhat.conj() * r / denom;
    v[n0 + 1] = -zhat * r / denom;
    Ok(v)
}

/// Derivative of `phi -> psi_phi` as a rank-one matrix at truncation `max_mode`.
pub fn psi_dot_matrix(phi: &CircleDensity, sigma: f64, max_mode: usize) -> Result<OperatorMatrix> {
    let phi = phi.resized(max_mode);
    let v = barycenter_gradient(&phi)?;
    let b = barycenter_stats(&phi);
    let u = wrapped_gaussian(b.xbar, sigma, max_mode)
        .derivative()
        .scale(-1.0);
    Ok(OperatorMatrix::rank_one(&u, &v))
}

/// Exact operator norms of `psi_dot` from `L^1` into `W^{1,1}` and `W^{2,1}`:
/// `|d xbar(g)| <= ||g||_1 / (2 pi |z|)` with equality approached by point masses.
pub fn psi_dot_norms(phi: &CircleDensity, sigma: f64, max_mode: usize) -> Result<(f64, f64)> {
    let b = barycenter_stats(phi);
    if b.degenerate {
        return Err(StoError::DegenerateBarycenter { weight: b.weight });
    }
    let dpsi = wrapped_gaussian(b.xbar, sigma, max_mode).derivative();
    let n = dpsi.analytic_norms();
    let k = 1.0 / (TAU * b.z.norm());
    Ok((k * n.strong, k * n.strongest))
}
