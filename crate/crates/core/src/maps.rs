//! Expanding circle maps `T(x) = k x + eps p(x) mod 1` and their transfer matrices.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::density::CircleDensity;
use crate::error::{Result, StoError};
use crate::exec;
use crate::operator::OperatorMatrix;
use crate::spectral;

pub const MAX_PERTURBATION_MODE: usize = 8;
const AUDIT_GRID: usize = 4096;

#[derive(Clone, Debug)]
pub struct ExpandingMapSpec {
    degree: u32,
    perturbation: CircleDensity,
    epsilon: f64,
    sigma_prime: f64,
    c3_bound: f64,
}

impl ExpandingMapSpec {
    pub fn new(degree: u32, perturbation: CircleDensity, epsilon: f64) -> Result<Self> {
        if degree < 2 {
            return Err(StoError::InvalidInput(format!(
                "degree must be at least 2, got {degree}"
            )));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(StoError::InvalidInput(format!(
                "epsilon must be finite and nonnegative, got {epsilon}"
            )));
        }
        if perturbation.max_mode() > MAX_PERTURBATION_MODE {
            return Err(StoError::InvalidInput(format!(
                "perturbation uses modes up to {}, limit is {MAX_PERTURBATION_MODE}",
                perturbation.max_mode()
            )));
        }
        let mut spec = ExpandingMapSpec {
            degree,
            perturbation,
            epsilon,
            sigma_prime: 0.0,
            c3_bound: 0.0,
        };
        let (s, c) = spec.expansion_audit(0.0)?;
        spec.sigma_prime = s;
        spec.c3_bound = c;
        Ok(spec)
    }

    /// `x -> k x`.
    pub fn linear(degree: u32) -> Result<Self> {
        Self::new(degree, CircleDensity::zero(1), 0.0)
    }

    /// `x -> k x + eps sin(2 pi x)`.
    pub fn sine_perturbed(degree: u32, epsilon: f64) -> Result<Self> {
        Self::new(
            degree,
            CircleDensity::from_trig(1, 0.0, &[], &[1.0]),
            epsilon,
        )
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn perturbation(&self) -> &CircleDensity {
        &self.perturbation
    }

    pub fn sigma_prime(&self) -> f64 {
        self.sigma_prime
    }

    pub fn c3_bound(&self) -> f64 {
        self.c3_bound
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.degree, self.perturbation.clone(), epsilon)
    }

    /// Un-modded lift `k x + eps p(x)`.
    pub fn lift(&self, x: f64) -> f64 {
        self.degree as f64 * x + self.epsilon * self.perturbation_derivative(x, 0)
    }

    /// `T(x) mod 1` for order 0, the exact derivative otherwise.
    pub fn map_eval(&self, x: f64, order: u32) -> Result<f64> {
        match order {
            0 => Ok(self.lift(x).rem_euclid(1.0)),
            1 => Ok(self.degree as f64 + self.epsilon * self.perturbation_derivative(x, 1)),
            2 | 3 => Ok(self.epsilon * self.perturbation_derivative(x, order)),
            _ => Err(StoError::InvalidInput(format!(
                "derivative order must be 0..=3, got {order}"
            ))),
        }
    }

    fn perturbation_derivative(&self, x: f64, order: u32) -> f64 {
        let p = &self.perturbation;
        let mut acc = if order == 0 { p.mass() } else { 0.0 };
        for n in 1..=p.max_mode() as i64 {
            let c = p.coeff(n);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let factor = Complex64::new(0.0, TAU * n as f64).powu(order);
            acc += 2.0 * (c * factor * spectral::e(n as f64 * x)).re;
        }
        acc
    }

    /// Lower bound on the derivative of `T` composed with any coupling diffeomorphism
    /// whose derivative stays within `[1 - shift_bound, 1 + shift_bound]`, and the
    /// max of `|T|, |T'|, |T''|, |T'''|` on the audit grid.
    pub fn expansion_audit(&self, shift_bound: f64) -> Result<(f64, f64)> {
        if !(shift_bound >= 0.0) {
            return Err(StoError::InvalidInput(format!(
                "shift_bound must be nonnegative, got {shift_bound}"
            )));
        }
        let mut min_d1 = f64::INFINITY;
        let mut c3 = 0.0f64;
        for x in spectral::grid(AUDIT_GRID) {
            let d1 = self.map_eval(x, 1)?;
            min_d1 = min_d1.min(d1);
            c3 = c3
                .max(self.map_eval(x, 0)?.abs())
                .max(d1.abs())
                .max(self.map_eval(x, 2)?.abs())
                .max(self.map_eval(x, 3)?.abs());
        }
        let sigma_prime = min_d1 * (1.0 - shift_bound);
        if !(sigma_prime > 1.0) {
            return Err(StoError::NotExpanding { sigma_prime });
        }
        Ok((sigma_prime, c3))
    }

    fn max_derivative(&self) -> f64 {
        spectral::grid(AUDIT_GRID)
            .map(|x| self.degree as f64 + self.epsilon * self.perturbation_derivative(x, 1))
            .fold(0.0, f64::max)
    }

    pub fn transfer_matrix(&self, max_mode: usize) -> Result<OperatorMatrix> {
        if max_mode == 0 {
            return Err(StoError::InvalidInput(
                "truncation must be at least 1".into(),
            ));
        }
        let base = 8 * (max_mode + self.degree as usize * max_mode);
        // rectangle rule is exact once M exceeds the integrand bandwidth N (1 + max T')
        let bandwidth = (max_mode as f64 * (1.0 + self.max_derivative())).ceil() as usize;
        let mut m = base;
        for attempt in 0..2 {
            if m > bandwidth + max_mode {
                let lift: Vec<f64> = spectral::grid(m).map(|x| self.lift(x)).collect();
                let a = oscillatory_matrix(&lift, max_mode);
                let mass_defect = (-(max_mode as i64)..=max_mode as i64)
                    .map(|j| {
                        let want = if j == 0 { 1.0 } else { 0.0 };
                        (a.get(0, j) - Complex64::new(want, 0.0)).norm()
                    })
                    .fold(0.0, f64::max);
                if mass_defect <= 1e-10 {
                    return Ok(a);
                }
            }
            if attempt == 0 {
                m *= 2;
            }
        }
        Err(StoError::Quadrature(format!(
            "transfer matrix at N = {max_mode} needs more than {m} quadrature points"
        )))
    }
}

/// `A[n][m] = (1/M) sum_j e^{2 pi i m x_j} e^{-2 pi i n phi(x_j)}` with `x_j = j/M`,
/// where `phase[j] = phi(x_j)` is a lift of a circle map. Rows are assembled in parallel.
pub fn oscillatory_matrix(phase: &[f64], max_mode: usize) -> OperatorMatrix {
    let m = phase.len();
    assert!(m > 2 * max_mode, "quadrature grid too small");
    let d = 2 * max_mode + 1;
    let scale = 1.0 / m as f64;
    let upper: Vec<Vec<Complex64>> = exec::map_indexed(max_mode + 1, |n| {
        let mut buf: Vec<Complex64> = phase
            .iter()
            .map(|&t| spectral::e(-((n as f64 * t).rem_euclid(1.0))))
            .collect();
        spectral::fft_forward(&mut buf);
        (-(max_mode as i64)..=max_mode as i64)
            .map(|k| buf[(-k).rem_euclid(m as i64) as usize] * scale)
            .collect()
    });
    let mut rows = vec![Vec::new(); d];
    for (n, row) in upper.into_iter().enumerate() {
        if n > 0 {
            rows[max_mode - n] = row.iter().rev().map(|c| c.conj()).collect();
        }
        rows[max_mode + n] = row;
    }
    OperatorMatrix::from_rows(max_mode, rows)
}
