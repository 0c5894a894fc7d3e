//! Truncated Fourier densities on the unit circle.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, StoError};
use crate::spectral;

/// Tolerated negative lobe when checking that a truncated density is a probability density.
pub const POINTWISE_TOLERANCE: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Real function `f(x) = sum_{|n|<=N} c_n e^{2 pi i n x}` stored as `c_{-N..N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleDensity {
    max_mode: usize,
    coeffs: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormTriple {
    pub weak: f64,
    pub strong: f64,
    pub strongest: f64,
}

impl CircleDensity {
    /// Builds from the full vector `c_{-N..N}`; Hermitian symmetry is enforced by averaging.
    pub fn from_coeffs(max_mode: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if max_mode == 0 {
            return Err(StoError::InvalidInput("max_mode must be at least 1".into()));
        }
        if coeffs.len() != 2 * max_mode + 1 {
            return Err(StoError::InvalidInput(format!(
                "expected {} coefficients for max_mode {max_mode}, got {}",
                2 * max_mode + 1,
                coeffs.len()
            )));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(StoError::InvalidInput("non-finite coefficient".into()));
        }
        let mut d = CircleDensity { max_mode, coeffs };
        d.symmetrize();
        Ok(d)
    }

    /// Builds from `c_0..c_N`; negative modes are the conjugates.
    pub fn from_nonnegative(max_mode: usize, nonneg: &[Complex64]) -> Result<Self> {
        if nonneg.len() != max_mode + 1 {
            return Err(StoError::InvalidInput(format!(
                "expected {} nonnegative coefficients, got {}",
                max_mode + 1,
                nonneg.len()
            )));
        }
        let mut coeffs = vec![ZERO; 2 * max_mode + 1];
        for (n, c) in nonneg.iter().enumerate() {
            coeffs[max_mode + n] = *c;
            coeffs[max_mode - n] = c.conj();
        }
        Self::from_coeffs(max_mode, coeffs)
    }

    pub fn zero(max_mode: usize) -> Self {
        assert!(max_mode >= 1, "max_mode must be at least 1");
        CircleDensity {
            max_mode,
            coeffs: vec![ZERO; 2 * max_mode + 1],
        }
    }

    pub fn constant(max_mode: usize, value: f64) -> Self {
        let mut d = Self::zero(max_mode);
        d.coeffs[max_mode] = Complex64::new(value, 0.0);
        d
    }

    /// `constant + sum_j cos[j-1] cos(2 pi j x) + sin[j-1] sin(2 pi j x)`; modes above N are dropped.
    pub fn from_trig(max_mode: usize, constant: f64, cos: &[f64], sin: &[f64]) -> Self {
        let mut d = Self::constant(max_mode, constant);
        for (j, a) in cos.iter().enumerate() {
            let n = j + 1;
            if n <= max_mode {
                d.coeffs[max_mode + n] += Complex64::new(0.5 * a, 0.0);
            }
        }
        for (j, b) in sin.iter().enumerate() {
            let n = j + 1;
            if n <= max_mode {
                d.coeffs[max_mode + n] += Complex64::new(0.0, -0.5 * b);
            }
        }
        d.mirror_from_nonnegative();
        d
    }

    /// Single mode `cos(2 pi m x + theta)`.
    pub fn cosine(max_mode: usize, m: usize, theta: f64) -> Self {
        let mut d = Self::zero(max_mode);
        if m == 0 {
            d.coeffs[max_mode] = Complex64::new(theta.cos(), 0.0);
        } else if m <= max_mode {
            d.coeffs[max_mode + m] = 0.5 * spectral::cis(theta);
            d.mirror_from_nonnegative();
        }
        d
    }

    /// Densities with only finitely many modes; values at the samples `x_j = j/M`.
    pub fn synthesize(samples: &[f64], max_mode: usize) -> Result<Self> {
        let needed = 2 * max_mode + 1;
        if samples.len() < needed {
            return Err(StoError::Aliasing {
                samples: samples.len(),
                max_mode,
                needed,
            });
        }
        let values: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_coeffs(max_mode, spectral::analyze(&values, max_mode))
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `c_n`, zero outside the truncation.
    pub fn coeff(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.max_mode {
            ZERO
        } else {
            self.coeffs[(n + self.max_mode as i64) as usize]
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let n = self.max_mode as i64;
        -n..=n
    }

    pub fn mass(&self) -> f64 {
        self.coeffs[self.max_mode].re
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.coeffs[self.max_mode] = Complex64::new(mass, 0.0);
        self
    }

    /// Coefficientwise map `c_n -> f(n, c_n)`, re-symmetrized.
    pub fn map_coeffs(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let n0 = self.max_mode as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| f(i as i64 - n0, *c))
            .collect();
        let mut d = CircleDensity {
            max_mode: self.max_mode,
            coeffs,
        };
        d.symmetrize();
        d
    }

    pub fn derivative(&self) -> Self {
        self.map_coeffs(|n, c| c * Complex64::new(0.0, TAU * n as f64))
    }

    /// Zero-pads or truncates to a new `max_mode`.
    pub fn resized(&self, max_mode: usize) -> Self {
        let mut d = Self::zero(max_mode);
        let k = max_mode.min(self.max_mode) as i64;
        for n in -k..=k {
            d.coeffs[(n + max_mode as i64) as usize] = self.coeff(n);
        }
        d
    }

    pub fn scale(&self, alpha: f64) -> Self {
        CircleDensity {
            max_mode: self.max_mode,
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    /// Values `f(j/M)` for `j = 0..M`.
    pub fn evaluate(&self, m: usize) -> Vec<f64> {
        evaluate(self, m)
    }

    /// Value at a single point by direct summation.
    pub fn value_at(&self, x: f64) -> f64 {
        let base = spectral::e(x);
        let mut acc = self.coeffs[self.max_mode].re;
        let mut w = Complex64::new(1.0, 0.0);
        for n in 1..=self.max_mode {
            w *= base;
            acc += 2.0 * (self.coeffs[self.max_mode + n] * w).re;
        }
        acc
    }

    /// Minimum over the `8N` grid.
    pub fn grid_min(&self) -> f64 {
        self.evaluate(8 * self.max_mode)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_probability(&self) -> bool {
        (self.mass() - 1.0).abs() <= 1e-9 && self.grid_min() >= -POINTWISE_TOLERANCE
    }

    pub fn analytic_norms(&self) -> NormTriple {
        analytic_norms(self)
    }

    pub fn coefficient_norms(&self) -> NormTriple {
        coefficient_norms(self)
    }

    pub fn l1(&self) -> f64 {
        let m = 8 * self.max_mode;
        self.evaluate(m).iter().map(|v| v.abs()).sum::<f64>() / m as f64
    }

    pub fn w11(&self) -> f64 {
        self.l1() + self.derivative().l1()
    }

    pub fn project_zero_average(&self) -> Self {
        project_zero_average(self)
    }

    fn symmetrize(&mut self) {
        let n0 = self.max_mode;
        for n in 0..=n0 {
            let avg = 0.5 * (self.coeffs[n0 + n] + self.coeffs[n0 - n].conj());
            self.coeffs[n0 + n] = avg;
            self.coeffs[n0 - n] = avg.conj();
        }
    }

    fn mirror_from_nonnegative(&mut self) {
        let n0 = self.max_mode;
        self.coeffs[n0].im = 0.0;
        for n in 1..=n0 {
            self.coeffs[n0 - n] = self.coeffs[n0 + n].conj();
        }
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(
            self.max_mode, other.max_mode,
            "densities with different truncations"
        );
    }
}

pub fn evaluate(f: &CircleDensity, m: usize) -> Vec<f64> {
    assert!(m >= 1, "evaluation grid must be nonempty");
    let values = spectral::synthesize(&f.coeffs, f.max_mode, m);
    let scale = f.coeffs.iter().map(|c| c.norm()).sum::<f64>().max(1.0);
    let residue = values.iter().fold(0.0f64, |acc, v| acc.max(v.im.abs()));
    assert!(
        residue <= 1e-10 * scale,
        "symmetry violation: imaginary residue {residue:e}"
    );
    values.into_iter().map(|v| v.re).collect()
}

fn mean_abs(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64
}

pub fn analytic_norms(f: &CircleDensity) -> NormTriple {
    let m = 8 * f.max_mode;
    let d1 = f.derivative();
    let d2 = d1.derivative();
    let weak = mean_abs(&f.evaluate(m));
    let strong = weak + mean_abs(&d1.evaluate(m));
    let strongest = strong + mean_abs(&d2.evaluate(m));
    NormTriple {
        weak,
        strong,
        strongest,
    }
}

pub fn coefficient_norms(f: &CircleDensity) -> NormTriple {
    let mut out = NormTriple {
        weak: 0.0,
        strong: 0.0,
        strongest: 0.0,
    };
    for (n, c) in f.modes().zip(f.coeffs.iter()) {
        let a = c.norm();
        let k = TAU * n.unsigned_abs() as f64;
        out.weak += a;
        out.strong += (1.0 + k) * a;
        out.strongest += (1.0 + k + k * k) * a;
    }
    out
}

pub fn project_zero_average(f: &CircleDensity) -> CircleDensity {
    f.clone().with_mass(0.0)
}

/// Weight `1 + 2 pi |n|` of the strong coefficient surrogate.
pub fn strong_weight(n: i64) -> f64 {
    1.0 + TAU * n.unsigned_abs() as f64
}

/// `||cos(2 pi m x)||_{W^{1,1}} = (2/pi)(1 + 2 pi m)`.
pub fn cosine_w11(m: usize) -> f64 {
    (2.0 / PI) * (1.0 + TAU * m as f64)
}

impl Add for &CircleDensity {
    type Output = CircleDensity;
    fn add(self, rhs: &CircleDensity) -> CircleDensity {
        self.check_same(rhs);
        CircleDensity {
            max_mode: self.max_mode,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CircleDensity {
    type Output = CircleDensity;
    fn sub(self, rhs: &CircleDensity) -> CircleDensity {
        self.check_same(rhs);
        CircleDensity {
            max_mode: self.max_mode,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &CircleDensity {
    type Output = CircleDensity;
    fn neg(self) -> CircleDensity {
        self.scale(-1.0)
    }
}

impl Mul<&CircleDensity> for f64 {
    type Output = CircleDensity;
    fn mul(self, rhs: &CircleDensity) -> CircleDensity {
        rhs.scale(self)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityRepr {
    max_mode: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for CircleDensity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let nonneg = &self.coeffs[self.max_mode..];
        DensityRepr {
            max_mode: self.max_mode,
            re: nonneg.iter().map(|c| c.re).collect(),
            im: nonneg.iter().map(|c| c.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CircleDensity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = DensityRepr::deserialize(d)?;
        if repr.re.len() != repr.im.len() {
            return Err(serde::de::Error::custom("re and im lengths differ"));
        }
        let nonneg: Vec<Complex64> = repr
            .re
            .iter()
            .zip(&repr.im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        CircleDensity::from_nonnegative(repr.max_mode, &nonneg).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn constant_samples_give_mass_only() {
        let f = CircleDensity::synthesize(&[1.0; 16], 3).unwrap();
        assert!(close(f.mass(), 1.0, 1e-15));
        for n in 1..=3 {
            assert!(f.coeff(n).norm() < 1e-15);
        }
    }

    #[test]
    fn cosine_samples() {
        let s: Vec<f64> = spectral::grid(64).map(|x| (TAU * x).cos()).collect();
        let f = CircleDensity::synthesize(&s, 4).unwrap();
        for n in -4..=4i64 {
            let want = if n.abs() == 1 { 0.5 } else { 0.0 };
            assert!((f.coeff(n) - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn aliasing_is_rejected() {
        assert!(matches!(
            CircleDensity::synthesize(&[0.0; 8], 4),
            Err(StoError::Aliasing { needed: 9, .. })
        ));
    }

    #[test]
    fn evaluate_small_grid() {
        let f = CircleDensity::from_trig(3, 1.0, &[1.0], &[]);
        let v = f.evaluate(4);
        for (a, b) in v.iter().zip([2.0, 1.0, 0.0, 1.0]) {
            assert!(close(*a, b, 1e-14));
        }
        assert_eq!(CircleDensity::constant(2, 1.0).evaluate(4), vec![1.0; 4]);
    }

    #[test]
    fn cosine_norms() {
        let f = CircleDensity::from_trig(8, 0.0, &[1.0], &[]);
        let a = f.analytic_norms();
        // independent rectangle rule on the same 64-point grid
        let m = 64;
        let rule =
            |g: &dyn Fn(f64) -> f64| spectral::grid(m).map(|x| g(x).abs()).sum::<f64>() / m as f64;
        let w = rule(&|x| (TAU * x).cos());
        let s = w + rule(&|x| TAU * (TAU * x).sin());
        let ss = s + rule(&|x| TAU * TAU * (TAU * x).cos());
        assert!(close(a.weak, w, 1e-12));
        assert!(close(a.strong, s, 1e-12));
        assert!(close(a.strongest, ss, 1e-11));
        // the kinks of |cos| limit the rule to O(1/M^2)
        assert!(close(a.weak, 2.0 / PI, 1e-3));
        assert!(close(a.strong, 2.0 / PI + 4.0, 1e-2));
        assert!(close(a.strongest, 2.0 / PI + 4.0 + 8.0 * PI, 5e-2));
        let fine = CircleDensity::from_trig(256, 0.0, &[1.0], &[]).analytic_norms();
        assert!(close(fine.weak, 2.0 / PI, 1e-5));
        let c = f.coefficient_norms();
        assert!(close(c.weak, 1.0, 1e-15));
        assert!(close(c.strong, 1.0 + TAU, 1e-14));
        let one = CircleDensity::constant(4, 1.0);
        let n = one.analytic_norms();
        for v in [n.weak, n.strong, n.strongest] {
            assert!(close(v, 1.0, 1e-14));
        }
    }

    #[test]
    fn homogeneity() {
        let f = CircleDensity::from_trig(6, 0.3, &[0.2, -0.4], &[0.1]);
        let a = f.analytic_norms();
        let b = f.scale(2.5).analytic_norms();
        assert!(close(b.weak, 2.5 * a.weak, 1e-12));
        assert!(close(b.strong, 2.5 * a.strong, 1e-12));
        assert!(close(b.strongest, 2.5 * a.strongest, 1e-11));
    }

    #[test]
    fn projection() {
        let f = CircleDensity::from_trig(3, 1.0, &[1.0], &[]);
        let p = f.project_zero_average();
        assert_eq!(p, CircleDensity::from_trig(3, 0.0, &[1.0], &[]));
        assert_eq!(p.project_zero_average(), p);
        assert_eq!(
            CircleDensity::constant(3, 1.0).project_zero_average(),
            CircleDensity::zero(3)
        );
    }

    #[test]
    fn json_lists_nonnegative_modes() {
        let f = CircleDensity::from_trig(2, 1.0, &[0.5], &[0.25]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(
            s,
            r#"{"max_mode":2,"re":[1.0,0.25,0.0],"im":[0.0,-0.125,0.0]}"#
        );
        let back: CircleDensity = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn value_at_matches_grid() {
        let f = CircleDensity::from_trig(5, 1.0, &[0.2, 0.0, 0.3], &[0.1, 0.05]);
        let v = f.evaluate(40);
        for (j, val) in v.iter().enumerate() {
            assert!(close(f.value_at(j as f64 / 40.0), *val, 1e-13));
        }
    }
}
