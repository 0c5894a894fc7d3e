use sto_lab::coupling::KernelTerm;
use sto_lab::*;

pub fn cos_kernel() -> CircleDensity {
    CircleDensity::from_trig(1, 0.0, &[1.0], &[])
}

/// `T(x) = 2x + eps sin(2 pi x)` with translation coupling `H(y) = cos(2 pi y)`.
pub fn translation(eps: f64, delta: f64, n: usize) -> StoModel {
    translation_with(eps, cos_kernel(), delta, n)
}

pub fn translation_with(eps: f64, h: CircleDensity, delta: f64, n: usize) -> StoModel {
    StoModel::new(
        ExpandingMapSpec::sine_perturbed(2, eps).unwrap(),
        CouplingModel::translation(h, delta).unwrap(),
        n,
    )
    .unwrap()
}

pub fn stochastic(sigma: f64, delta: f64, n: usize) -> StoModel {
    StoModel::new(
        ExpandingMapSpec::linear(2).unwrap(),
        CouplingModel::stochastic(sigma, delta).unwrap(),
        n,
    )
    .unwrap()
}

/// `H(x, y) = 0.5 cos(2 pi (x - y)) + 0.25 sin(2 pi (2x + y))` on the doubling map.
pub fn kernel_terms() -> Vec<KernelTerm> {
    vec![
        KernelTerm {
            p: 1,
            q: -1,
            cos: 0.5,
            sin: 0.0,
        },
        KernelTerm {
            p: 2,
            q: 1,
            cos: 0.0,
            sin: 0.25,
        },
    ]
}

pub fn kernel(delta: f64, n: usize) -> StoModel {
    StoModel::new(
        ExpandingMapSpec::linear(2).unwrap(),
        CouplingModel::general_kernel(kernel_terms(), delta).unwrap(),
        n,
    )
    .unwrap()
}

pub fn one(n: usize) -> CircleDensity {
    CircleDensity::constant(n, 1.0)
}

/// Largest `|c_{-n} - conj(c_n)|`.
pub fn hermitian_defect(f: &CircleDensity) -> f64 {
    let n = f.max_mode() as i64;
    (0..=n)
        .map(|k| (f.coeff(-k) - f.coeff(k).conj()).norm())
        .fold(0.0, f64::max)
}
