//! Randomized invariant checks shared by the property suite and the acceptance run.

use std::fmt::Debug;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::Rng;

use super::models::{self, hermitian_defect, one};
use super::oracles;
use sto_lab::coupling::{self, Diffeo, KernelTerm};
use sto_lab::diagnostics::{self, uniform_fixed_point};
use sto_lab::differential::{self, contraction_report, differential_matrix};
use sto_lab::ensemble;
use sto_lab::fit::{self, LyRecord};
use sto_lab::sto::sto_apply;
use sto_lab::{CircleDensity, CouplingModel, ExpandingMapSpec, Solver};

pub const CASES: u32 = 200;

pub type Property = (&'static str, fn(u32) -> Result<(), String>);

fn check<S>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S: Strategy,
    S::Value: Debug,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn random_coeffs(n: usize, seed: u64) -> CircleDensity {
    let mut r = ensemble::rng(seed);
    let c: Vec<Complex64> = (0..2 * n + 1)
        .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    CircleDensity::from_coeffs(n, c).unwrap()
}

fn probability(n: usize, seed: u64) -> CircleDensity {
    ensemble::random_probability(n, 0.5, &mut ensemble::rng(seed))
}

fn zero_average(n: usize, seed: u64) -> CircleDensity {
    ensemble::random_zero_average(n, &mut ensemble::rng(seed))
}

/// Degree `k` map with a random trigonometric perturbation of modes up to 3, kept expanding.
fn random_map(k: u32, seed: u64, size: f64) -> ExpandingMapSpec {
    let mut r = ensemble::rng(seed);
    let cos: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
    let sin: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
    let slope: f64 = (1..=3)
        .map(|m| std::f64::consts::TAU * m as f64 * (cos[m - 1].abs() + sin[m - 1].abs()))
        .sum();
    let eps = size * 0.5 * (k as f64 - 1.0) / slope;
    ExpandingMapSpec::new(k, CircleDensity::from_trig(3, 0.0, &cos, &sin), eps).unwrap()
}

fn random_kernel(seed: u64, terms: usize) -> Vec<KernelTerm> {
    let mut r = ensemble::rng(seed);
    (0..terms)
        .map(|_| {
            let mut p = 0;
            while p == 0 {
                p = r.random_range(-2..=2);
            }
            KernelTerm {
                p,
                q: r.random_range(-2..=2),
                cos: r.random_range(-1.0..1.0),
                sin: r.random_range(-1.0..1.0),
            }
        })
        .collect()
}

pub fn hermitian_symmetry(cases: u32) -> Result<(), String> {
    let t = ExpandingMapSpec::linear(2).unwrap();
    check(
        cases,
        (1usize..=32, any::<u64>(), -2.0f64..2.0),
        |(n, seed, a)| {
            let f = random_coeffs(n, seed);
            let g = zero_average(n, seed ^ 1);
            let results = [
                f.clone(),
                &f + &g,
                &f - &g,
                f.scale(a),
                f.derivative(),
                coupling::shift(&f, a),
                t.transfer_matrix(n).unwrap().apply(&f),
                f.resized(n + 3),
            ];
            for r in &results {
                prop_assert!(
                    hermitian_defect(r) <= 1e-12 * (1.0 + r.coefficient_norms().strongest)
                );
            }
            Ok(())
        },
    )
}

pub fn norm_triangle(cases: u32) -> Result<(), String> {
    check(
        cases,
        (1usize..=32, any::<u64>(), -3.0f64..3.0),
        |(n, seed, s)| {
            let f = &random_coeffs(n, seed).scale(s) + &one(n);
            let g = random_coeffs(n, seed ^ 7);
            let (a, b, c) = (
                f.analytic_norms(),
                g.analytic_norms(),
                (&f + &g).analytic_norms(),
            );
            prop_assert!(c.weak <= a.weak + b.weak + 1e-10);
            prop_assert!(c.strong <= a.strong + b.strong + 1e-10);
            prop_assert!(c.strongest <= a.strongest + b.strongest + 1e-10);
            Ok(())
        },
    )
}

pub fn coefficient_norms_dominate(cases: u32) -> Result<(), String> {
    check(cases, (1usize..=32, any::<u64>()), |(n, seed)| {
        for f in [
            random_coeffs(n, seed),
            zero_average(n, seed),
            probability(n, seed),
        ] {
            let (a, c) = (f.analytic_norms(), f.coefficient_norms());
            prop_assert!(a.weak <= c.weak * (1.0 + 1e-12));
            prop_assert!(a.strong <= c.strong * (1.0 + 1e-12));
            prop_assert!(a.strongest <= c.strongest * (1.0 + 1e-12));
        }
        Ok(())
    })
}

pub fn synthesize_inverts_evaluate(cases: u32) -> Result<(), String> {
    check(
        cases,
        (1usize..=32, any::<u64>(), 0usize..40),
        |(n, seed, extra)| {
            let f = random_coeffs(n, seed);
            let m = 2 * n + 1 + extra;
            let back = CircleDensity::synthesize(&f.evaluate(m), n).unwrap();
            prop_assert!(
                (&back - &f).coefficient_norms().weak <= 1e-12 * (1.0 + f.coefficient_norms().weak)
            );
            Ok(())
        },
    )
}

pub fn transfer_is_markov(cases: u32) -> Result<(), String> {
    check(
        cases,
        (2u32..=4, any::<u64>(), 0.0f64..1.0, 1usize..=32),
        |(k, seed, size, n)| {
            let a = random_map(k, seed, size).transfer_matrix(n).unwrap();
            for m in -(n as i64)..=n as i64 {
                let want = if m == 0 { 1.0 } else { 0.0 };
                prop_assert!((a.get(0, m) - Complex64::new(want, 0.0)).norm() <= 1e-9);
            }
            prop_assert!(a.real_preserving_defect() <= 1e-10);
            Ok(())
        },
    )
}

pub fn transfer_matches_preimage_sum(cases: u32) -> Result<(), String> {
    check(
        cases,
        (2u32..=4, any::<u64>(), 0.0f64..1.0, 1usize..=32),
        |(k, seed, size, n)| {
            let map = random_map(k, seed, size);
            let f = probability(n, seed ^ 3);
            let got = map.transfer_matrix(n).unwrap().apply(&f);
            let m = (16 * n).max(256);
            let values: Vec<f64> = (0..m)
                .map(|j| oracles::preimage_transfer(&map, &f, j as f64 / m as f64))
                .collect();
            let want = oracles::direct_dft(&values, n);
            for (i, w) in want.iter().enumerate() {
                let c = got.coeff(i as i64 - n as i64);
                prop_assert!(
                    (c - w).norm() <= 1e-8,
                    "mode {} got {} want {}",
                    i as i64 - n as i64,
                    c,
                    w
                );
            }
            Ok(())
        },
    )
}

pub fn doubling_halves_derivative(cases: u32) -> Result<(), String> {
    check(
        cases,
        (2usize..=32, any::<u64>(), -1.0f64..1.0),
        |(n, seed, a)| {
            let g = zero_average(n, seed).map_coeffs(|k, c| {
                if k % 2 == 0 {
                    c
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let t = models::translation(0.0, 0.0, n);
            let out = coupling::shift(&t.transfer().apply(&g), a);
            let deriv = |f: &CircleDensity| -> f64 {
                f.modes()
                    .zip(f.coeffs())
                    .map(|(k, c)| std::f64::consts::TAU * k.unsigned_abs() as f64 * c.norm())
                    .sum()
            };
            prop_assert!(deriv(&out) <= (0.5 + 1e-12) * deriv(&g));
            // the zeroth-order part of the weight keeps the full surrogate slightly above 1/2
            let worst = (1.0 + std::f64::consts::TAU) / (1.0 + 2.0 * std::f64::consts::TAU);
            prop_assert!(
                out.coefficient_norms().strong <= (worst + 1e-12) * g.coefficient_norms().strong
            );
            Ok(())
        },
    )
}

pub fn kernel_diffeo_bounds(cases: u32) -> Result<(), String> {
    check(
        cases,
        (any::<u64>(), 1usize..=3, 0.0f64..0.95, 1usize..=16),
        |(seed, terms, u, n)| {
            let terms = random_kernel(seed, terms);
            let k = coupling::BivariateKernel::new(terms.clone()).unwrap();
            let b1 = k.x_derivative_bound(1);
            let delta = if b1 > 0.0 { u / b1 } else { u };
            let c = CouplingModel::general_kernel(terms, delta).unwrap();
            let f = probability(n, seed ^ 5);
            let Diffeo::Sampled(s) = coupling::mean_field_map(&c, &f).unwrap() else {
                return Err(TestCaseError::fail(
                    "kernel coupling must give a sampled diffeomorphism",
                ));
            };
            prop_assert!(s.max_derivative() <= 1.0 + delta * b1 + 1e-12);
            prop_assert!(s.min_derivative() >= 1.0 - delta * b1 - 1e-12);
            prop_assert!(s.max_second_derivative() <= delta * k.x_derivative_bound(2) + 1e-12);
            Ok(())
        },
    )
}

pub fn pushforward_mass_and_sign(cases: u32) -> Result<(), String> {
    check(
        cases,
        (any::<u64>(), 0.0f64..0.9, 4usize..=32, -1.0f64..1.0),
        |(seed, u, n, a)| {
            let terms = random_kernel(seed, 2);
            let b1 = coupling::BivariateKernel::new(terms.clone())
                .unwrap()
                .x_derivative_bound(1);
            let c = CouplingModel::general_kernel(terms, u / b1.max(1e-12)).unwrap();
            let f = probability(n / 4, seed ^ 9).resized(n);
            let shifted = coupling::pushforward(&f, &Diffeo::Shift { a }).unwrap();
            prop_assert_eq!(shifted.mass(), f.mass());
            let d = coupling::mean_field_map(&c, &f).unwrap();
            let pushed = coupling::pushforward(&f, &d).unwrap();
            prop_assert!((pushed.mass() - f.mass()).abs() <= 1e-10);
            prop_assert!(pushed.grid_min() >= -1e-8);
            prop_assert!(shifted.grid_min() >= -1e-8);
            Ok(())
        },
    )
}

pub fn translation_lipschitz(cases: u32) -> Result<(), String> {
    check(
        cases,
        (any::<u64>(), 0.0f64..2.0, 1usize..=32),
        |(seed, delta, n)| {
            let hk = random_coeffs(3, seed).with_mass(0.0);
            let sup_h = hk.evaluate(4096).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let f1 = probability(n, seed ^ 11);
            let f2 = probability(n, seed ^ 12);
            let h = probability(n, seed ^ 13);
            let a1 = delta * coupling::pairing(&hk, &f1);
            let a2 = delta * coupling::pairing(&hk, &f2);
            let lhs = (&coupling::shift(&h, a1) - &coupling::shift(&h, a2)).w11();
            let rhs = delta * 1.05 * sup_h * h.analytic_norms().strongest * (&f1 - &f2).l1();
            prop_assert!(lhs <= rhs + 1e-12, "lhs {} rhs {}", lhs, rhs);
            Ok(())
        },
    )
}

pub fn sto_preserves_mass(cases: u32) -> Result<(), String> {
    check(
        cases,
        (any::<u64>(), 0.0f64..3.0, 0.05f64..0.4, 1usize..=32),
        |(seed, delta, sigma, n)| {
            let f = probability(n, seed);
            let ms = [
                models::translation(0.05, delta, n),
                models::stochastic(sigma, delta, n),
                models::kernel(delta / 60.0, n),
            ];
            for m in &ms {
                prop_assert!((sto_apply(m, &f).unwrap().mass() - f.mass()).abs() <= 1e-13);
            }
            Ok(())
        },
    )
}

pub fn linear_translation_fixes_lebesgue(cases: u32) -> Result<(), String> {
    check(
        cases,
        (any::<u64>(), 0.0f64..10.0, 1usize..=32),
        |(seed, delta, n)| {
            let hk = random_coeffs(3, seed);
            let m = models::translation_with(0.0, hk, delta, n);
            let out = sto_apply(&m, &one(n)).unwrap();
            prop_assert!((&out - &one(n)).coefficient_norms().weak <= 1e-12);
            Ok(())
        },
    )
}

pub fn picard_rate_linear(cases: u32) -> Result<(), String> {
    check(
        cases,
        (0.0f64..5.0, 3u32..=5, 0.0f64..1.0),
        |(delta, j, theta)| {
            let n = 32;
            let m = models::translation(0.0, delta, n);
            let f0 = &one(n)
                + &CircleDensity::cosine(n, 1 << j, std::f64::consts::TAU * theta).scale(0.5);
            let rep = m
                .fixed_point(&f0, 1e-300, j as usize + 1, Solver::Picard)
                .unwrap();
            let window = j as usize;
            let xs: Vec<f64> = (0..window).map(|k| k as f64).collect();
            let ys: Vec<f64> = rep.history[..window].iter().map(|v| v.ln()).collect();
            let rate = -fit::linear_regression(&xs, &ys).0;
            let ln2 = 2f64.ln();
            prop_assert!((rate - ln2).abs() <= 0.1 * ln2, "rate {}", rate);
            Ok(())
        },
    )
}

pub fn newton_picard_agree(cases: u32) -> Result<(), String> {
    check(
        cases,
        (
            any::<u64>(),
            0.0f64..0.05,
            0.0f64..1.0,
            8usize..=16,
            any::<bool>(),
        ),
        |(seed, eps, delta, n, stoch)| {
            let m = if stoch {
                models::stochastic(0.3, delta * 0.2, n)
            } else {
                models::translation(eps, delta, n)
            };
            let f0 = probability(n, seed);
            let tol = 1e-11;
            let a = m.fixed_point(&f0, tol, 200, Solver::Newton).unwrap();
            let b = m.fixed_point(&f0, tol, 200, Solver::Picard).unwrap();
            if a.converged && b.converged {
                prop_assert!((&a.h - &b.h).w11() <= 10.0 * tol);
            }
            Ok(())
        },
    )
}

pub fn differential_structure(cases: u32) -> Result<(), String> {
    check(
        cases,
        (
            0.0f64..0.08,
            0.0f64..2.0,
            4usize..=32,
            0usize..3,
            0.05f64..0.15,
        ),
        |(eps, delta, n, kind, sigma)| {
            let (m, h) = match kind {
                0 => {
                    let m = models::translation(eps, delta, n);
                    let h = uniform_fixed_point(&m, 1e-12).unwrap().h;
                    (m, h)
                }
                1 => (models::stochastic(sigma, delta * 0.05, n), one(n)),
                _ => {
                    let psi = coupling::wrapped_gaussian(0.3, sigma, n);
                    let w = coupling::barycenter_stats(&psi).weight;
                    (models::stochastic(sigma, 1.5 / w, n), psi)
                }
            };
            let d = differential_matrix(&m, &h).unwrap();
            let parts = differential::frozen_linear_matrix(&m, &h)
                .unwrap()
                .add(&differential::coupling_derivative_matrix(&m, &h).unwrap());
            prop_assert!(d.sub(&parts).max_abs() <= 1e-12);
            for col in (-(n as i64)..=n as i64).filter(|&c| c != 0) {
                prop_assert!(d.get(0, col).norm() <= 1e-10);
            }
            prop_assert!(d.real_preserving_defect() <= 1e-10);
            Ok(())
        },
    )
}

pub fn finite_difference_order(cases: u32) -> Result<(), String> {
    check(
        cases,
        (
            any::<u64>(),
            0.0f64..0.08,
            0.0f64..1.5,
            8usize..=32,
            any::<bool>(),
        ),
        |(seed, eps, delta, n, stoch)| {
            let (m, h) = if stoch {
                (models::stochastic(0.3, delta * 0.05, n), one(n))
            } else {
                let m = models::translation(eps, delta, n);
                let h = uniform_fixed_point(&m, 1e-12).unwrap().h;
                (m, h)
            };
            let g = zero_average(n, seed);
            let t =
                differential::fd_validate_differential(&m, &h, &g, &[1e-2, 1e-3, 1e-4]).unwrap();
            prop_assert!(t.passed, "slope {} rows {:?}", t.slope, t.rows);
            Ok(())
        },
    )
}

pub fn surrogate_dominates(cases: u32) -> Result<(), String> {
    check(
        cases,
        (any::<u64>(), 0.0f64..0.08, 0.0f64..2.0, 4usize..=32),
        |(seed, eps, delta, n)| {
            let m = models::translation(eps, delta, n);
            let h = uniform_fixed_point(&m, 1e-12).unwrap().h;
            let d = differential_matrix(&m, &h).unwrap();
            let proxy = d.block_power_norms(6);
            let mut r = ensemble::rng(seed);
            let mut members = ensemble::zero_average_ensemble(n, 4, &mut r);
            members.extend(ensemble::mode_probes(n, &mut r));
            for g in &members {
                let s = g.coefficient_norms().strong;
                let mut x = g.clone();
                for p in &proxy {
                    x = d.apply(&x);
                    prop_assert!(x.w11() <= p * s * (1.0 + 1e-12) + 1e-12);
                }
            }
            Ok(())
        },
    )
}

pub fn translation_coupling_rank_one(cases: u32) -> Result<(), String> {
    check(
        cases,
        (0.01f64..0.1, 0.1f64..2.0, 4usize..=32),
        |(eps, delta, n)| {
            let m = models::translation(eps, delta, n);
            let h = uniform_fixed_point(&m, 1e-12).unwrap().h;
            let sv = differential::coupling_derivative_matrix(&m, &h)
                .unwrap()
                .matrix()
                .clone()
                .singular_values();
            let mut s: Vec<f64> = sv.iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            prop_assert!(s[0] > 0.0);
            prop_assert!(s[1] <= 1e-10 * s[0], "ratio {}", s[1] / s[0]);
            Ok(())
        },
    )
}

pub fn weak_closeness_scales(cases: u32) -> Result<(), String> {
    let n = 16;
    let d_at = |eps: f64| {
        let m = models::translation(eps, 1.0, n);
        let h = uniform_fixed_point(&m, 1e-12).unwrap().h;
        differential_matrix(&m, &h).unwrap()
    };
    let d0 = d_at(0.0);
    let probes = ensemble::probe_ensemble(n, 16, 5);
    let reference = probes
        .iter()
        .map(|g| d_at(0.05).sub(&d0).apply(g).l1() / g.w11())
        .fold(0.0, f64::max)
        / 0.05;
    check(cases, (0.01f64..0.1, any::<u64>()), |(eps, seed)| {
        let g = zero_average(n, seed);
        let diff = d_at(eps).sub(&d0).apply(&g).l1() / g.w11();
        prop_assert!(diff <= 2.0 * reference * eps, "diff {} eps {}", diff, eps);
        let h = uniform_fixed_point(&models::translation(eps, 1.0, n), 1e-12)
            .unwrap()
            .h;
        prop_assert!((&h - &one(n)).w11() <= 4.0 * eps);
        Ok(())
    })
}

pub fn losc_consistent_with_contraction(cases: u32) -> Result<(), String> {
    check(
        cases,
        (0.0f64..0.05, 0.0f64..2.0, any::<u64>()),
        |(eps, delta, seed)| {
            let n = 16;
            let m = models::translation(eps, delta, n);
            let h = uniform_fixed_point(&m, 1e-12).unwrap().h;
            let rep = contraction_report(&differential_matrix(&m, &h).unwrap(), 8, 8, seed);
            if let Some(k) = rep.first_contracting_n {
                let o = diagnostics::losc_experiment(&m, &h, 0.02, 8, 12, seed).unwrap();
                prop_assert!(o.fit.gamma > 0.0);
                let linear = -rep.proxy_norms[k - 1].ln() / k as f64;
                prop_assert!(
                    o.fit.gamma >= linear - 0.1,
                    "gamma {} linear {}",
                    o.fit.gamma,
                    linear
                );
            }
            Ok(())
        },
    )
}

pub fn equilibrium_decay_monotone(cases: u32) -> Result<(), String> {
    check(
        cases,
        (0.0f64..0.08, 0.0f64..2.0, any::<u64>(), 4usize..=32),
        |(eps, delta, seed, n)| {
            let m = models::translation(eps, delta, n);
            let h = uniform_fixed_point(&m, 1e-12).unwrap().h;
            let a = diagnostics::equilibrium_decay(&m, &h, 12, 8, seed).unwrap();
            for w in a.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-8);
            }
            Ok(())
        },
    )
}

pub fn weak_stochastic_unique(cases: u32) -> Result<(), String> {
    check(
        cases,
        (0.2f64..0.4, 0.0f64..0.1, any::<u64>()),
        |(sigma, delta, seed)| {
            let m = models::stochastic(sigma, delta, 16);
            let ms = diagnostics::multi_start(&m, 8, 1e-11, 500, seed).unwrap();
            prop_assert!(ms.unique, "disagreement {}", ms.max_disagreement);
            prop_assert!(ms.weights.iter().all(|&w| w < 1e-6));
            Ok(())
        },
    )
}

pub fn decay_fit_bounds_trace(cases: u32) -> Result<(), String> {
    check(
        cases,
        (0.0f64..3.0, 1e-3f64..10.0, any::<u64>(), 2usize..40),
        |(gamma, c, seed, len)| {
            let mut r = ensemble::rng(seed);
            let trace: Vec<f64> = (0..len)
                .map(|k| c * (-gamma * k as f64).exp() * r.random_range(0.5..1.5))
                .collect();
            let fit = fit::fit_decay(&trace);
            let floor = (fit::RELATIVE_FLOOR * trace[0]).max(fit::ABSOLUTE_FLOOR);
            for (k, v) in trace.iter().enumerate() {
                if *v > floor && fit.gamma.is_finite() {
                    prop_assert!(fit.c * (-fit.gamma * k as f64).exp() >= v * (1.0 - 1e-12));
                }
            }
            Ok(())
        },
    )
}

pub fn ly_fit_holds_on_training(cases: u32) -> Result<(), String> {
    check(
        cases,
        (0.1f64..0.9, 0.5f64..3.0, 0.0f64..2.0, any::<u64>()),
        |(lambda, c4, c5, seed)| {
            let mut r = ensemble::rng(seed);
            let records: Vec<LyRecord> = (0..16)
                .flat_map(|_| {
                    let strong = r.random_range(1.0..5.0);
                    let weak = strong * r.random_range(0.05..1.0);
                    let u = r.random_range(0.1..1.0);
                    (1..=10)
                        .map(|n| LyRecord {
                            n,
                            value: u * (lambda.powi(n as i32) * c4 * strong + c5 * weak),
                            strong,
                            weak,
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
            let f = fit::fit_lasota_yorke(&records).unwrap();
            prop_assert!(f.lambda_tilde < 1.0);
            prop_assert!(f.max_ratio(&records) <= 1.0 + 1e-9);
            Ok(())
        },
    )
}

pub fn audit_flags_consistent(cases: u32) -> Result<(), String> {
    check(
        cases,
        (0.0f64..1.0, any::<u64>(), any::<bool>()),
        |(delta, seed, stoch)| {
            let m = if stoch {
                models::stochastic(0.3, delta * 0.1, 8)
            } else {
                models::translation(0.0, delta, 8)
            };
            let a = diagnostics::assumption_audit(&m, 6, seed);
            prop_assert_eq!(
                a.all_pass,
                a.bound_pass && a.ly_pass && a.eq_pass && a.lip_pass
            );
            if a.ly_pass {
                prop_assert!(a.ly_lambda < 1.0);
            }
            if a.bound_pass {
                prop_assert!(a.bound_c.is_finite() && a.bound_c <= 2.0 * a.bound_c_half + 1e-12);
            }
            Ok(())
        },
    )
}

pub fn all() -> Vec<Property> {
    vec![
        ("density: Hermitian symmetry", hermitian_symmetry),
        ("density: triangle inequality", norm_triangle),
        (
            "density: coefficient norms dominate",
            coefficient_norms_dominate,
        ),
        (
            "density: synthesize inverts evaluate",
            synthesize_inverts_evaluate,
        ),
        ("maps: Markov row", transfer_is_markov),
        ("maps: preimage-sum oracle", transfer_matches_preimage_sum),
        (
            "maps: doubling halves derivative",
            doubling_halves_derivative,
        ),
        ("coupling: kernel diffeo bounds", kernel_diffeo_bounds),
        (
            "coupling: pushforward mass and sign",
            pushforward_mass_and_sign,
        ),
        ("coupling: translation Lipschitz", translation_lipschitz),
        ("sto: mass conservation", sto_preserves_mass),
        (
            "sto: Lebesgue fixed for linear translation",
            linear_translation_fixes_lebesgue,
        ),
        ("sto: Picard rate", picard_rate_linear),
        ("sto: Newton and Picard agree", newton_picard_agree),
        (
            "differential: decomposition and zero average",
            differential_structure,
        ),
        (
            "differential: finite-difference order",
            finite_difference_order,
        ),
        ("differential: surrogate domination", surrogate_dominates),
        (
            "differential: rank-one coupling term",
            translation_coupling_rank_one,
        ),
        ("differential: weak closeness", weak_closeness_scales),
        (
            "diagnostics: LOSC and rate bracketing",
            losc_consistent_with_contraction,
        ),
        (
            "diagnostics: equilibrium decay monotone",
            equilibrium_decay_monotone,
        ),
        (
            "diagnostics: weak-coupling uniqueness",
            weak_stochastic_unique,
        ),
        (
            "diagnostics: decay fit bounds trace",
            decay_fit_bounds_trace,
        ),
        (
            "diagnostics: Lasota-Yorke fit holds",
            ly_fit_holds_on_training,
        ),
        ("diagnostics: audit flags", audit_flags_consistent),
    ]
}
