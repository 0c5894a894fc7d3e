use rand::Rng;
use serde::Serialize;

use super::{equilibrium_decay, uniform_fixed_point};
use crate::density::CircleDensity;
use crate::ensemble::{self, SeededRng};
use crate::error::{Result, StoError};
use crate::exec;
use crate::fit::{fit_lasota_yorke, LyFit, LyRecord};
use crate::operator::OperatorMatrix;
use crate::sto::StoModel;

/// Composition length used for the sequential Lasota-Yorke fit.
pub const AUDIT_STEPS: usize = 12;
/// Iterates used for the equilibrium decay sequence.
pub const EQ_STEPS: usize = 20;
const PROBABILITY_AMPLITUDE: f64 = 0.5;
const EQ_TARGET: f64 = 1e-3;
const MONOTONE_SLACK: f64 = 1e-8;

/// A Lasota-Yorke fit for random compositions drawn from a pool of operators.
#[derive(Clone, Debug, Serialize)]
pub struct SequentialLy {
    pub fit: LyFit,
    /// Largest `||L^{(1,n)} g||_w / ||g||_w` seen.
    pub weak_bound: f64,
    /// `max(C5, weak_bound)`, the constant serving both inequalities.
    pub b: f64,
}

/// Per-member records for compositions `L_{f_n} ... L_{f_1} g`, `n = 1..=n_max`, with each
/// member following its own random sequence from `pool`.
fn sequential_records(
    pool: &[OperatorMatrix],
    members: &[CircleDensity],
    n_max: usize,
    rng: &mut SeededRng,
) -> Vec<(Vec<LyRecord>, f64)> {
    let sequences: Vec<Vec<usize>> = members
        .iter()
        .map(|_| {
            (0..n_max)
                .map(|_| rng.random_range(0..pool.len()))
                .collect()
        })
        .collect();
    exec::map_indexed(members.len(), |i| {
        let g = &members[i];
        let (strong, weak) = (g.w11(), g.l1());
        let mut x = g.clone();
        let mut records = Vec::with_capacity(n_max);
        let mut weak_ratio = 0.0f64;
        for (k, &j) in sequences[i].iter().enumerate() {
            x = pool[j].apply(&x);
            weak_ratio = weak_ratio.max(x.l1() / weak);
            records.push(LyRecord {
                n: k + 1,
                value: x.w11(),
                strong,
                weak,
            });
        }
        (records, weak_ratio)
    })
}

fn fit_sequential(per_member: &[(Vec<LyRecord>, f64)]) -> Result<SequentialLy> {
    let records: Vec<LyRecord> = per_member
        .iter()
        .flat_map(|(r, _)| r.iter().copied())
        .collect();
    let fit = fit_lasota_yorke(&records)?;
    let weak_bound = per_member.iter().map(|(_, w)| *w).fold(0.0, f64::max);
    Ok(SequentialLy {
        b: fit.c5.max(weak_bound),
        weak_bound,
        fit,
    })
}

/// Sequential Lasota-Yorke constants for random compositions from `pool` applied to `members`.
pub fn sequential_ly(
    pool: &[OperatorMatrix],
    members: &[CircleDensity],
    n_max: usize,
    seed: u64,
) -> Result<SequentialLy> {
    if pool.is_empty() || members.is_empty() {
        return Err(StoError::InvalidInput(
            "empty operator pool or ensemble".into(),
        ));
    }
    let mut r = ensemble::rng(seed);
    fit_sequential(&sequential_records(pool, members, n_max, &mut r))
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub samples: usize,
    pub delta: f64,
    /// Largest of the weak, strong and strongest coefficient norms of `L_{delta,f}`.
    pub bound_c: f64,
    pub bound_c_half: f64,
    pub bound_pass: bool,
    pub ly_lambda: f64,
    pub ly_a: f64,
    pub ly_b: f64,
    pub ly_a_half: f64,
    pub ly_b_half: f64,
    pub ly_residual: f64,
    pub ly_pass: bool,
    pub fixed_point_residual: f64,
    /// `a_n` for `n = 1..=EQ_STEPS` at the fixed point reached from the uniform density.
    pub eq_decay: Vec<f64>,
    pub eq_pass: bool,
    /// Divided by `delta` when `delta > 0`, raw otherwise.
    pub lip_c0: f64,
    pub lip_c0_half: f64,
    pub lip_c1: f64,
    pub lip_c1_half: f64,
    pub lip_pass: bool,
    pub all_pass: bool,
    pub notes: Vec<String>,
}

/// A constant is stable when doubling the sample does not more than double it.
fn stable(full: f64, half: f64) -> bool {
    full.is_finite() && full <= 2.0 * half + 1e-12
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

/// Empirical constants for the standing assumptions on `f -> L_{delta,f}`.
///
/// Every constant is computed on all samples and on the first half; a constant
/// fails when the full-sample value exceeds twice the half-sample value. Errors
/// inside a section are recorded in `notes` and fail that section.
pub fn assumption_audit(m: &StoModel, samples: usize, seed: u64) -> AuditReport {
    let samples = samples.max(2);
    let half = samples / 2;
    let n0 = m.max_mode();
    let delta = m.delta();
    let mut notes = Vec::new();
    let mut r = ensemble::rng(seed);
    let densities: Vec<CircleDensity> = (0..3 * samples)
        .map(|_| ensemble::random_probability(n0, PROBABILITY_AMPLITUDE, &mut r))
        .collect();
    let (pool_f, rest) = densities.split_at(samples);
    let (pair_f, test_f) = rest.split_at(samples);

    let pool = exec::try_map_indexed(samples, |i| m.frozen_operator(&pool_f[i]));
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            notes.push(format!("frozen operators: {e}"));
            Vec::new()
        }
    };

    // (b)
    let norms: Vec<f64> = exec::map_slice(&pool, |l| {
        (0..=2)
            .map(|k| l.full_coefficient_norm(k))
            .fold(0.0, f64::max)
    });
    let bound_c = if norms.is_empty() {
        f64::NAN
    } else {
        max_of(&norms)
    };
    let bound_c_half = if norms.is_empty() {
        f64::NAN
    } else {
        max_of(&norms[..half])
    };
    let bound_pass = stable(bound_c, bound_c_half);

    // (c)
    let mut members = ensemble::zero_average_ensemble(n0, samples, &mut r);
    members.extend(ensemble::mode_probes(n0, &mut r));
    members.extend(
        (0..samples).map(|_| ensemble::random_probability(n0, PROBABILITY_AMPLITUDE, &mut r)),
    );
    let mut ly: Option<(SequentialLy, SequentialLy)> = None;
    if !pool.is_empty() {
        let per_member = sequential_records(&pool, &members, AUDIT_STEPS, &mut r);
        let probes = samples..samples + n0;
        let in_half = |i: usize| {
            i < half || probes.contains(&i) || (probes.end..probes.end + half).contains(&i)
        };
        let subset: Vec<(Vec<LyRecord>, f64)> = per_member
            .iter()
            .enumerate()
            .filter(|(i, _)| in_half(*i))
            .map(|(_, p)| p.clone())
            .collect();
        match (fit_sequential(&per_member), fit_sequential(&subset)) {
            (Ok(full), Ok(part)) => ly = Some((full, part)),
            (Err(e), _) | (_, Err(e)) => notes.push(format!("sequential Lasota-Yorke fit: {e}")),
        }
    }
    let ly_pass = ly.as_ref().is_some_and(|(full, part)| {
        full.fit.lambda_tilde < 1.0 && stable(full.fit.c4, part.fit.c4) && stable(full.b, part.b)
    });
    let pick =
        |f: fn(&SequentialLy, &SequentialLy) -> f64| ly.as_ref().map_or(f64::NAN, |(a, b)| f(a, b));

    // (d)
    let mut fixed_point_residual = f64::NAN;
    let mut eq_decay = Vec::new();
    let mut eq_pass = false;
    match uniform_fixed_point(m, 1e-12) {
        Ok(fp) if fp.residual <= crate::sto::FIXED_POINT_GATE => {
            fixed_point_residual = fp.residual;
            match equilibrium_decay(m, &fp.h, EQ_STEPS, samples, seed) {
                Ok(a) => {
                    let monotone = a.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK);
                    eq_pass = monotone && a.last().is_some_and(|&v| v < EQ_TARGET);
                    if !monotone {
                        notes.push("equilibrium decay is not monotone".into());
                    }
                    eq_decay = a;
                }
                Err(e) => notes.push(format!("equilibrium decay: {e}")),
            }
        }
        Ok(fp) => {
            fixed_point_residual = fp.residual;
            notes.push(format!(
                "no fixed point from the uniform density (residual {:.3e})",
                fp.residual
            ));
        }
        Err(e) => notes.push(format!("fixed point: {e}")),
    }

    // (e)
    let lip = exec::try_map_indexed(samples, |i| {
        let f1 = &pool_f[i];
        let f2 = &pair_f[i];
        let u = &test_f[i];
        let diff = m.frozen_operator(f1)?.sub(&m.frozen_operator(f2)?);
        let du = diff.apply(u);
        let dist = (f1 - f2).l1();
        let norms = u.analytic_norms();
        Ok::<_, StoError>((
            du.w11() / (norms.strongest * dist),
            du.l1() / (norms.strong * dist),
        ))
    });
    let scale = if delta > 0.0 { 1.0 / delta } else { 1.0 };
    let (mut c0, mut c0h, mut c1, mut c1h) = (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    match lip {
        Ok(v) => {
            let a: Vec<f64> = v.iter().map(|p| p.0 * scale).collect();
            let b: Vec<f64> = v.iter().map(|p| p.1 * scale).collect();
            c0 = max_of(&a);
            c0h = max_of(&a[..half]);
            c1 = max_of(&b);
            c1h = max_of(&b[..half]);
        }
        Err(e) => notes.push(format!("regularity sampling: {e}")),
    }
    let lip_pass = stable(c0, c0h) && stable(c1, c1h);

    AuditReport {
        samples,
        delta,
        bound_c,
        bound_c_half,
        bound_pass,
        ly_lambda: pick(|a, _| a.fit.lambda_tilde),
        ly_a: pick(|a, _| a.fit.c4),
        ly_b: pick(|a, _| a.b),
        ly_a_half: pick(|_, b| b.fit.c4),
        ly_b_half: pick(|_, b| b.b),
        ly_residual: pick(|a, _| a.fit.residual),
        ly_pass,
        fixed_point_residual,
        eq_decay,
        eq_pass,
        lip_c0: c0,
        lip_c0_half: c0h,
        lip_c1: c1,
        lip_c1_half: c1h,
        lip_pass,
        all_pass: bound_pass && ly_pass && eq_pass && lip_pass,
        notes,
    }
}
