use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};
use sto_lab::diagnostics::{
    assumption_audit, crosscheck_scaling, ensemble_crosscheck, losc_experiment,
    memory_loss_experiment, multi_start, strong_regime_scan, weak_coupling_sweep, ScanParams,
};
use sto_lab::differential::{
    contraction_report, coupling_derivative_matrix, differential_matrix, fd_validate_differential,
    ly_fit, ly_validate,
};
use sto_lab::{ensemble, CircleDensity, StoError, StoModel};

use crate::config::{Config, ExperimentConfig};

/// CSV trace: file name, header, rows.
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&'static str]) -> Self {
        Table {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Everything an experiment produced, complete or not.
#[derive(Default)]
pub struct Outcome {
    pub flags: Vec<(&'static str, bool)>,
    pub results: Map<String, Value>,
    pub tables: Vec<Table>,
    pub lines: Vec<String>,
    pub error: Option<String>,
}

impl Outcome {
    fn flag(&mut self, name: &'static str, ok: bool) {
        self.flags.push((name, ok));
    }

    fn put(&mut self, key: &str, v: Value) {
        self.results.insert(key.to_string(), v);
    }

    /// Exit status 0 iff the experiment finished and every flag passed.
    pub fn pass(&self) -> bool {
        self.error.is_none() && self.flags.iter().all(|f| f.1)
    }
}

type Step = Result<(), StoError>;

fn fixed_point(cfg: &Config, m: &StoModel, out: &mut Outcome) -> Result<CircleDensity, StoError> {
    let start = CircleDensity::constant(m.max_mode(), 1.0);
    let fp = m.fixed_point(&start, cfg.tolerance, cfg.max_iter, cfg.solver)?;
    let mut t = Table::new("fixed_point_history.csv", &["iteration", "residual"]);
    for (i, r) in fp.history.iter().enumerate() {
        t.push(vec![i.to_string(), num(*r)]);
    }
    out.tables.push(t);
    out.put(
        "fixed_point",
        json!({
            "residual": fp.residual,
            "iterations": fp.iterations,
            "solver": fp.solver,
            "converged": fp.converged,
            "fallback": fp.fallback,
            "barycenter_weight": sto_lab::coupling::barycenter_stats(&fp.h).weight,
        }),
    );
    out.lines.push(format!(
        "fixed point: residual {:.3e} after {} iterations ({:?})",
        fp.residual, fp.iterations, fp.solver
    ));
    out.flag("fixed_point_converged", fp.converged);
    if !fp.converged {
        return Err(StoError::NotFixedPoint {
            residual: fp.residual,
        });
    }
    Ok(fp.h)
}

fn run_fixed_point(cfg: &Config, m: &StoModel, starts: usize, out: &mut Outcome) -> Step {
    let h = fixed_point(cfg, m, out)?;
    out.put("h", to_value(&h));
    if starts > 1 {
        let ms = multi_start(m, starts, cfg.tolerance, cfg.max_iter, cfg.seed)?;
        let mut t = Table::new(
            "multi_start.csv",
            &["start", "converged", "residual", "weight"],
        );
        for i in 0..ms.starts {
            t.push(vec![
                i.to_string(),
                ms.converged[i].to_string(),
                num(ms.residuals[i]),
                num(ms.weights[i]),
            ]);
        }
        out.tables.push(t);
        out.lines.push(format!(
            "multi-start: {} starts, max disagreement {:.3e}, unique {}",
            ms.starts, ms.max_disagreement, ms.unique
        ));
        out.put("unique_fixed_point", json!(ms.unique));
        out.put(
            "multi_start",
            json!({
                "starts": ms.starts,
                "converged": ms.converged,
                "residuals": ms.residuals,
                "weights": ms.weights,
                "max_disagreement": ms.max_disagreement,
            }),
        );
        out.flag("unique_fixed_point", ms.unique);
    }
    Ok(())
}

fn run_differential(cfg: &Config, m: &StoModel, e: &ExperimentConfig, out: &mut Outcome) -> Step {
    let ExperimentConfig::Differential {
        fd_steps,
        n_max,
        ensemble,
        ly_steps,
        validation,
    } = e
    else {
        unreachable!()
    };
    let h = fixed_point(cfg, m, out)?;
    let d = differential_matrix(m, &h)?;
    let coupling_max = coupling_derivative_matrix(m, &h)?.max_abs();
    let g = ensemble::probe_ensemble(m.max_mode(), 1, cfg.seed)[0].clone();
    let fd = fd_validate_differential(m, &h, &g, fd_steps)?;
    let mut t = Table::new("finite_differences.csv", &["t", "error"]);
    for r in &fd.rows {
        t.push(vec![num(r.t), num(r.error)]);
    }
    out.tables.push(t);
    out.lines
        .push(format!("finite differences: log-log slope {:.3}", fd.slope));
    out.put("finite_differences", to_value(&fd));
    out.put("coupling_term_max_entry", json!(coupling_max));
    out.flag("fd_first_order", fd.passed);

    let rep = contraction_report(&d, *n_max, *ensemble, cfg.seed);
    let mut t = Table::new("contraction.csv", &["n", "proxy_norm", "empirical_norm"]);
    for (i, (p, q)) in rep.proxy_norms.iter().zip(&rep.empirical_norms).enumerate() {
        t.push(vec![(i + 1).to_string(), num(*p), num(*q)]);
    }
    out.tables.push(t);
    out.lines.push(format!(
        "contraction: first contracting n {}, spectral radius {:.4}",
        opt(rep.first_contracting_n),
        rep.spectral_radius
    ));
    out.put("contraction", to_value(&rep));
    out.flag("contracting", rep.first_contracting_n.is_some());

    let ly = ly_fit(&d, *ly_steps, *ensemble, cfg.seed)?;
    let held_out = ly_validate(&d, &ly, *ly_steps, *validation, cfg.seed.wrapping_add(1));
    out.lines.push(format!(
        "Lasota-Yorke: lambda {:.4}, C4 {:.4}, C5 {:.4}, held-out ratio {held_out:.3}",
        ly.lambda_tilde, ly.c4, ly.c5
    ));
    out.put(
        "lasota_yorke",
        json!({ "fit": to_value(&ly), "held_out_ratio": held_out }),
    );
    out.flag(
        "lasota_yorke_holds",
        ly.lambda_tilde < 1.0 && held_out <= 1.0,
    );
    Ok(())
}

fn run_losc(
    cfg: &Config,
    m: &StoModel,
    epsilon: f64,
    ens: usize,
    n_steps: usize,
    out: &mut Outcome,
) -> Step {
    let h = fixed_point(cfg, m, out)?;
    let o = losc_experiment(m, &h, epsilon, ens, n_steps, cfg.seed)?;
    let mut t = Table::new("losc_trace.csv", &["n", "distance"]);
    for (n, v) in &o.fit.trace {
        t.push(vec![n.to_string(), num(*v)]);
    }
    out.tables.push(t);
    let log_k = (m.map().degree() as f64).ln();
    out.lines.push(format!(
        "losc: gamma {:.4} (gamma / log k = {:.4}), C {:.4}, epsilon {}",
        o.fit.gamma,
        o.fit.gamma / log_k,
        o.fit.c,
        o.epsilon
    ));
    out.put("gamma", json!(o.fit.gamma));
    out.put("gamma_over_log_degree", json!(o.fit.gamma / log_k));
    out.put("losc", to_value(&o));
    out.flag("decays", o.fit.gamma > 0.0);
    out.flag("stays_in_cone", o.flag.is_none());
    Ok(())
}

fn run_sweep(cfg: &Config, m: &StoModel, deltas: &[f64], n: usize, out: &mut Outcome) -> Step {
    let s = weak_coupling_sweep(m, deltas, n, cfg.tolerance)?;
    let mut t = Table::new(
        "sweep.csv",
        &[
            "delta",
            "converged",
            "residual",
            "first_contracting_n",
            "proxy_norm",
            "coupling_norm",
            "flag",
        ],
    );
    for r in &s.rows {
        t.push(vec![
            num(r.delta),
            r.converged.to_string(),
            num(r.residual),
            opt(r.first_contracting_n),
            opt(r.proxy_norm),
            opt(r.coupling_norm),
            r.flag.clone().unwrap_or_default(),
        ]);
    }
    out.tables.push(t);
    out.lines.push(format!(
        "sweep: {} deltas, delta_1 = {}",
        s.rows.len(),
        opt(s.delta_one)
    ));
    out.flag("every_row_solved", s.rows.iter().all(|r| r.flag.is_none()));
    out.flag("contracting_interval", s.delta_one.is_some());
    out.put("sweep", to_value(&s));
    Ok(())
}

fn run_memory(
    cfg: &Config,
    m: &StoModel,
    epsilon: f64,
    n_steps: usize,
    ens: usize,
    out: &mut Outcome,
) -> Step {
    let h = fixed_point(cfg, m, out)?;
    let r = memory_loss_experiment(m, &h, epsilon, n_steps, ens, cfg.seed)?;
    let mut t = Table::new("memory_bound.csv", &["n", "distance", "ratio"]);
    for row in &r.rows {
        t.push(vec![row.n.to_string(), num(row.distance), num(row.ratio)]);
    }
    out.tables.push(t);
    let mut t = Table::new("memory_decay.csv", &["n", "strong_norm"]);
    for (n, v) in &r.decay.trace {
        t.push(vec![n.to_string(), num(*v)]);
    }
    out.tables.push(t);
    out.lines.push(format!(
        "loss of memory: gamma {:.4}, max bound ratio {:.4} (lambda {:.3}, A {:.3}, B {:.3}, M {:.3})",
        r.decay.gamma, r.max_ratio, r.lambda, r.a, r.b, r.m
    ));
    out.flag("decays", r.decay.gamma > 0.0);
    out.flag("bound_holds", r.max_ratio <= 1.0);
    out.flag("closeness_met", r.flag.is_none());
    out.put("memory", to_value(&r));
    Ok(())
}

fn run_audit(cfg: &Config, m: &StoModel, samples: usize, out: &mut Outcome) -> Step {
    let a = assumption_audit(m, samples, cfg.seed);
    let mut t = Table::new("equilibrium_decay.csv", &["n", "a_n"]);
    for (i, v) in a.eq_decay.iter().enumerate() {
        t.push(vec![(i + 1).to_string(), num(*v)]);
    }
    out.tables.push(t);
    out.lines.push(format!(
        "audit: bound C {:.4}, lambda {:.4}, A {:.4}, B {:.4}, C0 {:.4}, C1 {:.4}",
        a.bound_c, a.ly_lambda, a.ly_a, a.ly_b, a.lip_c0, a.lip_c1
    ));
    for n in &a.notes {
        out.lines.push(format!("  note: {n}"));
    }
    out.flag("boundedness", a.bound_pass);
    out.flag("lasota_yorke", a.ly_pass);
    out.flag("equilibrium", a.eq_pass);
    out.flag("regularity", a.lip_pass);
    out.put("audit", to_value(&a));
    Ok(())
}

fn run_ensemble(
    cfg: &Config,
    m: &StoModel,
    particles: usize,
    steps: usize,
    scaling: Option<&crate::config::ScalingConfig>,
    out: &mut Outcome,
) -> Step {
    let c = ensemble_crosscheck(m, particles, steps, cfg.seed)?;
    let mut t = Table::new("particle_distance.csv", &["step", "l1_distance"]);
    for (i, d) in c.distances.iter().enumerate() {
        t.push(vec![i.to_string(), num(*d)]);
    }
    out.tables.push(t);
    out.lines.push(format!(
        "particles: {} for {} steps, L1 distance {:.4} (initial {:.4})",
        c.particles, c.steps, c.distance, c.distances[0]
    ));
    out.flag("approaches_fixed_density", c.distance < c.distances[0]);
    out.put("crosscheck", to_value(&c));
    if let Some(s) = scaling {
        let sc = crosscheck_scaling(m, &s.counts, steps, s.seeds, cfg.seed)?;
        let mut t = Table::new("particle_scaling.csv", &["particles", "mean", "std_err"]);
        for r in &sc.rows {
            t.push(vec![r.particles.to_string(), num(r.mean), num(r.std_err)]);
            out.lines.push(format!(
                "  {:>8} particles: {:.4} +- {:.4}",
                r.particles, r.mean, r.std_err
            ));
        }
        out.tables.push(t);
        out.flag("monotone_in_particles", sc.monotone);
        out.put("scaling", to_value(&sc));
    }
    Ok(())
}

fn run_strong(cfg: &Config, m: &StoModel, e: &ExperimentConfig, out: &mut Outcome) -> Step {
    let ExperimentConfig::StrongRegime {
        sigmas,
        deltas,
        epsilon,
        ensemble,
        n_steps,
        n_max,
    } = e
    else {
        unreachable!()
    };
    let params = ScanParams {
        max_mode: m.max_mode(),
        epsilon: *epsilon,
        ensemble: *ensemble,
        n_steps: *n_steps,
        n_max: *n_max,
        seed: cfg.seed,
    };
    let s = strong_regime_scan(m.map(), sigmas, deltas, &params)?;
    let mut t = Table::new(
        "strong_regime.csv",
        &[
            "sigma",
            "delta",
            "delta_weight",
            "psi_residual",
            "psi_fixed",
            "psi_dot_weak_to_strong",
            "psi_dot_contraction",
            "psi_dot_spectral_radius",
            "admissible",
            "h0_gamma",
            "h0_pass",
        ],
    );
    for r in &s.rows {
        t.push(vec![
            num(r.sigma),
            num(r.delta),
            num(r.delta_weight),
            num(r.psi_residual),
            r.psi_fixed.to_string(),
            opt(r.psi_dot_weak_to_strong),
            opt(r.psi_dot_contraction),
            opt(r.psi_dot_spectral_radius),
            r.admissible.to_string(),
            num(r.h0_gamma),
            r.h0_pass.to_string(),
        ]);
    }
    out.tables.push(t);
    let best = s
        .rows
        .iter()
        .filter_map(|r| r.psi_dot_contraction)
        .fold(f64::INFINITY, f64::min);
    out.lines.push(format!(
        "strong regime: {} grid points, admissible pair {}, smallest contraction factor {best:.4}",
        s.rows.len(),
        s.admissible.map_or("none".to_string(), |(a, b)| format!(
            "(sigma {a}, delta {b})"
        ))
    ));
    out.flag("admissible_pair", s.admissible.is_some());
    out.flag("uniform_state_stable", s.h0_pass_all);
    out.put("scan", to_value(&s));
    Ok(())
}

pub fn execute(cfg: &Config) -> Outcome {
    let mut out = Outcome::default();
    let m = match cfg.build_model() {
        Ok(m) => m,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    let result = match &cfg.experiment {
        ExperimentConfig::FixedPoint { starts } => run_fixed_point(cfg, &m, *starts, &mut out),
        e @ ExperimentConfig::Differential { .. } => run_differential(cfg, &m, e, &mut out),
        ExperimentConfig::Losc {
            epsilon,
            ensemble,
            n_steps,
        } => run_losc(cfg, &m, *epsilon, *ensemble, *n_steps, &mut out),
        ExperimentConfig::Sweep { deltas, n } => run_sweep(cfg, &m, deltas, *n, &mut out),
        ExperimentConfig::Memory {
            epsilon,
            n_steps,
            ensemble,
        } => run_memory(cfg, &m, *epsilon, *n_steps, *ensemble, &mut out),
        ExperimentConfig::Audit { samples } => run_audit(cfg, &m, *samples, &mut out),
        ExperimentConfig::Ensemble {
            particles,
            steps,
            scaling,
        } => run_ensemble(cfg, &m, *particles, *steps, scaling.as_ref(), &mut out),
        e @ ExperimentConfig::StrongRegime { .. } => run_strong(cfg, &m, e, &mut out),
    };
    if let Err(e) = result {
        out.error = Some(e.to_string());
    }
    out
}

pub fn summary(cfg: &Config, out: &Outcome) -> Value {
    let flags: Map<String, Value> = out
        .flags
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    json!({
        "id": cfg.id,
        "description": cfg.description,
        "experiment": cfg.experiment.name(),
        "pass": out.pass(),
        "flags": flags,
        "error": out.error,
        "results": out.results,
        "config": to_value(cfg),
    })
}

/// Writes `summary.json` and the CSV traces to `dir/<id>/`; returns that directory.
pub fn write_report(cfg: &Config, out: &Outcome, dir: &Path) -> anyhow::Result<PathBuf> {
    let dir = dir.join(&cfg.id);
    fs::create_dir_all(&dir)?;
    let mut text = serde_json::to_string_pretty(&summary(cfg, out))?;
    text.push('\n');
    fs::write(dir.join("summary.json"), text)?;
    for t in &out.tables {
        let mut w = csv::Writer::from_path(dir.join(t.name))?;
        w.write_record(&t.header)?;
        for r in &t.rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(dir)
}
