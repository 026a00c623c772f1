// SPDX-License-Identifier: Apache-2.0

use super::{Flow, FlowConfig, FlowState, Init, MONOTONE_TOL};
use crate::analysis::{decay_report, extract_support};
use crate::error::{Error, Result};
use crate::functionals::{Classification, Functionals, GroundStateReport, IdentityChecks};
use crate::radial::io::read_profile;
use crate::radial::{make_graded_grid, make_grid, Clustering, RadialFunction, RadialGrid, TailModel};
use crate::special_fn::Params;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::sync::Arc;

/// Far-field floor added to p < 2 initial data so that every node can grow.
const SEED_FLOOR: f64 = 1e-12;

/// Intervals of the p ≥ 2 pilot grid.
const PILOT_INTERVALS: usize = 256;

/// Fewest pilot nodes inside the support before the pilot is redone on a
/// smaller domain.
const MIN_SUPPORT_NODES: usize = 24;

/// Restarts of a p = 2 trial whose edge nodes sat on the zero branch.
const REVIVALS: usize = 5;

fn run_grid(cfg: &FlowConfig, params: &Params) -> Result<Arc<RadialGrid>> {
    let l = cfg.domain_length(params);
    if params.p < 2.0 {
        Ok(Arc::new(make_grid(l, cfg.intervals(params), cfg.grid.clustering_or(Clustering::Uniform))?))
    } else {
        Ok(Arc::new(make_grid(l, cfg.intervals(params).min(PILOT_INTERVALS), Clustering::Uniform)?))
    }
}

fn far_tail(params: &Params) -> Result<TailModel> {
    if params.p < 2.0 {
        Ok(TailModel::algebraic(params.decay_exponent()?, 0.0))
    } else {
        Ok(TailModel::NONE)
    }
}

fn from_shape(grid: Arc<RadialGrid>, params: &Params, shape: impl Fn(f64) -> f64) -> Result<RadialFunction> {
    let tail = far_tail(params)?;
    let floor = |r: f64| {
        if params.p < 2.0 {
            SEED_FLOOR * (1.0 + r * r).powf(-0.5 * tail.exponent)
        } else {
            0.0
        }
    };
    let mut u = RadialFunction::from_fn(grid, params.n, |r| shape(r) + floor(r), TailModel::NONE)?;
    if tail.is_algebraic() {
        u = u.with_tail(tail)?;
        u.rematch_tail();
    }
    Ok(u)
}

/// The configured initial datum on the main (p < 2) or pilot (p ≥ 2) grid,
/// before scaling to unit interaction energy.
pub fn initial_profile(cfg: &FlowConfig, params: &Params) -> Result<RadialFunction> {
    let grid = run_grid(cfg, params)?;
    let n = params.dim();
    match cfg.init {
        Init::Gaussian => from_shape(grid, params, |r| (-0.5 * r * r).exp()),
        Init::ExplicitFamilyAnsatz => from_shape(grid, params, |r| (1.0 + r * r).powf(-0.5 * (n + 1.0))),
        Init::BallIndicator => {
            let radius = 0.5 * grid.length();
            from_shape(grid, params, move |r| if r <= radius { 1.0 } else { 0.0 })
        }
        Init::File => {
            let path = cfg.init_file.as_ref().ok_or_else(|| Error::Config("init = file needs init_file".into()))?;
            let (u, _) = read_profile(path, Some(params.n))?;
            Ok(u)
        }
    }
}

/// Ground state of the Thomas-Fermi problem (ε^ν = 0) or of its
/// regularization with diffusion weight `eps_weight`, normalized so that
/// λ(∞) = 1, with its report.
pub fn solve(cfg: &FlowConfig, params: &Params, eps_weight: f64) -> Result<(RadialFunction, GroundStateReport)> {
    params.validate()?;
    cfg.validate()?;
    let u0 = initial_profile(cfg, params)?;
    let (v, report) = solve_from(cfg, params, &u0)?;
    if eps_weight > 0.0 {
        let scale = report.support_radius.finite();
        return super::sweep::eps_state(cfg, params, eps_weight, &v, scale);
    }
    Ok((v, report))
}

/// As [`solve`] with ε^ν = 0, from an explicit initial profile.
pub fn solve_from(cfg: &FlowConfig, params: &Params, u0: &RadialFunction) -> Result<(RadialFunction, GroundStateReport)> {
    params.validate()?;
    cfg.validate()?;
    if params.p < 2.0 {
        two_pass(cfg, params, u0)
    } else {
        fitted(cfg, params, u0)
    }
}

/// p < 2: a first pass fixes the scale; the second restarts from the
/// normalized state with its own interaction energy, so λ(∞) ≈ 1 and the
/// result lives on the requested grid.
fn two_pass(cfg: &FlowConfig, params: &Params, u0: &RadialFunction) -> Result<(RadialFunction, GroundStateReport)> {
    let grid = run_grid(cfg, params)?;
    let flow = Flow::new(params, grid, far_tail(params)?, 0.0, cfg)?.with_label("pass1");
    let mut st = flow.start(u0, Some(1.0))?;
    let first = flow.run(&mut st)?;
    let t = st.lambda_t.powf(1.0 / params.alpha);
    let v1 = st.u.dilated(t);
    let d1 = st.d_alpha_target * t.powf(params.dim() + params.alpha);
    let steps1 = st.steps;
    let flow = flow.with_label("pass2");
    let mut st = flow.start(&v1, Some(d1))?;
    let converged = flow.run(&mut st)?;
    let diag = json!({
        "pipeline": "two-pass",
        "pass1": { "steps": steps1, "converged": first, "lambda": t.powf(params.alpha) },
    });
    finish(&flow, &st, params, cfg, 0.0, converged, diag)
}

struct Trial {
    x: f64,
    g: f64,
    dead: bool,
    converged: bool,
    st: FlowState,
}

/// p ≥ 2: a pilot flow on a generous uniform grid selects the support, then
/// the state is refined on a grid fitted to that support while a secant on
/// ln D_0 enforces the boundary condition λ V(R) = f(λ_P) of ground states,
/// f(t) = t^{2−p} + t^{q−p}.
fn fitted(cfg: &FlowConfig, params: &Params, u0: &RadialFunction) -> Result<(RadialFunction, GroundStateReport)> {
    let (p, q) = (params.p, params.q);
    let lambda_star = params.lambda_star()?;
    let lambda_p = params.lambda_pohozaev()?;
    let mut pilot_cfg = cfg.clone();
    pilot_cfg.stall_tol = cfg.stall_tol.max(1e-7);
    let mut length = cfg.domain_length(params);
    let intervals = cfg.intervals(params);
    let mut pilots = Vec::new();
    let (restricted, support) = loop {
        let grid = Arc::new(make_grid(length, intervals.min(PILOT_INTERVALS), Clustering::Uniform)?);
        let flow = Flow::new(params, grid, TailModel::NONE, 0.0, &pilot_cfg)?.with_label("pilot");
        let mut st = flow.start(u0, Some(1.0))?;
        let converged = flow.run(&mut st)?;
        let u = st.u.values();
        let cutoff = if p > 2.0 {
            lambda_star * (1.0 - 1e-3)
        } else {
            cfg.threshold_frac * st.u.center()
        };
        let k = u.iter().rposition(|&x| x > cutoff).unwrap_or(0);
        let r = flow.grid().nodes();
        pilots.push(json!({ "length": length, "support": r[k], "steps": st.steps, "converged": converged }));
        if k + 1 >= MIN_SUPPORT_NODES || pilots.len() >= 6 {
            if k < 8 {
                return Err(Error::Degenerate(format!("pilot support collapsed to {} nodes", k + 1)));
            }
            let grid = Arc::new(RadialGrid::from_nodes(r[..=k].to_vec(), flow.grid().order())?);
            break (RadialFunction::new(grid, params.n, u[..=k].to_vec(), TailModel::NONE)?, r[k]);
        }
        length = (2.0 * r[k.max(1)]).max(length / 16.0);
    };

    let grid = Arc::new(fitted_grid(cfg, params, support)?);
    let flow = Flow::new(params, grid, TailModel::NONE, 0.0, cfg)?.with_label("boundary");
    let target = lambda_p.powf(2.0 - p) + lambda_p.powf(q - p);
    let trial = |x: f64, base: &RadialFunction| -> Result<Trial> {
        let top = base.sup();
        let floored = base.with_values(base.values().iter().map(|v| v.max(1e-12 * top)).collect())?;
        let mut st = flow.start(&floored, Some(x.exp()))?;
        let mut converged = flow.run(&mut st)?;
        // At p = 2 the zero branch is stationary too; nodes stranded on it
        // restart from the positive root (λV − 1)^{1/(q−2)}.
        for _ in 0..REVIVALS {
            if p != 2.0 {
                break;
            }
            let Some(revived) = revive(&st, q) else { break };
            st = flow.start(&st.u.with_values(revived)?, Some(x.exp()))?;
            converged = flow.run(&mut st)?;
        }
        let dead = p > 2.0 && st.u.values().iter().any(|&v| v < 0.5 * lambda_star);
        let boundary = st.lambda_t * st.potential[st.potential.len() - 1];
        Ok(Trial {
            x,
            g: (boundary / target).ln(),
            dead,
            converged,
            st,
        })
    };

    let start = flow.start(&restricted, None)?;
    let mut base = start.u.clone();
    let mut cur = trial(start.d_alpha_target.ln(), &base)?;
    let mut lo: Option<(f64, f64)> = None;
    let mut hi: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64)> = None;
    let mut best: Option<Trial> = None;
    let mut iterations = 0usize;
    let mut deaths = 0usize;
    while iterations < 80 {
        iterations += 1;
        let next_x = if cur.dead {
            deaths += 1;
            lo = Some((cur.x, f64::NEG_INFINITY));
            match hi {
                Some((xh, _)) => 0.5 * (cur.x + xh),
                None => cur.x + std::f64::consts::LN_2,
            }
        } else {
            base = cur.st.u.clone();
            if cur.g < 0.0 {
                lo = Some((cur.x, cur.g));
            } else {
                hi = Some((cur.x, cur.g));
            }
            if best.as_ref().is_none_or(|b| cur.g.abs() < b.g.abs()) {
                best = Some(Trial {
                    st: cur.st.clone(),
                    ..cur
                });
            }
            if cur.g.abs() <= cfg.boundary_tol {
                break;
            }
            let mut x = match prev {
                Some((xp, gp)) if gp.is_finite() && gp != cur.g => cur.x - cur.g * (cur.x - xp) / (cur.g - gp),
                _ => cur.x - cur.g.clamp(-0.5, 0.5),
            };
            if let (Some((xl, _)), Some((xh, _))) = (lo, hi) {
                let (a, b) = (xl.min(xh), xl.max(xh));
                if !(x > a && x < b) {
                    x = 0.5 * (xl + xh);
                }
                if (b - a).abs() < 1e-13 {
                    break;
                }
            } else {
                x = x.clamp(cur.x - 1.0, cur.x + 1.0);
            }
            prev = Some((cur.x, cur.g));
            x
        };
        if deaths > 40 {
            return Err(Error::Degenerate("boundary fit: the support keeps dying off".into()));
        }
        cur = trial(next_x, &base)?;
    }
    if !cur.dead && best.as_ref().is_none_or(|b| cur.g.abs() < b.g.abs()) {
        best = Some(cur);
    }
    let best = best.ok_or_else(|| Error::Degenerate("boundary fit found no state on the upper branch".into()))?;
    let fit_ok = best.g.abs() <= 10.0 * cfg.boundary_tol;
    let diag = json!({
        "pipeline": "pilot-fitted-secant",
        "pilots": pilots,
        "fitted_support": support,
        "secant_iterations": iterations,
        "boundary_deaths": deaths,
        "boundary_mismatch": best.g,
        "d_alpha_0": best.x.exp(),
    });
    finish(&flow, &best.st, params, cfg, 0.0, best.converged && fit_ok, diag)
}

/// Grid on the fitted support [0, S]. For α < 1 the potential of a
/// jumping density behaves like V(S) + c (S − r)^α inside the support and so
/// does u; the default then interpolates in (S − r)^α, elsewhere it uses the
/// geometric boundary layer.
fn fitted_grid(cfg: &FlowConfig, params: &Params, support: f64) -> Result<RadialGrid> {
    let intervals = cfg.intervals(params);
    let graded = || make_graded_grid(support, intervals, params.alpha.min(1.0));
    match cfg.grid.clustering {
        Some(Clustering::BoundaryGraded) => graded(),
        Some(c) => make_grid(support, intervals, c),
        None if params.alpha < 1.0 => graded(),
        None => make_grid(support, intervals, Clustering::BoundaryClustered),
    }
}

/// Positive-branch values for p = 2 nodes stuck below half of
/// (λV − 1)^{1/(q−2)}; None when there are none.
fn revive(st: &FlowState, q: f64) -> Option<Vec<f64>> {
    let mut out = st.u.values().to_vec();
    let mut any = false;
    for (u, v) in out.iter_mut().zip(&st.potential) {
        let excess = st.lambda_t * v - 1.0;
        if excess > 0.0 {
            let root = excess.powf(1.0 / (q - 2.0));
            if *u < 0.5 * root {
                *u = root;
                any = true;
            }
        }
    }
    any.then_some(out)
}

/// Dilates the stationary state by λ^{1/α} and assembles its report.
pub(crate) fn finish(
    flow: &Flow,
    st: &FlowState,
    params: &Params,
    cfg: &FlowConfig,
    eps_weight: f64,
    converged: bool,
    mut diag: serde_json::Value,
) -> Result<(RadialFunction, GroundStateReport)> {
    let lam = st.lambda_t;
    let t = lam.powf(1.0 / params.alpha);
    let mut v = st.u.dilated(t);
    v.mark_monotone(MONOTONE_TOL * v.center())?;
    let g = flow.functionals(st)?.rescaled(1.0, t, params);
    let f = Functionals::from_parts(params, g.norm2_sq, g.normq_q, g.normp_p, g.d_alpha, g.grad_sq, eps_weight);
    let (linf, l2) = flow.residual_summary(st);
    let support = extract_support(&v, cfg.threshold_frac)?;
    let classification = support.classify(v.center());
    let decay = if params.p < 2.0 && eps_weight == 0.0 {
        match decay_report(&v, params, cfg.tail_window) {
            Ok(d) => Some(d),
            Err(e) => {
                diag["decay_error"] = json!(e.to_string());
                None
            }
        }
    } else {
        None
    };
    let jump_lambda = match classification {
        Classification::FullSupportSmooth => None,
        _ => support.jump_lambda,
    };
    let grid = v.grid();
    diag["steps"] = json!(st.steps);
    diag["rejected_steps"] = json!(st.rejected);
    diag["time"] = json!(st.time);
    diag["clip_events"] = json!(st.clip_steps.len());
    diag["late_clip_events"] = json!(st.late_clips());
    diag["rayleigh_nondecreasing_tail"] = json!(st.rayleigh_nondecreasing_tail());
    diag["kappa"] = json!(st.kappa);
    diag["init"] = serde_json::to_value(cfg.init)?;
    diag["support_low_confidence"] = json!(support.low_confidence);
    diag["grid"] = json!({
        "length": grid.length(),
        "intervals": grid.intervals(),
        "clustering": grid.clustering(),
    });
    let report = GroundStateReport {
        version: crate::VERSION.to_string(),
        params: *params,
        functionals: f,
        sigma_star_est: f.j_eps,
        support_radius: support.radius,
        jump_lambda,
        center_value: v.center(),
        decay,
        residual_linf: linf,
        residual_l2: l2,
        classification,
        expected_classification: Classification::expected(params),
        identities: IdentityChecks::of(&f, params),
        converged,
        lambda_inf: Some(lam),
        eps_weight,
        tail_window: cfg.tail_window,
        diagnostics: diag,
        history: st.history.clone(),
    };
    Ok((v, report))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultiStart {
    /// (width, exponent) of each random start (1 + (r/w)²)^{−γ}.
    pub starts: Vec<(f64, f64)>,
    pub energies: Vec<f64>,
    pub classifications: Vec<Classification>,
    /// (max − min)/|mean| of the energies.
    pub energy_spread: f64,
}

/// Repeats the solve from `starts` seeded random ansatz profiles and reports
/// how far the resulting energies disagree.
pub fn multi_start(cfg: &FlowConfig, params: &Params, starts: usize) -> Result<MultiStart> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let base = 0.5 * (params.dim() + 1.0);
    let mut out = MultiStart {
        starts: Vec::new(),
        energies: Vec::new(),
        classifications: Vec::new(),
        energy_spread: 0.0,
    };
    for _ in 0..starts {
        let w: f64 = rng.gen_range(0.5..2.0);
        let gamma: f64 = base * rng.gen_range(0.5..1.5);
        let u0 = from_shape(run_grid(cfg, params)?, params, |r| (1.0 + (r / w).powi(2)).powf(-gamma))?;
        let (_, rep) = solve_from(cfg, params, &u0)?;
        out.starts.push((w, gamma));
        out.energies.push(rep.sigma_star_est);
        out.classifications.push(rep.classification);
    }
    if !out.energies.is_empty() {
        let max = out.energies.iter().copied().fold(f64::MIN, f64::max);
        let min = out.energies.iter().copied().fold(f64::MAX, f64::min);
        let mean = out.energies.iter().sum::<f64>() / out.energies.len() as f64;
        out.energy_spread = (max - min) / mean.abs();
    }
    Ok(out)
}
