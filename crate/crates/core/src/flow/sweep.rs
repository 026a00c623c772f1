// SPDX-License-Identifier: Apache-2.0

use super::solve::{finish, initial_profile, solve_from};
use super::{Flow, FlowConfig};
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::functionals::GroundStateReport;
use crate::radial::io::fmt17;
use crate::radial::{l2_distance, make_grid, Clustering, RadialFunction, TailModel};
use crate::special_fn::Params;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::sync::Arc;

/// Default intervals of the regularized p ≥ 2 runs.
const EPS_INTERVALS: usize = 1024;

pub const EPS_HEADER: [&str; 6] = ["eps", "nu_weight", "sigma_eps", "grad_term", "l2_dist", "converged"];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsRecord {
    pub eps: f64,
    /// ε^ν.
    pub nu_weight: f64,
    /// 𝒥_ε of the normalized state.
    pub sigma_eps: f64,
    /// ε^ν ‖∇u_ε‖₂².
    pub grad_term: f64,
    /// ‖u_ε − u_0‖₂ against the ε^ν = 0 ground state.
    pub l2_dist: f64,
    pub converged: bool,
    pub report: GroundStateReport,
}

/// ε^ν for every ε, after checking that the sweep runs toward the
/// Thomas-Fermi limit: ε increasing in regime (i) (ν < 0), decreasing in
/// regime (ii) (ν > 0). ε = ∞ in regime (i) and ε = 0 in regime (ii) give
/// weight 0.
pub fn eps_weights(params: &Params, eps_grid: &[f64]) -> Result<Vec<f64>> {
    let nu = params.nu();
    if nu == 0.0 {
        return Err(Error::Config(
            "ν = 0: q = 2(2p+α)/(2+α) lies in neither regime (i) nor regime (ii)".into(),
        ));
    }
    let regime = if nu < 0.0 { "regime (i): ν < 0, ε → ∞" } else { "regime (ii): ν > 0, ε → 0" };
    let increasing = eps_grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = eps_grid.windows(2).all(|w| w[1] < w[0]);
    if eps_grid.len() > 1 && ((nu < 0.0 && !increasing) || (nu > 0.0 && !decreasing)) {
        return Err(Error::Config(format!(
            "ε grid runs the wrong way for {regime}; ε must be strictly {}",
            if nu < 0.0 { "increasing" } else { "decreasing" }
        )));
    }
    eps_grid
        .iter()
        .map(|&e| {
            if (nu < 0.0 && e == f64::INFINITY) || (nu > 0.0 && e == 0.0) {
                Ok(0.0)
            } else if e > 0.0 && e.is_finite() {
                Ok(e.powf(nu))
            } else {
                Err(Error::Config(format!("ε = {e} is outside (0, ∞) for {regime}")))
            }
        })
        .collect()
}

/// Stationary state of the regularized flow with weight `w`, started from
/// `start` (a normalized state of a nearby weight). `support` is the
/// support radius of the ε^ν = 0 state for p ≥ 2.
pub(crate) fn eps_state(
    cfg: &FlowConfig,
    params: &Params,
    w: f64,
    start: &RadialFunction,
    support: Option<f64>,
) -> Result<(RadialFunction, GroundStateReport)> {
    let (grid, tail) = if params.p < 2.0 {
        let g = make_grid(
            cfg.domain_length(params),
            cfg.intervals(params),
            cfg.grid.clustering_or(Clustering::Uniform),
        )?;
        (g, TailModel::algebraic(params.decay_exponent()?, 0.0))
    } else {
        let radius = support.unwrap_or(start.grid().length());
        let length = 1.5 * radius + 10.0 * w.sqrt();
        (
            make_grid(length, cfg.grid.intervals_or(EPS_INTERVALS), Clustering::Uniform)?,
            TailModel::NONE,
        )
    };
    let flow = Flow::new(params, Arc::new(grid), tail, w, cfg)?
        .with_label("eps")
        .with_neumann_end();
    let mut st = flow.start(start, None)?;
    let converged = flow.run(&mut st)?;
    let diag = json!({ "pipeline": "regularized", "eps_weight": w });
    finish(&flow, &st, params, cfg, w, converged, diag)
}

/// Runs the regularized problem for every ε in `eps_grid`, warm-starting
/// each entry from the previous one, and compares with the ε^ν = 0 ground
/// state (returned first). Rows are ordered by ε^ν decreasing.
pub fn epsilon_sweep(
    cfg: &FlowConfig,
    params: &Params,
    eps_grid: &[f64],
) -> Result<((RadialFunction, GroundStateReport), Vec<EpsRecord>)> {
    epsilon_sweep_with(cfg, params, eps_grid, true, Execution::Sequential)
}

/// As [`epsilon_sweep`]; with `warm = false` every entry starts from the
/// ε^ν = 0 state and the entries run under `exec`.
pub fn epsilon_sweep_with(
    cfg: &FlowConfig,
    params: &Params,
    eps_grid: &[f64],
    warm: bool,
    exec: Execution,
) -> Result<((RadialFunction, GroundStateReport), Vec<EpsRecord>)> {
    params.validate()?;
    cfg.validate()?;
    let weights = eps_weights(params, eps_grid)?;
    let mut order: Vec<usize> = (0..eps_grid.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));

    let u0 = initial_profile(cfg, params)?;
    let (v0, rep0) = solve_from(cfg, params, &u0)?;
    let support = rep0.support_radius.finite();
    let record = |i: usize, v: &RadialFunction, report: GroundStateReport| {
        let w = weights[i];
        EpsRecord {
            eps: eps_grid[i],
            nu_weight: w,
            sigma_eps: report.functionals.j_eps,
            grad_term: w * report.functionals.grad_sq.unwrap_or(0.0),
            l2_dist: if w == 0.0 { 0.0 } else { l2_distance(v, &v0) },
            converged: report.converged,
            report,
        }
    };
    let state = |i: usize, start: &RadialFunction, cfg: &FlowConfig| {
        if weights[i] == 0.0 {
            Ok((v0.clone(), rep0.clone()))
        } else {
            eps_state(cfg, params, weights[i], start, support)
        }
    };
    let rows = if warm {
        let mut warm_start = v0.clone();
        let mut rows = Vec::with_capacity(order.len());
        for &i in &order {
            let (v, report) = state(i, &warm_start, cfg)?;
            rows.push(record(i, &v, report));
            warm_start = v;
        }
        rows
    } else {
        let mut inner = cfg.clone();
        if exec.is_parallel() {
            inner.exec = Execution::Sequential;
        }
        map_range(order.len(), exec, |k| {
            let i = order[k];
            state(i, &v0, &inner).map(|(v, report)| record(i, &v, report))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
    };
    Ok(((v0, rep0), rows))
}

pub fn write_eps_csv<W: std::io::Write>(out: W, rows: &[EpsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EPS_HEADER)?;
    for r in rows {
        w.write_record([
            fmt17(r.eps),
            fmt17(r.nu_weight),
            fmt17(r.sigma_eps),
            fmt17(r.grad_term),
            fmt17(r.l2_dist),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
