// SPDX-License-Identifier: Apache-2.0

//! The interaction-conserving normalized flow
//!
//! ```text
//! u_t = λ(t) (I_α ∗ u^p) u^{p−1} − u − u^{q−1} + κ Δu
//! ```
//!
//! where λ(t) keeps D_α(u^p, u^p) fixed and κ = ε^ν λ^{−2/α} carries the
//! regularizing diffusion (κ = 0 for the Thomas-Fermi problem itself). Its
//! stationary states, dilated by λ(∞)^{1/α}, solve the unweighted equation.

mod config;
mod solve;
mod sweep;

pub use config::{FlowConfig, GridPolicy, Init};
pub use solve::{initial_profile, multi_start, solve, solve_from, MultiStart};
pub use sweep::{epsilon_sweep, epsilon_sweep_with, eps_weights, write_eps_csv, EpsRecord, EPS_HEADER};

use crate::error::{Error, Result};
use crate::functionals::{Evaluator, Functionals, SUPPORT_THRESHOLD};
use crate::radial::io::{fmt17, write_profile, ProfileSidecar};
use crate::radial::{lp_norm_pow, solve_tridiagonal, Laplacian, RadialFunction, RadialGrid, TailModel};
use crate::special_fn::Params;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::sync::Arc;

pub const HISTORY_HEADER: [&str; 7] = ["step", "time", "dt", "lambda", "residual", "d_drift", "rayleigh"];

pub fn write_history_csv<W: std::io::Write>(out: W, history: &[HistoryEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HISTORY_HEADER)?;
    for h in history {
        w.write_record([
            h.step.to_string(),
            fmt17(h.time),
            fmt17(h.dt),
            fmt17(h.lambda),
            fmt17(h.residual),
            fmt17(h.d_drift),
            fmt17(h.rayleigh),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Largest tolerated rise u(r_{i+1}) − u(r_i), relative to u(0).
pub const MONOTONE_TOL: f64 = 1e-8;

/// Smallest step before the flow reports a stall.
pub const DT_MIN: f64 = 1e-12;

/// Consecutive dt halvings a monotonicity rise may survive before the
/// flow aborts; a rise that persists as dt → 0 is not a step artifact.
pub const MONOTONE_RETRIES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub lambda: f64,
    /// ‖u_t‖_∞ / ‖u‖_∞.
    pub residual: f64,
    /// |D_α − D_0| / D_0 before renormalization.
    pub d_drift: f64,
    pub rayleigh: f64,
}

#[derive(Clone, Debug)]
pub struct FlowState {
    pub u: RadialFunction,
    pub lambda_t: f64,
    pub time: f64,
    pub d_alpha_target: f64,
    pub eps_weight: f64,
    pub history: Vec<HistoryEntry>,
    /// I_α ∗ u^p at the nodes.
    pub potential: Vec<f64>,
    /// u_t at the nodes.
    pub force: Vec<f64>,
    pub kappa: f64,
    pub dt: f64,
    pub steps: usize,
    pub rejected: usize,
    /// Consecutive steps rejected for a monotonicity rise.
    pub monotone_rejects: usize,
    /// Steps in which some node went negative and was clipped to 0.
    pub clip_steps: Vec<usize>,
}

impl FlowState {
    pub fn residual(&self) -> f64 {
        sup(&self.force) / self.u.sup()
    }

    /// Clipping events in the second half of the run.
    pub fn late_clips(&self) -> usize {
        let half = self.steps / 2;
        self.clip_steps.iter().filter(|&&s| s > half).count()
    }

    /// True when R_α(u(t)) never dropped (beyond rounding) over the last
    /// 20 % of recorded steps.
    pub fn rayleigh_nondecreasing_tail(&self) -> bool {
        let n = self.history.len();
        let tail = &self.history[n - (n / 5).max(1).min(n)..];
        tail.windows(2).all(|w| w[1].rayleigh >= w[0].rayleigh * (1.0 - 1e-9))
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    Rejected,
}

/// One discretized flow on a fixed grid.
#[derive(Clone, Debug)]
pub struct Flow {
    params: Params,
    cfg: FlowConfig,
    eval: Evaluator,
    lap: Option<Laplacian>,
    eps_weight: f64,
    tail: TailModel,
    label: String,
}

impl Flow {
    /// `tail` fixes the far-field kind and exponent of every iterate.
    pub fn new(params: &Params, grid: Arc<RadialGrid>, tail: TailModel, eps_weight: f64, cfg: &FlowConfig) -> Result<Self> {
        cfg.validate()?;
        if !(eps_weight >= 0.0 && eps_weight.is_finite()) {
            return Err(Error::Config(format!("diffusion weight must be finite and ≥ 0, got {eps_weight}")));
        }
        let eval = Evaluator::new(grid.clone(), params, &tail, cfg.exec)?;
        let beta = tail.is_algebraic().then_some(tail.exponent);
        let lap = (eps_weight > 0.0).then(|| Laplacian::new(&grid, params.n, beta));
        Ok(Flow {
            params: *params,
            cfg: cfg.clone(),
            eval,
            lap,
            eps_weight,
            tail,
            label: "flow".into(),
        })
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    /// Reflecting boundary for the diffusion term on tail-free grids.
    pub fn with_neumann_end(mut self) -> Self {
        let grid = self.grid().clone();
        self.lap = self.lap.map(|l| l.with_neumann_end(&grid));
        self
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.eval
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.eval.grid()
    }

    /// Puts `u0` on this flow's grid and tail, rescaled to interaction
    /// energy `d_target` when given.
    pub fn start(&self, u0: &RadialFunction, d_target: Option<f64>) -> Result<FlowState> {
        let mut u = if Arc::ptr_eq(u0.grid(), self.grid()) || u0.grid().nodes() == self.grid().nodes() {
            RadialFunction::new(self.grid().clone(), self.params.n, u0.values().to_vec(), TailModel::NONE)?
        } else {
            u0.resample(self.grid().clone()).with_tail(TailModel::NONE)?
        };
        if self.tail.is_algebraic() {
            u = u.with_tail(self.tail)?;
            u.rematch_tail();
        }
        let (d, mut v) = self.eval.d_alpha(&u)?;
        if !(d > 0.0) {
            return Err(Error::Degenerate("initial profile has zero interaction energy".into()));
        }
        let target = d_target.unwrap_or(d);
        let c = (target / d).powf(0.5 / self.params.p);
        u = u.scaled(c);
        v.iter_mut().for_each(|x| *x *= c.powf(self.params.p));
        let mut st = FlowState {
            u,
            lambda_t: 1.0,
            time: 0.0,
            d_alpha_target: target,
            eps_weight: self.eps_weight,
            history: Vec::new(),
            potential: v,
            force: Vec::new(),
            kappa: 0.0,
            dt: self.cfg.dt0,
            steps: 0,
            rejected: 0,
            monotone_rejects: 0,
            clip_steps: Vec::new(),
        };
        self.refresh(&mut st, 1.0)?;
        Ok(st)
    }

    fn laplacian_of(&self, u: &RadialFunction) -> Option<Vec<f64>> {
        self.lap.as_ref().map(|l| l.apply(u.values()))
    }

    /// Recomputes λ, κ and u_t for the current u and potential.
    fn refresh(&self, st: &mut FlowState, lambda_guess: f64) -> Result<()> {
        let lap = self.laplacian_of(&st.u);
        let parts = self.eval.lambda_parts(&st.u, &st.potential, lap.as_deref())?;
        let alpha = self.params.alpha;
        let mut lam = if lambda_guess > 0.0 { lambda_guess } else { parts.lambda(0.0) };
        if self.eps_weight > 0.0 {
            // λ and κ = w λ^{−2/α} are coupled; a few fixed-point sweeps settle it.
            for _ in 0..100 {
                let next = parts.lambda(self.eps_weight * lam.powf(-2.0 / alpha));
                let done = (next - lam).abs() <= 1e-15 * next.abs();
                lam = next;
                if done {
                    break;
                }
            }
        } else {
            lam = parts.lambda(0.0);
        }
        if !(lam > 0.0 && lam.is_finite()) {
            return Err(Error::Degenerate(format!("multiplier λ = {lam} left (0, ∞)")));
        }
        let kappa = if self.eps_weight > 0.0 { self.eps_weight * lam.powf(-2.0 / alpha) } else { 0.0 };
        let (p, q) = (self.params.p, self.params.q);
        st.force = st
            .u
            .values()
            .iter()
            .zip(&st.potential)
            .enumerate()
            .map(|(i, (&u, &v))| {
                let diff = lap.as_ref().map_or(0.0, |l| kappa * l[i]);
                lam * v * u.powf(p - 1.0) - u - u.powf(q - 1.0) + diff
            })
            .collect();
        st.lambda_t = lam;
        st.kappa = kappa;
        Ok(())
    }

    /// One preconditioned step; rejected steps halve dt and leave u alone.
    pub fn step(&self, st: &mut FlowState) -> Result<StepOutcome> {
        let (p, q) = (self.params.p, self.params.q);
        let dt = st.dt;
        let u = st.u.values();
        let umax = st.u.sup();
        // Diagonal of the local Jacobian with V frozen; |J| keeps the
        // preconditioner positive where the local dynamics is unstable.
        let pre: Vec<f64> = u
            .iter()
            .zip(&st.potential)
            .map(|(&ui, &vi)| {
                let j = st.lambda_t * vi * (p - 1.0) * ui.powf(p - 2.0) - 1.0 - (q - 1.0) * ui.powf(q - 2.0);
                1.0 + dt * j.abs()
            })
            .collect();
        let delta: Vec<f64> = match &self.lap {
            Some(l) => {
                let k = st.kappa;
                let lower: Vec<f64> = l.lower.iter().map(|x| -dt * k * x).collect();
                let upper: Vec<f64> = l.upper.iter().map(|x| -dt * k * x).collect();
                let diag: Vec<f64> = pre.iter().zip(&l.diag).map(|(a, d)| if a.is_finite() { a - dt * k * d } else { *a }).collect();
                let rhs: Vec<f64> = st.force.iter().map(|f| dt * f).collect();
                solve_tridiagonal(&lower, &diag, &upper, &rhs)
            }
            None => st
                .force
                .iter()
                .zip(&pre)
                .map(|(f, a)| if *f == 0.0 { 0.0 } else { dt * f / a })
                .collect(),
        };
        if delta.iter().any(|d| !d.is_finite()) || sup(&delta) > self.cfg.rtol_step * umax {
            st.dt *= 0.5;
            st.rejected += 1;
            if st.dt < DT_MIN {
                return Err(Error::Stall(format!(
                    "time step underflow at step {} (residual {:.3e})",
                    st.steps,
                    st.residual()
                )));
            }
            return Ok(StepOutcome::Rejected);
        }
        let mut clipped = false;
        let values: Vec<f64> = u
            .iter()
            .zip(&delta)
            .map(|(a, d)| {
                let x = a + d;
                if x < 0.0 {
                    clipped = true;
                    0.0
                } else {
                    x
                }
            })
            .collect();
        if values.iter().all(|&x| x == 0.0) {
            return Err(Error::Degenerate(format!("profile collapsed to zero at step {}", st.steps)));
        }
        let old_res = sup(&st.force);
        let mut next = st.u.with_values(values)?;
        let (d, mut v) = self.eval.d_alpha(&next)?;
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Degenerate(format!("interaction energy {d} at step {}", st.steps)));
        }
        let drift = (d - st.d_alpha_target).abs() / st.d_alpha_target;
        let mut d_now = d;
        if (st.steps + 1).is_multiple_of(self.cfg.renorm_every) {
            d_now = st.d_alpha_target;
            let c = (st.d_alpha_target / d).powf(0.5 / p);
            next = next.scaled(c);
            v.iter_mut().for_each(|x| *x *= c.powf(p));
        }
        let center = next.center().max(next.sup() * 1e-300);
        if let Some((i, rise)) = next.monotonicity_violation(MONOTONE_TOL * center) {
            if st.monotone_rejects >= MONOTONE_RETRIES || 0.5 * dt < DT_MIN {
                return Err(Error::Monotonicity {
                    step: st.steps + 1,
                    rise: rise / center,
                    radius: next.grid().nodes()[i],
                });
            }
            st.monotone_rejects += 1;
            st.rejected += 1;
            st.dt *= 0.5;
            return Ok(StepOutcome::Rejected);
        }
        st.monotone_rejects = 0;
        st.steps += 1;
        st.u = next;
        st.potential = v;
        let guess = st.lambda_t;
        self.refresh(st, guess)?;
        if clipped {
            st.clip_steps.push(st.steps);
        }
        st.time += dt;
        st.dt = if sup(&st.force) > 1.05 * old_res {
            (0.5 * dt).max(DT_MIN)
        } else {
            (1.25 * dt).min(self.cfg.dt_max)
        };
        let rayleigh = self.rayleigh_of(st, d_now).unwrap_or(f64::NAN);
        st.history.push(HistoryEntry {
            step: st.steps,
            time: st.time,
            dt,
            lambda: st.lambda_t,
            residual: st.residual(),
            d_drift: drift,
            rayleigh,
        });
        if self.cfg.checkpoint_every > 0 && st.steps.is_multiple_of(self.cfg.checkpoint_every) {
            self.checkpoint(st)?;
        }
        Ok(StepOutcome::Accepted)
    }

    /// Steps until ‖u_t‖_∞ ≤ stall_tol·‖u‖_∞ or `max_steps`; returns whether
    /// the state converged.
    pub fn run(&self, st: &mut FlowState) -> Result<bool> {
        let budget = st.steps + self.cfg.max_steps;
        let mut attempts = 0usize;
        while st.steps < budget {
            if st.residual() <= self.cfg.stall_tol {
                return Ok(true);
            }
            attempts += 1;
            if attempts > 4 * self.cfg.max_steps {
                break;
            }
            self.step(st)?;
        }
        Ok(st.residual() <= self.cfg.stall_tol)
    }

    fn rayleigh_of(&self, st: &FlowState, d_alpha: f64) -> Result<f64> {
        let theta = self.params.theta();
        let (p, q) = (self.params.p, self.params.q);
        let n2 = lp_norm_pow(&st.u, 2.0)?;
        let nq = lp_norm_pow(&st.u, q)?;
        Ok(d_alpha / (n2.powf(p * theta) * nq.powf(2.0 * p * (1.0 - theta) / q)))
    }

    /// Functionals of the current (un-normalized) iterate.
    pub fn functionals(&self, st: &FlowState) -> Result<Functionals> {
        let u = &st.u;
        let d = self.eval.pair_integral(&u.powf(self.params.p), &st.potential)?;
        let grad = if self.eps_weight > 0.0 {
            Some(crate::functionals::grad_sq(u)?)
        } else {
            None
        };
        Ok(Functionals::from_parts(
            &self.params,
            lp_norm_pow(u, 2.0)?,
            lp_norm_pow(u, self.params.q)?,
            lp_norm_pow(u, self.params.p)?,
            d,
            grad,
            st.kappa,
        ))
    }

    /// Pointwise residual of the stationary equation, masked where
    /// u ≤ 1e-8·u(0) and scaled by ‖u‖_∞.
    pub fn residual_summary(&self, st: &FlowState) -> (f64, f64) {
        let u = st.u.values();
        let floor = SUPPORT_THRESHOLD * st.u.center();
        let w = self.grid().volume_weights(self.params.n);
        let umax = st.u.sup();
        let (mut linf, mut sq, mut vol) = (0.0f64, 0.0, 0.0);
        for i in 0..u.len() {
            if u[i] <= floor {
                continue;
            }
            let r = st.force[i] / umax;
            linf = linf.max(r.abs());
            sq += w[i] * r * r;
            vol += w[i];
        }
        (linf, if vol > 0.0 { (sq / vol).sqrt() } else { 0.0 })
    }

    fn checkpoint(&self, st: &FlowState) -> Result<()> {
        let Some(dir) = &self.cfg.checkpoint_dir else {
            return Ok(());
        };
        std::fs::create_dir_all(dir)?;
        let path: PathBuf = dir.join(format!("{}_{:07}.csv", self.label, st.steps));
        let mut side = ProfileSidecar::describe(&st.u, Some(&self.params));
        side.extra = serde_json::json!({
            "step": st.steps,
            "time": fmt17(st.time),
            "lambda_t": fmt17(st.lambda_t),
            "d_alpha_target": fmt17(st.d_alpha_target),
            "eps_weight": fmt17(st.eps_weight),
            "dt": fmt17(st.dt),
            "residual": fmt17(st.residual()),
        });
        write_profile(&path, &st.u, &side)
    }
}

