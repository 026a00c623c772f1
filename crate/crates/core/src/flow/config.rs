// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::radial::{Clustering, DEFAULT_TAIL_WINDOW};
use crate::special_fn::Params;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    Gaussian,
    #[default]
    ExplicitFamilyAnsatz,
    BallIndicator,
    /// Profile CSV named by `FlowConfig::init_file`.
    File,
}

impl FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Init::Gaussian),
            "explicit-family-ansatz" | "ansatz" => Ok(Init::ExplicitFamilyAnsatz),
            "ball-indicator" | "ball" => Ok(Init::BallIndicator),
            "file" => Ok(Init::File),
            other => Err(Error::Config(format!(
                "unknown init `{other}` (gaussian, explicit-family-ansatz, ball-indicator, file)"
            ))),
        }
    }
}

/// Domain and resolution. Unset fields take regime defaults: p < 2 runs on
/// a uniform [0, 50] grid with 1024 intervals and an algebraic tail; p ≥ 2
/// pilots on a uniform [0, 8] grid and refines with 512 intervals on a grid
/// fitted to the support, graded toward the edge for α < 1 and
/// boundary-clustered otherwise.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridPolicy {
    pub length: Option<f64>,
    pub intervals: Option<usize>,
    pub clustering: Option<Clustering>,
}

impl GridPolicy {
    pub fn length_or(&self, default: f64) -> f64 {
        self.length.unwrap_or(default)
    }

    pub fn intervals_or(&self, default: usize) -> usize {
        self.intervals.unwrap_or(default)
    }

    pub fn clustering_or(&self, default: Clustering) -> Clustering {
        self.clustering.unwrap_or(default)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub dt0: f64,
    pub dt_max: f64,
    /// Accepted steps change u by at most rtol_step·‖u‖_∞.
    pub rtol_step: f64,
    /// Stationarity threshold on ‖u_t‖_∞/‖u‖_∞.
    pub stall_tol: f64,
    pub max_steps: usize,
    pub renorm_every: usize,
    pub init: Init,
    pub init_file: Option<PathBuf>,
    pub grid: GridPolicy,
    /// Share of outer nodes used for the decay fit.
    pub tail_window: f64,
    /// Support threshold relative to u(0).
    pub threshold_frac: f64,
    /// Relative tolerance on the boundary condition of p ≥ 2 states.
    pub boundary_tol: f64,
    /// Steps between checkpoints; 0 disables them.
    pub checkpoint_every: usize,
    pub checkpoint_dir: Option<PathBuf>,
    pub seed: u64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dt0: 0.1,
            dt_max: 1e4,
            rtol_step: 0.05,
            stall_tol: 1e-10,
            max_steps: 5000,
            renorm_every: 1,
            init: Init::default(),
            init_file: None,
            grid: GridPolicy::default(),
            tail_window: DEFAULT_TAIL_WINDOW,
            threshold_frac: crate::analysis::DEFAULT_THRESHOLD,
            boundary_tol: 1e-10,
            checkpoint_every: 0,
            checkpoint_dir: None,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt0", self.dt0),
            ("dt_max", self.dt_max),
            ("rtol_step", self.rtol_step),
            ("stall_tol", self.stall_tol),
            ("tail_window", self.tail_window),
            ("threshold_frac", self.threshold_frac),
            ("boundary_tol", self.boundary_tol),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
        }
        if !(self.stall_tol < 1.0) {
            return Err(Error::Config(format!("stall_tol must be < 1, got {}", self.stall_tol)));
        }
        if self.dt0 > self.dt_max {
            return Err(Error::Config(format!("dt0 = {} exceeds dt_max = {}", self.dt0, self.dt_max)));
        }
        if self.max_steps == 0 || self.renorm_every == 0 {
            return Err(Error::Config("max_steps and renorm_every must be positive".into()));
        }
        if self.tail_window > 1.0 {
            return Err(Error::Config(format!("tail_window must lie in (0, 1], got {}", self.tail_window)));
        }
        if self.init == Init::File && self.init_file.is_none() {
            return Err(Error::Config("init = file needs init_file".into()));
        }
        if let Some(l) = self.grid.length {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("grid length must be positive, got {l}")));
            }
        }
        Ok(())
    }

    /// Domain length for the main (p < 2) or pilot (p ≥ 2) run.
    pub fn domain_length(&self, params: &Params) -> f64 {
        self.grid.length_or(if params.p < 2.0 { 50.0 } else { 8.0 })
    }

    pub fn intervals(&self, params: &Params) -> usize {
        self.grid.intervals_or(if params.p < 2.0 { 1024 } else { 512 })
    }
}
