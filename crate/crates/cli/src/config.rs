// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a TOML document, overridden field by field by flags.

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use tfground::analysis::VerifyTolerances;
use tfground::flow::{FlowConfig, GridPolicy, Init};
use tfground::radial::Clustering;
use tfground::Params;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl Outputs {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub alphas: Option<Vec<f64>>,
    pub eps: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    pub grid: GridPolicy,
    pub flow: FlowConfig,
    pub outputs: Outputs,
    pub seed: u64,
    pub jobs: usize,
    pub sweep: SweepSpec,
    pub verify: VerifyTolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ParamsSection::default(),
            grid: GridPolicy::default(),
            flow: FlowConfig::default(),
            outputs: Outputs::default(),
            seed: 0,
            jobs: 1,
            sweep: SweepSpec::default(),
            verify: VerifyTolerances::default(),
        }
    }
}

/// Flags shared by every command. Each one overrides the config file.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long = "config", value_name = "FILE", global = true)]
    pub config: Option<PathBuf>,
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Domain length.
    #[arg(long = "L", global = true)]
    pub length: Option<f64>,
    /// Number of grid intervals.
    #[arg(long = "M", global = true)]
    pub intervals: Option<usize>,
    /// uniform | boundary-clustered | origin-and-boundary | boundary-graded
    #[arg(long, global = true)]
    pub clustering: Option<String>,
    #[arg(long, global = true)]
    pub dt0: Option<f64>,
    /// Largest relative change of u per accepted step.
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    #[arg(long = "max-steps", global = true)]
    pub max_steps: Option<usize>,
    /// gaussian | explicit-family-ansatz | ball-indicator | FILE (a profile CSV)
    #[arg(long, global = true)]
    pub init: Option<String>,
    #[arg(long, value_name = "DIR", global = true)]
    pub out: Option<PathBuf>,
    /// Concurrent sweep entries; above 1 disables warm starts.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    /// The config file (if any) with every flag applied on top.
    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut cfg = match &o.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let p = &mut cfg.params;
        p.n = o.n.or(p.n);
        p.alpha = o.alpha.or(p.alpha);
        p.p = o.p.or(p.p);
        p.q = o.q.or(p.q);
        cfg.grid.length = o.length.or(cfg.grid.length);
        cfg.grid.intervals = o.intervals.or(cfg.grid.intervals);
        if let Some(c) = &o.clustering {
            cfg.grid.clustering = Some(c.parse::<Clustering>()?);
        }
        let f = &mut cfg.flow;
        f.dt0 = o.dt0.unwrap_or(f.dt0);
        f.rtol_step = o.rtol.unwrap_or(f.rtol_step);
        f.max_steps = o.max_steps.unwrap_or(f.max_steps);
        if let Some(init) = &o.init {
            match init.parse::<Init>() {
                Ok(i) => {
                    f.init = i;
                    f.init_file = None;
                }
                Err(_) => {
                    f.init = Init::File;
                    f.init_file = Some(PathBuf::from(init));
                }
            }
        }
        if let Some(out) = &o.out {
            cfg.outputs.dir = out.clone();
        }
        cfg.jobs = o.jobs.unwrap_or(cfg.jobs).max(1);
        cfg.seed = o.seed.unwrap_or(cfg.seed);
        // The top-level grid and seed are authoritative.
        if cfg.grid != GridPolicy::default() {
            cfg.flow.grid = cfg.grid.clone();
        } else {
            cfg.grid = cfg.flow.grid.clone();
        }
        cfg.flow.seed = cfg.seed;
        cfg.flow.validate()?;
        Ok(cfg)
    }

    /// The full quadruple, validated.
    pub fn params(&self) -> Result<Params> {
        let s = &self.params;
        let missing: Vec<&str> = [
            ("N", s.n.is_none()),
            ("alpha", s.alpha.is_none()),
            ("p", s.p.is_none()),
            ("q", s.q.is_none()),
        ]
        .iter()
        .filter(|(_, m)| *m)
        .map(|(k, _)| *k)
        .collect();
        if !missing.is_empty() {
            return Err(tfground::Error::Config(format!("missing parameters: {}", missing.join(", "))).into());
        }
        Ok(Params::new(s.n.unwrap(), s.alpha.unwrap(), s.p.unwrap(), s.q.unwrap())?)
    }
}
