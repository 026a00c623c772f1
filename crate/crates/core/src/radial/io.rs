// SPDX-License-Identifier: Apache-2.0

//! Profile files: a CSV table `r,u` with a JSON sidecar next to it
//! (`profile.csv` pairs with `profile.json`).

use super::function::{RadialFunction, TailModel};
use super::grid::{Clustering, RadialGrid};
use crate::error::{Error, Result};
use crate::special_fn::Params;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub length: f64,
    pub intervals: usize,
    pub order: usize,
    pub clustering: Option<Clustering>,
    /// (first interval, exponent) of a τ-interpolated boundary layer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSidecar {
    pub version: String,
    pub dim: usize,
    pub params: Option<Params>,
    pub tail: TailModel,
    pub grid: GridMeta,
    pub monotone: bool,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub extra: serde_json::Value,
}

impl ProfileSidecar {
    pub fn describe(u: &RadialFunction, params: Option<&Params>) -> Self {
        let g = u.grid();
        ProfileSidecar {
            version: crate::VERSION.to_string(),
            dim: u.dim(),
            params: params.copied(),
            tail: u.tail(),
            grid: GridMeta {
                length: g.length(),
                intervals: g.intervals(),
                order: g.order(),
                clustering: g.clustering(),
                edge: g.edge(),
            },
            monotone: u.is_monotone(),
            extra: serde_json::Value::Null,
        }
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Formats with 17 significant digits, enough to round-trip any f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_profile(path: &Path, u: &RadialFunction, sidecar: &ProfileSidecar) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r", "u"])?;
    for (r, v) in u.grid().nodes().iter().zip(u.values()) {
        w.write_record([fmt17(*r), fmt17(*v)])?;
    }
    w.flush()?;
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(sidecar)?)?;
    Ok(())
}

/// Reads a profile. Without a sidecar the dimension must be supplied and the
/// tail is taken as identically zero.
pub fn read_profile(path: &Path, dim: Option<usize>) -> Result<(RadialFunction, Option<ProfileSidecar>)> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "r" || &headers[1] != "u" {
        return Err(Error::Config(format!("{}: expected header 'r,u'", path.display())));
    }
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |k: usize| -> Result<f64> {
            rec[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("{}: bad number '{}': {e}", path.display(), &rec[k])))
        };
        nodes.push(parse(0)?);
        values.push(parse(1)?);
    }
    let side_path = sidecar_path(path);
    let sidecar: Option<ProfileSidecar> = if side_path.exists() {
        Some(serde_json::from_str(&std::fs::read_to_string(&side_path)?)?)
    } else {
        None
    };
    let (dim, order, tail, clustering, edge) = match (&sidecar, dim) {
        (Some(s), _) => (s.dim, s.grid.order, s.tail, s.grid.clustering, s.grid.edge),
        (None, Some(d)) => (d, super::grid::DEFAULT_ORDER, TailModel::NONE, None, None),
        (None, None) => {
            return Err(Error::Config(format!(
                "{}: no sidecar and no dimension given",
                path.display()
            )))
        }
    };
    let mut grid = RadialGrid::from_nodes(nodes, order)?;
    if let Some((first, exponent)) = edge {
        grid = grid.with_edge(first, exponent)?;
    }
    grid.set_clustering(clustering);
    let mut u = RadialFunction::new(Arc::new(grid), dim, values, tail)?;
    if sidecar.as_ref().is_some_and(|s| s.monotone) {
        // Data edited after writing may have lost monotonicity; it is then
        // read as a general profile.
        let tol = 1e-10 * u.center();
        let _ = u.mark_monotone(tol);
    }
    Ok((u, sidecar))
}
