// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// `violated` names the failing inequality, e.g. `p ≤ (N+α)/N`.
    #[error("inadmissible parameters: {violated} ({detail})")]
    Inadmissible { violated: String, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("kernel-singular: {0}")]
    KernelSingular(String),

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("flow stalled: {0}")]
    Stall(String),

    #[error("monotonicity lost at step {step}: rise {rise:.3e} at r = {radius:.6e}")]
    Monotonicity { step: usize, rise: f64, radius: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
