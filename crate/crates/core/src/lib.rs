// SPDX-License-Identifier: Apache-2.0

//! Radial ground states of the Thomas-Fermi integral equation
//!
//! ```text
//! u + u^{q-1} = (I_alpha * u^p) u^{p-1}
//! ```
//!
//! computed with an interaction-conserving normalized flow, together with the
//! variational functionals, sharp-constant estimates and the qualitative
//! checks (decay law, compact support, boundary jump, Thomas-Fermi limit of
//! the regularized Choquard problem) built on top of them.
//!
//! Module map:
//! - [`special_fn`]: Gamma, Gauss hypergeometric 2F1, named constants, [`Params`].
//! - [`radial`]: grids, radial profiles with far-field tails, norms, Laplacian.
//! - [`riesz`]: Riesz potentials of radial densities and closed-form oracles.
//! - [`functionals`]: energies, identities, rescalings, reports.
//! - [`flow`]: the normalized flow and the regularized sweep.
//! - [`analysis`]: support, jump, decay, bounds and parameter sweeps.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod exec;
pub mod flow;
pub mod functionals;
pub mod quadrature;
pub mod radial;
pub mod riesz;
pub mod special_fn;

pub use error::{Error, Result};
pub use exec::Execution;
pub use special_fn::{NamedConstants, Params};

/// Version string embedded in every serialized report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
