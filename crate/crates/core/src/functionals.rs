// SPDX-License-Identifier: Apache-2.0

//! Variational quantities of the Thomas-Fermi problem and its regularization:
//! norms, the interaction energy D_α, the energies E and 𝒥_ε, the Nehari and
//! Pohožaev functionals, the Rayleigh quotient R_α, the rescalings that
//! normalize maximizers and flow limits, and the ground-state report.

use crate::analysis::DecayReport;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::radial::{lp_norm_pow, Laplacian, RadialFunction, RadialGrid, TailModel};
use crate::riesz::RieszOperator;
use crate::special_fn::{sphere_area, theta_star, Params};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Residual masking floor relative to u(0).
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    pub norm2_sq: f64,
    pub normq_q: f64,
    pub normp_p: f64,
    pub d_alpha: f64,
    pub energy_e: f64,
    pub pohozaev_p: f64,
    /// ‖u‖₂² + ‖u‖_q^q − D_α.
    pub nehari_res: f64,
    /// None for the zero profile.
    pub rayleigh_r: Option<f64>,
    /// ‖∇u‖₂², only evaluated when `eps_weight` > 0.
    pub grad_sq: Option<f64>,
    pub eps_weight: f64,
    pub j_eps: f64,
    pub pohozaev_peps: f64,
}

impl Functionals {
    /// Fills the derived fields from the primitive integrals.
    pub fn from_parts(
        params: &Params,
        norm2_sq: f64,
        normq_q: f64,
        normp_p: f64,
        d_alpha: f64,
        grad_sq: Option<f64>,
        eps_weight: f64,
    ) -> Self {
        let (n, a, p, q) = (params.dim(), params.alpha, params.p, params.q);
        let energy_e = 0.5 * norm2_sq + normq_q / q - d_alpha / (2.0 * p);
        let pohozaev_p = 0.5 * n * norm2_sq + n / q * normq_q - (n + a) / (2.0 * p) * d_alpha;
        let g = grad_sq.unwrap_or(0.0);
        let theta = params.theta();
        let rayleigh_r = (norm2_sq > 0.0 && normq_q > 0.0)
            .then(|| d_alpha / (norm2_sq.powf(p * theta) * normq_q.powf(2.0 * p * (1.0 - theta) / q)));
        Functionals {
            norm2_sq,
            normq_q,
            normp_p,
            d_alpha,
            energy_e,
            pohozaev_p,
            nehari_res: norm2_sq + normq_q - d_alpha,
            rayleigh_r,
            grad_sq,
            eps_weight,
            j_eps: energy_e + 0.5 * eps_weight * g,
            pohozaev_peps: pohozaev_p + 0.5 * (n - 2.0) * eps_weight * g,
        }
    }

    /// Functionals of a·u(·/t), from the exact scaling laws.
    pub fn rescaled(&self, a: f64, t: f64, params: &Params) -> Self {
        let (n, al, p, q) = (params.dim(), params.alpha, params.p, params.q);
        Self::from_parts(
            params,
            self.norm2_sq * a * a * t.powf(n),
            self.normq_q * a.powf(q) * t.powf(n),
            self.normp_p * a.powf(p) * t.powf(n),
            self.d_alpha * a.powf(2.0 * p) * t.powf(n + al),
            self.grad_sq.map(|g| g * a * a * t.powf(n - 2.0)),
            self.eps_weight,
        )
    }

    /// |‖u‖₂² + ‖u‖_q^q + ε^ν‖∇u‖₂² − D_α| / ‖u‖₂².
    pub fn nehari_relative(&self) -> f64 {
        let g = self.eps_weight * self.grad_sq.unwrap_or(0.0);
        (self.nehari_res + g).abs() / self.norm2_sq
    }

    /// |𝒫_ε| / (N |𝒥_ε|); with ε^ν = 0 this is |𝒫|/(N|E|).
    pub fn pohozaev_relative(&self, params: &Params) -> f64 {
        self.pohozaev_peps.abs() / (params.dim() * self.j_eps.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaRelations {
    /// α(q−2)/(2(Np−N−α)q) ‖u‖_q^q.
    pub sigma_from_q: f64,
    /// α(2Np)^{N/α}(θ*/(N+α))^{(N+α)/α} R_α(u)^{−N/α}.
    pub sigma_from_c: f64,
    /// ‖u‖₂² q(Np−N−α) / (((N+α)q−2pN)‖u‖_q^q); 1 on solutions.
    pub ratio_check: f64,
}

impl SigmaRelations {
    pub fn relative_gap(&self) -> f64 {
        (self.sigma_from_q - self.sigma_from_c).abs() / self.sigma_from_q.abs()
    }
}

pub fn sigma_relations_of(f: &Functionals, params: &Params) -> Result<SigmaRelations> {
    let (n, a, p, q) = (params.dim(), params.alpha, params.p, params.q);
    let r = f
        .rayleigh_r
        .ok_or_else(|| Error::Degenerate("Rayleigh quotient undefined for the zero profile".into()))?;
    let gap = n * p - n - a;
    Ok(SigmaRelations {
        sigma_from_q: a * (q - 2.0) / (2.0 * gap * q) * f.normq_q,
        sigma_from_c: a
            * (2.0 * n * p).powf(n / a)
            * (theta_star(params) / (n + a)).powf((n + a) / a)
            * r.powf(-n / a),
        ratio_check: f.norm2_sq * q * gap / (((n + a) * q - 2.0 * p * n) * f.normq_q),
    })
}

pub fn sigma_relations(report: &GroundStateReport, params: &Params) -> Result<SigmaRelations> {
    sigma_relations_of(&report.functionals, params)
}

/// ∫_{r>L} ω_N r^{N−1} C (r/L)^{−e} dr.
fn power_tail(dim: usize, length: f64, c: f64, e: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(0.0);
    }
    let n = dim as f64;
    if !(e > n) {
        return Err(Error::Divergence(format!("tail integrand decays like r^-{e} in N = {dim}")));
    }
    Ok(sphere_area(dim) * c * length.powf(n) / (e - n))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaParts {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LambdaParts {
    pub fn lambda(&self, kappa: f64) -> f64 {
        (self.a - kappa * self.b) / self.c
    }
}

/// Pointwise TF residual summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    /// max |u + u^{q−1} − V u^{p−1}| / ‖u‖_∞ on {u > threshold}.
    pub linf: f64,
    /// Root-mean-square of the same quantity over the masked ball.
    pub l2: f64,
}

/// Operator bound to one grid, evaluating everything that needs I_α ∗ u^p.
#[derive(Clone, Debug)]
pub struct Evaluator {
    params: Params,
    op: RieszOperator,
}

impl Evaluator {
    /// `profile_tail` is the tail of u (the density u^p decays p times faster).
    pub fn new(grid: Arc<RadialGrid>, params: &Params, profile_tail: &TailModel, exec: Execution) -> Result<Self> {
        let gamma = profile_tail.is_algebraic().then_some(params.p * profile_tail.exponent);
        let op = RieszOperator::new(grid, params.n, params.alpha, gamma, exec)?;
        Ok(Evaluator { params: *params, op })
    }

    pub fn for_profile(u: &RadialFunction, params: &Params, exec: Execution) -> Result<Self> {
        check_dim(u, params)?;
        Self::new(u.grid().clone(), params, &u.tail(), exec)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn operator(&self) -> &RieszOperator {
        &self.op
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.op.grid()
    }

    /// I_α ∗ u^p at the nodes.
    pub fn potential(&self, u: &RadialFunction) -> Result<Vec<f64>> {
        self.op.apply_fn(&u.powf(self.params.p))
    }

    /// ∫ f V over R^N for nodal f on this grid, V the potential of some
    /// density with far field V(r) ≈ V(L)(L/r)^{N−α}.
    pub fn pair_integral(&self, f: &RadialFunction, v: &[f64]) -> Result<f64> {
        let grid = self.grid();
        let nodal: f64 = grid
            .volume_weights(f.dim())
            .iter()
            .zip(f.values())
            .zip(v)
            .map(|((w, a), b)| w * a * b)
            .sum();
        let tail = f.tail();
        let extra = if tail.is_algebraic() {
            let n = self.params.dim();
            power_tail(
                f.dim(),
                grid.length(),
                f.boundary_value() * v[v.len() - 1],
                tail.exponent + n - self.params.alpha,
            )?
        } else {
            0.0
        };
        Ok(nodal + extra)
    }

    /// D_α(u^p, u^p) together with the potential it was computed from.
    pub fn d_alpha(&self, u: &RadialFunction) -> Result<(f64, Vec<f64>)> {
        let rho = u.powf(self.params.p);
        let v = self.op.apply_fn(&rho)?;
        Ok((self.pair_integral(&rho, &v)?, v))
    }

    /// Every functional of u; ‖∇u‖₂² only when `eps_weight` > 0.
    pub fn evaluate(&self, u: &RadialFunction, eps_weight: f64) -> Result<Functionals> {
        let p = &self.params;
        let (d, _) = self.d_alpha(u)?;
        let grad = if eps_weight > 0.0 { Some(grad_sq(u)?) } else { None };
        Ok(Functionals::from_parts(
            p,
            norm_pow(u, 2.0)?,
            norm_pow(u, p.q)?,
            norm_pow(u, p.p)?,
            d,
            grad,
            eps_weight,
        ))
    }

    /// The integrals behind the multiplier: λ = (a − κ b)/c with
    /// a = ∫ V u^{p−1}(u + u^{q−1}), b = ∫ V u^{p−1} Δu, c = ∫ V² u^{2p−2}.
    /// `lap` holds Δu at the nodes; without it b = 0. The sums run over the
    /// nodes only: the flow moves nodal values and the tail follows the
    /// boundary node, so a discrete stationary state has u_t = 0 exactly
    /// there.
    pub fn lambda_parts(&self, u: &RadialFunction, v: &[f64], lap: Option<&[f64]>) -> Result<LambdaParts> {
        let p = &self.params;
        let grid = self.grid();
        let w = grid.volume_weights(u.dim());
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for (i, &ui) in u.values().iter().enumerate() {
            let up = ui.powf(p.p - 1.0);
            a += w[i] * v[i] * up * (ui + ui.powf(p.q - 1.0));
            if let Some(l) = lap {
                b += w[i] * v[i] * up * l[i];
            }
            c += w[i] * v[i] * v[i] * up * up;
        }
        if !(c > 0.0) {
            return Err(Error::Degenerate("λ undefined: the profile vanishes where the potential lives".into()));
        }
        Ok(LambdaParts { a, b, c })
    }

    /// λ = ∫ V u^{p−1}(u + u^{q−1} − κΔu) / ∫ V² u^{2p−2}, the multiplier
    /// that keeps D_α constant along the flow (κ = 0 without diffusion).
    pub fn lambda_multiplier(&self, u: &RadialFunction, v: &[f64], kappa: f64, lap: Option<&[f64]>) -> Result<f64> {
        Ok(self.lambda_parts(u, v, lap)?.lambda(kappa))
    }

    pub fn tf_residual(&self, u: &RadialFunction) -> Result<Residual> {
        let v = self.potential(u)?;
        Ok(tf_residual_with(u, &v, &self.params))
    }
}

fn check_dim(u: &RadialFunction, params: &Params) -> Result<()> {
    if u.dim() != params.n {
        return Err(Error::Config(format!(
            "profile lives in N = {} but parameters have N = {}",
            u.dim(),
            params.n
        )));
    }
    Ok(())
}

fn norm_pow(u: &RadialFunction, s: f64) -> Result<f64> {
    lp_norm_pow(u, s).map_err(|e| match e {
        Error::Divergence(m) => Error::Divergence(format!("‖u‖_{s}: {m}")),
        other => other,
    })
}

/// ‖∇u‖₂² = −∫ u Δu, discrete Laplacian against the nodal quadrature plus
/// the closed-form tail part.
pub fn grad_sq(u: &RadialFunction) -> Result<f64> {
    let tail = u.tail();
    let beta = tail.is_algebraic().then_some(tail.exponent);
    let lap = Laplacian::new(u.grid(), u.dim(), beta).apply(u.values());
    let w = u.grid().volume_weights(u.dim());
    let inner: f64 = w.iter().zip(u.values()).zip(&lap).map(|((a, b), c)| a * b * c).sum();
    let outer = match beta {
        Some(b) => {
            let n = u.dim() as f64;
            let ul = u.boundary_value();
            let l = u.grid().length();
            power_tail(u.dim(), l, ul * ul * b * (b + 2.0 - n) / (l * l), 2.0 * b + 2.0)?
        }
        None => 0.0,
    };
    Ok(-(inner + outer))
}

/// Residual of u + u^{q−1} = V u^{p−1} on {u > 1e-8 u(0)}.
pub fn tf_residual_with(u: &RadialFunction, v: &[f64], params: &Params) -> Residual {
    let sup = u.sup();
    if sup == 0.0 {
        return Residual { linf: 0.0, l2: 0.0 };
    }
    let floor = SUPPORT_THRESHOLD * u.center().max(sup * 1e-300);
    let w = u.grid().volume_weights(u.dim());
    let (mut linf, mut sq, mut vol) = (0.0f64, 0.0, 0.0);
    for (i, &ui) in u.values().iter().enumerate() {
        if ui <= floor {
            continue;
        }
        let res = (ui + ui.powf(params.q - 1.0) - v[i] * ui.powf(params.p - 1.0)) / sup;
        linf = linf.max(res.abs());
        sq += w[i] * res * res;
        vol += w[i];
    }
    Residual {
        linf,
        l2: if vol > 0.0 { (sq.max(0.0) / vol).sqrt() } else { 0.0 },
    }
}

/// All functionals of u (operator built on u's grid).
pub fn evaluate_all(u: &RadialFunction, params: &Params, eps_weight: f64) -> Result<Functionals> {
    Evaluator::for_profile(u, params, Execution::default())?.evaluate(u, eps_weight)
}

/// D_α(f, g) = ½(∫ f I_α∗g + ∫ g I_α∗f) for densities on a common grid.
pub fn interaction_energy(f: &RadialFunction, g: &RadialFunction, params: &Params) -> Result<f64> {
    check_dim(f, params)?;
    check_dim(g, params)?;
    if f.grid().nodes() != g.grid().nodes() {
        return Err(Error::Config("interaction_energy needs both densities on one grid".into()));
    }
    let one_way = |a: &RadialFunction, b: &RadialFunction| -> Result<f64> {
        let tail = b.tail();
        let gamma = (tail.is_algebraic() && tail.coefficient > 0.0).then_some(tail.exponent);
        let op = RieszOperator::new(b.grid().clone(), params.n, params.alpha, gamma, Execution::default())?;
        let v = op.apply_fn(b)?;
        let ev = Evaluator { params: *params, op };
        ev.pair_integral(a, &v)
    };
    Ok(0.5 * (one_way(f, g)? + one_way(g, f)?))
}

/// R_α(u) = D_α / (‖u‖₂^{2pθ} ‖u‖_q^{2p(1−θ)}).
pub fn rayleigh(u: &RadialFunction, params: &Params) -> Result<f64> {
    evaluate_all(u, params, 0.0)?
        .rayleigh_r
        .ok_or_else(|| Error::Degenerate("Rayleigh quotient undefined for the zero profile".into()))
}

/// Scalings (λ*, μ*) taking u to λ* u(μ* x) on the Nehari and Pohožaev sets.
pub fn maximizer_scaling(f: &Functionals, params: &Params) -> Result<(f64, f64)> {
    if !(f.norm2_sq > 0.0 && f.normq_q > 0.0 && f.d_alpha > 0.0) {
        return Err(Error::Degenerate("cannot normalize a profile with vanishing norms".into()));
    }
    let (a, p, q) = (params.alpha, params.p, params.q);
    let theta = params.theta();
    let lam = ((1.0 - theta) / theta * f.norm2_sq / f.normq_q).powf(1.0 / (q - 2.0));
    let mu = ((1.0 - theta) / lam.powf(q - 2.0 * p) * f.d_alpha / f.normq_q).powf(1.0 / a);
    Ok((lam, mu))
}

/// λ* u(μ* x), which satisfies the Nehari and Pohožaev identities.
pub fn normalize_maximizer(u: &RadialFunction, params: &Params) -> Result<RadialFunction> {
    let f = evaluate_all(u, params, 0.0)?;
    let (lam, mu) = maximizer_scaling(&f, params)?;
    let g = f.rescaled(lam, 1.0 / mu, params);
    let worst = g.nehari_relative().max(g.pohozaev_relative(params));
    if !(worst <= 1e-8) {
        return Err(Error::Degenerate(format!("normalized profile misses the identities by {worst:e}")));
    }
    Ok(u.scaled(lam).dilated(1.0 / mu))
}

/// v(x) = u(λ^{−1/α} x): a stationary state of the λ-weighted flow becomes a
/// solution of the unweighted equation.
pub fn normalize_flow_stationary(u: &RadialFunction, lambda_inf: f64, params: &Params) -> Result<RadialFunction> {
    if !(lambda_inf > 0.0 && lambda_inf.is_finite()) {
        return Err(Error::Domain(format!("λ∞ must be positive, got {lambda_inf}")));
    }
    if lambda_inf == 1.0 {
        return Ok(u.clone());
    }
    Ok(u.dilated(lambda_inf.powf(1.0 / params.alpha)))
}

/// (‖·‖_∞, RMS) residual of the TF equation.
pub fn tf_residual(u: &RadialFunction, params: &Params) -> Result<Residual> {
    Evaluator::for_profile(u, params, Execution::default())?.tf_residual(u)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    FullSupportSmooth,
    CompactContinuous,
    CompactJump,
}

impl Classification {
    /// Structure predicted for ground states at exponent p.
    pub fn expected(params: &Params) -> Self {
        if params.p < 2.0 {
            Classification::FullSupportSmooth
        } else if params.p == 2.0 {
            Classification::CompactContinuous
        } else {
            Classification::CompactJump
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportRadius {
    Finite(f64),
    Infinite,
}

impl SupportRadius {
    pub fn finite(&self) -> Option<f64> {
        match self {
            SupportRadius::Finite(r) => Some(*r),
            SupportRadius::Infinite => None,
        }
    }
}

/// Identity checks on a state, all dimensionless.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityChecks {
    pub nehari_relative: f64,
    pub pohozaev_relative: f64,
    /// None for regularized states.
    pub l2_lq_ratio: Option<f64>,
    pub sigma: Option<SigmaRelations>,
}

impl IdentityChecks {
    /// The σ relations and the L²/L^q ratio hold only at ε^ν = 0.
    pub fn of(f: &Functionals, params: &Params) -> Self {
        let sigma = if f.eps_weight > 0.0 { None } else { sigma_relations_of(f, params).ok() };
        IdentityChecks {
            nehari_relative: f.nehari_relative(),
            pohozaev_relative: f.pohozaev_relative(params),
            l2_lq_ratio: sigma.map(|s| s.ratio_check),
            sigma,
        }
    }

    /// Largest deviation among Nehari, Pohožaev and the L²/L^q ratio.
    pub fn worst(&self) -> f64 {
        self.nehari_relative
            .max(self.pohozaev_relative)
            .max(self.l2_lq_ratio.map_or(0.0, |r| (r - 1.0).abs()))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundStateReport {
    pub version: String,
    pub params: Params,
    pub functionals: Functionals,
    /// E(u) of the normalized state.
    pub sigma_star_est: f64,
    pub support_radius: SupportRadius,
    pub jump_lambda: Option<f64>,
    pub center_value: f64,
    pub decay: Option<DecayReport>,
    pub residual_linf: f64,
    pub residual_l2: f64,
    pub classification: Classification,
    pub expected_classification: Classification,
    pub identities: IdentityChecks,
    pub converged: bool,
    pub lambda_inf: Option<f64>,
    pub eps_weight: f64,
    pub tail_window: f64,
    /// Flow bookkeeping (steps, clipping, grid, initialization).
    #[serde(default)]
    pub diagnostics: serde_json::Value,
    /// Per-step record of the final flow; written separately as CSV.
    #[serde(skip)]
    pub history: Vec<crate::flow::HistoryEntry>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{make_grid, Clustering};
    use crate::special_fn::{c_estimate, gamma, hls_constant};
    use std::f64::consts::PI;

    fn family(l: f64, m: usize) -> (Params, RadialFunction) {
        let pr = Params::new(3, 1.0, 1.5, 2.5).unwrap();
        let g = Arc::new(make_grid(l, m, Clustering::Uniform).unwrap());
        let vl = (1.0 + l * l).powi(-2);
        let v = RadialFunction::from_fn(g, 3, |r| (1.0 + r * r).powi(-2), TailModel::matched(4.0, l, vl)).unwrap();
        (pr, v)
    }

    #[test]
    fn explicit_family_interaction_energy() {
        let (pr, v) = family(30.0, 768);
        let f = evaluate_all(&v, &pr, 0.0).unwrap();
        let want = PI.powf(1.5) * 18.0 / 8.0 * gamma(1.0) * gamma(2.5) / (gamma(3.0) * gamma(5.0));
        assert!((f.d_alpha / want - 1.0).abs() < 1e-7, "{} vs {want}", f.d_alpha);
        let r = f.rayleigh_r.unwrap();
        assert!((r / c_estimate(3, 1.0) - 1.0).abs() < 1e-6);
        assert!(r <= hls_constant(&pr));
    }

    #[test]
    fn consistency_of_derived_fields() {
        let (pr, v) = family(20.0, 256);
        let f = evaluate_all(&v, &pr, 0.0).unwrap();
        let e = 0.5 * f.norm2_sq + f.normq_q / 2.5 - f.d_alpha / 3.0;
        assert_eq!(f.energy_e, e);
        let p = 1.5 * f.norm2_sq + 3.0 / 2.5 * f.normq_q - 4.0 / 3.0 * f.d_alpha;
        assert_eq!(f.pohozaev_p, p);
    }

    #[test]
    fn maximizer_normalization_solves_tf() {
        let (pr, v) = family(30.0, 768);
        let w = normalize_maximizer(&v, &pr).unwrap();
        let ev = Evaluator::for_profile(&w, &pr, Execution::default()).unwrap();
        let f = ev.evaluate(&w, 0.0).unwrap();
        assert!(f.nehari_relative() < 1e-6 && f.pohozaev_relative(&pr) < 1e-6);
        let res = ev.tf_residual(&w).unwrap();
        assert!(res.linf < 5e-7, "{res:?}");
        // A fixed point of the map, and blind to amplitude.
        let (lam, mu) = maximizer_scaling(&f, &pr).unwrap();
        assert!((lam - 1.0).abs() < 1e-7 && (mu - 1.0).abs() < 1e-7);
        let w5 = normalize_maximizer(&v.scaled(5.0), &pr).unwrap();
        for (a, b) in w.values().iter().zip(w5.values()) {
            assert!((a - b).abs() < 1e-12 * w.center());
        }
        let s = sigma_relations_of(&f, &pr).unwrap();
        assert!(s.relative_gap() < 1e-6 && (s.ratio_check - 1.0).abs() < 1e-6);
        assert!((ev.lambda_multiplier(&w, &ev.potential(&w).unwrap(), 0.0, None).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn flow_normalization_inverts_scaling() {
        let (pr, v) = family(30.0, 768);
        let w = normalize_maximizer(&v, &pr).unwrap();
        // u(x) = w(λ^{1/α} x) solves u + u^{q−1} = λ (I∗u^p) u^{p−1}.
        let lam = 2.0f64;
        let u = w.dilated(lam.powf(-1.0));
        let back = normalize_flow_stationary(&u, lam, &pr).unwrap();
        for (a, b) in back.grid().nodes().iter().zip(w.grid().nodes()) {
            assert!((a / b - 1.0).abs() < 1e-14 || *b == 0.0);
        }
        let ev = Evaluator::for_profile(&u, &pr, Execution::default()).unwrap();
        let vu = ev.potential(&u).unwrap();
        let l = ev.lambda_multiplier(&u, &vu, 0.0, None).unwrap();
        assert!((l - lam).abs() < 1e-6 * lam);
        assert!(normalize_flow_stationary(&u, 0.0, &pr).is_err());
    }

    #[test]
    fn scaling_laws_match_reevaluation() {
        let (pr, v) = family(20.0, 256);
        let f = evaluate_all(&v, &pr, 0.0).unwrap();
        let (a, t) = (0.7, 1.9);
        let g = evaluate_all(&v.scaled(a).dilated(t), &pr, 0.0).unwrap();
        let h = f.rescaled(a, t, &pr);
        for (x, y) in [(g.norm2_sq, h.norm2_sq), (g.normq_q, h.normq_q), (g.d_alpha, h.d_alpha)] {
            assert!((x / y - 1.0).abs() < 1e-8);
        }
        assert!((g.rayleigh_r.unwrap() / f.rayleigh_r.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_and_ball() {
        let pr = Params::new(3, 2.0, 2.5, 6.0).unwrap();
        let g = Arc::new(make_grid(1.0, 64, Clustering::Uniform).unwrap());
        let zero = RadialFunction::from_fn(g.clone(), 3, |_| 0.0, TailModel::NONE).unwrap();
        let f = evaluate_all(&zero, &pr, 0.0).unwrap();
        assert_eq!(f.d_alpha, 0.0);
        assert!(f.rayleigh_r.is_none());
        assert!(matches!(rayleigh(&zero, &pr), Err(Error::Degenerate(_))));
        assert_eq!(tf_residual(&zero, &pr).unwrap().linf, 0.0);

        // D(χ_B, χ_B) = ∫_B A_2 2π(1 − r²/3) dx = A_2 (2π)(4π)(1/3 − 1/15).
        let ball = RadialFunction::from_fn(g, 3, |_| 1.0, TailModel::NONE).unwrap();
        let a2 = crate::special_fn::riesz_constant(&pr);
        let want = a2 * 8.0 * PI * PI * (1.0 / 3.0 - 1.0 / 15.0);
        let d = interaction_energy(&ball, &ball, &pr).unwrap();
        assert!((d / want - 1.0).abs() < 1e-12);
        assert!(tf_residual(&ball, &pr).unwrap().linf > 1e-3);
    }

    #[test]
    fn gradient_of_gaussian() {
        // ‖∇e^{−r²}‖² in R³ = 16π ∫ r⁴ e^{−2r²} dr = 3π^{3/2}/(2√2); the
        // three-point Laplacian makes the error second order.
        let want = 3.0 * PI.powf(1.5) / (2.0 * 2f64.sqrt());
        let err = |m: usize| {
            let g = Arc::new(make_grid(8.0, m, Clustering::Uniform).unwrap());
            let u = RadialFunction::from_fn(g, 3, |r| (-r * r).exp(), TailModel::NONE).unwrap();
            (grad_sq(&u).unwrap() / want - 1.0).abs()
        };
        let (coarse, fine) = (err(512), err(1024));
        assert!(fine < 3e-5, "{fine}");
        assert!((coarse / fine - 4.0).abs() < 0.2, "{coarse} {fine}");
    }
}
