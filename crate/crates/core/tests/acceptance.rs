// SPDX-License-Identifier: Apache-2.0

//! Acceptance run: one PASS/FAIL line per criterion, with wall time and the
//! measured numbers behind the verdict.
//!
//! The binary exits 0 after reporting every criterion so that a known,
//! documented failure does not mask the others. Set `ACCEPTANCE_STRICT=1`
//! to exit 1 when any criterion fails.


use std::sync::Arc;
use std::time::{Duration, Instant};

use tfground::analysis::{alpha_sweep, explicit_family_solution, support_bounds, SweepRecord};
use tfground::flow::{epsilon_sweep, solve, FlowConfig, Init};
use tfground::functionals::{Classification, Evaluator, GroundStateReport};
use tfground::radial::{l2_distance, lp_norm_pow, make_grid, Clustering, RadialFunction, TailModel};
use tfground::riesz::{closed_form_ball, operator_for, KernelMethod};
use tfground::special_fn::{gamma, hls_constant, riesz_constant};
use tfground::{Execution, Params};

struct Verdict {
    pass: bool,
    detail: String,
}

type Criterion = fn(&mut Vec<GroundStateReport>) -> Result<Verdict, String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn gaussian() -> FlowConfig {
    FlowConfig {
        init: Init::Gaussian,
        ..FlowConfig::default()
    }
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

/// ‖(1+r²)^{−β/2}‖_s^s over ℝ^N.
fn family_norm(n: f64, beta: f64, s: f64) -> f64 {
    let a = 0.5 * s * beta;
    std::f64::consts::PI.powf(0.5 * n) * gamma(a - 0.5 * n) / gamma(a)
}

fn explicit_family_closed_forms(_: &mut Vec<GroundStateReport>) -> Result<Verdict, String> {
    let (n, alpha) = (3usize, 1.0);
    let (p, q) = (1.5, 2.5);
    let params = Params::new(n, alpha, p, q).map_err(err)?;
    let (nf, beta, length) = (n as f64, n as f64 + 1.0, 20.0);
    let shape = |r: f64| (1.0 + r * r).powf(-0.5 * beta);
    let grid = Arc::new(make_grid(length, 511, Clustering::Uniform).map_err(err)?);
    let v = RadialFunction::from_fn(grid, n, shape, TailModel::matched(beta, length, shape(length))).map_err(err)?;

    let k0 = |a: f64| 2f64.powf(-1.0 - a) * gamma(0.5 * (nf - a)) / gamma(0.5 * (nf + a + 2.0));
    let (c1, c2) = (alpha * k0(alpha), (nf - alpha) * k0(alpha));
    let l2 = family_norm(nf, beta, 2.0);
    let lq = family_norm(nf, beta, q);

    let e_l2 = rel(lp_norm_pow(&v, 2.0).map_err(err)?, l2);
    let e_lq = rel(lp_norm_pow(&v, q).map_err(err)?, lq);
    let ev = Evaluator::for_profile(&v, &params, Execution::default()).map_err(err)?;
    let rho = v.powf(p);
    let mut e_pot = 0.0f64;
    for i in 0..=200 {
        let r = 10.0 * i as f64 / 200.0;
        let exact = (c1 * shape(r) + c2 * shape(r).powf(q - 1.0)) / shape(r).powf(p - 1.0);
        e_pot = e_pot.max(rel(ev.operator().potential_at(r, &rho).map_err(err)?, exact));
    }
    let (d, _) = ev.d_alpha(&v).map_err(err)?;
    let e_d = rel(d, c1 * l2 + c2 * lq);
    let worst = e_l2.max(e_lq).max(e_pot).max(e_d);
    Ok(Verdict {
        pass: worst <= 1e-6,
        detail: format!("rel errors: L2 {e_l2:.2e}, Lq {e_lq:.2e}, potential {e_pot:.2e}, D {e_d:.2e} (tol 1e-6)"),
    })
}

fn ball_potential(_: &mut Vec<GroundStateReport>) -> Result<Verdict, String> {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (n, alpha) in [(3usize, 2.0), (3, 0.5), (2, 1.5)] {
        // Any admissible (p, q) carries the dimension and order.
        let p = (n as f64 + alpha) / n as f64 + 0.5;
        let params = Params::new(n, alpha, p, 2.0 * p + 2.0).map_err(err)?;
        let radius = 1.3;
        let grid = Arc::new(make_grid(radius, 64, Clustering::Uniform).map_err(err)?);
        let ball = RadialFunction::from_fn(grid, n, |_| 1.0, TailModel::NONE).map_err(err)?;
        let op = operator_for(&ball, &params, KernelMethod::for_dim(n), Execution::default()).map_err(err)?;
        let mut e = 0.0f64;
        for i in 1..=50 {
            let x = radius * i as f64 / 51.0;
            let exact = closed_form_ball(radius, x, &params).map_err(err)?;
            e = e.max(rel(op.potential_at(x, &ball).map_err(err)?, exact));
        }
        parts.push(format!("(N={n}, α={alpha}) {e:.2e}"));
        worst = worst.max(e);
    }
    Ok(Verdict {
        pass: worst <= 1e-8,
        detail: format!("max rel error {} (tol 1e-8)", parts.join(", ")),
    })
}

fn flow_to_explicit_family(reports: &mut Vec<GroundStateReport>) -> Result<Verdict, String> {
    let params = Params::new(3, 1.0, 1.5, 2.5).map_err(err)?;
    let (u, rep) = solve(&gaussian(), &params, 0.0).map_err(err)?;
    let exact = explicit_family_solution(3, 1.0, 50.0, 1024).map_err(err)?;
    let dist = l2_distance(&u, &exact) / lp_norm_pow(&exact, 2.0).map_err(err)?.sqrt();
    let neh = rep.identities.nehari_relative;
    let poh = rep.identities.pohozaev_relative;
    let decay = rep.decay.ok_or("no decay fit")?;
    let pass = rep.converged
        && dist <= 1e-3
        && neh <= 1e-5
        && poh <= 1e-5
        && decay.exponent_gap <= 0.02
        && decay.coefficient_gap <= 0.10;
    let detail = format!(
        "converged {}, rel L2 {dist:.2e}, nehari {neh:.2e}, pohozaev {poh:.2e}, decay exponent {:.4} (gap {:.4}), coefficient {:.4} vs {:.4} (gap {:.4})",
        rep.converged,
        decay.exponent_fit,
        decay.exponent_gap,
        decay.coefficient_fit,
        decay.coefficient_predicted,
        decay.coefficient_gap,
    );
    reports.push(rep);
    Ok(Verdict { pass, detail })
}

fn compact_jump(reports: &mut Vec<GroundStateReport>) -> Result<Verdict, String> {
    let params = Params::new(3, 2.5, 4.0, 8.0).map_err(err)?;
    let (_, rep) = solve(&gaussian(), &params, 0.0).map_err(err)?;
    let star = params.lambda_star().map_err(err)?;
    let jump = rep.jump_lambda.unwrap_or(f64::NAN);
    let clips = rep.diagnostics["late_clip_events"].as_u64().unwrap_or(u64::MAX);
    let pass =
        rep.converged && rep.classification == Classification::CompactJump && jump >= star * (1.0 - 1e-3) && clips == 0;
    let detail = format!(
        "converged {}, {:?}, jump {jump:.8} vs λ* {star:.8}, late clip events {clips}",
        rep.converged, rep.classification
    );
    reports.push(rep);
    Ok(Verdict { pass, detail })
}

fn one_dimensional_jumps(reports: &mut Vec<GroundStateReport>) -> Result<Verdict, String> {
    let star = 3f64.powf(-0.5);
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.25, 0.5, 1.0, 1.5] {
        let params = match Params::new(1, alpha, 2.5, 4.0) {
            Ok(p) => p,
            Err(e) => {
                pass = false;
                parts.push(format!("α={alpha}: not computed ({e})"));
                continue;
            }
        };
        let (_, rep) = solve(&gaussian(), &params, 0.0).map_err(err)?;
        match rep.jump_lambda.filter(|_| rep.converged) {
            Some(jump) => {
                let gap = jump - star;
                pass &= jump >= star && (alpha < 1.0 || gap > 0.0);
                parts.push(format!("α={alpha}: jump {jump:.8}, gap {gap:.3e}"));
            }
            None => {
                pass = false;
                parts.push(format!("α={alpha}: no jump (converged {})", rep.converged));
            }
        }
        reports.push(rep);
    }
    Ok(Verdict {
        pass,
        detail: format!("λ* {star:.8}; {}", parts.join("; ")),
    })
}

#[allow(clippy::ptr_arg)]
fn identity_suite(reports: &mut Vec<GroundStateReport>) -> Result<Verdict, String> {
    let states: Vec<&GroundStateReport> = reports.iter().filter(|r| r.converged && r.eps_weight == 0.0).collect();
    if states.is_empty() {
        return Ok(Verdict {
            pass: false,
            detail: "no converged states".into(),
        });
    }
    let (mut neh, mut poh, mut ratio, mut sigma) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut missing = 0;
    for r in &states {
        let ids = &r.identities;
        neh = neh.max(ids.nehari_relative);
        poh = poh.max(ids.pohozaev_relative);
        match (&ids.l2_lq_ratio, &ids.sigma) {
            (Some(x), Some(s)) => {
                ratio = ratio.max((x - 1.0).abs());
                sigma = sigma.max(s.relative_gap());
            }
            _ => missing += 1,
        }
    }
    Ok(Verdict {
        pass: missing == 0 && neh <= 1e-4 && poh <= 1e-4 && ratio <= 1e-4 && sigma <= 1e-3,
        detail: format!(
            "{} states: worst nehari {neh:.2e}, pohozaev {poh:.2e}, L2/Lq ratio {ratio:.2e}, sigma relations {sigma:.2e}, missing relations {missing}",
            states.len()
        ),
    })
}

fn sweep(base: &Params, alphas: &[f64], reports: &mut Vec<GroundStateReport>) -> Result<Vec<SweepRecord>, String> {
    let records = alpha_sweep(base, alphas, &gaussian(), Execution::default()).map_err(err)?;
    reports.extend(records.iter().map(|r| r.report.clone()));
    Ok(records)
}

fn sharp_constant_trends(reports: &mut Vec<GroundStateReport>) -> Result<Verdict, String> {
    let alphas = [0.2, 0.5, 1.0, 2.0, 2.8];
    let base = Params::new(3, 1.0, 2.2, 6.0).map_err(err)?;
    let records = sweep(&base, &alphas, reports)?;
    let converged = records.iter().all(|r| r.report.converged);
    let c: Vec<f64> = records.iter().map(|r| r.derived.c_est).collect();
    let hls: Vec<f64> = records.iter().map(|r| hls_constant(&r.report.params)).collect();
    let below = c.iter().zip(&hls).all(|(c, h)| c <= h);
    // |C − 1| along α = 1, 0.5, 0.2 and |C/A − 1| along α = 1, 2, 2.8.
    let small: Vec<f64> = [2, 1, 0].iter().map(|&i| (c[i] - 1.0).abs()).collect();
    let large: Vec<f64> = [2, 3, 4]
        .iter()
        .map(|&i| (c[i] / riesz_constant(&records[i].report.params) - 1.0).abs())
        .collect();
    let pass = converged && below && strictly_decreasing(&small) && strictly_decreasing(&large);
    Ok(Verdict {
        pass,
        detail: format!(
            "converged {converged}, C_est {} ≤ HLS {} : {below}; |C-1| (α=1,0.5,0.2) {}; |C/A-1| (α=1,2,2.8) {}",
            fmt_list(&c),
            fmt_list(&hls),
            fmt_list(&small),
            fmt_list(&large)
        ),
    })
}

fn thomas_fermi_limit(reports: &mut Vec<GroundStateReport>) -> Result<Verdict, String> {
    let params = Params::new(3, 2.0, 2.5, 6.0).map_err(err)?;
    let weights = [1e-1, 3e-2, 1e-2, 3e-3];
    let eps: Vec<f64> = weights.iter().map(|w: &f64| w.powf(1.0 / params.nu())).collect();
    let ((_, limit), rows) = epsilon_sweep(&gaussian(), &params, &eps).map_err(err)?;
    let sigma_star = limit.sigma_star_est;
    let sigma: Vec<f64> = rows.iter().map(|r| r.sigma_eps).collect();
    let grad: Vec<f64> = rows.iter().map(|r| r.grad_term).collect();
    let l2: Vec<f64> = rows.iter().map(|r| r.l2_dist).collect();
    let converged = limit.converged && rows.iter().all(|r| r.converged);
    let above = sigma.iter().all(|&s| s > sigma_star);
    let pass =
        converged && above && strictly_decreasing(&sigma) && strictly_decreasing(&grad) && strictly_decreasing(&l2);
    reports.push(limit);
    Ok(Verdict {
        pass,
        detail: format!(
            "converged {converged}, σ* {sigma_star:.6}, σ_ε {}, ε^ν‖∇u‖² {}, L2 distance {}",
            fmt_list(&sigma),
            fmt_list(&grad),
            fmt_list(&l2)
        ),
    })
}

fn support_radius_trends(reports: &mut Vec<GroundStateReport>) -> Result<Verdict, String> {
    let alphas = [0.5, 1.0, 2.0, 2.5, 2.9];
    let base = Params::new(3, 1.0, 4.0, 10.0).map_err(err)?;
    let records = sweep(&base, &alphas, reports)?;
    let converged = records.iter().all(|r| r.report.converged);
    let radii: Vec<f64> = records.iter().map(|r| r.derived.r_star.unwrap_or(f64::NAN)).collect();
    let mut bounds_ok = true;
    let mut ratios = Vec::new();
    for r in &records {
        let b = support_bounds(&r.report, &r.report.params).map_err(err)?;
        bounds_ok &= b.upper_ok;
        ratios.push(b.measured_volume / b.upper_bound_volume);
    }
    Ok(Verdict {
        pass: converged && bounds_ok && strictly_decreasing(&radii),
        detail: format!(
            "converged {converged}, R* {}, |B_R*| / upper bound {}",
            fmt_list(&radii),
            fmt_list(&ratios)
        ),
    })
}

fn property_suites(_: &mut Vec<GroundStateReport>) -> Result<Verdict, String> {
    let mut failed = Vec::new();
    for (name, suite) in properties::SUITES {
        if let Err(e) = suite() {
            failed.push(format!("{name}: {e}"));
        }
    }
    Ok(Verdict {
        pass: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} suites passed", properties::SUITES.len())
        } else {
            failed.join("; ")
        },
    })
}

fn main() {
    let criteria: [(&str, Duration, Criterion); 10] = [
        ("explicit-family closed forms", Duration::from_secs(30), explicit_family_closed_forms),
        ("ball potential oracle", Duration::from_secs(60), ball_potential),
        ("flow to the explicit family", Duration::from_secs(600), flow_to_explicit_family),
        ("p > 2 compact support with jump", Duration::from_secs(900), compact_jump),
        ("1D jump study", Duration::from_secs(600), one_dimensional_jumps),
        // Runs after 7 to 9 as well: the identities cover every state computed here.
        ("identity suite", Duration::MAX, identity_suite),
        ("sharp-constant trends", Duration::from_secs(2700), sharp_constant_trends),
        ("Thomas-Fermi limit sweep", Duration::from_secs(1800), thomas_fermi_limit),
        ("support-radius trends", Duration::from_secs(1800), support_radius_trends),
        ("property suites", Duration::from_secs(120), property_suites),
    ];
    let order = [0, 1, 2, 3, 4, 6, 7, 8, 5, 9];
    let mut reports = Vec::new();
    let mut lines = vec![String::new(); criteria.len()];
    let mut failures = 0;
    for i in order {
        let (name, budget, run) = criteria[i];
        let start = Instant::now();
        let outcome = run(&mut reports);
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(v) => (v.pass && elapsed <= budget, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        let budget_note = if budget == Duration::MAX { String::new() } else { format!(" / {} s", budget.as_secs()) };
        let line = format!(
            "criterion {:>2} {} {name} ({:.1} s{budget_note}): {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        eprintln!("{line}");
        lines[i] = line;
    }
    println!();
    for line in &lines {
        println!("{line}");
    }
    println!("\n{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
