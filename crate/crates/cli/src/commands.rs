// SPDX-License-Identifier: Apache-2.0

use crate::config::{Format, RunConfig};
use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::process::ExitCode;
use tfground::analysis::{
    alpha_sweep, strictly_decreasing, verify_profile, verify_report, write_sweep_csv, SweepRecord, Verification,
};
use tfground::flow::{epsilon_sweep_with, write_eps_csv, write_history_csv, EpsRecord};
use tfground::functionals::GroundStateReport;
use tfground::radial::io::{fmt17, read_profile, write_profile, ProfileSidecar};
use tfground::radial::RadialFunction;
use tfground::riesz::{potential_with, KernelMethod};
use tfground::special_fn::explicit_family_exponents;
use tfground::{Error, Execution, NamedConstants, Params, VERSION};

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if let Some(err) = e.downcast_ref::<Error>() {
        return match err {
            Error::Domain(_)
            | Error::Inadmissible { .. }
            | Error::Config(_)
            | Error::Divergence(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 2,
            Error::Stall(_) | Error::Monotonicity { .. } => 3,
            Error::Degenerate(_) => 4,
            Error::KernelSingular(_) | Error::Fit(_) => 1,
        };
    }
    if e.downcast_ref::<toml::de::Error>().is_some()
        || e.downcast_ref::<std::io::Error>().is_some()
        || e.downcast_ref::<serde_json::Error>().is_some()
    {
        return 2;
    }
    1
}

/// Wraps a payload with the artifact version and the resolved config.
fn envelope<T: Serialize>(cfg: &RunConfig, key: &str, payload: &T) -> Result<Value> {
    let mut v = json!({ "version": VERSION, "config": cfg });
    v[key] = serde_json::to_value(payload)?;
    Ok(v)
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(v)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.outputs.dir.as_path();
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn opt17(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), fmt17)
}

pub fn constants(cfg: &RunConfig, as_json: bool) -> Result<ExitCode> {
    let params = cfg.params()?;
    let c = NamedConstants::compute(&params);
    if as_json {
        println!("{}", serde_json::to_string_pretty(&envelope(cfg, "constants", &c)?)?);
        return Ok(ExitCode::SUCCESS);
    }
    println!("N            {}", params.n);
    for (name, v) in [("alpha", params.alpha), ("p", params.p), ("q", params.q)] {
        println!("{name:<12} {}", fmt17(v));
    }
    let rows = [
        ("riesz_A", Some(c.riesz_a)),
        ("hls_C", Some(c.hls_c)),
        ("hls_over_A", Some(c.hls_over_riesz)),
        ("lambda_star", c.lambda_star),
        ("lambda_P", c.lambda_pohozaev),
        ("theta", Some(c.theta)),
        ("theta_star", Some(c.theta_star)),
        ("nu", Some(c.nu)),
        ("omega_N", Some(c.omega_n)),
        ("C_lower", c.c_lower),
    ];
    for (name, v) in rows {
        println!("{name:<12} {}", opt17(v));
    }
    if c.ill_conditioned {
        println!("warning: N - alpha is tiny; raw A and C are ill-conditioned, use hls_over_A");
    }
    Ok(ExitCode::SUCCESS)
}

pub fn solve(cfg: &RunConfig) -> Result<ExitCode> {
    let params = cfg.params()?;
    let dir = out_dir(cfg)?;
    let (u, report) = match with_jobs(cfg.jobs, || tfground::flow::solve(&cfg.flow, &params, 0.0)) {
        Ok(r) => r,
        Err(e) => {
            if matches!(e, Error::Degenerate(_) | Error::Stall(_) | Error::Monotonicity { .. }) {
                write_json(&dir.join("error.json"), &envelope(cfg, "error", &e.to_string())?)?;
            }
            return Err(e.into());
        }
    };
    write_solution(cfg, dir, &params, &u, &report)?;
    println!(
        "{} classification={} sigma={} converged={}",
        dir.display(),
        serde_json::to_value(report.classification)?.as_str().unwrap_or("?"),
        fmt17(report.sigma_star_est),
        report.converged
    );
    Ok(if report.converged { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn write_solution(cfg: &RunConfig, dir: &Path, params: &Params, u: &RadialFunction, report: &GroundStateReport) -> Result<()> {
    if cfg.outputs.wants(Format::Csv) {
        let mut side = ProfileSidecar::describe(u, Some(params));
        side.extra = json!({ "config": cfg });
        write_profile(&dir.join("profile.csv"), u, &side)?;
        write_history_csv(BufWriter::new(File::create(dir.join("history.csv"))?), &report.history)?;
    }
    if cfg.outputs.wants(Format::Json) {
        write_json(&dir.join("report.json"), &envelope(cfg, "report", report)?)?;
    }
    Ok(())
}

/// Parameters for a density-only command: flags and config first, then the
/// profile sidecar; a missing (p, q) defaults to the explicit family of
/// (N, α), since only N and α enter the potential.
fn density_params(cfg: &RunConfig, side: Option<&ProfileSidecar>, dim: usize) -> Result<Params> {
    let from_side = side.and_then(|s| s.params);
    let s = &cfg.params;
    let n = s.n.unwrap_or(dim);
    if n != dim {
        bail!(Error::Config(format!("profile has N = {dim}, parameters say N = {n}")));
    }
    let alpha = s
        .alpha
        .or(from_side.map(|p| p.alpha))
        .ok_or_else(|| Error::Config("alpha is required (flag, config or sidecar)".into()))?;
    let (pe, qe) = explicit_family_exponents(n, alpha);
    let p = s.p.or(from_side.map(|x| x.p)).unwrap_or(pe);
    let q = s.q.or(from_side.map(|x| x.q)).unwrap_or(qe);
    Ok(Params::new(n, alpha, p, q)?)
}

fn load_profile(cfg: &RunConfig, path: &Path) -> Result<(RadialFunction, Option<ProfileSidecar>)> {
    Ok(read_profile(path, cfg.params.n)?)
}

pub fn potential(cfg: &RunConfig, profile: &Path) -> Result<ExitCode> {
    let (rho, side) = load_profile(cfg, profile)?;
    let params = density_params(cfg, side.as_ref(), rho.dim())?;
    let method = KernelMethod::for_dim(params.n);
    let exec = if cfg.jobs > 1 { Execution::Parallel } else { cfg.flow.exec };
    let field = with_jobs(cfg.jobs, || potential_with(&rho, &params, method, exec))?;
    let dir = out_dir(cfg)?;
    let path = dir.join("potential.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["r", "potential"])?;
    for (r, v) in rho.grid().nodes().iter().zip(&field.values) {
        w.write_record([fmt17(*r), fmt17(*v)])?;
    }
    w.flush()?;
    println!(
        "method={} error_estimate={} -> {}",
        serde_json::to_value(method)?.as_str().unwrap_or("?"),
        fmt17(field.error_estimate),
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn verify(cfg: &RunConfig, report: Option<&Path>, profile: Option<&Path>) -> Result<ExitCode> {
    let verification: Verification = match (report, profile) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let inner = v.get("report").cloned().unwrap_or(v);
            let rep: GroundStateReport = serde_json::from_value(inner).with_context(|| format!("{} is not a report", path.display()))?;
            verify_report(&rep, &cfg.verify)?
        }
        (None, Some(path)) => {
            let (u, side) = load_profile(cfg, path)?;
            let params = match cfg.params() {
                Ok(p) => p,
                Err(_) => side
                    .as_ref()
                    .and_then(|s| s.params)
                    .ok_or_else(|| Error::Config("full (N, alpha, p, q) needed: flags, config or sidecar".into()))?,
            };
            params.validate()?;
            verify_profile(&u, &params, &cfg.verify)?
        }
        (None, None) => bail!(Error::Config("verify needs --report or --profile".into())),
    };
    println!("{}", serde_json::to_string_pretty(&envelope(cfg, "verification", &verification)?)?);
    for c in verification.failures() {
        eprintln!("FAIL {}: {} > {}", c.name, fmt17(c.value), fmt17(c.tolerance));
    }
    Ok(if verification.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(f);
        }
    }
    let _ = jobs;
    f()
}

#[derive(Serialize)]
struct AlphaTrends {
    all_converged: bool,
    /// None when some state has unbounded support.
    r_star_strictly_decreasing: Option<bool>,
    c_est_below_hls: bool,
}

#[derive(Serialize)]
struct EpsTrends {
    all_converged: bool,
    sigma_strictly_decreasing: bool,
    sigma_above_limit: bool,
    grad_term_strictly_decreasing: bool,
    l2_strictly_decreasing: bool,
}

pub fn sweep(cfg: &RunConfig, alphas: Option<Vec<f64>>, eps: Option<Vec<f64>>) -> Result<ExitCode> {
    let alphas = alphas.or_else(|| cfg.sweep.alphas.clone());
    let eps = eps.or_else(|| cfg.sweep.eps.clone());
    let dir = out_dir(cfg)?;
    let converged = match (alphas, eps) {
        (Some(a), None) => sweep_alpha(cfg, dir, &a)?,
        (None, Some(e)) => sweep_eps(cfg, dir, &e)?,
        (Some(_), Some(_)) => bail!(Error::Config("give either an alpha grid or an eps grid, not both".into())),
        (None, None) => bail!(Error::Config("sweep needs --alphas or --eps (or [sweep] in the config)".into())),
    };
    Ok(if converged { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn sweep_alpha(cfg: &RunConfig, dir: &Path, alphas: &[f64]) -> Result<bool> {
    let Some(&first) = alphas.first() else {
        bail!(Error::Config("empty alpha grid".into()));
    };
    let s = &cfg.params;
    let (Some(n), Some(p), Some(q)) = (s.n, s.p, s.q) else {
        bail!(Error::Config("alpha sweep needs N, p and q".into()));
    };
    let base = Params { n, alpha: first, p, q };
    let exec = if cfg.jobs > 1 { Execution::Parallel } else { Execution::Sequential };
    let records: Vec<SweepRecord> = with_jobs(cfg.jobs, || alpha_sweep(&base, alphas, &cfg.flow, exec))?;
    let radii: Option<Vec<f64>> = records.iter().map(|r| r.derived.r_star).collect();
    let trends = AlphaTrends {
        all_converged: records.iter().all(|r| r.report.converged),
        r_star_strictly_decreasing: radii.map(|r| strictly_decreasing(&r)),
        c_est_below_hls: records
            .iter()
            .all(|r| r.derived.c_est <= tfground::special_fn::hls_constant(&r.report.params)),
    };
    if cfg.outputs.wants(Format::Csv) {
        write_sweep_csv(BufWriter::new(File::create(dir.join("sweep.csv"))?), &records)?;
    }
    if cfg.outputs.wants(Format::Json) {
        let mut v = envelope(cfg, "records", &records)?;
        v["trends"] = serde_json::to_value(&trends)?;
        write_json(&dir.join("sweep.json"), &v)?;
    }
    println!("{}", serde_json::to_string(&trends)?);
    Ok(trends.all_converged)
}

fn sweep_eps(cfg: &RunConfig, dir: &Path, eps: &[f64]) -> Result<bool> {
    let params = cfg.params()?;
    let warm = cfg.jobs <= 1;
    let exec = if warm { Execution::Sequential } else { Execution::Parallel };
    let ((_, rep0), rows): (_, Vec<EpsRecord>) =
        with_jobs(cfg.jobs, || epsilon_sweep_with(&cfg.flow, &params, eps, warm, exec))?;
    let active: Vec<&EpsRecord> = rows.iter().filter(|r| r.nu_weight > 0.0).collect();
    let col = |f: fn(&EpsRecord) -> f64| active.iter().map(|r| f(r)).collect::<Vec<_>>();
    let trends = EpsTrends {
        all_converged: rep0.converged && rows.iter().all(|r| r.converged),
        sigma_strictly_decreasing: strictly_decreasing(&col(|r| r.sigma_eps)),
        sigma_above_limit: active.iter().all(|r| r.sigma_eps > rep0.sigma_star_est),
        grad_term_strictly_decreasing: strictly_decreasing(&col(|r| r.grad_term)),
        l2_strictly_decreasing: strictly_decreasing(&col(|r| r.l2_dist)),
    };
    if cfg.outputs.wants(Format::Csv) {
        write_eps_csv(BufWriter::new(File::create(dir.join("sweep.csv"))?), &rows)?;
    }
    if cfg.outputs.wants(Format::Json) {
        let mut v = envelope(cfg, "records", &rows)?;
        v["sigma_star"] = json!(rep0.sigma_star_est);
        v["trends"] = serde_json::to_value(&trends)?;
        write_json(&dir.join("sweep.json"), &v)?;
    }
    println!("{}", serde_json::to_string(&trends)?);
    Ok(trends.all_converged)
}
