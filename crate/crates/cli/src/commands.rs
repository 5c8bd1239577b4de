//! Subcommand bodies. Each returns the `result` object of its report.

use std::fs;
use std::path::{Path, PathBuf};

use accelspread::analysis::{
    classify, discriminate, fit_linear_speed, fit_power, fit_tlnt, tail_window, theory_rate, DichotomyKind, RateFit,
    RateLaw, TheoryLaw, Thresholds,
};
use accelspread::envelopes::{
    envelope_compare, residual_check, search_constants, EnvelopeSpec, SearchRanges,
};
use accelspread::model::{basic_reproduction_number, positive_equilibrium};
use accelspread::semiwave::{solve_speed, SemiWaveConfig};
use accelspread::simulator::{run, Trajectory};
use accelspread::subeig::{check_convexity, convex_region, minimal_scale, verify_subeigen, ProfileSpec};
use accelspread::{kernels::Kernel, quadrature::logspace};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::svg::{render, Series};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    command: &'a str,
    config_hash: &'a str,
    result: &'a Value,
}

pub fn write_report(dir: &Path, command: &str, hash: &str, result: &Value) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join("report.json");
    let rep = Report { schema_version: SCHEMA_VERSION, command, config_hash: hash, result };
    let mut text = serde_json::to_string_pretty(&rep).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(p) = path.parent() {
        fs::create_dir_all(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn fit_json(r: accelspread::Result<RateFit>) -> Value {
    match r {
        Ok(f) => to_json(&f),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum LawChoice {
    Auto,
    Power,
    Tlnt,
    Linear,
    None,
}

/// Curve of a fitted law over `window`.
fn law_curve(fit: &RateFit, window: (f64, f64)) -> Vec<(f64, f64)> {
    let (lo, hi) = window;
    (0..=200)
        .map(|i| lo + (hi - lo) * i as f64 / 200.0)
        .filter(|&t| t > 0.0)
        .map(|t| {
            let h = match fit.law {
                RateLaw::Power { p } => fit.coefficient * t.powf(p),
                RateLaw::TLogT { c } => c * t * t.ln(),
                RateLaw::Linear { c } => c * t,
            };
            (t, h)
        })
        .collect()
}

fn law_label(fit: &RateFit) -> String {
    match fit.law {
        RateLaw::Power { p } => format!("fit {:.4} t^{:.4}", fit.coefficient, p),
        RateLaw::TLogT { c } => format!("fit {c:.4} t ln t"),
        RateLaw::Linear { c } => format!("fit {c:.4} t"),
    }
}

pub fn plot_svg(traj: &Trajectory, law: LawChoice, alpha: Option<f64>, title: &str) -> Result<String, CliError> {
    if traj.times.len() < 2 {
        return Err(CliError::Input("trajectory has fewer than two rows".into()));
    }
    let window = tail_window(traj);
    let choice = match law {
        LawChoice::Auto => match alpha.map(theory_rate) {
            Some(Ok(TheoryLaw::TLogT)) => LawChoice::Tlnt,
            Some(Err(_)) => LawChoice::Linear,
            _ => LawChoice::Power,
        },
        other => other,
    };
    let fit = match choice {
        LawChoice::Power => fit_power(traj, window).ok(),
        LawChoice::Tlnt => fit_tlnt(traj, window).ok(),
        LawChoice::Linear => fit_linear_speed(traj, window).ok(),
        _ => None,
    };
    let label = fit.as_ref().map(law_label).unwrap_or_default();
    let mut series = vec![
        Series { label: "h(t)", color: "#1f77b4", dashed: false, points: traj.times.iter().zip(&traj.h).map(|(&t, &h)| (t, h)).collect() },
        Series { label: "-g(t)", color: "#d62728", dashed: false, points: traj.times.iter().zip(&traj.g).map(|(&t, &g)| (t, -g)).collect() },
    ];
    if let Some(f) = &fit {
        series.push(Series { label: &label, color: "#2ca02c", dashed: true, points: law_curve(f, window) });
    }
    Ok(render(title, &series))
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Value, CliError> {
    let ks = cfg.kernels.build()?;
    let traj = run(&cfg.params, &cfg.g, &ks, &cfg.init_profile(), &cfg.sim)?;
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    traj.write_csv_file(&out.join("trajectory.csv"))?;
    if cfg.output.snapshots {
        for (i, s) in traj.snapshots.iter().enumerate() {
            let p = out.join("snapshots").join(format!("snapshot_{i:04}.csv"));
            fs::create_dir_all(p.parent().unwrap()).map_err(|e| CliError::Io(e.to_string()))?;
            let f = fs::File::create(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            s.write_csv(std::io::BufWriter::new(f))?;
        }
    }
    let eq = positive_equilibrium(&cfg.params, &cfg.g)?;
    let th = Thresholds { center_tolerance: cfg.analysis.center_tolerance, ..Thresholds::from(&cfg.sim) };
    let verdict = classify(&traj, &th, &eq);
    let window = cfg.analysis.window.unwrap_or_else(|| tail_window(&traj));
    let fits = if verdict.kind == DichotomyKind::Spreading {
        json!({
            "power": fit_json(fit_power(&traj, window)),
            "t_log_t": fit_json(fit_tlnt(&traj, window)),
            "linear": fit_json(fit_linear_speed(&traj, window)),
        })
    } else {
        Value::Null
    };
    let alpha = cfg.kernels.power_alpha();
    let theory = alpha.map(|a| match theory_rate(a) {
        Ok(t) => to_json(&t),
        Err(e) => json!({ "error": e.to_string() }),
    });
    if cfg.output.plot && traj.times.len() >= 2 {
        let svg = plot_svg(&traj, LawChoice::Auto, alpha, "front positions")?;
        write_file(&out.join("fronts.svg"), &svg)?;
    }
    let last = traj.times.len() - 1;
    Ok(json!({
        "r0": basic_reproduction_number(&cfg.params, &cfg.g),
        "equilibrium": to_json(&eq),
        "verdict": to_json(&verdict),
        "stop": to_json(&traj.stop),
        "horizon": traj.horizon(),
        "final": { "g": traj.g[last], "h": traj.h[last], "max_u": traj.max_u[last], "max_v": traj.max_v[last] },
        "window": [window.0, window.1],
        "fits": fits,
        "theory": theory,
        "snapshots": traj.snapshots.len(),
    }))
}

pub fn sweep(cfg: &RunConfig, alphas: &[f64], out: &Path) -> Result<Value, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let rows: Vec<Value> = std::thread::scope(|scope| {
        let jobs: Vec<_> = alphas.iter().map(|&a| scope.spawn(move || sweep_one(cfg, a, out))).collect();
        jobs.into_iter()
            .zip(alphas)
            .map(|(j, &a)| match j.join() {
                Ok(Ok(v)) => v,
                Ok(Err(e)) => json!({ "alpha": a, "status": "error", "error": e.to_string() }),
                Err(_) => json!({ "alpha": a, "status": "error", "error": "job panicked" }),
            })
            .collect()
    });
    Ok(json!({ "rows": rows }))
}

fn sweep_one(cfg: &RunConfig, alpha: f64, out: &Path) -> Result<Value, CliError> {
    let theory = theory_rate(alpha)?;
    let specs = cfg.kernels.with_alpha(alpha);
    let ks = specs.build()?;
    let traj = run(&cfg.params, &cfg.g, &ks, &cfg.init_profile(), &cfg.sim)?;
    traj.write_csv_file(&out.join(format!("trajectory_alpha_{alpha}.csv")))?;
    let eq = positive_equilibrium(&cfg.params, &cfg.g)?;
    let th = Thresholds { center_tolerance: cfg.analysis.center_tolerance, ..Thresholds::from(&cfg.sim) };
    let verdict = classify(&traj, &th, &eq);
    let window = cfg.analysis.window.unwrap_or_else(|| tail_window(&traj));
    let mut row = json!({
        "alpha": alpha,
        "status": "ok",
        "verdict": to_json(&verdict.kind),
        "theory": to_json(&theory),
        "window": [window.0, window.1],
    });
    match theory {
        TheoryLaw::Power { exponent } => {
            let f = fit_power(&traj, window)?;
            let p = f.exponent.unwrap_or(f64::NAN);
            row["law"] = json!("power");
            row["fitted"] = json!(p);
            row["relative_error"] = json!((p - exponent) / exponent);
            row["fit"] = to_json(&f);
        }
        TheoryLaw::TLogT => {
            let f = fit_tlnt(&traj, window)?;
            row["law"] = json!("t_log_t");
            row["fitted"] = json!(f.coefficient);
            row["preference"] = to_json(&discriminate(&f));
            row["fit"] = to_json(&f);
        }
    }
    Ok(row)
}

pub fn rates(traj_path: &Path, law: LawChoice, alpha: Option<f64>, window: Option<(f64, f64)>) -> Result<Value, CliError> {
    let traj = Trajectory::read_csv_file(traj_path)?;
    let window = window.unwrap_or_else(|| tail_window(&traj));
    let mut v = json!({ "window": [window.0, window.1], "samples": traj.times.len() });
    let want = |l: LawChoice| law == l || law == LawChoice::Auto;
    if want(LawChoice::Power) {
        v["power"] = fit_json(fit_power(&traj, window));
    }
    if want(LawChoice::Tlnt) {
        let f = fit_tlnt(&traj, window);
        if let Ok(f) = &f {
            v["preference"] = to_json(&discriminate(f));
        }
        v["t_log_t"] = fit_json(f);
    }
    if want(LawChoice::Linear) {
        v["linear"] = fit_json(fit_linear_speed(&traj, window));
    }
    if let Some(a) = alpha {
        v["theory"] = match theory_rate(a) {
            Ok(t) => to_json(&t),
            Err(e) => json!({ "error": e.to_string() }),
        };
    }
    Ok(v)
}

pub fn semiwave(cfg: &RunConfig, out: &Path) -> Result<Value, CliError> {
    let ks = cfg.kernels.build()?;
    let sw = cfg.semiwave.clone().unwrap_or_default();
    let sol = solve_speed(&cfg.params, &cfg.g, &ks, &sw)?;
    let p = &sol.profiles;
    let mut csv = String::from("x,phi1,phi2\n");
    for i in 0..p.x.len() {
        csv.push_str(&format!("{},{},{}\n", p.x[i], p.phi1[i], p.phi2[i]));
    }
    write_file(&out.join("profile.csv"), &csv)?;
    let monotone = |f: &[f64]| f.windows(2).all(|w| w[1] - w[0] <= 1e-8);
    let eq = positive_equilibrium(&cfg.params, &cfg.g)?;
    Ok(json!({
        "c0": sol.c0,
        "profile_residual": sol.profile_residual,
        "speed_residual": sol.speed_residual,
        "bisection_steps": sol.bisection_steps,
        "iterations": p.iterations,
        "monotone": monotone(&p.phi1) && monotone(&p.phi2),
        "left_values": [p.phi1[0], p.phi2[0]],
        "equilibrium": to_json(&eq),
        "config": to_json(&SemiWaveConfig { ..sw }),
    }))
}

pub fn verify_subeig(cfg: &RunConfig) -> Result<Value, CliError> {
    let sc = cfg
        .subeig
        .clone()
        .ok_or_else(|| CliError::Validation(vec!["subeig: missing table".into()]))?;
    let spec = match sc.kernel.as_str() {
        "J2" => &cfg.kernels.j2,
        "K" => &cfg.kernels.k,
        _ => &cfg.kernels.j1,
    };
    let kernel = Kernel::new(spec.clone())?;
    let found = match sc.l {
        Some(l) => Some(verify_subeigen(&kernel, &ProfileSpec { family: sc.family.clone(), l }, sc.epsilon, sc.grid_n)?),
        None => minimal_scale(&kernel, &sc.family, sc.epsilon, &logspace(sc.l_min, sc.l_max, sc.l_points), sc.grid_n)?,
    };
    let doubled = match &found {
        Some(r) => Some(verify_subeigen(&kernel, &ProfileSpec { family: sc.family.clone(), l: 2.0 * r.l }, sc.epsilon, sc.grid_n)?),
        None => None,
    };
    let region = convex_region(&sc.family);
    let convex = check_convexity(&sc.family, region)?;
    let pass = found.as_ref().is_some_and(|r| r.pass) && doubled.as_ref().is_some_and(|r| r.pass) && convex;
    Ok(json!({
        "kernel": sc.kernel,
        "family": to_json(&sc.family),
        "epsilon": sc.epsilon,
        "at_l": to_json(&found),
        "at_2l": to_json(&doubled),
        "convexity": { "region": [region.0, region.1], "pass": convex },
        "pass": pass,
    }))
}

pub fn verify_envelope(cfg: &RunConfig, out: &Path) -> Result<Value, CliError> {
    let ec = cfg
        .envelope
        .clone()
        .ok_or_else(|| CliError::Validation(vec!["envelope: missing table".into()]))?;
    let ks = cfg.kernels.build()?;
    let alpha = ec.alpha.or(cfg.kernels.power_alpha()).unwrap_or(f64::NAN);
    let sup = cfg.init_profile().sup(cfg.params.h0, 1000);
    let mut rows = Vec::new();
    let mut lower: Option<EnvelopeSpec> = None;
    let mut upper: Option<EnvelopeSpec> = None;
    let mut curves = String::from("case,t,h\n");
    for case in &ec.cases {
        let case_alpha = if case.is_critical() { 2.0 } else { alpha };
        let (spec, report, tried) = match ec.constants {
            Some(k) => {
                let spec = EnvelopeSpec::new(*case, case_alpha, k, &cfg.params, &cfg.g)?;
                let rep = residual_check(&spec, &cfg.params, &cfg.g, &ks, &ec.grid)?;
                (Some(spec), Some(rep), 1)
            }
            None => {
                let mut ranges = SearchRanges::for_case(*case, cfg.params.h0, sup);
                ranges.grid = ec.grid;
                let o = search_constants(*case, case_alpha, &cfg.params, &cfg.g, &ks, &ranges)?;
                match (o.found, o.best) {
                    (Some(s), Some((_, r))) => (Some(s), Some(r), o.tried),
                    (None, Some((s, r))) => {
                        rows.push(json!({
                            "case": case.name(),
                            "found": false,
                            "best": to_json(&s.constants),
                            "report": to_json(&r),
                            "tried": o.tried,
                        }));
                        continue;
                    }
                    _ => (None, None, o.tried),
                }
            }
        };
        let pass = report.as_ref().is_some_and(|r| r.pass);
        if let Some(s) = spec {
            if pass {
                if case.is_lower() {
                    lower.get_or_insert(s);
                } else {
                    upper.get_or_insert(s);
                }
            }
            for t in ec.grid.times() {
                curves.push_str(&format!("{},{},{}\n", case.name(), t, s.front(t).0));
            }
        }
        rows.push(json!({
            "case": case.name(),
            "found": pass,
            "constants": spec.map(|s| to_json(&s.constants)),
            "report": to_json(&report),
            "tried": tried,
        }));
    }
    write_file(&out.join("envelope_curves.csv"), &curves)?;
    let mut result = json!({ "alpha": alpha, "cases": rows });
    if ec.compare && (lower.is_some() || upper.is_some()) {
        let traj = run(&cfg.params, &cfg.g, &ks, &cfg.init_profile(), &cfg.sim)?;
        let t = traj.horizon();
        let window = (0.25 * t, t);
        result["compare"] = match envelope_compare(&traj, lower.as_ref(), upper.as_ref(), window) {
            Ok(r) => to_json(&r),
            Err(e) => json!({ "error": e.to_string() }),
        };
    }
    Ok(result)
}
