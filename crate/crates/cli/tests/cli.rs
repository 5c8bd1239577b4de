use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_accelspread"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn accelspread")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const FAST: &str = r#"
[model]
h0 = 20

[kernels.J1]
family = "power_law"
alpha = 1.5

[sim]
dx = 0.5
dt = 0.05
T = 120
spread_threshold = 60
stall_steps = 100

[output]
snapshot_every = 400
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn simulate_writes_artifacts_and_spreads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FAST);
    let out = tmp.path().join("a");
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trajectory.csv", "report.json", "fronts.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(fs::read_dir(out.join("snapshots")).unwrap().count() >= 2);
    let r = report(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], "simulate");
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(r["result"]["verdict"]["kind"], "spreading");
    assert!(r["result"]["fits"]["power"]["exponent"].is_number());

    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,g,h\n") && !csv.contains('\r'));

    let out2 = tmp.path().join("b");
    assert!(run(&["simulate", "--config", &cfg, "--out", out2.to_str().unwrap()]).status.success());
    assert_eq!(csv, fs::read_to_string(out2.join("trajectory.csv")).unwrap());
    assert_eq!(
        fs::read_to_string(out.join("report.json")).unwrap(),
        fs::read_to_string(out2.join("report.json")).unwrap()
    );
}

#[test]
fn tiny_horizon_is_undecided_with_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &FAST.replace("T = 120", "T = 0.5"));
    let o = run(&["simulate", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(tmp.path())["result"]["verdict"]["kind"], "undecided");
}

#[test]
fn validation_errors_exit_one_with_all_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[model]\nd1 = -1\n[kernels.J1]\nfamily = \"power_law\"\nalpha = 0.5\n[sim]\nnope = 1\n",
    );
    let o = run(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    for needle in ["model: d1", "kernels.J1", "sim.nope"] {
        assert!(err.contains(needle), "{needle}: {err}");
    }
}

#[test]
fn missing_config_exits_one() {
    let o = run(&["simulate", "--config", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn semiwave_bad_bracket_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
[kernels.J1]
family = "compact"
a = 1

[semiwave]
L_trunc = 30
n = 301
c_bracket = [10, 20]
"#;
    let cfg = write_config(tmp.path(), text);
    let o = run(&["semiwave", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn semiwave_writes_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
[kernels.J1]
family = "compact"
a = 1

[semiwave]
L_trunc = 30
n = 301
fix_tol = 1e-6
"#;
    let cfg = write_config(tmp.path(), text);
    let o = run(&["semiwave", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(tmp.path());
    let c0 = r["result"]["c0"].as_f64().unwrap();
    assert!(c0 > 0.0 && c0 < 1.0, "{c0}");
    assert_eq!(r["result"]["monotone"], true);
    let prof = fs::read_to_string(tmp.path().join("profile.csv")).unwrap();
    assert!(prof.starts_with("x,phi1,phi2\n"));
    assert_eq!(prof.lines().count(), 302);
}

#[test]
fn sweep_empty_list_is_empty_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FAST);
    let o = run(&["sweep", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(tmp.path())["result"]["rows"], Value::Array(vec![]));
}

#[test]
fn sweep_isolates_bad_alpha() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FAST);
    let o = run(&["sweep", "--config", &cfg, "--alphas", "0.5,1.5", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = report(tmp.path())["result"]["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["status"], "error");
    assert_eq!(rows[1]["status"], "ok");
    assert_eq!(rows[1]["law"], "power");
}

fn synthetic_csv(dir: &Path, f: impl Fn(f64) -> f64) -> String {
    let mut s = String::from("t,g,h\n");
    for i in 1..=200 {
        let t = i as f64 * 5.0;
        s.push_str(&format!("{t},{},{}\n", -f(t), f(t)));
    }
    let p = dir.join("traj.csv");
    fs::write(&p, s).unwrap();
    p.display().to_string()
}

#[test]
fn rates_recovers_synthetic_exponent() {
    let tmp = tempfile::tempdir().unwrap();
    let p = synthetic_csv(tmp.path(), |t| 0.3 * t * t);
    let o = run(&["rates", "--trajectory", &p, "--law", "power", "--alpha", "1.5", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(tmp.path());
    let e = r["result"]["power"]["exponent"].as_f64().unwrap();
    assert!((e - 2.0).abs() < 1e-9, "{e}");
    assert_eq!(r["result"]["theory"]["exponent"], 2.0);
}

#[test]
fn plot_emits_svg_and_reports_bad_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let p = synthetic_csv(tmp.path(), |t| t * t.ln());
    let svg = tmp.path().join("f.svg");
    let o = run(&["plot", "--trajectory", &p, "--out", svg.to_str().unwrap(), "--law", "tlnt"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml") && text.trim_end().ends_with("</svg>"));
    assert_eq!(text.matches("<polyline").count(), 3);

    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "t,g,h\n1,-1,1\n2,oops,2\n").unwrap();
    let o = run(&["plot", "--trajectory", bad.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&o.stderr));

    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, "t,g,h\n").unwrap();
    let o = run(&["plot", "--trajectory", empty.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_subeig_reports_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
[kernels.J1]
family = "gaussian"

[subeig]
family = "power"
lambda = 2
epsilon = 0.1
L_min = 1
L_max = 1000
L_points = 13
grid_n = 1024
"#;
    let cfg = write_config(tmp.path(), text);
    let o = run(&["verify-subeig", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(tmp.path());
    assert_eq!(r["result"]["pass"], true, "{r}");
    assert_eq!(r["result"]["convexity"]["pass"], true);
}

#[test]
fn verify_envelope_with_fixed_constants() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
[kernels.J1]
family = "power_law"
alpha = 1.5

[envelope]
cases = ["upper_power"]
t_check = 50
n_times = 8
n_x = 32
intervals = 512

[envelope.constants]
C1 = 50
sigma = 20
M = 1.1
"#;
    let cfg = write_config(tmp.path(), text);
    let o = run(&["verify-envelope", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(tmp.path());
    assert_eq!(r["result"]["cases"][0]["found"], true, "{r}");
    let curves = fs::read_to_string(tmp.path().join("envelope_curves.csv")).unwrap();
    assert!(curves.starts_with("case,t,h\nupper_power,"));
}
