//! Run configuration: TOML in, fully validated structs out.

use std::path::{Path, PathBuf};

use accelspread::envelopes::{EnvelopeCase, EnvelopeConstants, ResidualGrid};
use accelspread::kernels::{CompactShape, Kernel, KernelSet, KernelSpec};
use accelspread::model::{GFunction, ModelParams};
use accelspread::semiwave::SemiWaveConfig;
use accelspread::simulator::{InitProfile, SimConfig};
use accelspread::subeig::ProfileFamily;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct KernelSpecs {
    pub j1: KernelSpec,
    pub j2: KernelSpec,
    pub k: KernelSpec,
}

impl KernelSpecs {
    pub fn build(&self) -> accelspread::Result<KernelSet> {
        KernelSet::new(&self.j1, &self.j2, &self.k)
    }

    /// Every power-law kernel switched to exponent `alpha`; other families
    /// become `power_law(alpha, 1)`.
    pub fn with_alpha(&self, alpha: f64) -> KernelSpecs {
        let f = |s: &KernelSpec| match s {
            KernelSpec::PowerLaw { s, .. } => KernelSpec::power_law(alpha, *s),
            _ => KernelSpec::power_law(alpha, 1.0),
        };
        KernelSpecs { j1: f(&self.j1), j2: f(&self.j2), k: f(&self.k) }
    }

    /// Tail exponent shared by the power-law kernels, if any.
    pub fn power_alpha(&self) -> Option<f64> {
        [&self.j1, &self.j2].into_iter().find_map(|s| match s {
            KernelSpec::PowerLaw { alpha, .. } => Some(*alpha),
            _ => None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub window: Option<(f64, f64)>,
    pub center_tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct SubeigConfig {
    pub kernel: String,
    pub family: ProfileFamily,
    pub epsilon: f64,
    pub l: Option<f64>,
    pub l_min: f64,
    pub l_max: f64,
    pub l_points: usize,
    pub grid_n: usize,
}

#[derive(Debug, Clone)]
pub struct EnvelopeConfig {
    pub cases: Vec<EnvelopeCase>,
    pub alpha: Option<f64>,
    pub constants: Option<EnvelopeConstants>,
    pub grid: ResidualGrid,
    pub compare: bool,
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snapshots: bool,
    pub plot: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub g: GFunction,
    pub kernels: KernelSpecs,
    pub sim: SimConfig,
    pub init: (f64, f64),
    pub analysis: AnalysisConfig,
    pub semiwave: Option<SemiWaveConfig>,
    pub subeig: Option<SubeigConfig>,
    pub envelope: Option<EnvelopeConfig>,
    pub output: OutputConfig,
    /// Hex sha256 of the config file bytes.
    pub hash: String,
}

impl RunConfig {
    pub fn init_profile(&self) -> InitProfile {
        InitProfile::Parabolic { a: self.init.0, b: self.init.1 }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Validation(vec![format!("{}: not valid UTF-8", path.display())]))?;
    parse_config(&text, &sha256_hex(&bytes))
}

/// Collects errors under dotted key paths.
struct Reader {
    errs: Vec<String>,
}

impl Reader {
    fn table<'a>(&mut self, root: &'a Table, path: &str, key: &str) -> Option<&'a Table> {
        match root.get(key) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.errs.push(format!("{}: expected a table", join(path, key)));
                None
            }
        }
    }

    fn known(&mut self, t: &Table, path: &str, allowed: &[&str]) {
        for k in t.keys() {
            if !allowed.contains(&k.as_str()) {
                self.errs.push(format!("{}: unknown key", join(path, k)));
            }
        }
    }

    fn num(&mut self, t: Option<&Table>, path: &str, key: &str) -> Option<f64> {
        match t?.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.errs.push(format!("{}: expected a number", join(path, key)));
                None
            }
        }
    }

    fn f64_or(&mut self, t: Option<&Table>, path: &str, key: &str, default: f64) -> f64 {
        self.num(t, path, key).unwrap_or(default)
    }

    fn required(&mut self, t: Option<&Table>, path: &str, key: &str) -> f64 {
        if t.is_some_and(|t| t.contains_key(key)) {
            self.num(t, path, key).unwrap_or(f64::NAN)
        } else {
            self.errs.push(format!("{}: missing key", join(path, key)));
            f64::NAN
        }
    }

    fn usize_or(&mut self, t: Option<&Table>, path: &str, key: &str, default: usize) -> usize {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::Integer(i)) if *i >= 0 => *i as usize,
            Some(_) => {
                self.errs.push(format!("{}: expected a non-negative integer", join(path, key)));
                default
            }
        }
    }

    fn bool_or(&mut self, t: Option<&Table>, path: &str, key: &str, default: bool) -> bool {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(_) => {
                self.errs.push(format!("{}: expected a boolean", join(path, key)));
                default
            }
        }
    }

    fn str_or<'a>(&mut self, t: Option<&'a Table>, path: &str, key: &str, default: &'a str) -> &'a str {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::String(s)) => s,
            Some(_) => {
                self.errs.push(format!("{}: expected a string", join(path, key)));
                default
            }
        }
    }

    fn pair(&mut self, t: Option<&Table>, path: &str, key: &str) -> Option<(f64, f64)> {
        let v = t?.get(key)?;
        let arr = v.as_array().filter(|a| a.len() == 2);
        let nums: Option<Vec<f64>> =
            arr.map(|a| a.iter().filter_map(|x| x.as_float().or(x.as_integer().map(|i| i as f64))).collect());
        match nums {
            Some(n) if n.len() == 2 => Some((n[0], n[1])),
            _ => {
                self.errs.push(format!("{}: expected a two-element numeric array", join(path, key)));
                None
            }
        }
    }

    fn numbers(&mut self, t: Option<&Table>, path: &str, key: &str) -> Vec<f64> {
        let Some(v) = t.and_then(|t| t.get(key)) else { return Vec::new() };
        match v.as_array() {
            Some(a) => {
                let out: Vec<f64> = a.iter().filter_map(|x| x.as_float().or(x.as_integer().map(|i| i as f64))).collect();
                if out.len() != a.len() {
                    self.errs.push(format!("{}: expected numbers only", join(path, key)));
                }
                out
            }
            None => {
                self.errs.push(format!("{}: expected an array", join(path, key)));
                Vec::new()
            }
        }
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn kernel_spec(r: &mut Reader, t: &Table, path: &str) -> Option<KernelSpec> {
    let fam = match t.get("family") {
        Some(Value::String(s)) => s.as_str(),
        Some(_) => {
            r.errs.push(format!("{path}.family: expected a string"));
            return None;
        }
        None => {
            r.errs.push(format!("{path}.family: missing key"));
            return None;
        }
    };
    let t = Some(t);
    let spec = match fam {
        "power_law" => {
            r.known(t.unwrap(), path, &["family", "alpha", "s"]);
            KernelSpec::PowerLaw { alpha: r.required(t, path, "alpha"), s: r.f64_or(t, path, "s", 1.0) }
        }
        "compact" => {
            r.known(t.unwrap(), path, &["family", "a", "shape"]);
            let shape = match r.str_or(t, path, "shape", "triangle") {
                "triangle" => CompactShape::Triangle,
                "cosine" => CompactShape::Cosine,
                other => {
                    r.errs.push(format!("{path}.shape: unknown shape {other:?} (expected triangle or cosine)"));
                    CompactShape::Triangle
                }
            };
            KernelSpec::Compact { a: r.f64_or(t, path, "a", 1.0), shape }
        }
        "gaussian" => {
            r.known(t.unwrap(), path, &["family", "sigma"]);
            KernelSpec::Gaussian { sigma: r.f64_or(t, path, "sigma", 1.0) }
        }
        "laplace" => {
            r.known(t.unwrap(), path, &["family", "b"]);
            KernelSpec::Laplace { b: r.f64_or(t, path, "b", 1.0) }
        }
        "table" => {
            r.known(t.unwrap(), path, &["family", "step", "values"]);
            KernelSpec::Table { step: r.required(t, path, "step"), values: r.numbers(t, path, "values") }
        }
        other => {
            r.errs.push(format!(
                "{path}.family: unknown kernel family {other:?} (expected power_law, compact, gaussian, laplace or table)"
            ));
            return None;
        }
    };
    if let Err(es) = spec.validate() {
        r.errs.extend(es.into_iter().map(|e| format!("{path}: {e}")));
        return None;
    }
    if let Err(e) = Kernel::new(spec.clone()) {
        r.errs.push(format!("{path}: {e}"));
        return None;
    }
    Some(spec)
}

fn profile_family(r: &mut Reader, t: Option<&Table>, path: &str) -> ProfileFamily {
    let fam = r.str_or(t, path, "family", "power");
    let lambda = r.f64_or(t, path, "lambda", 2.0);
    let f = match fam {
        "power" => ProfileFamily::Power { lambda },
        "power_kink" => ProfileFamily::PowerKink { lambda, eta: r.f64_or(t, path, "eta", 0.9) },
        "capped" => ProfileFamily::Capped {
            lambda,
            eta1: r.f64_or(t, path, "eta1", 2.0),
            eta2: r.f64_or(t, path, "eta2", 0.9),
        },
        other => {
            r.errs.push(format!("{path}.family: unknown profile family {other:?} (expected power, power_kink or capped)"));
            ProfileFamily::Power { lambda }
        }
    };
    if let Err(e) = f.validate() {
        r.errs.push(format!("{path}: {e}"));
    }
    f
}

/// Parses and validates; all problems are returned together.
pub fn parse_config(text: &str, hash: &str) -> Result<RunConfig, CliError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| CliError::Validation(vec![format!("parse error: {e}")]))?;
    let mut r = Reader { errs: Vec::new() };
    r.known(&root, "", &["model", "g", "kernels", "sim", "init", "analysis", "semiwave", "subeig", "envelope", "output"]);

    let model = r.table(&root, "", "model");
    if let Some(m) = model {
        r.known(m, "model", &["d1", "d2", "a11", "a12", "a22", "mu", "rho_flux", "h0"]);
    }
    let unit = ModelParams::unit(20.0);
    let params = ModelParams {
        d1: r.f64_or(model, "model", "d1", unit.d1),
        d2: r.f64_or(model, "model", "d2", unit.d2),
        a11: r.f64_or(model, "model", "a11", unit.a11),
        a12: r.f64_or(model, "model", "a12", unit.a12),
        a22: r.f64_or(model, "model", "a22", unit.a22),
        mu: r.f64_or(model, "model", "mu", unit.mu),
        rho_flux: r.f64_or(model, "model", "rho_flux", unit.rho_flux),
        h0: r.f64_or(model, "model", "h0", unit.h0),
    };
    let params_ok = match params.validate() {
        Ok(()) => true,
        Err(es) => {
            r.errs.extend(es.into_iter().map(|e| format!("model: {e}")));
            false
        }
    };

    let gt = r.table(&root, "", "g");
    let g = match r.str_or(gt, "g", "family", "monod") {
        "monod" => {
            if let Some(t) = gt {
                r.known(t, "g", &["family", "b"]);
            }
            GFunction::monod(r.f64_or(gt, "g", "b", 2.0))
        }
        "linear_capped" => {
            if let Some(t) = gt {
                r.known(t, "g", &["family", "b", "cap"]);
            }
            GFunction::linear_capped(r.f64_or(gt, "g", "b", 2.0), r.f64_or(gt, "g", "cap", 1.0))
        }
        other => {
            r.errs.push(format!("g.family: unknown family {other:?} (expected monod or linear_capped)"));
            GFunction::monod(2.0)
        }
    };
    for key in ["b", "cap"] {
        if let Some(v) = gt.and_then(|t| t.get(key)).and_then(|v| v.as_float().or(v.as_integer().map(|i| i as f64))) {
            if !params_ok && !(v.is_finite() && v > 0.0) {
                r.errs.push(format!("g: {key} must be positive and finite, got {v}"));
            }
        }
    }
    if params_ok {
        let rep = g.check(&params);
        r.errs.extend(rep.messages.into_iter().map(|m| format!("g: {m}")));
    }

    let kt = r.table(&root, "", "kernels");
    let mut specs: [Option<KernelSpec>; 3] = [None, None, None];
    match kt {
        None => r.errs.push("kernels.J1: missing key".into()),
        Some(t) => {
            r.known(t, "kernels", &["J1", "J2", "K"]);
            for (i, name) in ["J1", "J2", "K"].iter().enumerate() {
                let path = format!("kernels.{name}");
                match t.get(*name) {
                    Some(Value::Table(kt)) => specs[i] = kernel_spec(&mut r, kt, &path),
                    Some(_) => r.errs.push(format!("{path}: expected a table")),
                    None if i == 0 => r.errs.push(format!("{path}: missing key")),
                    None => {}
                }
            }
        }
    }
    // J2 and K default to J1
    let j1 = specs[0].clone();
    let kernels = j1.map(|j1| KernelSpecs {
        j2: specs[1].clone().unwrap_or_else(|| j1.clone()),
        k: specs[2].clone().unwrap_or_else(|| j1.clone()),
        j1,
    });

    let st = r.table(&root, "", "sim");
    if let Some(t) = st {
        r.known(t, "sim", &["dx", "dt", "T", "vanish_threshold", "spread_threshold", "max_nodes", "stall_steps", "stall_tol"]);
    }
    let ot = r.table(&root, "", "output");
    if let Some(t) = ot {
        r.known(t, "output", &["dir", "snapshot_every", "snapshots", "plot"]);
    }
    let d = SimConfig::default();
    let sim = SimConfig {
        dx: r.f64_or(st, "sim", "dx", d.dx),
        dt: r.f64_or(st, "sim", "dt", d.dt),
        t_end: r.f64_or(st, "sim", "T", d.t_end),
        snapshot_every: r.usize_or(ot, "output", "snapshot_every", d.snapshot_every),
        vanish_threshold: r.f64_or(st, "sim", "vanish_threshold", d.vanish_threshold),
        spread_threshold: r.f64_or(st, "sim", "spread_threshold", d.spread_threshold),
        max_nodes: r.usize_or(st, "sim", "max_nodes", d.max_nodes),
        stall_steps: r.usize_or(st, "sim", "stall_steps", d.stall_steps),
        stall_tol: r.f64_or(st, "sim", "stall_tol", d.stall_tol),
    };
    if let Err(es) = sim.validate(&params) {
        r.errs.extend(es.into_iter().map(|e| format!("sim: {e}")));
    }
    let output = OutputConfig {
        dir: PathBuf::from(r.str_or(ot, "output", "dir", "out")),
        snapshots: r.bool_or(ot, "output", "snapshots", true),
        plot: r.bool_or(ot, "output", "plot", true),
    };

    let it = r.table(&root, "", "init");
    if let Some(t) = it {
        r.known(t, "init", &["u_amplitude", "v_amplitude"]);
    }
    let init = (r.f64_or(it, "init", "u_amplitude", 1.0), r.f64_or(it, "init", "v_amplitude", 1.0));
    if !(init.0 >= 0.0 && init.1 >= 0.0) {
        r.errs.push("init: amplitudes must be non-negative".into());
    }

    let at = r.table(&root, "", "analysis");
    if let Some(t) = at {
        r.known(t, "analysis", &["window", "center_tolerance"]);
    }
    let analysis = AnalysisConfig {
        window: r.pair(at, "analysis", "window"),
        center_tolerance: r.f64_or(at, "analysis", "center_tolerance", 0.1),
    };
    if let Some((lo, hi)) = analysis.window {
        if !(lo >= 0.5 * hi && hi > lo) {
            r.errs.push(format!("analysis.window: ({lo}, {hi}) must satisfy hi/2 <= lo < hi"));
        }
    }

    let swt = r.table(&root, "", "semiwave");
    let semiwave = swt.map(|t| {
        r.known(t, "semiwave", &["L_trunc", "n", "fix_tol", "c_bracket", "max_iter", "damping"]);
        let d = SemiWaveConfig::default();
        let s = Some(t);
        SemiWaveConfig {
            l_trunc: r.f64_or(s, "semiwave", "L_trunc", d.l_trunc),
            n: r.usize_or(s, "semiwave", "n", d.n),
            fix_tol: r.f64_or(s, "semiwave", "fix_tol", d.fix_tol),
            c_bracket: r.pair(s, "semiwave", "c_bracket").unwrap_or(d.c_bracket),
            max_iter: r.usize_or(s, "semiwave", "max_iter", d.max_iter),
            damping: r.f64_or(s, "semiwave", "damping", d.damping),
        }
    });
    if let (Some(sw), Some(ks)) = (&semiwave, &kernels) {
        if let Ok(set) = ks.build() {
            if let Err(e) = sw.validate(&set) {
                r.errs.push(format!("semiwave: {e}"));
            }
        }
    }

    let sbt = r.table(&root, "", "subeig");
    let subeig = sbt.map(|t| {
        r.known(t, "subeig", &["kernel", "family", "lambda", "eta", "eta1", "eta2", "epsilon", "L", "L_min", "L_max", "L_points", "grid_n"]);
        let s = Some(t);
        let kernel = r.str_or(s, "subeig", "kernel", "J1").to_string();
        if !["J1", "J2", "K"].contains(&kernel.as_str()) {
            r.errs.push(format!("subeig.kernel: {kernel:?} is not one of J1, J2, K"));
        }
        SubeigConfig {
            kernel,
            family: profile_family(&mut r, s, "subeig"),
            epsilon: r.f64_or(s, "subeig", "epsilon", 0.1),
            l: r.num(s, "subeig", "L"),
            l_min: r.f64_or(s, "subeig", "L_min", 1.0),
            l_max: r.f64_or(s, "subeig", "L_max", 1e4),
            l_points: r.usize_or(s, "subeig", "L_points", 41),
            grid_n: r.usize_or(s, "subeig", "grid_n", accelspread::subeig::DEFAULT_GRID_N),
        }
    });
    if let Some(sc) = &subeig {
        if !(sc.epsilon > 0.0 && sc.epsilon < 1.0) {
            r.errs.push(format!("subeig.epsilon: must lie in (0, 1), got {}", sc.epsilon));
        }
        if sc.grid_n < accelspread::subeig::MIN_GRID_N {
            r.errs.push(format!("subeig.grid_n: must be at least {}", accelspread::subeig::MIN_GRID_N));
        }
        if !(sc.l_min > 0.0 && sc.l_max > sc.l_min && sc.l_points >= 2) {
            r.errs.push("subeig: need 0 < L_min < L_max and L_points >= 2".into());
        }
    }

    let et = r.table(&root, "", "envelope");
    let envelope = et.map(|t| {
        r.known(t, "envelope", &["cases", "alpha", "constants", "t_check", "n_times", "n_x", "intervals", "compare"]);
        let s = Some(t);
        let mut cases = Vec::new();
        match t.get("cases") {
            None => r.errs.push("envelope.cases: missing key".into()),
            Some(Value::Array(a)) => {
                for (i, c) in a.iter().enumerate() {
                    match c.as_str().and_then(EnvelopeCase::parse) {
                        Some(c) => cases.push(c),
                        None => r.errs.push(format!("envelope.cases[{i}]: unknown case {c}")),
                    }
                }
            }
            Some(_) => r.errs.push("envelope.cases: expected an array of case names".into()),
        }
        let constants = r.table(t, "envelope", "constants").map(|c| {
            r.known(c, "envelope.constants", &["C1", "C2", "C3", "sigma", "lambda", "beta", "M"]);
            let d = EnvelopeConstants::default();
            let c = Some(c);
            let p = "envelope.constants";
            EnvelopeConstants {
                c1: r.f64_or(c, p, "C1", d.c1),
                c2: r.f64_or(c, p, "C2", d.c2),
                c3: r.f64_or(c, p, "C3", d.c3),
                sigma: r.f64_or(c, p, "sigma", d.sigma),
                lambda: r.f64_or(c, p, "lambda", d.lambda),
                beta: r.f64_or(c, p, "beta", d.beta),
                m: r.f64_or(c, p, "M", d.m),
            }
        });
        let d = ResidualGrid::default();
        EnvelopeConfig {
            cases,
            alpha: r.num(s, "envelope", "alpha"),
            constants,
            grid: ResidualGrid {
                t_check: r.f64_or(s, "envelope", "t_check", d.t_check),
                n_times: r.usize_or(s, "envelope", "n_times", d.n_times),
                n_x: r.usize_or(s, "envelope", "n_x", d.n_x),
                intervals: r.usize_or(s, "envelope", "intervals", d.intervals),
            },
            compare: r.bool_or(s, "envelope", "compare", false),
        }
    });
    if let (Some(e), Some(ks)) = (&envelope, &kernels) {
        if e.alpha.is_none() && ks.power_alpha().is_none() {
            r.errs.push("envelope.alpha: missing key (no power-law kernel to take it from)".into());
        }
    }

    if !r.errs.is_empty() {
        return Err(CliError::Validation(r.errs));
    }
    Ok(RunConfig {
        params,
        g,
        kernels: kernels.expect("checked above"),
        sim,
        init,
        analysis,
        semiwave,
        subeig,
        envelope,
        output,
        hash: hash.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        match parse_config(text, "h") {
            Err(CliError::Validation(e)) => e,
            Err(e) => panic!("unexpected {e}"),
            Ok(_) => Vec::new(),
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config("[kernels.J1]\nfamily = \"power_law\"\nalpha = 1.5\n", "abc").unwrap();
        assert_eq!(c.params, ModelParams::unit(20.0));
        assert_eq!(c.sim, SimConfig::default());
        assert_eq!(c.kernels.k, KernelSpec::power_law(1.5, 1.0));
        assert_eq!(c.hash, "abc");
        assert!(c.semiwave.is_none());
    }

    #[test]
    fn non_integrable_kernel_reported_with_path() {
        let e = errors("[kernels.J1]\nfamily = \"power_law\"\nalpha = 0.5\n");
        assert!(e.iter().any(|m| m.starts_with("kernels.J1") && m.contains("integrable")), "{e:?}");
    }

    #[test]
    fn stability_bound_named() {
        let e = errors("[kernels.J1]\nfamily = \"gaussian\"\n[sim]\ndt = 0.6\n");
        assert!(e.iter().any(|m| m.contains("dt*(d1+a11) < 1")), "{e:?}");
    }

    #[test]
    fn all_errors_reported_together() {
        let e = errors(
            "[model]\nd1 = -1\nbogus = 2\n[kernels.J1]\nfamily = \"wavelet\"\n[kernels.K]\nfamily = \"compact\"\na = 0\n[g]\nfamily = \"monod\"\nb = 0.0\n",
        );
        for needle in ["model: d1", "model.bogus: unknown key", "kernels.J1.family: unknown kernel family", "kernels.K: a", "g: "] {
            assert!(e.iter().any(|m| m.starts_with(needle)), "missing {needle}: {e:?}");
        }
    }

    #[test]
    fn missing_kernels_reported() {
        let e = errors("[model]\nh0 = 3\n");
        assert_eq!(e, vec!["kernels.J1: missing key".to_string()]);
    }

    #[test]
    fn blocks_parse() {
        let c = parse_config(
            r#"
[kernels.J1]
family = "compact"
a = 1
shape = "cosine"
[semiwave]
L_trunc = 50
n = 501
c_bracket = [0.001, 20]
[subeig]
family = "power_kink"
lambda = 2
eta = 0.9
[envelope]
cases = ["upper_power"]
alpha = 1.5
[envelope.constants]
C1 = 3
sigma = 9
M = 2
[analysis]
window = [600, 1000]
[output]
dir = "x"
snapshot_every = 50
"#,
            "h",
        )
        .unwrap();
        assert_eq!(c.semiwave.unwrap().c_bracket, (0.001, 20.0));
        assert!(matches!(c.subeig.unwrap().family, ProfileFamily::PowerKink { .. }));
        let env = c.envelope.unwrap();
        assert_eq!(env.cases, vec![EnvelopeCase::UpperPower]);
        assert_eq!(env.constants.unwrap().m, 2.0);
        assert_eq!(c.analysis.window, Some((600.0, 1000.0)));
        assert_eq!(c.sim.snapshot_every, 50);
        assert_eq!(c.output.dir, PathBuf::from("x"));
    }

    #[test]
    fn bad_window_and_case_rejected() {
        let e = errors(
            "[kernels.J1]\nfamily = \"power_law\"\nalpha = 1.5\n[analysis]\nwindow = [100, 1000]\n[envelope]\ncases = [\"nope\"]\n",
        );
        assert!(e.iter().any(|m| m.starts_with("analysis.window")));
        assert!(e.iter().any(|m| m.starts_with("envelope.cases[0]")));
    }

    #[test]
    fn hash_is_sha256() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
