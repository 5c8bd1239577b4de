//! Explicit lower and upper solutions with numerical certification of their
//! defining inequalities, plus comparison against simulated fronts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelSet};
use crate::lattice::{tail_segment, ConvolutionPlan, ToeplitzEngine};
use crate::model::{linearized_eigenpair, positive_equilibrium, GFunction, LinearizedEigenpair, ModelParams};
use crate::simulator::{StopReason, Trajectory};

/// Residual minima at or above this value count as satisfied.
pub const RESIDUAL_TOL: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeCase {
    #[serde(rename = "lower_J2dom_alpha_in_1_2")]
    LowerJ2DomPower,
    #[serde(rename = "lower_J2dom_alpha_2")]
    LowerJ2DomCritical,
    UpperPower,
    #[serde(rename = "upper_tlnt")]
    UpperTLnT,
    #[serde(rename = "lower_J1dom_alpha_in_1_2")]
    LowerJ1DomPower,
    #[serde(rename = "lower_J1dom_alpha_2")]
    LowerJ1DomCritical,
}

impl EnvelopeCase {
    pub const ALL: [EnvelopeCase; 6] = [
        EnvelopeCase::LowerJ2DomPower,
        EnvelopeCase::LowerJ2DomCritical,
        EnvelopeCase::UpperPower,
        EnvelopeCase::UpperTLnT,
        EnvelopeCase::LowerJ1DomPower,
        EnvelopeCase::LowerJ1DomCritical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvelopeCase::LowerJ2DomPower => "lower_J2dom_alpha_in_1_2",
            EnvelopeCase::LowerJ2DomCritical => "lower_J2dom_alpha_2",
            EnvelopeCase::UpperPower => "upper_power",
            EnvelopeCase::UpperTLnT => "upper_tlnt",
            EnvelopeCase::LowerJ1DomPower => "lower_J1dom_alpha_in_1_2",
            EnvelopeCase::LowerJ1DomCritical => "lower_J1dom_alpha_2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        EnvelopeCase::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn is_lower(self) -> bool {
        !matches!(self, EnvelopeCase::UpperPower | EnvelopeCase::UpperTLnT)
    }

    /// Front grows like `t ln t`.
    pub fn is_critical(self) -> bool {
        matches!(self, EnvelopeCase::LowerJ2DomCritical | EnvelopeCase::UpperTLnT | EnvelopeCase::LowerJ1DomCritical)
    }

    /// Whether `u` (rather than `v`) carries the kinked factor.
    fn u_kinked(self) -> bool {
        matches!(self, EnvelopeCase::LowerJ1DomPower | EnvelopeCase::LowerJ1DomCritical)
    }
}

/// Free constants; fields a case does not use are ignored. Upper cases read
/// `c1` as `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub beta: f64,
    pub m: f64,
}

impl Default for EnvelopeConstants {
    fn default() -> Self {
        EnvelopeConstants { c1: 0.01, c2: 1.0, c3: 1.0, sigma: 10.0, lambda: 2.0, beta: 0.4, m: 1.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub case: EnvelopeCase,
    pub alpha: f64,
    pub constants: EnvelopeConstants,
    pub eigen: LinearizedEigenpair,
    pub u_star: f64,
    pub v_star: f64,
}

impl EnvelopeSpec {
    /// Builds a spec, pulling `(u*, v*)` and the eigenpair from the model.
    pub fn new(case: EnvelopeCase, alpha: f64, constants: EnvelopeConstants, params: &ModelParams, g: &GFunction) -> Result<Self> {
        let eq = positive_equilibrium(params, g)?;
        let (Some(u_star), Some(v_star)) = (eq.u_star, eq.v_star) else {
            return Err(Error::NoPositiveEigenvalue { r0: eq.r0 });
        };
        let eigen = linearized_eigenpair(params, g)?;
        let spec = EnvelopeSpec { case, alpha, constants, eigen, u_star, v_star };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let k = &self.constants;
        let mut errs = Vec::new();
        let pos = |name: &str, v: f64, errs: &mut Vec<String>| {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{name} must be positive, got {v}"));
            }
        };
        if self.case.is_critical() {
            if (self.alpha - 2.0).abs() > 1e-12 {
                errs.push(format!("case {} needs alpha = 2, got {}", self.case.name(), self.alpha));
            }
        } else if !(self.alpha > 1.0 && self.alpha < 2.0) {
            errs.push(format!("case {} needs alpha in (1, 2), got {}", self.case.name(), self.alpha));
        }
        pos("C1", k.c1, &mut errs);
        pos("sigma", k.sigma, &mut errs);
        match self.case {
            EnvelopeCase::LowerJ2DomPower | EnvelopeCase::LowerJ1DomPower => {
                pos("C2", k.c2, &mut errs);
                if !(k.lambda >= 2.0) {
                    errs.push(format!("lambda must be >= 2, got {}", k.lambda));
                }
            }
            EnvelopeCase::LowerJ2DomCritical | EnvelopeCase::LowerJ1DomCritical => {
                pos("C2", k.c2, &mut errs);
                pos("C3", k.c3, &mut errs);
                if !(k.beta > 0.0 && k.beta < 0.5) {
                    errs.push(format!("beta must lie in (0, 1/2), got {}", k.beta));
                }
                if !(k.lambda > 1.0 / k.beta) {
                    errs.push(format!("lambda must exceed 1/beta = {}, got {}", 1.0 / k.beta, k.lambda));
                }
                if !(k.sigma > 1.0) {
                    errs.push(format!("sigma must exceed 1 so that ln(t + sigma) > 0, got {}", k.sigma));
                }
            }
            EnvelopeCase::UpperPower | EnvelopeCase::UpperTLnT => {
                if !(k.m > 1.0) {
                    errs.push(format!("M must exceed 1, got {}", k.m));
                }
                if self.case == EnvelopeCase::UpperTLnT && !(k.sigma > 1.0) {
                    errs.push(format!("sigma must exceed 1 so that the front is positive, got {}", k.sigma));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidProfile(errs.join("; ")))
        }
    }

    /// `(h, h')` at time `t`.
    pub fn front(&self, t: f64) -> (f64, f64) {
        let k = &self.constants;
        match self.case {
            EnvelopeCase::LowerJ2DomPower | EnvelopeCase::LowerJ1DomPower | EnvelopeCase::UpperPower => {
                let p = 1.0 / (self.alpha - 1.0);
                let s = k.c1 * t + k.sigma;
                (s.powf(p), k.c1 * p * s.powf(p - 1.0))
            }
            EnvelopeCase::LowerJ2DomCritical | EnvelopeCase::LowerJ1DomCritical => {
                let tau = t + k.sigma;
                (k.c1 * tau * tau.ln(), k.c1 * (tau.ln() + 1.0))
            }
            EnvelopeCase::UpperTLnT => {
                let s = k.c1 * t + k.sigma;
                (s * s.ln(), k.c1 * (s.ln() + 1.0))
            }
        }
    }

    /// Kink location `ψ(t)` of the lower cases.
    pub fn kink(&self, t: f64) -> Option<f64> {
        let k = &self.constants;
        match self.case {
            EnvelopeCase::LowerJ2DomPower | EnvelopeCase::LowerJ1DomPower => {
                let (h, _) = self.front(t);
                Some(h / (k.c2 * h.powf(1.0 - self.alpha) + 1.0))
            }
            EnvelopeCase::LowerJ2DomCritical | EnvelopeCase::LowerJ1DomCritical => {
                let (h, _) = self.front(t);
                let tau = t + k.sigma;
                Some((h - k.c3 * tau.ln()) / (k.c2 / tau + 1.0))
            }
            _ => None,
        }
    }

    /// Fields, their time derivatives and whether `(x, t)` sits on a kink.
    fn fields(&self, x: f64, t: f64) -> FieldSample {
        let k = &self.constants;
        let ax = x.abs();
        let (h, hp) = self.front(t);
        let (d1, d2) = (self.eigen.delta1, self.eigen.delta2);
        let lam = k.lambda;
        match self.case {
            EnvelopeCase::UpperPower | EnvelopeCase::UpperTLnT => FieldSample {
                u: k.m * self.u_star,
                v: k.m * self.v_star,
                ut: 0.0,
                vt: 0.0,
                kink: false,
            },
            EnvelopeCase::LowerJ2DomPower | EnvelopeCase::LowerJ1DomPower => {
                let r = ((h - ax) / h).max(0.0);
                let rt = ax * hp / (h * h);
                let plain = (r.powf(lam), lam * r.powf(lam - 1.0) * rt);
                let psi = self.kink(t).unwrap();
                let kinked = if ax <= psi {
                    plain
                } else {
                    let s = k.c2 * h.powf(1.0 - self.alpha);
                    let q = s / (s + 1.0);
                    let st = k.c2 * (1.0 - self.alpha) * h.powf(-self.alpha) * hp;
                    let qt = st / ((s + 1.0) * (s + 1.0));
                    (q * r.powf(lam - 1.0), qt * r.powf(lam - 1.0) + q * (lam - 1.0) * r.powf(lam - 2.0) * rt)
                };
                let kink = (ax - psi).abs() <= 1e-9 * h.max(1.0);
                self.assemble(plain, kinked, kink, d1, d2)
            }
            EnvelopeCase::LowerJ2DomCritical | EnvelopeCase::LowerJ1DomCritical => {
                let tau = t + k.sigma;
                let b = tau.powf(k.beta);
                let w = ((h - ax) / b).max(0.0);
                let wt = hp / b - k.beta * w / tau;
                let plain_inner = (w.powf(lam), lam * w.powf(lam - 1.0) * wt);
                let psi = self.kink(t).unwrap();
                let kinked_inner = if ax <= psi {
                    plain_inner
                } else {
                    let e = k.c2 / tau + 1.0;
                    let psit = (hp - k.c3 / tau) / e + (h - k.c3 * tau.ln()) * k.c2 / (tau * tau * e * e);
                    let p = (h - psi) / b;
                    let pt = (hp - psit) / b - k.beta * p / tau;
                    (p * w.powf(lam - 1.0), pt * w.powf(lam - 1.0) + p * (lam - 1.0) * w.powf(lam - 2.0) * wt)
                };
                let cap = |(f, ft): (f64, f64)| if f < 1.0 { (f, ft) } else { (1.0, 0.0) };
                let on_cap = (plain_inner.0 - 1.0).abs() <= 1e-12 || (kinked_inner.0 - 1.0).abs() <= 1e-12;
                let kink = (ax - psi).abs() <= 1e-9 * h.max(1.0) || on_cap;
                self.assemble(cap(plain_inner), cap(kinked_inner), kink, d1, d2)
            }
        }
    }

    fn assemble(&self, plain: (f64, f64), kinked: (f64, f64), kink: bool, d1: f64, d2: f64) -> FieldSample {
        let (uf, vf) = if self.case.u_kinked() { (kinked, plain) } else { (plain, kinked) };
        FieldSample { u: d1 * uf.0, v: d2 * vf.0, ut: d1 * uf.1, vt: d2 * vf.1, kink }
    }
}

#[derive(Debug, Clone, Copy)]
struct FieldSample {
    u: f64,
    v: f64,
    ut: f64,
    vt: f64,
    kink: bool,
}

/// `(u, v, g, h)` of a lower case at `(x, t)`.
pub fn eval_lower(spec: &EnvelopeSpec, x: f64, t: f64) -> Result<(f64, f64, f64, f64)> {
    if !spec.case.is_lower() {
        return Err(Error::Precondition(format!("{} is not a lower case", spec.case.name())));
    }
    let (h, _) = spec.front(t);
    if !(x.abs() <= h) {
        return Err(Error::OutOfDomain(format!("x = {x} outside [-{h}, {h}] at t = {t}")));
    }
    let f = spec.fields(x, t);
    Ok((f.u, f.v, -h, h))
}

/// `(u, v, h)` of an upper case at time `t`.
pub fn eval_upper(spec: &EnvelopeSpec, t: f64) -> Result<(f64, f64, f64)> {
    if spec.case.is_lower() {
        return Err(Error::Precondition(format!("{} is not an upper case", spec.case.name())));
    }
    let f = spec.fields(0.0, t);
    Ok((f.u, f.v, spec.front(t).0))
}

/// Where the inequalities are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualGrid {
    pub t_check: f64,
    pub n_times: usize,
    pub n_x: usize,
    /// Lattice intervals across `[-h, h]` for the inner convolutions.
    pub intervals: usize,
}

impl Default for ResidualGrid {
    fn default() -> Self {
        ResidualGrid { t_check: 200.0, n_times: 64, n_x: 128, intervals: 4096 }
    }
}

impl ResidualGrid {
    /// `0` and then log-spaced in `1 + t` up to `t_check`.
    pub fn times(&self) -> Vec<f64> {
        let n = self.n_times.max(2);
        (0..n).map(|j| (1.0 + self.t_check).powf(j as f64 / (n - 1) as f64) - 1.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Sign-adjusted so that non-negative means satisfied.
    pub boundary_residual: f64,
    pub pde_residuals: [f64; 2],
    pub pass: bool,
    pub samples: usize,
    pub skipped_kinks: usize,
    /// `(x, t)` of the most violated field inequality.
    pub worst: Option<(f64, f64)>,
}

/// Sign-adjusted residuals at one time.
struct TimeResidual {
    boundary: f64,
    pde: [f64; 2],
    worst_x: f64,
    samples: usize,
    skipped: usize,
}

struct Checker {
    params: ModelParams,
    g: GFunction,
    kernels: [Kernel; 3],
    engine: ToeplitzEngine,
}

impl Checker {
    fn new(params: &ModelParams, g: &GFunction, kernels: &KernelSet) -> Self {
        Checker {
            params: *params,
            g: g.clone(),
            kernels: [kernels.j1.clone(), kernels.k.clone(), kernels.j2.clone()],
            engine: ToeplitzEngine::new(),
        }
    }

    fn at(&mut self, spec: &EnvelopeSpec, t: f64, grid: &ResidualGrid) -> TimeResidual {
        let (h, hp) = spec.front(t);
        let n = grid.intervals.max(16) + 1;
        let step = 2.0 * h / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|k| -h + k as f64 * step).collect();
        let mut samples: Vec<FieldSample> = xs.iter().map(|&x| spec.fields(x, t)).collect();
        // exact front values
        for i in [0, n - 1] {
            samples[i] = spec.fields(h.copysign(xs[i]), t);
        }
        let u: Vec<f64> = samples.iter().map(|s| s.u).collect();
        let v: Vec<f64> = samples.iter().map(|s| s.v).collect();

        let mut plans: Vec<ConvolutionPlan> = Vec::new();
        let mut roles = [0usize; 3];
        for (r, k) in self.kernels.iter().enumerate() {
            roles[r] = match plans.iter().position(|p| p.kernel.spec() == k.spec()) {
                Some(i) => i,
                None => {
                    let mut p = ConvolutionPlan::new(k.clone(), step);
                    p.ensure(n);
                    plans.push(p);
                    plans.len() - 1
                }
            };
        }
        let mut out = vec![(Vec::new(), Vec::new()); plans.len()];
        self.engine.apply(&mut plans, &u, &v, &mut out);
        for (p, o) in plans.iter().zip(out.iter_mut()) {
            for i in 0..n {
                let (hl, hr) = (p.half_weight(i), p.half_weight(n - 1 - i));
                o.0[i] -= u[0] * hl + u[n - 1] * hr;
                o.1[i] -= v[0] * hl + v[n - 1] * hr;
            }
        }

        let pr = &self.params;
        let flux_one = |p: &ConvolutionPlan, w: &[f64]| {
            let mut acc = 0.0;
            for m in 1..n {
                acc += tail_segment(&p.kernel, &p.lattice_point(m - 1), &p.lattice_point(m), w[n - m], w[n - 1 - m]);
            }
            acc
        };
        let flux = pr.mu * (flux_one(&plans[roles[0]], &u) + pr.rho_flux * flux_one(&plans[roles[2]], &v));
        let sign = if spec.case.is_lower() { 1.0 } else { -1.0 };
        let boundary = sign * (flux - hp);

        let center = (n - 1) / 2;
        let half = n - 1 - center;
        let mut idx: Vec<usize> = Vec::new();
        let n_geo = (grid.n_x / 8).max(1);
        let n_uni = grid.n_x.saturating_sub(n_geo).max(2);
        for j in 0..n_uni {
            idx.push(center + (j * half) / (n_uni - 1));
        }
        let mut off = 1usize;
        for _ in 0..n_geo {
            if off > half {
                break;
            }
            idx.push(n - 1 - off);
            off *= 2;
        }
        idx.sort_unstable();
        idx.dedup();

        let (r1, rk, r2) = (roles[0], roles[1], roles[2]);
        let mut pde = [f64::INFINITY; 2];
        let mut worst_x = 0.0;
        let mut worst = f64::INFINITY;
        let mut skipped = 0;
        let mut count = 0;
        for &i in &idx {
            let s = &samples[i];
            if s.kink {
                skipped += 1;
                continue;
            }
            count += 1;
            let rhs_u = pr.d1 * (out[r1].0[i] - s.u) - pr.a11 * s.u + pr.a12 * out[rk].1[i];
            let rhs_v = pr.d2 * (out[r2].1[i] - s.v) - pr.a22 * s.v + self.g.eval(s.u);
            let ru = sign * (rhs_u - s.ut);
            let rv = sign * (rhs_v - s.vt);
            pde[0] = pde[0].min(ru);
            pde[1] = pde[1].min(rv);
            if ru.min(rv) < worst {
                worst = ru.min(rv);
                worst_x = xs[i];
            }
        }
        TimeResidual { boundary, pde, worst_x, samples: count, skipped }
    }
}

fn run_check(
    spec: &EnvelopeSpec,
    params: &ModelParams,
    g: &GFunction,
    kernels: &KernelSet,
    grid: &ResidualGrid,
    fail_fast: bool,
) -> Result<ResidualReport> {
    spec.validate()?;
    let mut checker = Checker::new(params, g, kernels);
    let mut rep = ResidualReport {
        boundary_residual: f64::INFINITY,
        pde_residuals: [f64::INFINITY; 2],
        pass: true,
        samples: 0,
        skipped_kinks: 0,
        worst: None,
    };
    let mut worst = f64::INFINITY;
    for t in grid.times() {
        let r = checker.at(spec, t, grid);
        rep.boundary_residual = rep.boundary_residual.min(r.boundary);
        rep.pde_residuals[0] = rep.pde_residuals[0].min(r.pde[0]);
        rep.pde_residuals[1] = rep.pde_residuals[1].min(r.pde[1]);
        rep.samples += r.samples;
        rep.skipped_kinks += r.skipped;
        let m = r.pde[0].min(r.pde[1]);
        if m < worst {
            worst = m;
            rep.worst = Some((r.worst_x, t));
        }
        let ok = r.boundary >= RESIDUAL_TOL && m >= RESIDUAL_TOL;
        if !ok {
            rep.pass = false;
            if fail_fast {
                break;
            }
        }
    }
    Ok(rep)
}

/// Evaluates the boundary and field inequalities of `spec` on `grid`.
pub fn residual_check(
    spec: &EnvelopeSpec,
    params: &ModelParams,
    g: &GFunction,
    kernels: &KernelSet,
    grid: &ResidualGrid,
) -> Result<ResidualReport> {
    run_check(spec, params, g, kernels, grid, false)
}

/// Grid of candidate constants and the initial data they must dominate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRanges {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub c3: Vec<f64>,
    pub sigma: Vec<f64>,
    pub lambda: f64,
    pub beta: f64,
    /// `h0` and the sup norms of the initial data, used by upper cases.
    pub h0: f64,
    pub init_sup: (f64, f64),
    pub grid: ResidualGrid,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    crate::quadrature::logspace(lo, hi, n)
}

impl SearchRanges {
    /// Default ranges for `case`.
    pub fn for_case(case: EnvelopeCase, h0: f64, init_sup: (f64, f64)) -> Self {
        let base = SearchRanges {
            c1: Vec::new(),
            c2: vec![1.0],
            c3: vec![1.0],
            sigma: Vec::new(),
            lambda: 2.0,
            beta: 0.4,
            h0,
            init_sup,
            grid: ResidualGrid::default(),
        };
        match case {
            EnvelopeCase::UpperPower | EnvelopeCase::UpperTLnT => {
                SearchRanges { c1: log_grid(0.1, 1000.0, 13), sigma: vec![1.0, 4.0, 16.0], ..base }
            }
            EnvelopeCase::LowerJ2DomPower | EnvelopeCase::LowerJ1DomPower => SearchRanges {
                c1: log_grid(1e-4, 1e-1, 7).into_iter().rev().collect(),
                c2: log_grid(0.1, 1000.0, 9),
                sigma: vec![10.0, 30.0, 100.0],
                ..base
            },
            EnvelopeCase::LowerJ2DomCritical | EnvelopeCase::LowerJ1DomCritical => SearchRanges {
                c1: log_grid(1e-3, 1e-1, 5).into_iter().rev().collect(),
                c2: log_grid(0.1, 100.0, 4),
                c3: log_grid(0.1, 10.0, 3),
                sigma: vec![100.0, 1000.0],
                lambda: 3.0,
                ..base
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub found: Option<EnvelopeSpec>,
    /// Least violated candidate with its report.
    pub best: Option<(EnvelopeSpec, ResidualReport)>,
    pub tried: usize,
}

/// Scans `ranges` and returns the first candidate that passes the full
/// residual check.
pub fn search_constants(
    case: EnvelopeCase,
    alpha: f64,
    params: &ModelParams,
    g: &GFunction,
    kernels: &KernelSet,
    ranges: &SearchRanges,
) -> Result<SearchOutcome> {
    let probe = EnvelopeSpec::new(case, alpha, EnvelopeConstants::default(), params, g);
    // surface structural errors (alpha, model) before the scan
    let probe = match probe {
        Ok(p) => p,
        Err(Error::InvalidProfile(m)) if m.contains("alpha") => return Err(Error::InvalidProfile(m)),
        Err(Error::InvalidProfile(_)) => {
            let eq = positive_equilibrium(params, g)?;
            let eigen = linearized_eigenpair(params, g)?;
            EnvelopeSpec {
                case,
                alpha,
                constants: EnvelopeConstants::default(),
                eigen,
                u_star: eq.u_star.unwrap_or(1.0),
                v_star: eq.v_star.unwrap_or(1.0),
            }
        }
        Err(e) => return Err(e),
    };
    let m = {
        let (su, sv) = ranges.init_sup;
        (1.1f64).max(1.01 * su / probe.u_star).max(1.01 * sv / probe.v_star)
    };
    let mut candidates = Vec::new();
    for &sigma in &ranges.sigma {
        for &c1 in &ranges.c1 {
            for &c2 in &ranges.c2 {
                for &c3 in &ranges.c3 {
                    let mut k = EnvelopeConstants { c1, c2, c3, sigma, lambda: ranges.lambda, beta: ranges.beta, m };
                    if !case.is_lower() {
                        // scale sigma so the upper front starts beyond h0
                        let s0 = if case.is_critical() { tlnt_inverse(ranges.h0).max(std::f64::consts::E) } else { ranges.h0.powf(alpha - 1.0) };
                        k.sigma = sigma * s0;
                    }
                    candidates.push(k);
                }
            }
        }
    }
    let mut out = SearchOutcome { found: None, best: None, tried: 0 };
    let mut best_score = f64::NEG_INFINITY;
    for k in candidates {
        let spec = EnvelopeSpec { constants: k, ..probe };
        if spec.validate().is_err() {
            continue;
        }
        out.tried += 1;
        let rep = run_check(&spec, params, g, kernels, &ranges.grid, true)?;
        if rep.pass {
            let full = residual_check(&spec, params, g, kernels, &ranges.grid)?;
            if full.pass {
                out.best = Some((spec, full));
                out.found = Some(spec);
                return Ok(out);
            }
        }
        let score = rep.boundary_residual.min(rep.pde_residuals[0]).min(rep.pde_residuals[1]);
        if score > best_score || out.best.is_none() {
            best_score = score;
            out.best = Some((spec, rep));
        }
    }
    Ok(out)
}

/// Smallest `s > e` with `s ln s >= y`.
fn tlnt_inverse(y: f64) -> f64 {
    let (mut lo, mut hi) = (1.0f64, y.max(std::f64::consts::E) + 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.ln() >= y {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    /// Anchoring time of the lower envelope.
    pub t0: Option<f64>,
    pub lower_ok: Option<bool>,
    pub upper_ok: Option<bool>,
    /// `min(h - h_lower)` and `min(h_upper - h)` over the window, both fronts.
    pub lower_margin: Option<f64>,
    pub upper_margin: Option<f64>,
    pub samples: usize,
    pub pass: bool,
}

/// Earliest snapshot time at which the trajectory dominates the lower
/// envelope's initial data.
fn anchor(traj: &Trajectory, lower: &EnvelopeSpec) -> Option<f64> {
    let (h_init, _) = lower.front(0.0);
    let mut states: Vec<(f64, &[f64], &[f64], &[f64])> =
        traj.snapshots.iter().map(|s| (s.t, s.x.as_slice(), s.u.as_slice(), s.v.as_slice())).collect();
    if let Some(f) = &traj.final_state {
        states.push((f.t, f.x.as_slice(), f.u.as_slice(), f.v.as_slice()));
    }
    for (t, x, u, v) in states {
        let (Some(&g), Some(&h)) = (x.first(), x.last()) else { continue };
        if !(g <= -h_init && h >= h_init) {
            continue;
        }
        let ok = x.iter().zip(u.iter().zip(v)).all(|(&xi, (&ui, &vi))| {
            xi.abs() > h_init || (ui >= lower.eigen.delta1 && vi >= lower.eigen.delta2)
        });
        if ok {
            return Some(t);
        }
    }
    None
}

/// Checks `h_lower(t - t0) <= h(t) <= h_upper(t)` on `window` for both fronts.
pub fn envelope_compare(
    traj: &Trajectory,
    lower: Option<&EnvelopeSpec>,
    upper: Option<&EnvelopeSpec>,
    window: (f64, f64),
) -> Result<CompareReport> {
    if traj.stop == StopReason::Vanished {
        return Err(Error::Precondition("trajectory vanished; envelopes bound spreading runs only".into()));
    }
    if traj.times.is_empty() {
        return Err(Error::Precondition("empty trajectory".into()));
    }
    if lower.is_none() && upper.is_none() {
        return Err(Error::Precondition("no envelope given".into()));
    }
    if let Some(l) = lower {
        if !l.case.is_lower() {
            return Err(Error::Precondition(format!("{} is not a lower case", l.case.name())));
        }
    }
    if let Some(u) = upper {
        if u.case.is_lower() {
            return Err(Error::Precondition(format!("{} is not an upper case", u.case.name())));
        }
    }
    let mut rep = CompareReport { t0: None, lower_ok: None, upper_ok: None, lower_margin: None, upper_margin: None, samples: 0, pass: true };
    if let Some(l) = lower {
        let t0 = anchor(traj, l).ok_or_else(|| {
            Error::Precondition("anchoring failed: trajectory never dominates the lower envelope's initial data".into())
        })?;
        if t0 > window.0 {
            return Err(Error::Precondition(format!("anchoring time {t0} falls after the window start {}", window.0)));
        }
        rep.t0 = Some(t0);
    }
    let mut lm = f64::INFINITY;
    let mut um = f64::INFINITY;
    for i in 0..traj.times.len() {
        let t = traj.times[i];
        if t < window.0 || t > window.1 {
            continue;
        }
        rep.samples += 1;
        let reach = traj.h[i].min(-traj.g[i]);
        let far = traj.h[i].max(-traj.g[i]);
        if let (Some(l), Some(t0)) = (lower, rep.t0) {
            lm = lm.min(reach - l.front(t - t0).0);
        }
        if let Some(u) = upper {
            um = um.min(u.front(t).0 - far);
        }
    }
    if rep.samples == 0 {
        return Err(Error::DegenerateWindow(format!("no samples in [{}, {}]", window.0, window.1)));
    }
    if lower.is_some() {
        rep.lower_margin = Some(lm);
        rep.lower_ok = Some(lm >= 0.0);
    }
    if upper.is_some() {
        rep.upper_margin = Some(um);
        rep.upper_ok = Some(um >= 0.0);
    }
    rep.pass = rep.lower_ok.unwrap_or(true) && rep.upper_ok.unwrap_or(true);
    Ok(rep)
}
