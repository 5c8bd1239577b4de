//! Scalar coefficients, the nonlinearity `G`, and derived spectral quantities.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::logspace;

/// Coefficients of the two-species system and its flux law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d1: f64,
    pub d2: f64,
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    pub mu: f64,
    pub rho_flux: f64,
    pub h0: f64,
}

impl ModelParams {
    /// All coefficients equal to one, initial half-length `h0`.
    pub fn unit(h0: f64) -> Self {
        ModelParams { d1: 1.0, d2: 1.0, a11: 1.0, a12: 1.0, a22: 1.0, mu: 1.0, rho_flux: 1.0, h0 }
    }

    pub fn fields(&self) -> [(&'static str, f64); 8] {
        [
            ("d1", self.d1),
            ("d2", self.d2),
            ("a11", self.a11),
            ("a12", self.a12),
            ("a22", self.a22),
            ("mu", self.mu),
            ("rho_flux", self.rho_flux),
            ("h0", self.h0),
        ]
    }

    /// Names every non-positive or non-finite coefficient.
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let errs: Vec<String> = self
            .fields()
            .iter()
            .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|(k, v)| format!("{k} must be positive and finite, got {v}"))
            .collect();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// `a11·a22/a12`, the value of `G(u*)/u*`.
    pub fn equilibrium_slope(&self) -> f64 {
        self.a11 * self.a22 / self.a12
    }
}

pub type GCallable = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum GFamily {
    /// `b·u/(1+u)`
    Monod { b: f64 },
    /// `b·u/(1+u/cap)`: slope `b` at the origin, saturating at `b·cap`.
    LinearCapped { b: f64, cap: f64 },
    Custom { name: String, f: GCallable, gprime0: f64 },
}

impl fmt::Debug for GFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GFamily::Monod { b } => write!(f, "Monod {{ b: {b} }}"),
            GFamily::LinearCapped { b, cap } => write!(f, "LinearCapped {{ b: {b}, cap: {cap} }}"),
            GFamily::Custom { name, gprime0, .. } => write!(f, "Custom {{ name: {name:?}, gprime0: {gprime0} }}"),
        }
    }
}

/// The nonlinearity `G` of the second equation.
#[derive(Clone, Debug)]
pub struct GFunction {
    pub family: GFamily,
}

/// Outcome of the `(G1)`/`(G2)` sampling checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GReport {
    pub g1: bool,
    pub g2: bool,
    pub far_slope: f64,
    pub messages: Vec<String>,
}

impl GFunction {
    pub fn monod(b: f64) -> Self {
        GFunction { family: GFamily::Monod { b } }
    }

    pub fn linear_capped(b: f64, cap: f64) -> Self {
        GFunction { family: GFamily::LinearCapped { b, cap } }
    }

    pub fn custom(name: impl Into<String>, f: GCallable, gprime0: f64) -> Self {
        GFunction { family: GFamily::Custom { name: name.into(), f, gprime0 } }
    }

    pub fn family_name(&self) -> &str {
        match &self.family {
            GFamily::Monod { .. } => "monod",
            GFamily::LinearCapped { .. } => "linear_capped",
            GFamily::Custom { name, .. } => name,
        }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match &self.family {
            GFamily::Monod { b } => b * u / (1.0 + u),
            GFamily::LinearCapped { b, cap } => b * u / (1.0 + u / cap),
            GFamily::Custom { f, .. } => f(u),
        }
    }

    pub fn gprime0(&self) -> f64 {
        match &self.family {
            GFamily::Monod { b } | GFamily::LinearCapped { b, .. } => *b,
            GFamily::Custom { gprime0, .. } => *gprime0,
        }
    }

    /// `G'(u)`: analytic for the built-in families, central difference otherwise.
    pub fn derivative(&self, u: f64) -> f64 {
        match &self.family {
            GFamily::Monod { b } => b / (1.0 + u).powi(2),
            GFamily::LinearCapped { b, cap } => b / (1.0 + u / cap).powi(2),
            GFamily::Custom { f, .. } => {
                let h = 1e-6 * u.max(1e-6);
                (f(u + h) - f(u - h)) / (2.0 * h)
            }
        }
    }

    /// Samples `(G1)` and `(G2)` on 200 log-spaced points in `[1e-6, 1e6]`.
    pub fn check(&self, params: &ModelParams) -> GReport {
        let mut messages = Vec::new();
        let zs = logspace(1e-6, 1e6, 200);
        let g0 = self.eval(0.0);
        let mut g1 = g0 == 0.0;
        if !g1 {
            messages.push(format!("G(0) = {g0}, expected 0"));
        }
        if let Some(z) = zs.iter().find(|&&z| !(self.derivative(z) > 0.0)) {
            g1 = false;
            messages.push(format!("G'({z:e}) is not positive"));
        }
        if !(self.gprime0() > 0.0 && self.gprime0().is_finite()) {
            g1 = false;
            messages.push(format!("G'(0) = {} must be positive", self.gprime0()));
        }
        let ratios: Vec<f64> = zs.iter().map(|&z| self.eval(z) / z).collect();
        let mut g2 = true;
        if let Some(k) = (1..ratios.len()).find(|&k| !(ratios[k] < ratios[k - 1])) {
            g2 = false;
            messages.push(format!("G(z)/z is not strictly decreasing near z = {:e}", zs[k]));
        }
        let far_slope = self.eval(1e6) / 1e6;
        if !(far_slope < params.equilibrium_slope()) {
            g2 = false;
            messages.push(format!(
                "G(z)/z at z = 1e6 is {far_slope}, not below a11*a22/a12 = {}",
                params.equilibrium_slope()
            ));
        }
        GReport { g1, g2, far_slope, messages }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        let r = self.check(params);
        if r.g1 && r.g2 {
            Ok(())
        } else {
            Err(Error::G2Violation(r.messages.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub r0: f64,
    pub u_star: Option<f64>,
    pub v_star: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizedEigenpair {
    pub rho1: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub rho_lin: f64,
    pub halvings: u32,
}

pub fn basic_reproduction_number(params: &ModelParams, g: &GFunction) -> f64 {
    params.a12 * g.gprime0() / (params.a11 * params.a22)
}

const U_MAX: f64 = 1e12;

pub fn positive_equilibrium(params: &ModelParams, g: &GFunction) -> Result<Equilibrium> {
    let r0 = basic_reproduction_number(params, g);
    if r0 <= 1.0 {
        return Ok(Equilibrium { r0, u_star: None, v_star: None });
    }
    let k = params.equilibrium_slope();
    let f = |u: f64| g.eval(u) / u - k;
    let mut hi = 1.0;
    while f(hi) >= 0.0 {
        hi *= 2.0;
        if hi > U_MAX {
            return Err(Error::G2Violation(format!(
                "G(u)/u stays above a11*a22/a12 = {k} up to u = {U_MAX:e}"
            )));
        }
    }
    let mut lo = hi / 2.0;
    while f(lo) < 0.0 {
        lo /= 2.0;
        if lo < 1e-300 {
            return Err(Error::G2Violation("G(u)/u is below a11*a22/a12 near u = 0".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    let residual = f(u).abs();
    if residual >= 1e-10 * k.max(1.0) {
        return Err(Error::G2Violation(format!("equilibrium residual {residual:e} too large")));
    }
    Ok(Equilibrium { r0, u_star: Some(u), v_star: Some(params.a11 / params.a12 * u) })
}

/// Grid of `s` values on which the small-amplitude inequalities are verified.
pub fn eigen_s_grid() -> Vec<f64> {
    logspace(1e-6, 1.0, 200)
}

pub fn linearized_eigenpair(params: &ModelParams, g: &GFunction) -> Result<LinearizedEigenpair> {
    let eq = positive_equilibrium(params, g)?;
    let (Some(us), Some(vs)) = (eq.u_star, eq.v_star) else {
        return Err(Error::NoPositiveEigenvalue { r0: eq.r0 });
    };
    let (a11, a12, a22) = (params.a11, params.a12, params.a22);
    let gp = g.gprime0();
    let rho1 = 0.5 * (-(a11 + a22) + ((a11 - a22).powi(2) + 4.0 * a12 * gp).sqrt());
    if !(rho1 > 0.0) {
        return Err(Error::NoPositiveEigenvalue { r0: eq.r0 });
    }
    let mut d1 = us;
    let mut d2 = (rho1 + a11) * d1 / a12;
    let sum = d1 + d2;
    let rho_lin = (rho1 * d1 / sum).min(rho1 * d2 / (2.0 * sum));
    let grid = eigen_s_grid();
    for halvings in 0..=60u32 {
        let ok = d1 < us
            && d2 < vs
            // equality when the first term attains the minimum
            && -a11 * d1 + a12 * d2 >= rho_lin * (d1 + d2) * (1.0 - 1e-12)
            && grid
                .iter()
                .all(|&s| g.eval(s * d1) - a22 * s * d2 >= s * rho_lin * (d1 + d2));
        if ok {
            return Ok(LinearizedEigenpair { rho1, delta1: d1, delta2: d2, rho_lin, halvings });
        }
        d1 *= 0.5;
        d2 *= 0.5;
    }
    Err(Error::InvalidModel(
        "no scaling of the eigenvector within 60 halvings satisfies the small-amplitude inequalities".into(),
    ))
}
