//! Dispersal kernels: construction, normalization, tail masses, moments and
//! the condition checks used throughout the crate.
//!
//! Every kernel is an even unit-mass density evaluated on `|x|`, so evenness is
//! exact. Besides point values, the numerical schemes need four cumulative
//! functions on the half line, all available at arbitrary `z >= 0`:
//!
//! * `tail(z)  = ∫_z^∞ J`
//! * `cum(z)   = ∫_0^z J = 1/2 - tail(z)`
//! * `m1(z)    = ∫_0^z y J(y) dy`
//! * `m2(z)    = ∫_0^z y² J(y) dy`
//!
//! Families with elementary antiderivatives use closed forms. The general power
//! law and the tabulated family go through a [`PanelTable`] of Gauss-Legendre
//! panels, and the power law beyond the cutoff `X = 1e4` is summed from its
//! convergent series in `s·y^{-α}`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::quadrature::{gl_integrate, gl_moments, logspace};

/// Cutoff beyond which power-law cumulatives come from the analytic series.
pub const POWER_TAIL_CUTOFF: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompactShape {
    /// `(1 - |x|/a)_+`
    Triangle,
    /// `(1 + cos(π x / a)) / 2` on `|x| <= a`
    Cosine,
}

/// Raw (unnormalized) kernel shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `1 / (s + |x|^α)`
    PowerLaw { alpha: f64, s: f64 },
    Compact { a: f64, shape: CompactShape },
    /// `exp(-x² / 2σ²)`
    Gaussian { sigma: f64 },
    /// `exp(-|x| / b)`
    Laplace { b: f64 },
    /// Samples of the shape at `x = i·step`, `i = 0..`, extended evenly and
    /// linearly interpolated; zero beyond the last sample.
    Table { step: f64, values: Vec<f64> },
}

impl KernelSpec {
    pub fn power_law(alpha: f64, s: f64) -> Self {
        KernelSpec::PowerLaw { alpha, s }
    }

    pub fn triangle(a: f64) -> Self {
        KernelSpec::Compact { a, shape: CompactShape::Triangle }
    }

    pub fn cosine(a: f64) -> Self {
        KernelSpec::Compact { a, shape: CompactShape::Cosine }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            KernelSpec::PowerLaw { .. } => "power_law",
            KernelSpec::Compact { .. } => "compact",
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Laplace { .. } => "laplace",
            KernelSpec::Table { .. } => "table",
        }
    }

    /// Checks parameter ranges; every failure is reported.
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let positive = |name: &str, v: f64, errs: &mut Vec<String>| {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("{name} must be a positive finite number, got {v}"));
            }
        };
        match self {
            KernelSpec::PowerLaw { alpha, s } => {
                if !(alpha.is_finite() && *alpha > 1.0) {
                    errs.push(format!(
                        "alpha = {alpha}: 1/(s+|x|^alpha) is integrable only for alpha > 1"
                    ));
                }
                positive("s", *s, &mut errs);
            }
            KernelSpec::Compact { a, .. } => positive("a", *a, &mut errs),
            KernelSpec::Gaussian { sigma } => positive("sigma", *sigma, &mut errs),
            KernelSpec::Laplace { b } => positive("b", *b, &mut errs),
            KernelSpec::Table { step, values } => {
                positive("step", *step, &mut errs);
                if values.len() < 2 {
                    errs.push("table needs at least two samples".into());
                }
                if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
                    errs.push(format!("table value {i} is negative or NaN ({v})"));
                }
                if values.first().is_some_and(|v| *v <= 0.0) {
                    errs.push("table value at x = 0 must be positive".into());
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// Cumulative quantities of a kernel at one point `z >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cumulants {
    pub z: f64,
    pub tail: f64,
    pub m1: f64,
    pub m2: f64,
}

impl Cumulants {
    /// `∫_0^z tail(ζ) dζ`
    pub fn tail_integral(&self) -> f64 {
        self.m1 + self.z * self.tail
    }

    /// `∫_0^z ζ tail(ζ) dζ`
    pub fn tail_moment(&self) -> f64 {
        0.5 * (self.m2 + self.z * self.z * self.tail)
    }
}

/// Gauss-Legendre panels on `[0, X]` with cumulative integrals at the breakpoints.
#[derive(Debug, Clone)]
pub struct PanelTable {
    breaks: Vec<f64>,
    cum0: Vec<f64>,
    tail_above: Vec<f64>,
    cum1: Vec<f64>,
    cum2: Vec<f64>,
}

impl PanelTable {
    /// `far_tail` is `∫_X^∞ f`, with `X` the last breakpoint.
    pub fn build<F: Fn(f64) -> f64>(f: &F, breaks: Vec<f64>, far_tail: f64) -> Self {
        let n = breaks.len();
        let mut cum0 = vec![0.0; n];
        let mut cum1 = vec![0.0; n];
        let mut cum2 = vec![0.0; n];
        let mut pieces = vec![0.0; n];
        for k in 1..n {
            let [p0, p1, p2] = gl_moments(f, breaks[k - 1], breaks[k]);
            pieces[k] = p0;
            cum0[k] = cum0[k - 1] + p0;
            cum1[k] = cum1[k - 1] + p1;
            cum2[k] = cum2[k - 1] + p2;
        }
        let mut tail_above = vec![far_tail; n];
        for k in (0..n - 1).rev() {
            tail_above[k] = tail_above[k + 1] + pieces[k + 1];
        }
        PanelTable { breaks, cum0, tail_above, cum1, cum2 }
    }

    pub fn upper(&self) -> f64 {
        *self.breaks.last().expect("non-empty table")
    }

    pub fn total_below(&self) -> f64 {
        *self.cum0.last().expect("non-empty table")
    }

    /// `(∫_0^z f, ∫_z^∞ f, ∫_0^z y f, ∫_0^z y² f)` for `0 <= z <= X`.
    pub fn eval<F: Fn(f64) -> f64>(&self, f: &F, z: f64) -> (f64, f64, f64, f64) {
        let k = self.breaks.partition_point(|&b| b <= z).clamp(1, self.breaks.len() - 1) - 1;
        let lo = self.breaks[k];
        let [p0, p1, p2] = if z > lo { gl_moments(f, lo, z) } else { [0.0; 3] };
        (
            self.cum0[k] + p0,
            (self.tail_above[k] - p0).max(0.0),
            self.cum1[k] + p1,
            self.cum2[k] + p2,
        )
    }
}

/// Power-law far field: `c Σ (-s)^n y^{-α(n+1)}` for `y >= X`.
#[derive(Debug, Clone)]
struct PowerFar {
    c: f64,
    alpha: f64,
    s: f64,
    x: f64,
    m1_at_x: f64,
    m2_at_x: f64,
}

impl PowerFar {
    const MAX_TERMS: usize = 200;

    fn tail(&self, z: f64) -> f64 {
        let q = self.s * z.powf(-self.alpha);
        let mut sum = 0.0;
        let mut qn = 1.0;
        for n in 0..Self::MAX_TERMS {
            let term = qn / (self.alpha * (n as f64 + 1.0) - 1.0);
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            qn *= -q;
        }
        self.c * z.powf(1.0 - self.alpha) * sum
    }

    /// `∫_X^z y^{k} J(y) dy` via `∫_X^z y^{p-1} = X^p expm1(p ln(z/X)) / p`.
    fn moment_from_x(&self, k: f64, z: f64) -> f64 {
        let l = (z / self.x).ln();
        let q = self.s * self.x.powf(-self.alpha);
        let mut sum = 0.0;
        let mut scale = 1.0; // (-s X^{-α})^n
        for n in 0..Self::MAX_TERMS {
            let p = k + 1.0 - self.alpha * (n as f64 + 1.0);
            let piece = if p.abs() < 1e-14 { l } else { (p * l).exp_m1() / p };
            let term = scale * piece;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            scale *= -q;
        }
        self.c * self.x.powf(k + 1.0 - self.alpha) * sum
    }
}

/// A normalized, immutable kernel.
#[derive(Debug, Clone)]
pub struct Kernel {
    spec: KernelSpec,
    norm: f64,
    table: Option<PanelTable>,
    far: Option<PowerFar>,
}

/// Normalizes a kernel shape to unit mass.
pub fn normalize(spec: &KernelSpec) -> Result<Kernel> {
    Kernel::new(spec.clone())
}

impl Kernel {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        spec.validate()
            .map_err(|errs| Error::InvalidKernel(errs.join("; ")))?;
        let norm = match &spec {
            KernelSpec::PowerLaw { alpha, s } => {
                1.0 / (2.0 * s.powf(1.0 / alpha - 1.0) * (PI / alpha) / (PI / alpha).sin())
            }
            KernelSpec::Compact { a, .. } => 1.0 / a,
            KernelSpec::Gaussian { sigma } => 1.0 / (sigma * (2.0 * PI).sqrt()),
            KernelSpec::Laplace { b } => 0.5 / b,
            KernelSpec::Table { step, values } => {
                let inner: f64 = values[1..values.len() - 1].iter().sum();
                let half = step * (0.5 * values[0] + inner + 0.5 * values[values.len() - 1]);
                0.5 / half
            }
        };
        let mut kernel = Kernel { spec, norm, table: None, far: None };
        match kernel.spec.clone() {
            KernelSpec::PowerLaw { alpha, s } if alpha != 2.0 => {
                let x = POWER_TAIL_CUTOFF.max(10.0 * (2.0 * s).powf(1.0 / alpha));
                let z0 = 1e-3 * s.powf(1.0 / alpha);
                let mut breaks = vec![0.0];
                let mut b = z0;
                while b < x {
                    breaks.push(b);
                    b *= 1.15;
                }
                breaks.push(x);
                let mut far = PowerFar { c: norm, alpha, s, x, m1_at_x: 0.0, m2_at_x: 0.0 };
                let far_tail = far.tail(x);
                let f = |y: f64| kernel.density(y);
                let table = PanelTable::build(&f, breaks, far_tail);
                far.m1_at_x = *table.cum1.last().unwrap();
                far.m2_at_x = *table.cum2.last().unwrap();
                kernel.table = Some(table);
                kernel.far = Some(far);
            }
            KernelSpec::Table { step, values } => {
                let breaks = (0..values.len()).map(|i| i as f64 * step).collect();
                let f = |y: f64| kernel.density(y);
                kernel.table = Some(PanelTable::build(&f, breaks, 0.0));
            }
            _ => {}
        }
        Ok(kernel)
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// The constant `c` with `J = c · shape`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// Radius of the support, `None` for kernels positive everywhere.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.spec {
            KernelSpec::Compact { a, .. } => Some(*a),
            KernelSpec::Table { step, values } => Some(step * (values.len() - 1) as f64),
            _ => None,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let y = x.abs();
        let c = self.norm;
        match &self.spec {
            KernelSpec::PowerLaw { alpha, s } => {
                if *alpha == 2.0 {
                    c / (s + y * y)
                } else {
                    c / (s + y.powf(*alpha))
                }
            }
            KernelSpec::Compact { a, shape } => {
                if y >= *a {
                    0.0
                } else {
                    match shape {
                        CompactShape::Triangle => c * (1.0 - y / a),
                        CompactShape::Cosine => c * 0.5 * (1.0 + (PI * y / a).cos()),
                    }
                }
            }
            KernelSpec::Gaussian { sigma } => c * (-0.5 * (y / sigma).powi(2)).exp(),
            KernelSpec::Laplace { b } => c * (-y / b).exp(),
            KernelSpec::Table { step, values } => {
                let pos = y / step;
                let i = pos.floor() as usize;
                if i + 1 >= values.len() {
                    if i + 1 == values.len() && pos == i as f64 {
                        c * values[i]
                    } else {
                        0.0
                    }
                } else {
                    let frac = pos - i as f64;
                    c * (values[i] * (1.0 - frac) + values[i + 1] * frac)
                }
            }
        }
    }

    /// `∫_a^∞ J` for any real `a`.
    pub fn tail_mass(&self, a: f64) -> f64 {
        if a >= 0.0 {
            self.cumulants(a).tail
        } else {
            1.0 - self.cumulants(-a).tail
        }
    }

    /// Tail mass and the first two partial moments at `z >= 0`.
    pub fn cumulants(&self, z: f64) -> Cumulants {
        debug_assert!(z >= 0.0, "cumulants need z >= 0, got {z}");
        let z = z.max(0.0);
        let c = self.norm;
        let (tail, m1, m2) = match &self.spec {
            KernelSpec::PowerLaw { alpha, s } if *alpha == 2.0 => {
                let r = s.sqrt();
                let tail = if z > 0.0 { c * (r / z).atan() / r } else { 0.5 };
                let m1 = 0.5 * c * (z * z / s).ln_1p();
                let m2 = c * (z - r * (z / r).atan());
                (tail, m1, m2)
            }
            KernelSpec::PowerLaw { .. } => {
                let table = self.table.as_ref().expect("power-law table");
                let far = self.far.as_ref().expect("power-law far field");
                if z <= far.x {
                    let f = |y: f64| self.density(y);
                    let (_, tail, m1, m2) = table.eval(&f, z);
                    (tail, m1, m2)
                } else {
                    (
                        far.tail(z),
                        far.m1_at_x + far.moment_from_x(1.0, z),
                        far.m2_at_x + far.moment_from_x(2.0, z),
                    )
                }
            }
            KernelSpec::Compact { a, shape } => {
                let z = z.min(*a);
                match shape {
                    CompactShape::Triangle => (
                        c * (a - z).powi(2) / (2.0 * a),
                        c * (z * z / 2.0 - z.powi(3) / (3.0 * a)),
                        c * (z.powi(3) / 3.0 - z.powi(4) / (4.0 * a)),
                    ),
                    CompactShape::Cosine => {
                        let k = PI / a;
                        let (sn, cs) = (k * z).sin_cos();
                        (
                            0.5 * c * (a - z - sn / k),
                            0.5 * c * (z * z / 2.0 + z * sn / k + (cs - 1.0) / (k * k)),
                            0.5 * c
                                * (z.powi(3) / 3.0 + z * z * sn / k + 2.0 * z * cs / (k * k)
                                    - 2.0 * sn / k.powi(3)),
                        )
                    }
                }
            }
            KernelSpec::Gaussian { sigma } => {
                let w = z / (sigma * SQRT_2);
                let cum = 0.5 * erf(w);
                let dens = c * (-w * w).exp();
                (
                    0.5 * erfc(w),
                    c * sigma * sigma * (-(-w * w).exp_m1()),
                    sigma * sigma * (cum - z * dens),
                )
            }
            KernelSpec::Laplace { b } => {
                let e = (-z / b).exp();
                (
                    0.5 * e,
                    c * (b * b * (-(-z / b).exp_m1()) - b * z * e),
                    c * (2.0 * b.powi(3) * (-(-z / b).exp_m1()) - (b * z * z + 2.0 * b * b * z) * e),
                )
            }
            KernelSpec::Table { .. } => {
                let table = self.table.as_ref().expect("table kernel");
                let zc = z.min(table.upper());
                let f = |y: f64| self.density(y);
                let (_, tail, m1, m2) = table.eval(&f, zc);
                (if z >= table.upper() { 0.0 } else { tail }, m1, m2)
            }
        };
        Cumulants { z, tail, m1, m2 }
    }

    /// `∫_0^z J` with the sign convention `P(-z) = -P(z)`.
    pub fn signed_cumulative(&self, z: f64) -> f64 {
        let t = self.cumulants(z.abs()).tail;
        (0.5 - t).copysign(z)
    }

    /// `∫_0^∞ y J(y) dy`, `None` when infinite.
    pub fn first_moment(&self) -> Option<f64> {
        match &self.spec {
            KernelSpec::PowerLaw { alpha, s } => {
                (*alpha > 2.0).then(|| self.norm * s.powf(2.0 / alpha - 1.0) * (PI / alpha) / (2.0 * PI / alpha).sin())
            }
            KernelSpec::Compact { a, shape } => Some(match shape {
                CompactShape::Triangle => a / 6.0,
                CompactShape::Cosine => a / 4.0 - a / (PI * PI),
            }),
            KernelSpec::Gaussian { sigma } => Some(sigma / (2.0 * PI).sqrt()),
            KernelSpec::Laplace { b } => Some(0.5 * b),
            KernelSpec::Table { .. } => {
                let r = self.support_radius().unwrap();
                Some(self.cumulants(r).m1)
            }
        }
    }

    /// Total mass by direct quadrature of the density, independent of the
    /// cumulative formulas.
    pub fn quadrature_mass(&self) -> f64 {
        let f = |y: f64| self.density(y);
        let half = match &self.spec {
            KernelSpec::PowerLaw { alpha, s } => {
                let x = POWER_TAIL_CUTOFF.max(10.0 * (2.0 * s).powf(1.0 / alpha));
                let mut breaks = vec![0.0];
                let mut b = 1e-4 * s.powf(1.0 / alpha);
                while b < x {
                    breaks.push(b);
                    b *= 1.1;
                }
                breaks.push(x);
                let inner: f64 = breaks.windows(2).map(|w| gl_integrate(f, w[0], w[1])).sum();
                let far = PowerFar { c: self.norm, alpha: *alpha, s: *s, x, m1_at_x: 0.0, m2_at_x: 0.0 };
                inner + far.tail(x)
            }
            KernelSpec::Compact { a, .. } => {
                (0..64).map(|i| gl_integrate(f, a * i as f64 / 64.0, a * (i + 1) as f64 / 64.0)).sum()
            }
            KernelSpec::Gaussian { sigma } => {
                (0..160).map(|i| gl_integrate(f, sigma * i as f64 / 4.0, sigma * (i + 1) as f64 / 4.0)).sum()
            }
            KernelSpec::Laplace { b } => {
                (0..400).map(|i| gl_integrate(f, b * i as f64 / 4.0, b * (i + 1) as f64 / 4.0)).sum()
            }
            KernelSpec::Table { step, values } => (1..values.len())
                .map(|i| gl_integrate(f, step * (i - 1) as f64, step * i as f64))
                .sum(),
        };
        2.0 * half
    }
}

/// The three kernels of the system: `J1` (agents), `J2` (infective humans)
/// and `K` (transmission).
#[derive(Debug, Clone)]
pub struct KernelSet {
    pub j1: Kernel,
    pub j2: Kernel,
    pub k: Kernel,
}

impl KernelSet {
    pub fn new(j1: &KernelSpec, j2: &KernelSpec, k: &KernelSpec) -> Result<Self> {
        Ok(KernelSet { j1: Kernel::new(j1.clone())?, j2: Kernel::new(j2.clone())?, k: Kernel::new(k.clone())? })
    }

    /// All three kernels equal.
    pub fn uniform(spec: &KernelSpec) -> Result<Self> {
        Self::new(spec, spec, spec)
    }
}

/// First-moment status of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum FirstMoment {
    Finite(f64),
    Infinite,
}

impl FirstMoment {
    pub fn is_finite(&self) -> bool {
        matches!(self, FirstMoment::Finite(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub satisfies_j: bool,
    pub first_moment: FirstMoment,
    pub satisfies_j1: bool,
    pub tail_exponent_estimate: Option<f64>,
    pub dominance_constant: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub mass_error: f64,
}

/// Log-spaced sample grid used for the bracketing constants `K1`, `K2`.
pub fn bracket_grid() -> Vec<f64> {
    logspace(1e-3, 1e6, 2001)
}

/// Evaluates (J), (J1) and the power-law bracketing constants.
pub fn check_conditions(kernel: &Kernel) -> KernelReport {
    let mass_error = (kernel.quadrature_mass() - 1.0).abs();
    let probe = logspace(1e-4, 1e4, 401);
    let nonneg_even = probe.iter().all(|&x| {
        let d = kernel.density(x);
        d >= 0.0 && d.is_finite() && d == kernel.density(-x)
    });
    let satisfies_j = kernel.density(0.0) > 0.0 && nonneg_even && mass_error < 1e-8;
    let first_moment = match kernel.first_moment() {
        Some(m) => FirstMoment::Finite(m),
        None => FirstMoment::Infinite,
    };
    let (tail_exponent_estimate, k1, k2) = match kernel.spec() {
        KernelSpec::PowerLaw { alpha, .. } => {
            let x = 1e6;
            let h = 1e-4;
            let slope = -((kernel.density(x * (1.0 + h))).ln() - (kernel.density(x * (1.0 - h))).ln())
                / ((1.0 + h).ln() - (1.0 - h).ln());
            let vals: Vec<f64> = bracket_grid()
                .iter()
                .map(|&x| x.powf(*alpha).max(1.0) * kernel.density(x))
                .collect();
            let k1 = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let k2 = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (Some(slope), Some(k1), Some(k2))
        }
        _ => (None, None, None),
    };
    KernelReport {
        satisfies_j,
        first_moment,
        satisfies_j1: first_moment.is_finite(),
        tail_exponent_estimate,
        dominance_constant: None,
        k1,
        k2,
        mass_error,
    }
}

/// Order of vanishing at the edge of a compactly supported shape.
fn edge_order(spec: &KernelSpec) -> u32 {
    match spec {
        KernelSpec::Compact { shape: CompactShape::Triangle, .. } => 1,
        KernelSpec::Compact { shape: CompactShape::Cosine, .. } => 2,
        KernelSpec::Table { values, .. } => u32::from(*values.last().unwrap() == 0.0),
        _ => 0,
    }
}

/// Whether `other <= C·dom` can hold for some finite `C`, decided per family.
fn ratio_bounded(dom: &KernelSpec, other: &KernelSpec, dom_radius: Option<f64>, other_radius: Option<f64>) -> bool {
    use KernelSpec::*;
    match (dom_radius, other_radius) {
        (Some(_), None) => return false,
        (Some(rd), Some(ro)) => {
            if ro > rd {
                return false;
            }
            if ro == rd {
                return edge_order(other) >= edge_order(dom);
            }
            return true;
        }
        (None, Some(_)) => return true,
        (None, None) => {}
    }
    match (dom, other) {
        (PowerLaw { alpha: ad, .. }, PowerLaw { alpha: ao, .. }) => ao >= ad,
        (PowerLaw { .. }, _) => true,
        (Laplace { .. }, PowerLaw { .. }) => false,
        (Laplace { b: bd }, Laplace { b: bo }) => bo <= bd,
        (Laplace { .. }, _) => true,
        (Gaussian { .. }, PowerLaw { .. } | Laplace { .. }) => false,
        (Gaussian { sigma: sd }, Gaussian { sigma: so }) => so <= sd,
        _ => false,
    }
}

/// Smallest `C` with `J_other <= C · J_dom` on the grid, or `None` when the
/// ratio is unbounded on the real line.
pub fn dominance(dom: &Kernel, other: &Kernel, grid: &[f64]) -> Option<f64> {
    if dom.spec() == other.spec() {
        return Some(1.0);
    }
    if !ratio_bounded(dom.spec(), other.spec(), dom.support_radius(), other.support_radius()) {
        return None;
    }
    let mut sup: f64 = 0.0;
    for &x in grid {
        let d = dom.density(x);
        let o = other.density(x);
        if d > 0.0 {
            sup = sup.max(o / d);
        } else if o > 0.0 {
            return None;
        }
    }
    (sup > 0.0 && sup.is_finite()).then_some(sup)
}

/// Evenly spaced sample grid on `[-radius, radius]`.
pub fn symmetric_grid(radius: f64, n: usize) -> Vec<f64> {
    crate::quadrature::linspace(-radius, radius, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_simpson;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;
    use proptest::prelude::*;

    /// Adaptive Simpson over pre-split pieces, so narrow features are not missed.
    fn oracle<F: Fn(f64) -> f64>(f: F, z: f64, tol: f64) -> f64 {
        let mut breaks = vec![0.0];
        let mut b: f64 = 0.0;
        while b < z {
            b = if b < 20.0 { b + 0.25 } else { b * 1.2 };
            breaks.push(b.min(z));
        }
        breaks.windows(2).map(|w| adaptive_simpson(&f, w[0], w[1], tol, 50)).sum()
    }

    fn all_fixtures() -> Vec<Kernel> {
        [
            KernelSpec::power_law(1.5, 1.0),
            KernelSpec::power_law(2.0, 1.0),
            KernelSpec::power_law(1.25, 2.0),
            KernelSpec::power_law(3.0, 0.5),
            KernelSpec::triangle(1.0),
            KernelSpec::cosine(2.0),
            KernelSpec::Gaussian { sigma: 0.7 },
            KernelSpec::Laplace { b: 1.3 },
            KernelSpec::Table { step: 0.5, values: vec![1.0, 0.8, 0.5, 0.2, 0.0] },
        ]
        .into_iter()
        .map(|s| Kernel::new(s).unwrap())
        .collect()
    }

    #[test]
    fn power_law_alpha_two_normalization_is_one_over_pi() {
        let k = normalize(&KernelSpec::power_law(2.0, 1.0)).unwrap();
        assert_relative_eq!(k.normalization(), 1.0 / PI, max_relative = 1e-15);
    }

    #[test]
    fn triangle_normalization_is_one() {
        let k = normalize(&KernelSpec::triangle(1.0)).unwrap();
        assert_eq!(k.normalization(), 1.0);
    }

    #[test]
    fn non_integrable_power_law_rejected() {
        let err = normalize(&KernelSpec::power_law(1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidKernel(ref m) if m.contains("integrable")));
    }

    #[test]
    fn negative_table_rejected() {
        let err = normalize(&KernelSpec::Table { step: 1.0, values: vec![1.0, -0.1, 0.0] }).unwrap_err();
        assert!(matches!(err, Error::InvalidKernel(_)));
    }

    #[test]
    fn tail_mass_examples() {
        let k = normalize(&KernelSpec::power_law(2.0, 1.0)).unwrap();
        // (1/π)(π/2 − arctan 1) = 1/4
        assert_relative_eq!(k.tail_mass(1.0), 0.25, max_relative = 1e-14);
        for k in all_fixtures() {
            assert_relative_eq!(k.tail_mass(0.0), 0.5, max_relative = 1e-12);
        }
        let tri = normalize(&KernelSpec::triangle(1.0)).unwrap();
        assert_eq!(tri.tail_mass(1.0), 0.0);
        assert_eq!(tri.tail_mass(3.0), 0.0);
    }

    #[test]
    fn all_fixtures_have_unit_mass() {
        for k in all_fixtures() {
            assert!((k.quadrature_mass() - 1.0).abs() < 1e-8, "{:?}: {}", k.spec(), k.quadrature_mass());
        }
    }

    #[test]
    fn cumulants_match_adaptive_quadrature() {
        for k in all_fixtures() {
            for &z in &[0.0, 0.3, 1.0, 2.7, 12.0, 150.0, 9e3, 2e4, 5e5] {
                if k.support_radius().is_some_and(|r| z > 4.0 * r) && z > 10.0 {
                    continue;
                }
                let c = k.cumulants(z);
                let cum = oracle(|y| k.density(y), z, 1e-14);
                let m1 = oracle(|y| y * k.density(y), z, 1e-13);
                let m2 = oracle(|y| y * y * k.density(y), z, 1e-12);
                let tol = 1e-9;
                assert!((0.5 - c.tail - cum).abs() < tol, "{:?} z={z}: cum {} vs {}", k.spec(), 0.5 - c.tail, cum);
                assert!((c.m1 - m1).abs() < tol * (1.0 + m1.abs()), "{:?} z={z}: m1 {} vs {}", k.spec(), c.m1, m1);
                assert!((c.m2 - m2).abs() < tol * (1.0 + m2.abs()), "{:?} z={z}: m2 {} vs {}", k.spec(), c.m2, m2);
            }
        }
    }

    #[test]
    fn far_tail_continuous_across_cutoff() {
        let k = normalize(&KernelSpec::power_law(1.5, 1.0)).unwrap();
        let below = k.cumulants(POWER_TAIL_CUTOFF * (1.0 - 1e-12));
        let above = k.cumulants(POWER_TAIL_CUTOFF * (1.0 + 1e-12));
        assert_relative_eq!(below.tail, above.tail, max_relative = 1e-9);
        assert_relative_eq!(below.m1, above.m1, max_relative = 1e-9);
        assert_relative_eq!(below.m2, above.m2, max_relative = 1e-9);
    }

    #[test]
    fn far_tail_matches_asymptotic_power() {
        // tail ~ c z^{1-α}/(α-1) for z ≫ 1
        let k = normalize(&KernelSpec::power_law(1.5, 1.0)).unwrap();
        let z: f64 = 1e12;
        let approx = k.normalization() * z.powf(-0.5) / 0.5;
        assert_relative_eq!(k.tail_mass(z), approx, max_relative = 1e-9);
    }

    #[test]
    fn first_moment_examples() {
        let r = check_conditions(&normalize(&KernelSpec::power_law(1.5, 1.0)).unwrap());
        assert!(!r.satisfies_j1);
        assert_eq!(r.first_moment, FirstMoment::Infinite);
        assert!(r.satisfies_j);

        let k3 = normalize(&KernelSpec::power_law(3.0, 1.0)).unwrap();
        let r = check_conditions(&k3);
        assert!(r.satisfies_j1);
        // closed-form moment against the partial moment at a large cutoff plus the tail estimate
        let FirstMoment::Finite(m) = r.first_moment else { panic!() };
        let partial = k3.cumulants(1e8).m1;
        assert!((m - partial).abs() < 1e-7, "{m} vs {partial}");

        let r = check_conditions(&normalize(&KernelSpec::triangle(1.0)).unwrap());
        assert_eq!(r.first_moment, FirstMoment::Finite(1.0 / 6.0));
    }

    #[test]
    fn bracketing_constants_hold_on_grid() {
        for alpha in [1.25, 1.5, 2.0] {
            let k = normalize(&KernelSpec::power_law(alpha, 1.0)).unwrap();
            let r = check_conditions(&k);
            let (k1, k2) = (r.k1.unwrap(), r.k2.unwrap());
            assert!(k1 > 0.0 && k2 >= k1);
            for x in bracket_grid() {
                let v = x.powf(alpha).max(1.0) * k.density(x);
                assert!(v >= k1 && v <= k2);
            }
            assert!((r.tail_exponent_estimate.unwrap() - alpha).abs() < 1e-6);
        }
    }

    #[test]
    fn dominance_examples() {
        let p2 = normalize(&KernelSpec::power_law(2.0, 1.0)).unwrap();
        let tri = normalize(&KernelSpec::triangle(1.0)).unwrap();
        let grid = symmetric_grid(1.0, 2001);
        let c = dominance(&p2, &tri, &grid).unwrap();
        let fine = dominance(&p2, &tri, &symmetric_grid(1.0, 4001)).unwrap();
        assert_relative_eq!(c, PI, max_relative = 1e-12);
        assert!((fine - c).abs() < 1e-9);
        assert_eq!(dominance(&p2, &p2, &grid), Some(1.0));
        assert_eq!(dominance(&tri, &p2, &grid), None);
        let p15 = normalize(&KernelSpec::power_law(1.5, 1.0)).unwrap();
        assert_eq!(dominance(&tri, &p15, &symmetric_grid(5.0, 101)), None);
        assert!(dominance(&p15, &p2, &symmetric_grid(100.0, 1001)).is_some());
        assert_eq!(dominance(&p2, &p15, &symmetric_grid(100.0, 1001)), None);
    }

    fn arctan_tail(z: f64) -> f64 {
        (FRAC_PI_2 - z.atan()) / PI
    }

    #[test]
    fn arctan_reference() {
        let k = normalize(&KernelSpec::power_law(2.0, 1.0)).unwrap();
        for z in [0.1, 1.0, 10.0, 1e6] {
            assert_relative_eq!(k.tail_mass(z), arctan_tail(z), max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn evenness_is_exact(x in -1e6f64..1e6) {
            for k in all_fixtures() {
                prop_assert_eq!(k.density(x), k.density(-x));
            }
        }

        #[test]
        fn tail_is_monotone_and_complements_cumulative(a in 0.0f64..50.0, d in 0.0f64..50.0) {
            for k in all_fixtures() {
                let t1 = k.tail_mass(a);
                let t2 = k.tail_mass(a + d);
                prop_assert!(t2 <= t1 + 1e-15);
                let inner = oracle(|y| k.density(y), a, 1e-13);
                prop_assert!((t1 + inner - 0.5).abs() < 1e-8);
            }
        }

        #[test]
        fn j1_iff_alpha_above_two(alpha in 1.05f64..4.0) {
            let k = normalize(&KernelSpec::power_law(alpha, 1.0)).unwrap();
            prop_assert_eq!(check_conditions(&k).satisfies_j1, alpha > 2.0);
        }
    }
}
