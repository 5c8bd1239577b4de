//! Hand-built states and brute-force quadrature oracles.
//!
//! The oracles never touch the crate's kernel code: densities are written
//! out from their closed forms and every integral is a fine composite
//! Simpson sum over the smooth profile, not its lattice interpolant.
//!
//! | state | kernel                  | interval          | u                       | v                     |
//! |-------|-------------------------|-------------------|-------------------------|-----------------------|
//! | A     | power law α=1.5, s=1    | [-5, 5]           | 1 - (x/5)²              | 0.5 (1 - (x/5)²)      |
//! | B     | power law α=1.5, s=1    | [-4.1, 6.3]       | 4(x-g)(h-x)/(h-g)²      | u²                    |
//! | C     | Gaussian σ=1.3          | [-3.7, 2.9]       | sin²(π(x-g)/(h-g))      | sin(π(x-g)/(h-g))     |

#![allow(dead_code)]

use std::f64::consts::PI;

use accelspread::{FieldState, KernelSpec};

pub struct HandState {
    pub name: &'static str,
    pub spec: KernelSpec,
    pub density: fn(f64) -> f64,
    pub g: f64,
    pub h: f64,
    pub u: fn(f64, f64, f64) -> f64,
    pub v: fn(f64, f64, f64) -> f64,
}

fn power15(x: f64) -> f64 {
    // 1/(2 s^{1/α-1} (π/α)/sin(π/α)) with s = 1
    let a = 1.5;
    let c = 1.0 / (2.0 * (PI / a) / (PI / a).sin());
    c / (1.0 + x.abs().powf(a))
}

fn gauss13(x: f64) -> f64 {
    let s = 1.3;
    (-(x * x) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt())
}

pub fn states() -> Vec<HandState> {
    vec![
        HandState {
            name: "A",
            spec: KernelSpec::power_law(1.5, 1.0),
            density: power15,
            g: -5.0,
            h: 5.0,
            u: |x, _, _| 1.0 - (x / 5.0).powi(2),
            v: |x, _, _| 0.5 * (1.0 - (x / 5.0).powi(2)),
        },
        HandState {
            name: "B",
            spec: KernelSpec::power_law(1.5, 1.0),
            density: power15,
            g: -4.1,
            h: 6.3,
            u: |x, g, h| 4.0 * (x - g) * (h - x) / (h - g).powi(2),
            v: |x, g, h| (4.0 * (x - g) * (h - x) / (h - g).powi(2)).powi(2),
        },
        HandState {
            name: "C",
            spec: KernelSpec::Gaussian { sigma: 1.3 },
            density: gauss13,
            g: -3.7,
            h: 2.9,
            u: |x, g, h| (PI * (x - g) / (h - g)).sin().powi(2),
            v: |x, g, h| (PI * (x - g) / (h - g)).sin().max(0.0),
        },
    ]
}

impl HandState {
    pub fn field_state(&self, dx: f64) -> FieldState {
        let k_first = (self.g / dx).floor() as i64 + 1;
        let k_last = (self.h / dx).ceil() as i64 - 1;
        let xs: Vec<f64> = (k_first..=k_last).map(|k| k as f64 * dx).collect();
        let u: Vec<f64> = xs.iter().map(|&x| (self.u)(x, self.g, self.h)).collect();
        let v: Vec<f64> = xs.iter().map(|&x| (self.v)(x, self.g, self.h)).collect();
        FieldState::from_interior(0.0, self.g, self.h, dx, k_first, &u, &v).unwrap()
    }
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let step = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * step) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * step / 3.0
}

/// `∫_g^h J(x - y) f(y) dy`, split at the kernel's cusp.
pub fn convolution_oracle(st: &HandState, f: fn(f64, f64, f64) -> f64, x: f64) -> f64 {
    let j = st.density;
    let integrand = |y: f64| j(x - y) * f(y, st.g, st.h);
    simpson(integrand, st.g, x, 4000) + simpson(integrand, x, st.h, 4000)
}

/// `∫_z^∞ J`, as `1/2 - ∫_0^z J`.
fn tail(st: &HandState, z: f64) -> f64 {
    0.5 - simpson(st.density, 0.0, z, 20000)
}

/// `∫_g^h f(x) tail(h - x) dx` rewritten as `∫_0^{h-g} J(y) A(h - y) dy + A(g) tail(h - g)`
/// with `A(s) = ∫_s^h f`.
fn one_side_flux(st: &HandState, f: &dyn Fn(f64) -> f64, len: f64) -> f64 {
    let mass = |s: f64| simpson(f, s, len, 400);
    simpson(|y| (st.density)(y) * mass(len - y), 0.0, len, 2000) + mass(0.0) * tail(st, len)
}

/// `(g', h')` for μ = ρ = 1 and `J1 = J2`.
pub fn flux_oracle(st: &HandState) -> (f64, f64) {
    let len = st.h - st.g;
    let (g, h) = (st.g, st.h);
    // right side: distance from h is len - s with s = x - g
    let right = |s: f64| (st.u)(g + s, g, h) + (st.v)(g + s, g, h);
    let left = |s: f64| (st.u)(h - s, g, h) + (st.v)(h - s, g, h);
    let hp = one_side_flux(st, &right, len);
    let gp = -one_side_flux(st, &left, len);
    (gp, hp)
}

use accelspread::{positive_equilibrium, GFunction, InitProfile, KernelSet, ModelParams, SimConfig, Simulator};

#[derive(Debug, Default)]
pub struct InvariantLog {
    pub steps: usize,
    pub min_field: f64,
    pub worst_symmetry: f64,
    pub worst_ratio: f64,
    pub final_h: f64,
}

/// Steps a run by hand and checks every state: monotone fronts, nonnegative
/// fields, mirror symmetry and the `M·(u*, v*)` ceiling.
pub fn check_invariants(
    p: &ModelParams,
    g: &GFunction,
    ks: &KernelSet,
    init: &InitProfile,
    cfg: &SimConfig,
    symmetric: bool,
) -> Result<InvariantLog, String> {
    let mut s = accelspread::simulator::initialize(p, init, cfg).map_err(|e| e.to_string())?;
    let mut sim = Simulator::new(*p, g.clone(), ks.clone(), cfg.clone()).map_err(|e| e.to_string())?;
    let eq = positive_equilibrium(p, g).map_err(|e| e.to_string())?;
    let (su, sv) = init.sup(p.h0, 4000);
    let ceiling = eq.u_star.zip(eq.v_star).map(|(us, vs)| {
        let m = (su / us).max(sv / vs).max(1.0) * 1.01;
        (m * us, m * vs)
    });
    let mut log = InvariantLog { min_field: f64::INFINITY, ..Default::default() };
    let n = (cfg.t_end / cfg.dt).round() as u64;
    for k in 0..n {
        let (g0, h0) = (s.g, s.h);
        sim.step(&mut s, k).map_err(|e| e.to_string())?;
        if s.h < h0 || s.g > g0 {
            return Err(format!("front retreated at t = {}: [{g0}, {h0}] -> [{}, {}]", s.t, s.g, s.h));
        }
        let lo = s.u.iter().chain(&s.v).cloned().fold(f64::INFINITY, f64::min);
        if lo < 0.0 {
            return Err(format!("negative field {lo:e} at t = {}", s.t));
        }
        log.min_field = log.min_field.min(lo);
        if symmetric {
            let tol = 1e-10 * (1.0 + s.h.abs());
            let m = s.x.len();
            let mut worst = (s.h + s.g).abs();
            for i in 0..m {
                worst = worst.max((s.u[i] - s.u[m - 1 - i]).abs()).max((s.v[i] - s.v[m - 1 - i]).abs());
            }
            if worst > tol {
                return Err(format!("asymmetry {worst:e} at t = {}", s.t));
            }
            log.worst_symmetry = log.worst_symmetry.max(worst / (1.0 + s.h.abs()));
        }
        if let Some((cu, cv)) = ceiling {
            let r = (s.max_u() / cu).max(s.max_v() / cv);
            if r > 1.0 {
                return Err(format!("comparison ceiling exceeded by factor {r} at t = {}", s.t));
            }
            log.worst_ratio = log.worst_ratio.max(r);
        }
        log.steps += 1;
    }
    log.final_h = s.h;
    Ok(log)
}
