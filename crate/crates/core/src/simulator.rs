//! Explicit time stepping of the free-boundary system on a uniform lattice
//! with real-valued fronts.
//!
//! Field values live on lattice points `k·dx` strictly inside `(g, h)`, plus
//! the two boundary nodes `g` and `h` where both fields vanish. Data between
//! nodes is linear, so every spatial integral is evaluated exactly for the
//! interpolant. When a front passes a lattice point a zero-valued node is
//! appended; when the interior count exceeds `max_nodes` every other node is
//! dropped and `dx` doubles.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::{Cumulants, Kernel, KernelSet};
use crate::lattice::{convolve_at, density_segment, tail_segment, ConvolutionPlan, ToeplitzEngine};
use crate::model::{GFunction, ModelParams};

/// Roundoff allowance below zero before a field value counts as negative.
pub const NEGATIVITY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between stored snapshots; 0 keeps only the first and last.
    pub snapshot_every: usize,
    pub vanish_threshold: f64,
    pub spread_threshold: f64,
    /// Interior node budget; exceeding it halves the resolution.
    pub max_nodes: usize,
    /// Steps over which `h - g` must stay flat to confirm vanishing.
    pub stall_steps: usize,
    pub stall_tol: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dx: 0.25,
            dt: 0.02,
            t_end: 2000.0,
            snapshot_every: 10_000,
            vanish_threshold: 1e-8,
            spread_threshold: 200.0,
            max_nodes: 1024,
            stall_steps: 1000,
            stall_tol: 1e-10,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, params: &ModelParams) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("dx", self.dx),
            ("dt", self.dt),
            ("T", self.t_end),
            ("vanish_threshold", self.vanish_threshold),
            ("spread_threshold", self.spread_threshold),
        ] {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.max_nodes < 4 {
            errs.push(format!("max_nodes must be at least 4, got {}", self.max_nodes));
        }
        let b1 = self.dt * (params.d1 + params.a11);
        let b2 = self.dt * (params.d2 + params.a22);
        if !(b1 < 1.0) {
            errs.push(format!("stability bound dt*(d1+a11) < 1 violated: {b1}"));
        }
        if !(b2 < 1.0) {
            errs.push(format!("stability bound dt*(d2+a22) < 1 violated: {b2}"));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Initial data on `[-h0, h0]`.
#[derive(Clone)]
pub enum InitProfile {
    /// `u0 = A(1 - (x/h0)²)`, `v0 = B(1 - (x/h0)²)`
    Parabolic { a: f64, b: f64 },
    Custom { u: ProfileFn, v: ProfileFn },
}

impl Default for InitProfile {
    fn default() -> Self {
        InitProfile::Parabolic { a: 1.0, b: 1.0 }
    }
}

impl fmt::Debug for InitProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitProfile::Parabolic { a, b } => write!(f, "Parabolic {{ a: {a}, b: {b} }}"),
            InitProfile::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl InitProfile {
    fn eval(&self, x: f64, h0: f64) -> (f64, f64) {
        match self {
            InitProfile::Parabolic { a, b } => {
                let s = 1.0 - (x / h0).powi(2);
                (a * s, b * s)
            }
            InitProfile::Custom { u, v } => (u(x), v(x)),
        }
    }

    /// Largest initial values, sampled on the given grid.
    pub fn sup(&self, h0: f64, n: usize) -> (f64, f64) {
        (0..=n).fold((0.0f64, 0.0f64), |(mu, mv), i| {
            let x = -h0 + 2.0 * h0 * i as f64 / n as f64;
            let (u, v) = self.eval(x, h0);
            (mu.max(u), mv.max(v))
        })
    }
}

/// Discrete fields on `[g, h]`. `x`, `u`, `v` include the two boundary nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub g: f64,
    pub h: f64,
    pub dx: f64,
    /// Lattice index of the first interior node.
    pub k_first: i64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[inline]
fn lattice_x(k: i64, dx: f64) -> f64 {
    k as f64 * dx
}

impl FieldState {
    pub fn n_interior(&self) -> usize {
        self.x.len() - 2
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_v(&self) -> f64 {
        self.v.iter().cloned().fold(0.0, f64::max)
    }

    /// Values at the node nearest to `x` (linear interpolation).
    pub fn sample(&self, x: f64) -> (f64, f64) {
        if x <= self.g || x >= self.h {
            return (0.0, 0.0);
        }
        let j = self.x.partition_point(|&y| y <= x).clamp(1, self.x.len() - 1);
        let (xa, xb) = (self.x[j - 1], self.x[j]);
        let f = (x - xa) / (xb - xa);
        (
            self.u[j - 1] + f * (self.u[j] - self.u[j - 1]),
            self.v[j - 1] + f * (self.v[j] - self.v[j - 1]),
        )
    }

    /// Builds a state from interior lattice values; boundary zeros added.
    pub fn from_interior(t: f64, g: f64, h: f64, dx: f64, k_first: i64, u: &[f64], v: &[f64]) -> Result<Self> {
        let n = u.len();
        if v.len() != n {
            return Err(Error::InvalidInitialData("u and v lengths differ".into()));
        }
        let mut x = Vec::with_capacity(n + 2);
        x.push(g);
        x.extend((0..n).map(|j| lattice_x(k_first + j as i64, dx)));
        x.push(h);
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInitialData("interior nodes must lie strictly inside (g, h)".into()));
        }
        let pad = |w: &[f64]| {
            let mut out = Vec::with_capacity(n + 2);
            out.push(0.0);
            out.extend_from_slice(w);
            out.push(0.0);
            out
        };
        Ok(FieldState { t, g, h, dx, k_first, x, u: pad(u), v: pad(v) })
    }

    fn rebuild_x(&mut self) {
        let n = self.u.len() - 2;
        self.x.clear();
        self.x.push(self.g);
        self.x.extend((0..n).map(|j| lattice_x(self.k_first + j as i64, self.dx)));
        self.x.push(self.h);
    }

    /// Adds zero-valued nodes at lattice points newly inside `(g, h)`.
    fn absorb_lattice_points(&mut self) {
        let n = self.n_interior();
        let mut k_last = self.k_first + n as i64 - 1;
        let mut right = 0usize;
        while lattice_x(k_last + 1, self.dx) < self.h {
            k_last += 1;
            right += 1;
        }
        let mut left = 0usize;
        while lattice_x(self.k_first - 1, self.dx) > self.g {
            self.k_first -= 1;
            left += 1;
        }
        if left == 0 && right == 0 {
            *self.x.first_mut().unwrap() = self.g;
            *self.x.last_mut().unwrap() = self.h;
            return;
        }
        for w in [&mut self.u, &mut self.v] {
            w.pop();
            w.extend(std::iter::repeat(0.0).take(right + 1));
            w.splice(1..1, std::iter::repeat(0.0).take(left));
        }
        self.rebuild_x();
    }

    /// Keeps interior nodes with even lattice index and doubles `dx`.
    fn coarsen(&mut self) {
        let n = self.n_interior();
        let first_even = if self.k_first.rem_euclid(2) == 0 { 0 } else { 1 };
        let keep = |w: &Vec<f64>| {
            let mut out = vec![0.0];
            out.extend((first_even..n).step_by(2).map(|j| w[j + 1]));
            out.push(0.0);
            out
        };
        self.u = keep(&self.u);
        self.v = keep(&self.v);
        self.k_first = (self.k_first + first_even as i64).div_euclid(2);
        self.dx *= 2.0;
        self.rebuild_x();
    }

    /// Writes `x,u,v` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["x", "u", "v"]).map_err(csv_err)?;
        for i in 0..self.x.len() {
            w.write_record([self.x[i].to_string(), self.u[i].to_string(), self.v[i].to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Csv { line, reason: e.to_string() }
}

pub fn initialize(params: &ModelParams, init: &InitProfile, config: &SimConfig) -> Result<FieldState> {
    params.validate().map_err(|e| Error::InvalidModel(e.join("; ")))?;
    let (h0, dx) = (params.h0, config.dx);
    if !(dx > 0.0 && dx < h0) {
        return Err(Error::InvalidInitialData(format!("dx = {dx} must lie in (0, h0 = {h0})")));
    }
    let mut k = (h0 / dx).ceil() as i64;
    while lattice_x(k, dx) >= h0 {
        k -= 1;
    }
    while lattice_x(k + 1, dx) < h0 {
        k += 1;
    }
    let ks: Vec<i64> = (-k..=k).collect();
    let mut u = Vec::with_capacity(ks.len());
    let mut v = Vec::with_capacity(ks.len());
    for &kk in &ks {
        let (a, b) = init.eval(lattice_x(kk, dx), h0);
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidInitialData(format!(
                "initial data must be positive inside (-h0, h0); got u = {a}, v = {b} at x = {}",
                lattice_x(kk, dx)
            )));
        }
        u.push(a);
        v.push(b);
    }
    for xb in [-h0, h0] {
        let (a, b) = init.eval(xb, h0);
        if a.abs() > 1e-12 || b.abs() > 1e-12 {
            return Err(Error::InvalidInitialData(format!("initial data must vanish at x = {xb}; got u = {a}, v = {b}")));
        }
    }
    FieldState::from_interior(0.0, -h0, h0, dx, -k, &u, &v)
}

/// `∫_g^h J(x - y) w(y) dy` at every node of `state`, for `w` given on the
/// full node set (boundary entries are treated as zero).
pub fn convolve(kernel: &Kernel, w: &[f64], state: &FieldState) -> Vec<f64> {
    let mut ws = w.to_vec();
    *ws.first_mut().unwrap() = 0.0;
    *ws.last_mut().unwrap() = 0.0;
    state.x.iter().map(|&x| convolve_at(kernel, &state.x, &ws, x)).collect()
}

/// `μ∫_g^h w(x) tail(h - x) dx` over piecewise-linear data, summed from the
/// near end so mirror states give mirror sums.
fn outward_flux(kernel: &Kernel, dist: &[Cumulants], w: &[f64]) -> f64 {
    // dist[k] = cumulants at the distance of node k, ordered from the front
    let mut acc = 0.0;
    for k in 1..dist.len() {
        acc += tail_segment(kernel, &dist[k - 1], &dist[k], w[k - 1], w[k]);
    }
    acc
}

/// `(g', h')` for the current state.
pub fn boundary_flux(state: &FieldState, params: &ModelParams, kernels: &KernelSet) -> (f64, f64) {
    let one_side = |k: &Kernel, w: &[f64], right: bool| {
        let m = state.x.len();
        let order: Vec<usize> = if right { (0..m).rev().collect() } else { (0..m).collect() };
        let dist: Vec<Cumulants> = order
            .iter()
            .map(|&i| k.cumulants(if right { state.h - state.x[i] } else { state.x[i] - state.g }.max(0.0)))
            .collect();
        let ws: Vec<f64> = order.iter().map(|&i| w[i]).collect();
        outward_flux(k, &dist, &ws)
    };
    let hp = params.mu
        * (one_side(&kernels.j1, &state.u, true) + params.rho_flux * one_side(&kernels.j2, &state.v, true));
    let gp = -params.mu
        * (one_side(&kernels.j1, &state.u, false) + params.rho_flux * one_side(&kernels.j2, &state.v, false));
    (gp, hp)
}

/// Per-kernel scratch for one step.
#[derive(Default, Clone)]
struct SideCumulants {
    /// Cumulants at distances from `g`, ordered `g, x_0, …, x_{n-1}, h`.
    left: Vec<Cumulants>,
    /// Cumulants at distances from `h`, ordered `h, x_{n-1}, …, x_0, g`.
    right: Vec<Cumulants>,
}

/// Reusable stepping engine for one parameter set.
pub struct Simulator {
    params: ModelParams,
    g: GFunction,
    kernels: KernelSet,
    config: SimConfig,
    plans: Vec<ConvolutionPlan>,
    /// Plan index for `J1`, `K`, `J2`.
    roles: [usize; 3],
    engine: ToeplitzEngine,
    sides: Vec<SideCumulants>,
    toeplitz: Vec<(Vec<f64>, Vec<f64>)>,
    conv: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Simulator {
    pub fn new(params: ModelParams, g: GFunction, kernels: KernelSet, config: SimConfig) -> Result<Self> {
        params.validate().map_err(|e| Error::InvalidModel(e.join("; ")))?;
        config.validate(&params).map_err(|e| Error::Stability(e.join("; ")))?;
        g.validate(&params)?;
        let mut unique: Vec<Kernel> = Vec::new();
        let mut roles = [0usize; 3];
        for (r, k) in [&kernels.j1, &kernels.k, &kernels.j2].into_iter().enumerate() {
            roles[r] = match unique.iter().position(|u| u.spec() == k.spec()) {
                Some(i) => i,
                None => {
                    unique.push(k.clone());
                    unique.len() - 1
                }
            };
        }
        let plans: Vec<ConvolutionPlan> = unique.into_iter().map(|k| ConvolutionPlan::new(k, config.dx)).collect();
        let m = plans.len();
        Ok(Simulator {
            params,
            g,
            kernels,
            config,
            plans,
            roles,
            engine: ToeplitzEngine::new(),
            sides: vec![SideCumulants::default(); m],
            toeplitz: vec![(Vec::new(), Vec::new()); m],
            conv: vec![(Vec::new(), Vec::new()); m],
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn kernels(&self) -> &KernelSet {
        &self.kernels
    }

    fn sync_resolution(&mut self, dx: f64) {
        if self.plans[0].dx != dx {
            for p in &mut self.plans {
                *p = ConvolutionPlan::new(p.kernel.clone(), dx);
            }
        }
    }

    /// Convolutions `(J1*u, K*v, J2*v)` at interior nodes and `(g', h')`.
    fn rates(&mut self, s: &FieldState) -> (Vec<f64>, Vec<f64>, Vec<f64>, f64, f64) {
        self.sync_resolution(s.dx);
        let n = s.n_interior();
        let m = s.x.len();
        for (p, side) in self.plans.iter().zip(self.sides.iter_mut()) {
            side.left.clear();
            side.right.clear();
            side.left.extend(s.x.iter().map(|&x| p.kernel.cumulants((x - s.g).max(0.0))));
            side.right.extend(s.x.iter().rev().map(|&x| p.kernel.cumulants((s.h - x).max(0.0))));
        }
        let ui = &s.u[1..m - 1];
        let vi = &s.v[1..m - 1];
        self.engine.apply(&mut self.plans, ui, vi, &mut self.toeplitz);
        for ((p, side), (base, out)) in self.plans.iter().zip(&self.sides).zip(self.toeplitz.iter().zip(self.conv.iter_mut())) {
            out.0.clone_from(&base.0);
            out.1.clone_from(&base.1);
            if n == 0 {
                continue;
            }
            let (u0, un) = (ui[0], ui[n - 1]);
            let (v0, vn) = (vi[0], vi[n - 1]);
            let reach = p.band.map_or(n, |b| (b + 2).min(n));
            // left boundary cell, felt by nodes near g
            for i in 0..reach {
                let ramp = density_segment(&p.kernel, &p.lattice_point(i), &side.left[i + 1], 1.0, 0.0);
                let c = ramp - p.half_weight(i);
                out.0[i] += u0 * c;
                out.1[i] += v0 * c;
            }
            for i in (n - reach)..n {
                let mirror = n - 1 - i;
                let ramp = density_segment(&p.kernel, &p.lattice_point(mirror), &side.right[mirror + 1], 1.0, 0.0);
                let c = ramp - p.half_weight(mirror);
                out.0[i] += un * c;
                out.1[i] += vn * c;
            }
        }
        let (r1, rk, r2) = (self.roles[0], self.roles[1], self.roles[2]);
        let rev = |w: &[f64]| w.iter().rev().cloned().collect::<Vec<f64>>();
        let (k1, k2) = (&self.plans[r1].kernel, &self.plans[r2].kernel);
        let hp = self.params.mu
            * (outward_flux(k1, &self.sides[r1].right, &rev(&s.u))
                + self.params.rho_flux * outward_flux(k2, &self.sides[r2].right, &rev(&s.v)));
        let gp = -self.params.mu
            * (outward_flux(k1, &self.sides[r1].left, &s.u)
                + self.params.rho_flux * outward_flux(k2, &self.sides[r2].left, &s.v));
        (self.conv[r1].0.clone(), self.conv[rk].1.clone(), self.conv[r2].1.clone(), gp, hp)
    }

    /// Interior convolutions `(J1*u, K*v, J2*v)` through the stepping engine.
    pub fn convolutions(&mut self, s: &FieldState) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (a, b, c, _, _) = self.rates(s);
        (a, b, c)
    }

    /// One forward-Euler step in place.
    pub fn step(&mut self, s: &mut FieldState, step_index: u64) -> Result<()> {
        let dt = self.config.dt;
        let p = self.params;
        let (cu, ck, cv, gp, hp) = self.rates(s);
        let n = s.n_interior();
        let t_new = (step_index + 1) as f64 * dt;
        for i in 0..n {
            let (u, v) = (s.u[i + 1], s.v[i + 1]);
            let du = p.d1 * cu[i] - (p.d1 + p.a11) * u + p.a12 * ck[i];
            let dv = p.d2 * cv[i] - (p.d2 + p.a22) * v + self.g.eval(u);
            let un = u + dt * du;
            let vn = v + dt * dv;
            for (val, name) in [(un, "u"), (vn, "v")] {
                if !val.is_finite() {
                    return Err(Error::SolverAbort { t: t_new, reason: format!("{name} is not finite at x = {}", s.x[i + 1]) });
                }
                if val < -NEGATIVITY_TOL {
                    return Err(Error::SolverAbort {
                        t: t_new,
                        reason: format!("{name} = {val:e} at x = {} is negative beyond roundoff", s.x[i + 1]),
                    });
                }
            }
            s.u[i + 1] = un.max(0.0);
            s.v[i + 1] = vn.max(0.0);
        }
        if !(gp.is_finite() && hp.is_finite()) {
            return Err(Error::SolverAbort { t: t_new, reason: "boundary speed is not finite".into() });
        }
        s.g += dt * gp;
        s.h += dt * hp;
        s.t = t_new;
        s.absorb_lattice_points();
        while s.n_interior() > self.config.max_nodes {
            s.coarsen();
        }
        Ok(())
    }

    /// Iterates until the horizon or confirmed vanishing.
    pub fn run(&mut self, mut state: FieldState) -> Result<Trajectory> {
        let c = self.config.clone();
        let n_steps = (c.t_end / c.dt).round() as u64;
        let mut traj = Trajectory::default();
        traj.record(&state);
        traj.snapshots.push(Snapshot::of(&state));
        let mut stop = StopReason::Horizon;
        for k in 0..n_steps {
            self.step(&mut state, k)?;
            traj.record(&state);
            if c.snapshot_every > 0 && (k + 1) % c.snapshot_every as u64 == 0 && k + 1 < n_steps {
                traj.snapshots.push(Snapshot::of(&state));
            }
            let len = traj.times.len();
            if len > c.stall_steps && state.max_u().max(state.max_v()) < c.vanish_threshold {
                let now = traj.h[len - 1] - traj.g[len - 1];
                let then = traj.h[len - 1 - c.stall_steps] - traj.g[len - 1 - c.stall_steps];
                if now - then < c.stall_tol {
                    stop = StopReason::Vanished;
                    break;
                }
            }
        }
        traj.snapshots.push(Snapshot::of(&state));
        traj.stop = stop;
        traj.final_state = Some(state);
        Ok(traj)
    }
}

/// Single step with a throwaway engine.
pub fn step(
    state: &FieldState,
    params: &ModelParams,
    g: &GFunction,
    kernels: &KernelSet,
    config: &SimConfig,
) -> Result<FieldState> {
    let mut sim = Simulator::new(*params, g.clone(), kernels.clone(), config.clone())?;
    let mut next = state.clone();
    let k = (state.t / config.dt).round() as u64;
    sim.step(&mut next, k)?;
    Ok(next)
}

pub fn run(
    params: &ModelParams,
    g: &GFunction,
    kernels: &KernelSet,
    init: &InitProfile,
    config: &SimConfig,
) -> Result<Trajectory> {
    let mut sim = Simulator::new(*params, g.clone(), kernels.clone(), config.clone())?;
    let state = initialize(params, init, config)?;
    sim.run(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    #[default]
    Horizon,
    Vanished,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Snapshot {
    fn of(s: &FieldState) -> Self {
        Snapshot { t: s.t, x: s.x.clone(), u: s.u.clone(), v: s.v.clone() }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let state = FieldState { t: self.t, g: 0.0, h: 0.0, dx: 0.0, k_first: 0, x: self.x.clone(), u: self.u.clone(), v: self.v.clone() };
        state.write_csv(out)
    }
}

/// Front history plus sparse field snapshots.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub max_u: Vec<f64>,
    pub max_v: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: Option<FieldState>,
    pub stop: StopReason,
}

impl Trajectory {
    fn record(&mut self, s: &FieldState) {
        self.times.push(s.t);
        self.g.push(s.g);
        self.h.push(s.h);
        self.max_u.push(s.max_u());
        self.max_v.push(s.max_v());
    }

    /// Front history only, as read back from CSV.
    pub fn from_series(times: Vec<f64>, g: Vec<f64>, h: Vec<f64>) -> Self {
        let n = times.len();
        Trajectory { times, g, h, max_u: vec![f64::NAN; n], max_v: vec![f64::NAN; n], ..Default::default() }
    }

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Writes `t,g,h` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["t", "g", "h"]).map_err(csv_err)?;
        for i in 0..self.times.len() {
            w.write_record([self.times[i].to_string(), self.g[i].to_string(), self.h[i].to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    /// Reads `t,g,h` rows; errors carry the offending line number.
    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = r.headers().map_err(csv_err)?.clone();
        if headers.iter().map(str::trim).collect::<Vec<_>>() != ["t", "g", "h"] {
            return Err(Error::Csv { line: 1, reason: format!("expected header t,g,h, found {}", headers.iter().collect::<Vec<_>>().join(",")) });
        }
        let (mut t, mut g, mut h) = (Vec::new(), Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let parse = |i: usize| -> Result<f64> {
                let field = rec.get(i).ok_or_else(|| Error::Csv { line, reason: "missing column".into() })?;
                field.trim().parse::<f64>().map_err(|e| Error::Csv { line, reason: format!("{field:?}: {e}") })
            };
            t.push(parse(0)?);
            g.push(parse(1)?);
            h.push(parse(2)?);
        }
        if t.is_empty() {
            return Err(Error::Csv { line: 1, reason: "trajectory has no rows".into() });
        }
        Ok(Self::from_series(t, g, h))
    }

    pub fn read_csv_file(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}
