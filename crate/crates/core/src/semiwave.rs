//! Semi-wave profiles and speed for kernels with a finite first moment.
//!
//! On `[-L, 0]` with `n` uniform nodes, each profile equation
//! `c φ' = (d + a) φ - S[φ]` is swept from `x = 0` leftwards with a one-sided
//! difference, `S` being the nonlocal source. The source integrates the kernels
//! exactly against the piecewise-linear profiles and treats `(-∞, -L)` as
//! sitting at the equilibrium. A damped fixed point on the profiles is nested
//! inside a bisection on `c` for the speed equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{check_conditions, Kernel, KernelSet};
use crate::lattice::{tail_segment, ConvolutionPlan, ToeplitzEngine};
use crate::model::{positive_equilibrium, GFunction, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiWaveConfig {
    pub l_trunc: f64,
    pub n: usize,
    pub fix_tol: f64,
    pub c_bracket: (f64, f64),
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for SemiWaveConfig {
    fn default() -> Self {
        SemiWaveConfig { l_trunc: 200.0, n: 4001, fix_tol: 1e-8, c_bracket: (1e-4, 50.0), max_iter: 20_000, damping: 0.5 }
    }
}

impl SemiWaveConfig {
    pub fn validate(&self, kernels: &KernelSet) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.l_trunc > 0.0) {
            errs.push(format!("L_trunc must be positive, got {}", self.l_trunc));
        }
        if self.n < 16 {
            errs.push(format!("n must be at least 16, got {}", self.n));
        }
        if !(self.fix_tol > 0.0) {
            errs.push(format!("fix_tol must be positive, got {}", self.fix_tol));
        }
        let (lo, hi) = self.c_bracket;
        if !(lo > 0.0 && hi > lo) {
            errs.push(format!("c_bracket ({lo}, {hi}) must satisfy 0 < lo < hi"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            errs.push(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        if self.l_trunc > 0.0 {
            for (name, k) in [("J1", &kernels.j1), ("J2", &kernels.j2)] {
                let t = k.tail_mass(0.5 * self.l_trunc);
                if !(t < 1e-6) {
                    errs.push(format!("L_trunc too short: tail mass of {name} beyond L_trunc/2 is {t:e}, need < 1e-6"));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Precondition(errs.join("; ")))
        }
    }
}

/// Profiles on `[-L, 0]`; index 0 is `-L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    pub x: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm change per iteration.
    pub history: Vec<f64>,
    /// Sup-norm of `T[φ] - φ` at the returned profiles.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiWaveSolution {
    pub c0: f64,
    pub profiles: Profiles,
    pub profile_residual: f64,
    pub speed_residual: f64,
    pub bisection_steps: usize,
}

/// Rejects kernel sets where `J1` or `J2` has an infinite first moment.
pub fn require_finite_moment(kernels: &KernelSet) -> Result<()> {
    for (name, k) in [("J1", &kernels.j1), ("J2", &kernels.j2)] {
        if !check_conditions(k).satisfies_j1 {
            return Err(Error::InfiniteFirstMoment { kernel: name.into() });
        }
    }
    Ok(())
}

struct ProfileOperator {
    params: ModelParams,
    g: GFunction,
    us: f64,
    vs: f64,
    step: f64,
    plans: Vec<ConvolutionPlan>,
    roles: [usize; 3],
    engine: ToeplitzEngine,
    out: Vec<(Vec<f64>, Vec<f64>)>,
}

impl ProfileOperator {
    fn new(params: &ModelParams, g: &GFunction, kernels: &KernelSet, config: &SemiWaveConfig) -> Result<Self> {
        let eq = positive_equilibrium(params, g)?;
        let (Some(us), Some(vs)) = (eq.u_star, eq.v_star) else {
            return Err(Error::NoPositiveEigenvalue { r0: eq.r0 });
        };
        let step = config.l_trunc / (config.n - 1) as f64;
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
        let mut plans: Vec<ConvolutionPlan> = unique.into_iter().map(|k| ConvolutionPlan::new(k, step)).collect();
        for p in &mut plans {
            p.ensure(config.n);
        }
        let m = plans.len();
        Ok(ProfileOperator {
            params: *params,
            g: g.clone(),
            us,
            vs,
            step,
            plans,
            roles,
            engine: ToeplitzEngine::new(),
            out: vec![(Vec::new(), Vec::new()); m],
        })
    }

    /// One application of the swept profile map.
    fn apply(&mut self, c: f64, phi1: &[f64], phi2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = phi1.len();
        self.engine.apply(&mut self.plans, phi1, phi2, &mut self.out);
        for (p, o) in self.plans.iter().zip(self.out.iter_mut()) {
            // drop the half hat left of -L, add the equilibrium far field
            for i in 0..n {
                let corr = p.lattice_point(i).tail - p.half_weight(i);
                o.0[i] += phi1[0] * corr;
                o.1[i] += phi2[0] * corr;
            }
        }
        let p = self.params;
        let (r1, rk, r2) = (self.roles[0], self.roles[1], self.roles[2]);
        let cd = c / self.step;
        let mut new1 = vec![0.0; n];
        let mut new2 = vec![0.0; n];
        for i in (1..n - 1).rev() {
            let s1 = p.d1 * self.out[r1].0[i] + p.a12 * self.out[rk].1[i];
            let s2 = p.d2 * self.out[r2].1[i] + self.g.eval(phi1[i]);
            new1[i] = (cd * new1[i + 1] + s1) / (cd + p.d1 + p.a11);
            new2[i] = (cd * new2[i + 1] + s2) / (cd + p.d2 + p.a22);
        }
        new1[0] = self.us;
        new2[0] = self.vs;
        (new1, new2)
    }

    fn solve(&mut self, c: f64, config: &SemiWaveConfig) -> Result<Profiles> {
        let n = config.n;
        let x: Vec<f64> = (0..n).map(|i| -((n - 1 - i) as f64) * self.step).collect();
        let mut phi1 = vec![self.us; n];
        let mut phi2 = vec![self.vs; n];
        phi1[n - 1] = 0.0;
        phi2[n - 1] = 0.0;
        let inner_tol = 0.1 * config.fix_tol;
        let w = config.damping;
        let mut history = Vec::new();
        for it in 1..=config.max_iter {
            let (t1, t2) = self.apply(c, &phi1, &phi2);
            let mut change: f64 = 0.0;
            for i in 0..n {
                let a = phi1[i] + w * (t1[i] - phi1[i]);
                let b = phi2[i] + w * (t2[i] - phi2[i]);
                change = change.max((a - phi1[i]).abs()).max((b - phi2[i]).abs());
                phi1[i] = a;
                phi2[i] = b;
            }
            history.push(change);
            if change < inner_tol {
                let (t1, t2) = self.apply(c, &phi1, &phi2);
                let residual = t1
                    .iter()
                    .zip(&phi1)
                    .chain(t2.iter().zip(&phi2))
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                return Ok(Profiles { x, phi1, phi2, iterations: it, history, residual });
            }
            if !change.is_finite() {
                break;
            }
        }
        let last_change = history.last().copied().unwrap_or(f64::NAN);
        Err(Error::NonConvergence { iterations: history.len(), last_change, history })
    }

    /// `c - μ∫φ1·tail1(-x) - μρ∫φ2·tail2(-x)`, far field at the equilibrium.
    fn mismatch(&self, c: f64, prof: &Profiles) -> f64 {
        let n = prof.x.len();
        let one = |plan: &ConvolutionPlan, phi: &[f64], eq: f64| {
            // distances -x from the origin, node n-1-m sits at m·step
            let mut acc = 0.0;
            for m in 1..n {
                acc += tail_segment(
                    &plan.kernel,
                    &plan.lattice_point(m - 1),
                    &plan.lattice_point(m),
                    phi[n - m],
                    phi[n - 1 - m],
                );
            }
            let total = plan.kernel.first_moment().unwrap_or(f64::INFINITY);
            acc + eq * (total - plan.lattice_point(n - 1).tail_integral())
        };
        let p = &self.params;
        let (r1, r2) = (self.roles[0], self.roles[2]);
        c - p.mu * one(&self.plans[r1], &prof.phi1, prof.phi1[0]) - p.mu * p.rho_flux * one(&self.plans[r2], &prof.phi2, prof.phi2[0])
    }
}

pub fn solve_profile(
    c: f64,
    params: &ModelParams,
    g: &GFunction,
    kernels: &KernelSet,
    config: &SemiWaveConfig,
) -> Result<Profiles> {
    require_finite_moment(kernels)?;
    config.validate(kernels)?;
    if !(c > 0.0) {
        return Err(Error::Precondition(format!("speed must be positive, got {c}")));
    }
    ProfileOperator::new(params, g, kernels, config)?.solve(c, config)
}

/// Speed-equation mismatch for given profiles.
pub fn speed_mismatch(
    c: f64,
    profiles: &Profiles,
    params: &ModelParams,
    g: &GFunction,
    kernels: &KernelSet,
    config: &SemiWaveConfig,
) -> Result<f64> {
    require_finite_moment(kernels)?;
    let op = ProfileOperator::new(params, g, kernels, config)?;
    Ok(op.mismatch(c, profiles))
}

pub fn solve_speed(params: &ModelParams, g: &GFunction, kernels: &KernelSet, config: &SemiWaveConfig) -> Result<SemiWaveSolution> {
    require_finite_moment(kernels)?;
    config.validate(kernels)?;
    let mut op = ProfileOperator::new(params, g, kernels, config)?;
    let mut eval = |c: f64| -> Result<(f64, Profiles)> {
        let prof = op.solve(c, config)?;
        Ok((op.mismatch(c, &prof), prof))
    };
    let (mut lo, mut hi) = config.c_bracket;
    let (f_lo, mut best) = eval(lo)?;
    let (f_hi, _) = eval(hi)?;
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let mut best_c = lo;
    let mut best_f = f_lo;
    let mut steps = 0;
    while steps < 200 {
        steps += 1;
        let mid = 0.5 * (lo + hi);
        let (f, prof) = eval(mid)?;
        if f.abs() < best_f.abs() || steps == 1 {
            best_c = mid;
            best_f = f;
            best = prof;
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < config.fix_tol && best_f.abs() < config.fix_tol {
            break;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    Ok(SemiWaveSolution {
        c0: best_c,
        profile_residual: best.residual,
        profiles: best,
        speed_residual: best_f.abs(),
        bisection_steps: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;

    fn fixture() -> (ModelParams, GFunction, KernelSet) {
        (ModelParams::unit(1.0), GFunction::monod(2.0), KernelSet::uniform(&KernelSpec::triangle(1.0)).unwrap())
    }

    fn small() -> SemiWaveConfig {
        SemiWaveConfig { l_trunc: 60.0, n: 1201, fix_tol: 1e-7, ..Default::default() }
    }

    #[test]
    fn fat_tails_rejected_before_iteration() {
        let (p, g, _) = fixture();
        let ks = KernelSet::uniform(&KernelSpec::power_law(1.5, 1.0)).unwrap();
        assert!(matches!(solve_profile(1.0, &p, &g, &ks, &small()), Err(Error::InfiniteFirstMoment { .. })));
        let ks = KernelSet::uniform(&KernelSpec::power_law(2.0, 1.0)).unwrap();
        assert!(matches!(solve_speed(&p, &g, &ks, &small()), Err(Error::InfiniteFirstMoment { .. })));
    }

    #[test]
    fn zero_profiles_give_mismatch_c() {
        let (p, g, ks) = fixture();
        let cfg = small();
        let prof = solve_profile(0.5, &p, &g, &ks, &cfg).unwrap();
        let zero = Profiles { phi1: vec![0.0; cfg.n], phi2: vec![0.0; cfg.n], ..prof.clone() };
        let m = speed_mismatch(0.7, &zero, &p, &g, &ks, &cfg).unwrap();
        assert!((m - 0.7).abs() < 1e-15);
        let m1 = speed_mismatch(0.7, &prof, &p, &g, &ks, &cfg).unwrap();
        let m2 = speed_mismatch(0.9, &prof, &p, &g, &ks, &cfg).unwrap();
        assert!((m2 - m1 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn profile_is_monotone_with_equilibrium_tail() {
        let (p, g, ks) = fixture();
        let cfg = small();
        let prof = solve_profile(0.5, &p, &g, &ks, &cfg).unwrap();
        assert!(prof.phi1.windows(2).all(|w| w[1] - w[0] <= 1e-8));
        assert!(prof.phi2.windows(2).all(|w| w[1] - w[0] <= 1e-8));
        assert_eq!(prof.phi1[cfg.n - 1], 0.0);
        assert!((prof.phi1[1] - 1.0).abs() < 0.01 && (prof.phi2[1] - 1.0).abs() < 0.01);
        assert!(prof.residual < 10.0 * cfg.fix_tol);
    }

    #[test]
    fn short_truncation_rejected() {
        let (p, g, _) = fixture();
        let ks = KernelSet::uniform(&KernelSpec::Laplace { b: 1.0 }).unwrap();
        let cfg = SemiWaveConfig { l_trunc: 10.0, ..small() };
        assert!(matches!(solve_profile(1.0, &p, &g, &ks, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn no_sign_change_reported() {
        let (p, g, ks) = fixture();
        let cfg = SemiWaveConfig { c_bracket: (5.0, 10.0), ..small() };
        assert!(matches!(solve_speed(&p, &g, &ks, &cfg), Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn truncation_doubling_moves_speed_less_than_one_percent() {
        let (p, g, ks) = fixture();
        let a = SemiWaveConfig { l_trunc: 30.0, n: 301, fix_tol: 1e-8, ..Default::default() };
        let b = SemiWaveConfig { l_trunc: 60.0, n: 601, ..a.clone() };
        let ca = solve_speed(&p, &g, &ks, &a).unwrap();
        let cb = solve_speed(&p, &g, &ks, &b).unwrap();
        assert!(ca.c0 > 0.0 && ca.speed_residual < a.fix_tol);
        assert!(((ca.c0 - cb.c0) / cb.c0).abs() < 0.01, "{} vs {}", ca.c0, cb.c0);
    }

    #[test]
    fn larger_mu_gives_larger_speed() {
        let (mut p, g, ks) = fixture();
        let cfg = SemiWaveConfig { l_trunc: 30.0, n: 301, ..Default::default() };
        let c1 = solve_speed(&p, &g, &ks, &cfg).unwrap().c0;
        p.mu = 4.0;
        let c4 = solve_speed(&p, &g, &ks, &cfg).unwrap().c0;
        assert!(c4 > c1, "{c4} <= {c1}");
    }
}
