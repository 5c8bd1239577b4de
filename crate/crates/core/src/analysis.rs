//! Spreading/vanishing classification and front-growth regressions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Equilibrium;
use crate::simulator::{SimConfig, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DichotomyKind {
    Spreading,
    Vanishing,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub final_max: f64,
    pub final_length: f64,
    /// Change of `h - g` over the stall window.
    pub interval_growth: f64,
    /// Largest relative deviation of `(u, v)` from `(u*, v*)` at the midpoint.
    pub center_deviation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DichotomyVerdict {
    pub kind: DichotomyKind,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub vanish_threshold: f64,
    pub spread_threshold: f64,
    pub stall_steps: usize,
    pub stall_tol: f64,
    pub center_tolerance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds::from(&SimConfig::default())
    }
}

impl From<&SimConfig> for Thresholds {
    fn from(c: &SimConfig) -> Self {
        Thresholds {
            vanish_threshold: c.vanish_threshold,
            spread_threshold: c.spread_threshold,
            stall_steps: c.stall_steps,
            stall_tol: c.stall_tol,
            center_tolerance: 0.1,
        }
    }
}

pub fn classify(traj: &Trajectory, thresholds: &Thresholds, eq: &Equilibrium) -> DichotomyVerdict {
    let n = traj.times.len();
    let last = n - 1;
    let final_length = traj.h[last] - traj.g[last];
    let final_max = traj.max_u[last].max(traj.max_v[last]);
    let back = last.saturating_sub(thresholds.stall_steps);
    let interval_growth = final_length - (traj.h[back] - traj.g[back]);
    let center_deviation = match (&traj.final_state, eq.u_star, eq.v_star) {
        (Some(s), Some(us), Some(vs)) => {
            let (u, v) = s.sample(0.5 * (s.g + s.h));
            Some(((u - us) / us).abs().max(((v - vs) / vs).abs()))
        }
        _ => None,
    };
    let evidence = Evidence { final_max, final_length, interval_growth, center_deviation };
    let stalled = last >= thresholds.stall_steps && interval_growth < thresholds.stall_tol;
    let kind = if final_max < thresholds.vanish_threshold && stalled {
        DichotomyKind::Vanishing
    } else if final_length > thresholds.spread_threshold
        && center_deviation.is_some_and(|d| d < thresholds.center_tolerance)
    {
        DichotomyKind::Spreading
    } else {
        DichotomyKind::Undecided
    };
    DichotomyVerdict { kind, evidence }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum RateLaw {
    Power { p: f64 },
    TLogT { c: f64 },
    Linear { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub law: RateLaw,
    pub coefficient: f64,
    pub exponent: Option<f64>,
    /// Root-mean-square residual of the regression in its own variables.
    pub rms_residual: f64,
    /// Root-mean-square of `(h - fit)/h`, comparable across laws.
    pub relative_rms: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// Pure-power fit on the same window, attached to `t ln t` fits.
    pub competing_power: Option<Box<RateFit>>,
    /// For linear fits: `h/t` rises by more than 5% across the window.
    pub superlinear: Option<bool>,
}

pub const MIN_SAMPLES: usize = 10;

/// `[T/2, T]` for the trajectory horizon `T`.
pub fn tail_window(traj: &Trajectory) -> (f64, f64) {
    let t = traj.horizon();
    (0.5 * t, t)
}

fn window_samples(traj: &Trajectory, window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::DegenerateWindow(format!("window ({lo}, {hi}) is empty or not positive")));
    }
    if lo < 0.5 * hi {
        return Err(Error::DegenerateWindow(format!("window start {lo} is below half its end {hi}")));
    }
    let first = traj.times.first().copied().unwrap_or(f64::NAN);
    if lo < first || hi > traj.horizon() * (1.0 + 1e-12) {
        return Err(Error::DegenerateWindow(format!(
            "window ({lo}, {hi}) is outside the trajectory range ({first}, {})",
            traj.horizon()
        )));
    }
    let (mut t, mut h) = (Vec::new(), Vec::new());
    for (&ti, &hi_) in traj.times.iter().zip(&traj.h) {
        if ti >= lo && ti <= hi {
            t.push(ti);
            h.push(hi_);
        }
    }
    if t.len() < MIN_SAMPLES {
        return Err(Error::DegenerateWindow(format!("{} samples in window, need {MIN_SAMPLES}", t.len())));
    }
    if h.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::DegenerateWindow("front position must be positive on the window".into()));
    }
    Ok((t, h))
}

fn relative_rms(h: &[f64], fitted: impl Iterator<Item = f64>) -> f64 {
    let s: f64 = h.iter().zip(fitted).map(|(&a, b)| ((a - b) / a).powi(2)).sum();
    (s / h.len() as f64).sqrt()
}

fn power_fit_on(t: &[f64], h: &[f64], window: (f64, f64)) -> RateFit {
    let n = t.len() as f64;
    let x: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    let p = sxy / sxx;
    let ln_c = ym - p * xm;
    let rms = (x.iter().zip(&y).map(|(a, b)| (b - ln_c - p * a).powi(2)).sum::<f64>() / n).sqrt();
    let coefficient = ln_c.exp();
    RateFit {
        law: RateLaw::Power { p },
        coefficient,
        exponent: Some(p),
        rms_residual: rms,
        relative_rms: relative_rms(h, t.iter().map(|&ti| coefficient * ti.powf(p))),
        window,
        samples: t.len(),
        competing_power: None,
        superlinear: None,
    }
}

/// Least squares of `ln h` against `ln t`.
pub fn fit_power(traj: &Trajectory, window: (f64, f64)) -> Result<RateFit> {
    let (t, h) = window_samples(traj, window)?;
    Ok(power_fit_on(&t, &h, window))
}

/// Least squares of `h` against `t ln t` through the origin, with the
/// competing power fit attached.
pub fn fit_tlnt(traj: &Trajectory, window: (f64, f64)) -> Result<RateFit> {
    let (t, h) = window_samples(traj, window)?;
    if t[0] <= std::f64::consts::E {
        return Err(Error::DegenerateWindow("t ln t fit needs t > e on the window".into()));
    }
    let q: Vec<f64> = t.iter().map(|v| v * v.ln()).collect();
    let c = q.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() / q.iter().map(|a| a * a).sum::<f64>();
    let n = t.len() as f64;
    let rms = (q.iter().zip(&h).map(|(a, b)| (b - c * a).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RateFit {
        law: RateLaw::TLogT { c },
        coefficient: c,
        exponent: None,
        rms_residual: rms,
        relative_rms: relative_rms(&h, q.iter().map(|a| c * a)),
        window,
        samples: t.len(),
        competing_power: Some(Box::new(power_fit_on(&t, &h, window))),
        superlinear: None,
    })
}

/// Mean of `h/t` on the window.
pub fn fit_linear_speed(traj: &Trajectory, window: (f64, f64)) -> Result<RateFit> {
    let (t, h) = window_samples(traj, window)?;
    let r: Vec<f64> = t.iter().zip(&h).map(|(a, b)| b / a).collect();
    let n = r.len() as f64;
    let c = r.iter().sum::<f64>() / n;
    let rms = (r.iter().map(|v| (v - c).powi(2)).sum::<f64>() / n).sqrt();
    let q = (r.len() / 4).max(1);
    let early = r[..q].iter().sum::<f64>() / q as f64;
    let late = r[r.len() - q..].iter().sum::<f64>() / q as f64;
    Ok(RateFit {
        law: RateLaw::Linear { c },
        coefficient: c,
        exponent: None,
        rms_residual: rms,
        relative_rms: relative_rms(&h, t.iter().map(|a| c * a)),
        window,
        samples: t.len(),
        competing_power: None,
        superlinear: Some(late > 1.05 * early),
    })
}

/// Spread of `h/(t ln t)` on the window: `(max - min)/mean`.
pub fn tlnt_plateau_variation(traj: &Trajectory, window: (f64, f64)) -> Result<f64> {
    let (t, h) = window_samples(traj, window)?;
    let r: Vec<f64> = t.iter().zip(&h).map(|(a, b)| b / (a * a.ln())).collect();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((max - min) / mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    Power,
    TLogT,
    /// Relative rms values within 5% of each other.
    Inconclusive,
}

/// Compares a `t ln t` fit with its attached power fit.
pub fn discriminate(tlnt: &RateFit) -> Preference {
    let Some(power) = tlnt.competing_power.as_deref() else {
        return Preference::Inconclusive;
    };
    let (a, b) = (tlnt.relative_rms, power.relative_rms);
    if (a - b).abs() < 0.05 * a.max(b) {
        Preference::Inconclusive
    } else if a < b {
        Preference::TLogT
    } else {
        Preference::Power
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum TheoryLaw {
    Power { exponent: f64 },
    TLogT,
}

pub fn theory_rate(alpha: f64) -> Result<TheoryLaw> {
    if alpha > 1.0 && alpha < 2.0 {
        Ok(TheoryLaw::Power { exponent: 1.0 / (alpha - 1.0) })
    } else if alpha == 2.0 {
        Ok(TheoryLaw::TLogT)
    } else if alpha > 2.0 {
        Err(Error::FiniteSpeedRegime(alpha))
    } else {
        Err(Error::OutOfDomain(format!("alpha = {alpha} is not in (1, 2]")))
    }
}
