//! Compactly supported profiles `φ(x) = ψ(x/L)` and the sub-eigenfunction
//! inequality `∫_{-L}^{L} J(x-y) φ(y) dy >= (1-ε) φ(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::lattice::ConvolutionPlan;
use crate::quadrature::linspace;

pub const DEFAULT_GRID_N: usize = 4096;
pub const MIN_GRID_N: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileFamily {
    /// `(1-|x|)^λ`
    Power { lambda: f64 },
    /// `(1-|x|)^{λ-1} ψ1(x)` with `ψ1 = 1-|x|` up to `|x| = η`, constant after.
    PowerKink { lambda: f64, eta: f64 },
    /// Plateau at 1 for `|x| <= 1 - 1/η1`, power-kinked edge beyond.
    Capped { lambda: f64, eta1: f64, eta2: f64 },
    /// Samples of `ψ` on a uniform grid over `[-1, 1]`, linearly interpolated.
    Custom { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub family: ProfileFamily,
    pub l: f64,
}

impl ProfileFamily {
    pub fn validate(&self) -> std::result::Result<(), String> {
        match self {
            ProfileFamily::Power { lambda } if !(*lambda >= 1.0) => Err(format!("power profile needs lambda >= 1, got {lambda}")),
            ProfileFamily::PowerKink { lambda, eta } => {
                if !(*lambda >= 2.0) {
                    Err(format!("power_kink profile needs lambda >= 2, got {lambda}"))
                } else if !(0.8..=1.0).contains(eta) {
                    Err(format!("power_kink profile needs eta in [4/5, 1], got {eta}"))
                } else {
                    Ok(())
                }
            }
            ProfileFamily::Capped { lambda, eta1, eta2 } => {
                if !(*lambda >= 2.0) {
                    Err(format!("capped profile needs lambda >= 2, got {lambda}"))
                } else if !(*eta1 > 1.0) {
                    Err(format!("capped profile needs eta1 > 1, got {eta1}"))
                } else if !(*eta2 > 0.8 && *eta2 < 1.0) {
                    Err(format!("capped profile needs eta2 in (4/5, 1), got {eta2}"))
                } else {
                    Ok(())
                }
            }
            ProfileFamily::Custom { values } => {
                let n = values.len();
                if n < 3 {
                    Err("custom profile needs at least 3 samples".into())
                } else if values[0] != 0.0 || values[n - 1] != 0.0 {
                    Err("custom profile must vanish at -1 and 1".into())
                } else if values[1..n - 1].iter().any(|v| !(*v > 0.0)) {
                    Err("custom profile must be positive inside (-1, 1)".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// `ψ(x)` for `x` in `[-1, 1]`, zero outside.
    pub fn psi(&self, x: f64) -> f64 {
        let a = x.abs();
        if a >= 1.0 {
            return 0.0;
        }
        let r = 1.0 - a;
        match self {
            ProfileFamily::Power { lambda } => r.powf(*lambda),
            ProfileFamily::PowerKink { lambda, eta } => {
                let psi1 = if a <= *eta { r } else { 1.0 - eta };
                r.powf(lambda - 1.0) * psi1
            }
            ProfileFamily::Capped { lambda, eta1, eta2 } => {
                let psi1 = if a <= *eta2 { (r * eta1).min(1.0) } else { ((1.0 - eta2) * eta1).min(1.0) };
                (r * eta1).powf(lambda - 1.0).min(1.0) * psi1
            }
            ProfileFamily::Custom { values } => {
                let n = values.len() - 1;
                let pos = (x + 1.0) * 0.5 * n as f64;
                let i = (pos.floor() as usize).min(n - 1);
                let f = pos - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
        }
    }

    /// Lipschitz bound of `ψ` where the family provides one.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            ProfileFamily::Power { lambda } | ProfileFamily::PowerKink { lambda, .. } => Some(*lambda),
            ProfileFamily::Capped { lambda, eta1, .. } => Some(lambda * eta1),
            ProfileFamily::Custom { .. } => None,
        }
    }
}

/// `(x, φ(x))` on `grid_n` uniform nodes over `[-L, L]`.
pub fn build_profile(spec: &ProfileSpec, grid_n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.family.validate().map_err(Error::InvalidProfile)?;
    if !(spec.l > 0.0 && spec.l.is_finite()) {
        return Err(Error::InvalidProfile(format!("L must be positive, got {}", spec.l)));
    }
    if grid_n < 3 {
        return Err(Error::InvalidProfile("grid needs at least 3 nodes".into()));
    }
    let x = symmetric_grid(spec.l, grid_n);
    let mut phi: Vec<f64> = x.iter().map(|&xi| spec.family.psi(xi / spec.l)).collect();
    phi[0] = 0.0;
    phi[grid_n - 1] = 0.0;
    Ok((x, phi))
}

/// Uniform grid on `[-L, L]` with `x[n-1-i] = -x[i]` exactly.
fn symmetric_grid(l: f64, n: usize) -> Vec<f64> {
    let mut x = linspace(-l, l, n);
    for i in 0..n / 2 {
        x[n - 1 - i] = -x[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    x
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubEigReport {
    pub epsilon: f64,
    pub l: f64,
    pub min_ratio: f64,
    pub pass: bool,
    pub worst_x: f64,
    pub grid_n: usize,
}

/// `∫J(x-y)φ(y)dy / φ(x)` at every node with `φ > 0`, integrating the kernel
/// exactly against the piecewise-linear interpolant of `φ`.
pub fn verify_subeigen(kernel: &Kernel, spec: &ProfileSpec, epsilon: f64, grid_n: usize) -> Result<SubEigReport> {
    if grid_n < MIN_GRID_N {
        return Err(Error::Precondition(format!("grid_n = {grid_n} is below {MIN_GRID_N}")));
    }
    let (x, phi) = build_profile(spec, grid_n)?;
    let step = 2.0 * spec.l / (grid_n - 1) as f64;
    let mut plan = ConvolutionPlan::new(kernel.clone(), step);
    plan.ensure(grid_n);
    let mut min_ratio = f64::INFINITY;
    let mut worst_x = f64::NAN;
    for i in 0..grid_n {
        if phi[i] <= 0.0 {
            continue;
        }
        let integral: f64 = (1..grid_n - 1).map(|j| plan.weight(i.abs_diff(j)) * phi[j]).sum();
        let ratio = integral / phi[i];
        if ratio < min_ratio {
            min_ratio = ratio;
            worst_x = x[i];
        }
    }
    Ok(SubEigReport { epsilon, l: spec.l, min_ratio, pass: min_ratio >= 1.0 - epsilon, worst_x, grid_n })
}

/// First `L` of the increasing grid whose report passes.
pub fn minimal_scale(
    kernel: &Kernel,
    family: &ProfileFamily,
    epsilon: f64,
    l_grid: &[f64],
    grid_n: usize,
) -> Result<Option<SubEigReport>> {
    if l_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition("L grid must be increasing".into()));
    }
    for &l in l_grid {
        let r = verify_subeigen(kernel, &ProfileSpec { family: family.clone(), l }, epsilon, grid_n)?;
        if r.pass {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// Outer region where a family is meant to be convex.
pub fn convex_region(family: &ProfileFamily) -> (f64, f64) {
    match family {
        ProfileFamily::Capped { eta1, .. } => (1.0 - 1.0 / eta1, 1.0),
        _ => (0.5, 1.0),
    }
}

/// Second differences of `ψ` on `region ⊂ [-1, 1]` are all `>= -1e-12`.
pub fn check_convexity(family: &ProfileFamily, region: (f64, f64)) -> Result<bool> {
    let (a, b) = region;
    if !(a >= -1.0 && b <= 1.0 && a < b) {
        return Err(Error::Precondition(format!("region ({a}, {b}) must be a subinterval of [-1, 1]")));
    }
    family.validate().map_err(Error::InvalidProfile)?;
    let xs = linspace(a, b, 2001);
    Ok(xs.windows(3).all(|w| family.psi(w[0]) - 2.0 * family.psi(w[1]) + family.psi(w[2]) >= -1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;

    fn spec(family: ProfileFamily, l: f64) -> ProfileSpec {
        ProfileSpec { family, l }
    }

    fn value_at(s: &ProfileSpec, n: usize, x0: f64) -> f64 {
        let (x, phi) = build_profile(s, n).unwrap();
        let i = x.iter().position(|&x| (x - x0).abs() < 1e-9).unwrap();
        phi[i]
    }

    #[test]
    fn profile_examples() {
        assert_eq!(value_at(&spec(ProfileFamily::Power { lambda: 1.0 }, 10.0), 201, 0.0), 1.0);
        assert!((value_at(&spec(ProfileFamily::Power { lambda: 2.0 }, 10.0), 201, 5.0) - 0.25).abs() < 1e-14);
        let capped = ProfileFamily::Capped { lambda: 2.0, eta1: 4.0, eta2: 0.9 };
        assert_eq!(value_at(&spec(capped, 20.0), 201, 0.0), 1.0);
    }

    #[test]
    fn profiles_rejected_below_minimum() {
        for f in [
            ProfileFamily::Power { lambda: 0.5 },
            ProfileFamily::PowerKink { lambda: 1.5, eta: 0.9 },
            ProfileFamily::PowerKink { lambda: 2.0, eta: 0.5 },
            ProfileFamily::Capped { lambda: 2.0, eta1: 0.9, eta2: 0.9 },
        ] {
            assert!(matches!(build_profile(&spec(f, 1.0), 64), Err(Error::InvalidProfile(_))));
        }
    }

    #[test]
    fn profiles_shape_invariants() {
        let fams = [
            ProfileFamily::Power { lambda: 1.0 },
            ProfileFamily::Power { lambda: 3.5 },
            ProfileFamily::PowerKink { lambda: 2.0, eta: 0.9 },
            ProfileFamily::Capped { lambda: 2.0, eta1: 4.0, eta2: 0.9 },
            ProfileFamily::Capped { lambda: 3.0, eta1: 1.5, eta2: 0.85 },
        ];
        for f in fams {
            let (x, phi) = build_profile(&spec(f.clone(), 7.0), 1001).unwrap();
            assert!(phi.iter().all(|&p| (0.0..=1.0).contains(&p)));
            for i in 0..phi.len() {
                assert_eq!(phi[i], phi[phi.len() - 1 - i], "{f:?} not even");
            }
            assert!(phi[500..].windows(2).all(|w| w[1] <= w[0]));
            let m = f.lipschitz().unwrap();
            let h = (x[1] - x[0]) / 7.0;
            let slope = phi.windows(2).map(|w| (w[1] - w[0]).abs() / h).fold(0.0, f64::max);
            assert!(slope <= m + 1e-6, "{f:?}: slope {slope} > {m}");
        }
    }

    #[test]
    fn triangle_kernel_pass_and_fail() {
        let k = Kernel::new(KernelSpec::triangle(1.0)).unwrap();
        let f = ProfileFamily::Power { lambda: 2.0 };
        assert!(verify_subeigen(&k, &spec(f.clone(), 100.0), 0.1, 4096).unwrap().pass);
        assert!(!verify_subeigen(&k, &spec(f, 1.0), 0.1, 4096).unwrap().pass);
    }

    #[test]
    fn center_ratio_tends_to_one() {
        // at x = 0 the linear profile gives ∫ J(y)(1-|y|/L) dy = 1 - 2·(1/6)/L for L >= 1
        let k = Kernel::new(KernelSpec::triangle(1.0)).unwrap();
        let mut prev = 0.0;
        for l in [10.0, 100.0, 1000.0, 1e4] {
            let s = spec(ProfileFamily::Power { lambda: 1.0 }, l);
            let r = verify_subeigen(&k, &s, 0.0, 4097).unwrap();
            let (x, phi) = build_profile(&s, 4097).unwrap();
            let mut plan = ConvolutionPlan::new(k.clone(), x[1] - x[0]);
            plan.ensure(4097);
            let centre: f64 = (1..4096usize).map(|j| plan.weight(j.abs_diff(2048)) * phi[j]).sum();
            let exact = 1.0 - 2.0 * (1.0 / 6.0) / l;
            assert!((centre - exact).abs() < 1e-12, "{centre} vs {exact}");
            assert!(centre > prev);
            prev = centre;
            assert!(r.min_ratio <= centre);
        }
    }

    #[test]
    fn kink_profile_with_cauchy_kernel() {
        let k = Kernel::new(KernelSpec::power_law(2.0, 1.0)).unwrap();
        let r = verify_subeigen(&k, &spec(ProfileFamily::PowerKink { lambda: 2.0, eta: 0.9 }, 200.0), 0.1, 4096).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.min_ratio > 0.95 && r.min_ratio < 1.0, "{}", r.min_ratio);
    }

    #[test]
    fn minimal_scale_properties() {
        let k = Kernel::new(KernelSpec::triangle(1.0)).unwrap();
        let grid: Vec<f64> = (0..12).map(|i| 2f64.powi(i)).collect();
        let f = ProfileFamily::Power { lambda: 2.0 };
        let found = minimal_scale(&k, &f, 0.5, &grid, 1024).unwrap().unwrap();
        assert!(found.l <= 4.0);
        let doubled = verify_subeigen(&k, &spec(f.clone(), 2.0 * found.l), 0.5, 1024).unwrap();
        assert!(doubled.pass);
        assert!(minimal_scale(&k, &f, 0.0, &grid, 1024).unwrap().is_none());
    }

    #[test]
    fn convexity_examples() {
        assert!(check_convexity(&ProfileFamily::Power { lambda: 2.0 }, (0.5, 1.0)).unwrap());
        assert!(check_convexity(&ProfileFamily::Power { lambda: 1.0 }, (0.5, 1.0)).unwrap());
        assert!(check_convexity(&ProfileFamily::Capped { lambda: 2.0, eta1: 4.0, eta2: 0.9 }, (0.75, 1.0)).unwrap());
        assert!(check_convexity(&ProfileFamily::PowerKink { lambda: 2.0, eta: 0.9 }, (0.5, 1.0)).unwrap());
        assert!(!check_convexity(&ProfileFamily::Capped { lambda: 2.0, eta1: 4.0, eta2: 0.9 }, (0.5, 1.0)).unwrap());
        let f = ProfileFamily::Capped { lambda: 2.0, eta1: 4.0, eta2: 0.9 };
        assert_eq!(convex_region(&f), (0.75, 1.0));
    }

    #[test]
    fn small_grid_rejected() {
        let k = Kernel::new(KernelSpec::triangle(1.0)).unwrap();
        assert!(matches!(
            verify_subeigen(&k, &spec(ProfileFamily::Power { lambda: 2.0 }, 10.0), 0.1, 100),
            Err(Error::Precondition(_))
        ));
    }
}
