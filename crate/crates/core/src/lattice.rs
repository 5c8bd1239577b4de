//! Exact product integration of kernels against piecewise-linear data on a
//! uniform lattice, and the Toeplitz/FFT machinery for the convolution sums.
//!
//! A segment is described by two distances `0 <= za <= zb` from the evaluation
//! point with data values `wa`, `wb` attached, linear in between.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::kernels::{Cumulants, Kernel};

const GL3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Segments shorter than this fraction of their far distance use a 3-point
/// Gauss rule instead of cumulant differences.
const SHORT_SEGMENT: f64 = 1e-4;

fn is_short(za: f64, zb: f64) -> bool {
    zb - za < SHORT_SEGMENT * zb.max(1e-300)
}

fn gauss3<F: Fn(f64) -> f64>(f: F, za: f64, zb: f64, wa: f64, wb: f64) -> f64 {
    let half = 0.5 * (zb - za);
    let mid = 0.5 * (za + zb);
    GL3.iter()
        .map(|&(t, w)| {
            let z = mid + half * t;
            let val = wa + (wb - wa) * (t + 1.0) * 0.5;
            w * f(z) * val
        })
        .sum::<f64>()
        * half
}

/// `∫_{za}^{zb} J(z) w(z) dz` with `w` linear from `wa` to `wb`.
pub fn density_segment(kernel: &Kernel, ca: &Cumulants, cb: &Cumulants, wa: f64, wb: f64) -> f64 {
    let (za, zb) = (ca.z, cb.z);
    if zb <= za || (wa == 0.0 && wb == 0.0) {
        return 0.0;
    }
    if is_short(za, zb) {
        return gauss3(|z| kernel.density(z), za, zb, wa, wb);
    }
    let dp = ca.tail - cb.tail;
    let dr = cb.m1 - ca.m1;
    // ∫ J·(zb - z) and ∫ J·(z - za)
    let left = (zb * dp - dr).max(0.0);
    let right = (dr - za * dp).max(0.0);
    (wa * left + wb * right) / (zb - za)
}

/// `∫_{za}^{zb} tail(z) w(z) dz` with `w` linear from `wa` to `wb`.
pub fn tail_segment(kernel: &Kernel, ca: &Cumulants, cb: &Cumulants, wa: f64, wb: f64) -> f64 {
    let (za, zb) = (ca.z, cb.z);
    if zb <= za || (wa == 0.0 && wb == 0.0) {
        return 0.0;
    }
    if is_short(za, zb) {
        return gauss3(|z| kernel.tail_mass(z), za, zb, wa, wb);
    }
    let dt = cb.tail_integral() - ca.tail_integral();
    let du = cb.tail_moment() - ca.tail_moment();
    let left = (zb * dt - du).max(0.0);
    let right = (du - za * dt).max(0.0);
    (wa * left + wb * right) / (zb - za)
}

/// `∫ J(x - y) w(y) dy` over a piecewise-linear `w` given at nodes `ys` (any
/// spacing), evaluated at `x`. Direct O(n) assembly.
pub fn convolve_at(kernel: &Kernel, ys: &[f64], ws: &[f64], x: f64) -> f64 {
    let cums: Vec<Cumulants> = ys.iter().map(|&y| kernel.cumulants((x - y).abs())).collect();
    let origin = kernel.cumulants(0.0);
    let mut acc = 0.0;
    for k in 1..ys.len() {
        let (ya, yb) = (ys[k - 1], ys[k]);
        let (wa, wb) = (ws[k - 1], ws[k]);
        if yb <= x {
            acc += density_segment(kernel, &cums[k], &cums[k - 1], wb, wa);
        } else if ya >= x {
            acc += density_segment(kernel, &cums[k - 1], &cums[k], wa, wb);
        } else {
            let wx = wa + (wb - wa) * (x - ya) / (yb - ya);
            acc += density_segment(kernel, &origin, &cums[k - 1], wx, wa);
            acc += density_segment(kernel, &origin, &cums[k], wx, wb);
        }
    }
    acc
}

/// Kernel data on a lattice of spacing `dx`: cumulants at `m·dx`, the hat
/// weights `W(k) = ∫ J(k·dx - y) hat(y) dy` and the half-hat weights.
#[derive(Debug, Clone)]
pub struct ConvolutionPlan {
    pub kernel: Kernel,
    pub dx: f64,
    pub lattice: Vec<Cumulants>,
    pub weights: Vec<f64>,
    pub half: Vec<f64>,
    /// Weights vanish beyond this offset for compactly supported kernels.
    pub band: Option<usize>,
    spectrum: Vec<f64>,
}

impl ConvolutionPlan {
    pub fn new(kernel: Kernel, dx: f64) -> Self {
        let band = kernel.support_radius().map(|r| (r / dx).ceil() as usize + 1);
        let mut plan = ConvolutionPlan {
            kernel,
            dx,
            lattice: Vec::new(),
            weights: Vec::new(),
            half: Vec::new(),
            band,
            spectrum: Vec::new(),
        };
        plan.ensure(8);
        plan
    }

    /// Grows the tables so that offsets `0..n` are available.
    pub fn ensure(&mut self, n: usize) {
        let need = match self.band {
            Some(b) => n.min(b + 2),
            None => n,
        };
        while self.lattice.len() < need + 2 {
            let m = self.lattice.len();
            self.lattice.push(self.kernel.cumulants(m as f64 * self.dx));
        }
        while self.half.len() < need {
            let m = self.half.len();
            let l = &self.lattice;
            self.half.push(density_segment(&self.kernel, &l[m], &l[m + 1], 1.0, 0.0));
        }
        while self.weights.len() < need {
            let k = self.weights.len();
            let l = &self.lattice;
            let w = if k == 0 {
                2.0 * self.half[0]
            } else {
                density_segment(&self.kernel, &l[k - 1], &l[k], 0.0, 1.0) + self.half[k]
            };
            self.weights.push(w);
        }
    }

    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        match self.band {
            Some(b) if k > b => 0.0,
            _ => self.weights[k],
        }
    }

    #[inline]
    pub fn half_weight(&self, m: usize) -> f64 {
        match self.band {
            Some(b) if m > b => 0.0,
            _ => self.half[m],
        }
    }

    #[inline]
    pub fn lattice_point(&self, m: usize) -> Cumulants {
        match self.band {
            Some(b) if m > b + 1 => Cumulants { z: m as f64 * self.dx, ..self.lattice[b + 1] },
            _ => self.lattice[m],
        }
    }

    fn spectrum(&mut self, fft_len: usize, fft: &Arc<dyn Fft<f64>>) -> &[f64] {
        if self.spectrum.len() != fft_len {
            self.ensure(fft_len / 2 + 1);
            let mut buf = vec![Complex::new(0.0, 0.0); fft_len];
            buf[0].re = self.weight(0);
            for k in 1..fft_len / 2 {
                let w = self.weight(k);
                buf[k].re = w;
                buf[fft_len - k].re = w;
            }
            buf[fft_len / 2].re = self.weight(fft_len / 2);
            fft.process(&mut buf);
            self.spectrum = buf.iter().map(|c| c.re).collect();
        }
        &self.spectrum
    }
}

/// Below this many nodes the Toeplitz sums run directly.
const DIRECT_MAX: usize = 96;

/// Toeplitz products `Σ_j W(|i-j|) a_j` for two arrays sharing kernels.
pub struct ToeplitzEngine {
    planner: FftPlanner<f64>,
    fft_len: usize,
    forward: Option<Arc<dyn Fft<f64>>>,
    inverse: Option<Arc<dyn Fft<f64>>>,
    packed: Vec<Complex<f64>>,
    work: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl Default for ToeplitzEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl ToeplitzEngine {
    pub fn new() -> Self {
        ToeplitzEngine {
            planner: FftPlanner::new(),
            fft_len: 0,
            forward: None,
            inverse: None,
            packed: Vec::new(),
            work: Vec::new(),
            scratch: Vec::new(),
        }
    }

    fn resize(&mut self, n: usize) {
        let len = (2 * n).next_power_of_two().max(64);
        if len != self.fft_len {
            self.fft_len = len;
            let f = self.planner.plan_fft_forward(len);
            let i = self.planner.plan_fft_inverse(len);
            let scratch = f.get_inplace_scratch_len().max(i.get_inplace_scratch_len());
            self.scratch = vec![Complex::new(0.0, 0.0); scratch];
            self.forward = Some(f);
            self.inverse = Some(i);
            self.packed = vec![Complex::new(0.0, 0.0); len];
            self.work = vec![Complex::new(0.0, 0.0); len];
        }
    }

    /// For every plan, writes the Toeplitz products of `a` and `b` into `out`.
    pub fn apply(&mut self, plans: &mut [ConvolutionPlan], a: &[f64], b: &[f64], out: &mut [(Vec<f64>, Vec<f64>)]) {
        let n = a.len();
        for (p, o) in plans.iter_mut().zip(out.iter_mut()) {
            p.ensure(n);
            o.0.clear();
            o.0.resize(n, 0.0);
            o.1.clear();
            o.1.resize(n, 0.0);
        }
        let all_direct = n <= DIRECT_MAX || plans.iter().all(|p| p.band.is_some());
        if all_direct {
            for (p, o) in plans.iter().zip(out.iter_mut()) {
                direct(p, a, b, o);
            }
            return;
        }
        self.resize(n);
        let len = self.fft_len;
        for (j, c) in self.packed.iter_mut().enumerate() {
            *c = if j < n { Complex::new(a[j], b[j]) } else { Complex::new(0.0, 0.0) };
        }
        let forward = self.forward.clone().unwrap();
        let inverse = self.inverse.clone().unwrap();
        forward.process_with_scratch(&mut self.packed, &mut self.scratch);
        let scale = 1.0 / len as f64;
        for (p, o) in plans.iter_mut().zip(out.iter_mut()) {
            if p.band.is_some() {
                direct(p, a, b, o);
                continue;
            }
            let spec = p.spectrum(len, &forward);
            for ((w, z), s) in self.work.iter_mut().zip(&self.packed).zip(spec) {
                *w = z * *s;
            }
            inverse.process_with_scratch(&mut self.work, &mut self.scratch);
            for i in 0..n {
                o.0[i] = self.work[i].re * scale;
                o.1[i] = self.work[i].im * scale;
            }
        }
    }
}

fn direct(p: &ConvolutionPlan, a: &[f64], b: &[f64], o: &mut (Vec<f64>, Vec<f64>)) {
    let n = a.len();
    let band = p.band.unwrap_or(n);
    for i in 0..n {
        let lo = i.saturating_sub(band);
        let hi = (i + band + 1).min(n);
        let (mut sa, mut sb) = (0.0, 0.0);
        for j in lo..hi {
            let w = p.weight(i.abs_diff(j));
            sa += w * a[j];
            sb += w * b[j];
        }
        o.0[i] = sa;
        o.1[i] = sb;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;
    use crate::quadrature::adaptive_simpson;

    fn kernels() -> Vec<Kernel> {
        [KernelSpec::power_law(1.5, 1.0), KernelSpec::triangle(1.0), KernelSpec::Gaussian { sigma: 0.4 }]
            .into_iter()
            .map(|s| Kernel::new(s).unwrap())
            .collect()
    }

    #[test]
    fn segments_match_quadrature() {
        for k in kernels() {
            for &(za, zb, wa, wb) in &[(0.0, 0.25, 1.0, 0.0), (0.3, 1.1, 0.2, 0.9), (5.0, 5.5, 1.0, 1.0), (2.0, 2.0 + 1e-7, 0.4, 0.6)] {
                let (ca, cb) = (k.cumulants(za), k.cumulants(zb));
                let lin = |z: f64| wa + (wb - wa) * (z - za) / (zb - za);
                let d_ref = adaptive_simpson(&|z| k.density(z) * lin(z), za, zb, 1e-15, 40);
                let t_ref = adaptive_simpson(&|z| k.tail_mass(z) * lin(z), za, zb, 1e-15, 40);
                let d = density_segment(&k, &ca, &cb, wa, wb);
                let t = tail_segment(&k, &ca, &cb, wa, wb);
                assert!((d - d_ref).abs() < 1e-11 * (1.0 + d_ref), "{:?} {za} {zb}: {d} vs {d_ref}", k.spec());
                assert!((t - t_ref).abs() < 1e-11 * (1.0 + t_ref), "{:?} {za} {zb}: {t} vs {t_ref}", k.spec());
            }
        }
    }

    #[test]
    fn hat_weights_sum_to_one() {
        // Σ_k W(k) = ∫ J = 1 for a uniform lattice covering the line
        let k = Kernel::new(KernelSpec::Gaussian { sigma: 0.7 }).unwrap();
        let mut p = ConvolutionPlan::new(k, 0.1);
        p.ensure(400);
        let s: f64 = p.weights[0] + 2.0 * p.weights[1..].iter().sum::<f64>();
        assert!((s - 1.0).abs() < 1e-13, "{s}");
    }

    #[test]
    fn fft_matches_direct() {
        let k = Kernel::new(KernelSpec::power_law(1.5, 1.0)).unwrap();
        let mut plans = vec![ConvolutionPlan::new(k, 0.5)];
        let n = 300;
        let a: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin().abs()).collect();
        let b: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let mut out = vec![(Vec::new(), Vec::new())];
        ToeplitzEngine::new().apply(&mut plans, &a, &b, &mut out);
        let mut reference = (vec![0.0; n], vec![0.0; n]);
        direct(&plans[0], &a, &b, &mut reference);
        for i in 0..n {
            assert!((out[0].0[i] - reference.0[i]).abs() < 1e-13);
            assert!((out[0].1[i] - reference.1[i]).abs() < 1e-13);
        }
    }
}
