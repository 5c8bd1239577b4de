mod common;

use std::sync::Arc;

use accelspread::{run, GFunction, InitProfile, KernelSet, KernelSpec, ModelParams, SimConfig};
use common::check_invariants;

fn cfg(dx: f64, dt: f64, t_end: f64) -> SimConfig {
    SimConfig { dx, dt, t_end, ..Default::default() }
}

#[test]
fn spreading_power_law_run_keeps_invariants() {
    let ks = KernelSet::uniform(&KernelSpec::power_law(1.5, 1.0)).unwrap();
    let log = check_invariants(&ModelParams::unit(20.0), &GFunction::monod(2.0), &ks, &InitProfile::default(), &cfg(0.25, 0.02, 40.0), true)
        .unwrap();
    assert_eq!(log.steps, 2000);
    assert!(log.final_h > 20.0);
    assert!(log.worst_ratio > 0.5 && log.worst_ratio <= 1.0);
}

#[test]
fn vanishing_run_keeps_invariants() {
    let ks = KernelSet::uniform(&KernelSpec::power_law(1.5, 1.0)).unwrap();
    let log = check_invariants(&ModelParams::unit(5.0), &GFunction::monod(0.8), &ks, &InitProfile::default(), &cfg(0.25, 0.02, 40.0), true)
        .unwrap();
    assert!(log.min_field >= 0.0);
}

#[test]
fn compact_and_mixed_kernels_keep_invariants() {
    let ks = KernelSet::new(&KernelSpec::triangle(1.0), &KernelSpec::Gaussian { sigma: 0.7 }, &KernelSpec::Laplace { b: 0.5 })
        .unwrap();
    let init = InitProfile::Parabolic { a: 2.0, b: 0.5 };
    check_invariants(&ModelParams::unit(10.0), &GFunction::monod(2.0), &ks, &init, &cfg(0.2, 0.02, 30.0), true).unwrap();
}

#[test]
fn asymmetric_data_still_monotone_and_bounded() {
    let ks = KernelSet::uniform(&KernelSpec::power_law(1.75, 1.0)).unwrap();
    let shape = |x: f64| (1.0 - (x / 8.0).powi(2)) * (1.0 + 0.8 * x / 8.0);
    let init = InitProfile::Custom { u: Arc::new(shape), v: Arc::new(move |x| 0.3 * shape(x)) };
    check_invariants(&ModelParams::unit(8.0), &GFunction::linear_capped(2.0, 1.0), &ks, &init, &cfg(0.25, 0.02, 30.0), false)
        .unwrap();
}

#[test]
fn replay_is_byte_identical() {
    let ks = KernelSet::uniform(&KernelSpec::power_law(1.5, 1.0)).unwrap();
    let c = SimConfig { snapshot_every: 250, ..cfg(0.25, 0.02, 20.0) };
    let once = || {
        let t = run(&ModelParams::unit(20.0), &GFunction::monod(2.0), &ks, &InitProfile::default(), &c).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        for s in &t.snapshots {
            buf.extend(s.u.iter().chain(&s.v).chain(&s.x).flat_map(|x| x.to_bits().to_le_bytes()));
        }
        buf
    };
    assert_eq!(once(), once());
}

#[test]
fn front_increments_shrink_under_refinement() {
    let ks = KernelSet::uniform(&KernelSpec::power_law(1.5, 1.0)).unwrap();
    let h = |dx: f64, dt: f64| {
        let t = run(&ModelParams::unit(10.0), &GFunction::monod(2.0), &ks, &InitProfile::default(), &cfg(dx, dt, 5.0)).unwrap();
        *t.h.last().unwrap()
    };
    let hs = [h(0.5, 0.04), h(0.25, 0.02), h(0.125, 0.01)];
    let (d1, d2) = ((hs[1] - hs[0]).abs(), (hs[2] - hs[1]).abs());
    assert!(d2 < d1, "{hs:?}");
}
