use accelspread::simulator::{boundary_flux, convolve};
use accelspread::{Kernel, KernelSpec};
use accelspread_bench::{state_with_nodes, unit_fixture};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn cumulants(c: &mut Criterion) {
    let k = Kernel::new(KernelSpec::power_law(1.5, 1.0)).unwrap();
    c.bench_function("cumulants_power_law", |b| b.iter(|| k.cumulants(black_box(37.5))));
}

fn direct_convolve(c: &mut Criterion) {
    let k = Kernel::new(KernelSpec::power_law(1.5, 1.0)).unwrap();
    let mut g = c.benchmark_group("convolve_direct");
    for h0 in [10.0, 40.0] {
        let s = state_with_nodes(h0, 0.25);
        g.bench_with_input(BenchmarkId::from_parameter(s.x.len()), &s, |b, s| {
            b.iter(|| convolve(&k, black_box(&s.u), s))
        });
    }
    g.finish();
}

fn flux(c: &mut Criterion) {
    let (p, _, ks) = unit_fixture(1.5, 20.0);
    let s = state_with_nodes(20.0, 0.25);
    c.bench_function("boundary_flux", |b| b.iter(|| boundary_flux(black_box(&s), &p, &ks)));
}

criterion_group!(benches, cumulants, direct_convolve, flux);
criterion_main!(benches);
