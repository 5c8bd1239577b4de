//! Fixtures shared by the criterion benches.

use accelspread::simulator::initialize;
use accelspread::{FieldState, GFunction, InitProfile, KernelSet, KernelSpec, ModelParams, SimConfig};

pub fn unit_fixture(alpha: f64, h0: f64) -> (ModelParams, GFunction, KernelSet) {
    let ks = KernelSet::uniform(&KernelSpec::power_law(alpha, 1.0)).expect("kernel");
    (ModelParams::unit(h0), GFunction::monod(2.0), ks)
}

pub fn state_with_nodes(h0: f64, dx: f64) -> FieldState {
    let cfg = SimConfig { dx, ..Default::default() };
    initialize(&ModelParams::unit(h0), &InitProfile::default(), &cfg).expect("state")
}
