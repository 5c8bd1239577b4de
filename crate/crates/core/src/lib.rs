//! Simulation and verification toolkit for a nonlocal two-species epidemic
//! model with free boundaries and fat-tailed dispersal.

pub mod analysis;
pub mod envelopes;
pub mod error;
pub mod kernels;
pub mod lattice;
pub mod model;
pub mod quadrature;
pub mod semiwave;
pub mod simulator;
pub mod subeig;

pub use analysis::{
    classify, discriminate, fit_linear_speed, fit_power, fit_tlnt, tail_window, theory_rate, DichotomyKind,
    DichotomyVerdict, Preference, RateFit, RateLaw, TheoryLaw, Thresholds,
};
pub use envelopes::{
    envelope_compare, eval_lower, eval_upper, residual_check, search_constants, CompareReport, EnvelopeCase,
    EnvelopeConstants, EnvelopeSpec, ResidualGrid, ResidualReport, SearchOutcome, SearchRanges,
};
pub use error::{Error, Result};
pub use kernels::{check_conditions, dominance, normalize, Kernel, KernelReport, KernelSet, KernelSpec};
pub use model::{
    basic_reproduction_number, linearized_eigenpair, positive_equilibrium, Equilibrium, GFunction,
    LinearizedEigenpair, ModelParams,
};
pub use semiwave::{solve_profile, solve_speed, speed_mismatch, Profiles, SemiWaveConfig, SemiWaveSolution};
pub use simulator::{run, FieldState, InitProfile, SimConfig, Simulator, StopReason, Trajectory};
pub use subeig::{build_profile, check_convexity, minimal_scale, verify_subeigen, ProfileFamily, ProfileSpec, SubEigReport};
