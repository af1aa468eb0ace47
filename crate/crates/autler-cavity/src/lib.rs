//! Simulator for the probe absorption spectrum of a V-type three-level atom
//! whose two optical transitions share one lossy, thermally driven cavity
//! mode, in the bad-cavity regime where the field can be adiabatically
//! eliminated.
//!
//! The reduced description keeps four atomic moments (two excited
//! populations and the excited-doublet coherence). The cavity enters only
//! through the complex kernels F(+-omega21) = 1/(kappa + i(delta +-
//! omega21/2)), which set the cavity-induced decay rates, the level shifts
//! of the two sidebands, and the eta-switchable cross-damping that couples
//! the two decay channels. The weak-probe spectrum follows from the quantum
//! regression theorem as a 2x2 resolvent and splits exactly into a
//! population part and a coherence part. A brute-force oracle solves the
//! un-eliminated atom+cavity Lindblad equation on a truncated Fock space to
//! certify the elimination.
//!
//! One structural property dominates the phenomenology and is worth knowing
//! before reading any output: the thermally occupied atomic state p0 =
//! (N+1)/(3N+1), p1 = p2 = N/(3N+1) with zero coherence is a fixed point of
//! the reduced equations for every detuning and every value of the
//! interference switch, because each coherence-feeding term combines its
//! pump and decay contributions in a flux form that vanishes at thermal
//! occupation. The joint atom+cavity model has the matching product
//! steady state, exactly thermal in the total excitation number. As a
//! consequence this model produces no steady-state population inversion, no
//! stationary excited-doublet coherence and no probe gain anywhere in
//! parameter space; the acceptance suite reports the checks that expect
//! those effects as failing, with the measured numbers.
//!
//! Modules:
//!
//! * [`params`]: physical inputs, derived rate kernels, config parsing.
//! * [`bloch`]: the reduced population/coherence equations and their steady
//!   state.
//! * [`spectrum`]: regression-theorem spectrum, decomposition, peaks, sum
//!   rule.
//! * [`oracle`]: truncated joint-model ground truth.
//! * [`sweeps`]: figure-preset registry and deterministic batch execution.
//! * [`linalg`]: thin LAPACK bindings the above share.

pub mod bloch;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod params;
pub mod spectrum;
pub mod sweeps;

pub use bloch::{steady_state, AtomState};
pub use error::{Error, Result};
pub use params::{ModelParams, PartialParams, RateKernel};
pub use spectrum::{SpectrumPoint, SpectrumTrace};

/// Crate version, embedded in provenance output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
