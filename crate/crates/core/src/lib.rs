//! Space-homogeneous kinetic equations for coupled electrons and phonons
//! obeying generalized quantum statistics.
//!
//! Occupations live on a uniform energy lattice. Phonon splitting/merging and
//! electron-phonon emission/absorption are enumerated as discrete,
//! exactly energy-conserving channels, so electron number and total energy are
//! algebraic invariants of the collision operator. On top of that the crate
//! provides equilibrium construction and moment matching, an explicit
//! integrator with domain guards, and the H / entropy-production diagnostics.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, configuration and
//! the command-line driver live in the `ephkin` crate.

#![no_std]
// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod quadrature;

pub mod bands;
pub mod channels;
pub mod diagnostics;
pub mod dynamics;
pub mod equilibrium;
pub mod statistics;
pub mod system;

pub use bands::{
    build_band, build_branch, moments, BranchKind, DosKind, ElectronBand, ElectronLevel,
    EnergyGrid, KineticState, Moments, PhononBranch, PhononMode, Spectrum,
};
pub use channels::{
    accumulate_rates, enumerate_channels, ChannelSet, CollisionRates, EpChannel, KernelEntry,
    KernelModel, ModeRef, OccupationFactors, PpChannel, RateAccumulator,
};
pub use diagnostics::{
    compute_d_channel, compute_d_moment, compute_h, entropy, thermo_identities, DiagnosticsRecord,
    HValues, ThermoCheck,
};
pub use dynamics::{
    build_initial_state, run, step, DynamicsError, InitialSpec, IntegratorConfig, Method,
    RateEvaluator, RunStatus, SerialRates, StepOutcome, Trajectory,
};
pub use equilibrium::{
    equilibrium_electron, equilibrium_phonon, equilibrium_state, match_equilibrium,
    EquilibriumParams,
};
pub use error::{Error, Location, Result};
pub use statistics::{InvariantCheck, PairFunctions, StatisticsPair};
pub use system::{KineticSystem, StatisticsSet};
