//! Explicit time integration of the space-homogeneous kinetic equations.
//!
//! Steps that would push any occupation out of its statistics domain (below
//! zero or within `safety` of `occupation_max`) are rejected and retried with
//! half the step. The step never grows again, so the accepted steps stay
//! inside the stability region once one has been found. Electron count and energy are linear invariants of the collision
//! operator, so every explicit Runge-Kutta stage preserves them to roundoff.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bands::{KineticState, Spectrum};
use crate::channels::{accumulate_rates, CollisionRates};
use crate::diagnostics::DiagnosticsRecord;
use crate::equilibrium::{equilibrium_electron, equilibrium_phonon};
use crate::error::{Error, Location, Result};
use crate::statistics::StatisticsPair;
use crate::system::{KineticSystem, StatisticsSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Euler,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt_init: f64,
    pub t_end: f64,
    pub method: Method,
    /// Distance kept from `occupation_max`.
    pub safety: f64,
    pub dt_min: f64,
    /// Accepted steps per diagnostics record.
    pub output_stride: usize,
    /// States are captured at the first accepted step at or after each time.
    pub snapshot_times: Vec<f64>,
    /// Converged once every net rate is below this fraction of the flux scale.
    pub convergence_tol: f64,
}

impl IntegratorConfig {
    pub fn new(dt_init: f64, t_end: f64) -> Self {
        IntegratorConfig {
            dt_init,
            t_end,
            method: Method::Rk4,
            safety: 1e-12,
            dt_min: dt_init * 1e-9,
            output_stride: 1,
            snapshot_times: Vec::new(),
            convergence_tol: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.dt_init > 0.0) {
            problems.push(format!("dt must be positive, got {}", self.dt_init));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_init) {
            problems.push(format!("dt_min must lie in (0, dt), got {}", self.dt_min));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            problems.push(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.safety >= 0.0) {
            problems.push(format!(
                "safety margin must be non-negative, got {}",
                self.safety
            ));
        }
        if self.output_stride == 0 {
            problems.push("output_stride must be at least 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(problems.join("; ")))
        }
    }
}

/// Source of collision rates for the integrator.
pub trait RateEvaluator {
    fn rates(&self, system: &KineticSystem, state: &KineticState) -> Result<CollisionRates>;
}

/// Single-threaded evaluation in channel order; the bit-exact reference.
#[derive(Clone, Copy, Debug, Default)]
pub struct SerialRates;

impl RateEvaluator for SerialRates {
    fn rates(&self, system: &KineticSystem, state: &KineticState) -> Result<CollisionRates> {
        accumulate_rates(
            &system.channels,
            state,
            &system.statistics,
            &system.spectrum,
        )
    }
}

#[derive(Debug)]
pub enum DynamicsError {
    /// The step fell below `dt_min` while trying to keep `location` inside
    /// its domain.
    Stiff {
        location: Location,
        t: f64,
        dt: f64,
        last_state: Box<KineticState>,
        records: Vec<DiagnosticsRecord>,
    },
    Model(Error),
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::Stiff { location, t, dt, .. } => write!(
                f,
                "stiffness: step fell to {dt:e} at t = {t} keeping {location} inside its domain; reduce dt or the kernel strengths"
            ),
            DynamicsError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DynamicsError {}

impl From<Error> for DynamicsError {
    fn from(e: Error) -> Self {
        DynamicsError::Model(e)
    }
}

/// First entry outside `[0, occupation_max - safety)`.
fn domain_violation(state: &KineticState, stats: &StatisticsSet, safety: f64) -> Option<Location> {
    let outside = |x: f64, sp: &StatisticsPair| {
        let max = sp.occupation_max();
        !(x >= 0.0) || !x.is_finite() || (max.is_finite() && x >= max - safety)
    };
    if let Some(level) = state
        .electrons
        .iter()
        .position(|&n| outside(n, &stats.electron))
    {
        return Some(Location::Electron { level });
    }
    for (branch, occ) in state.phonons.iter().enumerate() {
        if let Some(mode) = occ.iter().position(|&n| outside(n, &stats.phonon)) {
            return Some(Location::Phonon { branch, mode });
        }
    }
    None
}

fn axpy(state: &KineticState, rates: &CollisionRates, h: f64) -> KineticState {
    KineticState {
        t: state.t + h,
        electrons: state
            .electrons
            .iter()
            .zip(&rates.electrons)
            .map(|(y, k)| y + h * k)
            .collect(),
        phonons: state
            .phonons
            .iter()
            .zip(&rates.phonons)
            .map(|(y, k)| y.iter().zip(k).map(|(y, k)| y + h * k).collect())
            .collect(),
    }
}

enum Attempt {
    Accepted(KineticState),
    Rejected(Location),
}

fn try_step<E: RateEvaluator + ?Sized>(
    state: &KineticState,
    k1: &CollisionRates,
    dt: f64,
    system: &KineticSystem,
    config: &IntegratorConfig,
    evaluator: &E,
) -> Result<Attempt> {
    let stats = &system.statistics;
    let guarded = |s: KineticState| match domain_violation(&s, stats, config.safety) {
        Some(loc) => Err(loc),
        None => Ok(s),
    };
    let eval = |s: &KineticState| -> Result<core::result::Result<CollisionRates, Location>> {
        match evaluator.rates(system, s) {
            Ok(r) => Ok(Ok(r)),
            Err(Error::At { location, source }) if matches!(*source, Error::Domain { .. }) => {
                Ok(Err(location))
            }
            Err(e) => Err(e),
        }
    };
    macro_rules! stage {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(loc) => return Ok(Attempt::Rejected(loc)),
            }
        };
    }
    let next = match config.method {
        Method::Euler => stage!(guarded(axpy(state, k1, dt))),
        Method::Rk4 => {
            let y2 = stage!(guarded(axpy(state, k1, 0.5 * dt)));
            let k2 = stage!(eval(&y2)?);
            let y3 = stage!(guarded(axpy(state, &k2, 0.5 * dt)));
            let k3 = stage!(eval(&y3)?);
            let y4 = stage!(guarded(axpy(state, &k3, dt)));
            let k4 = stage!(eval(&y4)?);
            let mut combined = k1.clone();
            for (c, (b, (d, e))) in combined.electrons.iter_mut().zip(
                k2.electrons
                    .iter()
                    .zip(k3.electrons.iter().zip(&k4.electrons)),
            ) {
                *c += 2.0 * b + 2.0 * d + e;
            }
            for (cb, (bb, (db, eb))) in combined
                .phonons
                .iter_mut()
                .zip(k2.phonons.iter().zip(k3.phonons.iter().zip(&k4.phonons)))
            {
                for (c, (b, (d, e))) in cb.iter_mut().zip(bb.iter().zip(db.iter().zip(eb))) {
                    *c += 2.0 * b + 2.0 * d + e;
                }
            }
            let mut next = stage!(guarded(axpy(state, &combined, dt / 6.0)));
            next.t = state.t + dt;
            next
        }
    };
    Ok(Attempt::Accepted(next))
}

/// Result of one accepted step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub state: KineticState,
    /// The step actually taken, after any halving.
    pub dt: f64,
    pub rejections: usize,
}

enum AdvanceError {
    Stiff { location: Location, dt: f64 },
    Model(Error),
}

impl AdvanceError {
    fn into_dynamics(self, state: &KineticState, records: Vec<DiagnosticsRecord>) -> DynamicsError {
        match self {
            AdvanceError::Stiff { location, dt } => DynamicsError::Stiff {
                location,
                t: state.t,
                dt,
                last_state: Box::new(state.clone()),
                records,
            },
            AdvanceError::Model(e) => DynamicsError::Model(e),
        }
    }
}

fn advance<E: RateEvaluator + ?Sized>(
    state: &KineticState,
    k1: &CollisionRates,
    dt: f64,
    system: &KineticSystem,
    config: &IntegratorConfig,
    evaluator: &E,
) -> core::result::Result<StepOutcome, AdvanceError> {
    let mut dt = dt;
    let mut rejections = 0;
    loop {
        match try_step(state, k1, dt, system, config, evaluator).map_err(AdvanceError::Model)? {
            Attempt::Accepted(next) => {
                return Ok(StepOutcome {
                    state: next,
                    dt,
                    rejections,
                })
            }
            Attempt::Rejected(location) => {
                rejections += 1;
                dt *= 0.5;
                if dt < config.dt_min {
                    return Err(AdvanceError::Stiff { location, dt });
                }
            }
        }
    }
}

/// One step of size `dt` (halved as needed to respect the domain guard).
pub fn step<E: RateEvaluator + ?Sized>(
    state: &KineticState,
    dt: f64,
    system: &KineticSystem,
    config: &IntegratorConfig,
    evaluator: &E,
) -> core::result::Result<StepOutcome, DynamicsError> {
    let k1 = evaluator.rates(system, state)?;
    advance(state, &k1, dt, system, config, evaluator)
        .map_err(|e| e.into_dynamics(state, Vec::new()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// Stopped early because the collision rates vanished.
    Converged,
    /// Reached `t_end`.
    Completed,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub status: RunStatus,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<KineticState>,
    pub final_state: KineticState,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

pub fn run<E: RateEvaluator + ?Sized>(
    initial: &KineticState,
    config: &IntegratorConfig,
    system: &KineticSystem,
    evaluator: &E,
) -> core::result::Result<Trajectory, DynamicsError> {
    config.validate()?;
    system.spectrum.check_shape(initial)?;
    initial.check_domain(&system.statistics.phonon, &system.statistics.electron)?;

    let mut snapshot_times: Vec<f64> = config.snapshot_times.clone();
    snapshot_times.sort_by(|a, b| a.total_cmp(b));
    let mut next_snapshot = 0;
    let mut snapshots = Vec::new();
    let mut take_snapshots = |state: &KineticState, snapshots: &mut Vec<KineticState>| {
        while next_snapshot < snapshot_times.len() && snapshot_times[next_snapshot] <= state.t {
            snapshots.push(state.clone());
            next_snapshot += 1;
        }
    };

    let mut state = initial.clone();
    let mut rates = evaluator.rates(system, &state)?;
    let mut records = Vec::new();
    records.push(DiagnosticsRecord::compute(&state, &rates, system, 0.0)?);
    take_snapshots(&state, &mut snapshots);

    let mut status = RunStatus::Completed;
    let mut accepted = 0;
    let mut rejected = 0;
    if rates.is_stationary(config.convergence_tol) {
        status = RunStatus::Converged;
    } else {
        let mut dt = config.dt_init;
        let t_eps = 1e-12 * config.t_end;
        while config.t_end - state.t > t_eps {
            let remaining = config.t_end - state.t;
            let h = dt.min(remaining);
            let outcome = match advance(&state, &rates, h, system, config, evaluator) {
                Ok(o) => o,
                Err(e) => return Err(e.into_dynamics(&state, records)),
            };
            rejected += outcome.rejections;
            if outcome.rejections > 0 {
                dt = outcome.dt;
            }
            state = outcome.state;
            accepted += 1;
            rates = evaluator.rates(system, &state)?;
            let converged = rates.is_stationary(config.convergence_tol);
            let finished = config.t_end - state.t <= t_eps;
            if accepted % config.output_stride == 0 || converged || finished {
                records.push(DiagnosticsRecord::compute(
                    &state, &rates, system, outcome.dt,
                )?);
            }
            take_snapshots(&state, &mut snapshots);
            if converged {
                status = RunStatus::Converged;
                break;
            }
        }
    }
    Ok(Trajectory {
        status,
        records,
        snapshots,
        final_state: state,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

/// Initial conditions.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Equilibrium {
        temperature: f64,
        mu: f64,
    },
    /// Electrons and phonons each in equilibrium at their own temperature.
    TwoTemperature {
        electron_temperature: f64,
        mu: f64,
        phonon_temperature: f64,
    },
    /// `N_a = amplitude (ω_a/Δ)^(-exponent)` with equilibrium electrons.
    PowerLawPhonons {
        amplitude: f64,
        exponent: f64,
        electron_temperature: f64,
        mu: f64,
    },
    Tabulated {
        electrons: Vec<f64>,
        phonons: Vec<Vec<f64>>,
    },
}

pub fn build_initial_state(
    spec: &InitialSpec,
    spectrum: &Spectrum,
    stats: &StatisticsSet,
) -> Result<KineticState> {
    let (electrons, phonons) = match spec {
        InitialSpec::Equilibrium { temperature, mu } => (
            equilibrium_electron(*temperature, *mu, &spectrum.band, &stats.electron)?,
            equilibrium_phonon(*temperature, &spectrum.branches, &stats.phonon)?,
        ),
        InitialSpec::TwoTemperature {
            electron_temperature,
            mu,
            phonon_temperature,
        } => (
            equilibrium_electron(*electron_temperature, *mu, &spectrum.band, &stats.electron)?,
            equilibrium_phonon(*phonon_temperature, &spectrum.branches, &stats.phonon)?,
        ),
        InitialSpec::PowerLawPhonons {
            amplitude,
            exponent,
            electron_temperature,
            mu,
        } => {
            let delta = spectrum.grid.delta();
            let phonons = spectrum
                .branches
                .iter()
                .map(|b| {
                    b.modes()
                        .iter()
                        .map(|m| amplitude * (m.energy / delta).powf(-exponent))
                        .collect()
                })
                .collect();
            (
                equilibrium_electron(*electron_temperature, *mu, &spectrum.band, &stats.electron)?,
                phonons,
            )
        }
        InitialSpec::Tabulated { electrons, phonons } => (electrons.clone(), phonons.clone()),
    };
    let state = KineticState {
        t: 0.0,
        electrons,
        phonons,
    };
    spectrum.check_shape(&state)?;
    state.check_domain(&stats.phonon, &stats.electron)?;
    Ok(state)
}
