//! H functional, entropy production and thermodynamic consistency checks.
//!
//! Spin degeneracy and the `1/(8π³)` normalization live in the entry weights,
//! so the electron and phonon entropy densities are both `h(x) = ∫₀ˣ ln ratio`
//! against their weights and `S = -H` numerically.
//!
//! The entropy production is available in two algebraically equivalent
//! forms: [`compute_d_moment`] weights every occupation rate with
//! `ln ratio`, [`compute_d_channel`] sums `-F ln(forward/reverse)` over
//! channels. The second form is non-positive term by term.

use crate::bands::{moments, KineticState, Spectrum};
use crate::channels::{ChannelSet, CollisionRates, OccupationFactors};
use crate::equilibrium::{equilibrium_state, match_equilibrium, EquilibriumParams};
use crate::error::{Error, Location, Result};
use crate::system::{KineticSystem, StatisticsSet};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HValues {
    pub phonon: f64,
    pub electron: f64,
    pub total: f64,
}

pub fn compute_h(
    state: &KineticState,
    spectrum: &Spectrum,
    stats: &StatisticsSet,
) -> Result<HValues> {
    spectrum.check_shape(state)?;
    let mut electron = 0.0;
    for (level, &n) in spectrum.band.levels().iter().zip(&state.electrons) {
        let h = stats
            .electron
            .h_density(n)
            .map_err(|e| e.at(Location::Electron { level: level.index }))?;
        electron += level.weight * h;
    }
    let mut phonon = 0.0;
    for (branch, (b, occ)) in spectrum.branches.iter().zip(&state.phonons).enumerate() {
        for (mode, (m, &n)) in b.modes().iter().zip(occ).enumerate() {
            let h = stats
                .phonon
                .h_density(n)
                .map_err(|e| e.at(Location::Phonon { branch, mode }))?;
            phonon += m.weight * h;
        }
    }
    Ok(HValues {
        phonon,
        electron,
        total: phonon + electron,
    })
}

/// `Σ w ẋ ln ratio(x)` over all entries, with `0 · ln 0 = 0`.
pub fn compute_d_moment(
    state: &KineticState,
    rates: &CollisionRates,
    spectrum: &Spectrum,
    stats: &StatisticsSet,
) -> Result<f64> {
    spectrum.check_shape(state)?;
    let term =
        |weighted_rate: f64, x: f64, sp: &crate::StatisticsPair, at: Location| -> Result<f64> {
            if weighted_rate == 0.0 {
                return Ok(0.0);
            }
            let value = weighted_rate * sp.ln_ratio(x).map_err(|e| e.at(at))?;
            if value.is_nan() {
                Err(Error::NotANumber(at))
            } else {
                Ok(value)
            }
        };
    let mut d = 0.0;
    for (level, (rate, &n)) in spectrum
        .band
        .levels()
        .iter()
        .zip(rates.electrons.iter().zip(&state.electrons))
    {
        d += term(
            level.weight * rate,
            n,
            &stats.electron,
            Location::Electron { level: level.index },
        )?;
    }
    for (branch, (b, (r, occ))) in spectrum
        .branches
        .iter()
        .zip(rates.phonons.iter().zip(&state.phonons))
        .enumerate()
    {
        for (mode, (m, (rate, &n))) in b.modes().iter().zip(r.iter().zip(occ)).enumerate() {
            d += term(
                m.weight * rate,
                n,
                &stats.phonon,
                Location::Phonon { branch, mode },
            )?;
        }
    }
    Ok(d)
}

/// `-Σ F ln(forward/reverse)` over all channels.
pub fn compute_d_channel(
    state: &KineticState,
    channels: &ChannelSet,
    stats: &StatisticsSet,
) -> Result<f64> {
    let f = OccupationFactors::new(state, stats)?;
    let term = |strength: f64, (forward, reverse): (f64, f64)| -> f64 {
        let flux = strength * (forward - reverse);
        if flux == 0.0 {
            0.0
        } else {
            -flux * (forward.ln() - reverse.ln())
        }
    };
    let mut d = 0.0;
    for ch in &channels.ep {
        d += term(ch.kernel, ch.terms(&f));
    }
    for ch in &channels.pp {
        d += term(ch.symmetry * ch.kernel, ch.terms(&f));
    }
    if d.is_nan() {
        return Err(Error::InvalidParameter(
            "entropy production evaluated to NaN".into(),
        ));
    }
    Ok(d)
}

/// `S = -H / (8π³)` with the `8π³` absorbed into the weights.
pub fn entropy(h: &HValues) -> f64 {
    -h.total
}

/// One row of the diagnostics time series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub electron_count: f64,
    pub electron_energy: f64,
    pub phonon_energy: f64,
    pub total_energy: f64,
    pub h_phonon: f64,
    pub h_electron: f64,
    pub h: f64,
    pub d_moment: f64,
    pub d_channel: f64,
    pub entropy: f64,
    pub dt: f64,
}

impl DiagnosticsRecord {
    /// `rates` must be the collision rates of `state`.
    pub fn compute(
        state: &KineticState,
        rates: &CollisionRates,
        system: &KineticSystem,
        dt: f64,
    ) -> Result<Self> {
        let spectrum = &system.spectrum;
        let stats = &system.statistics;
        let m = moments(state, spectrum)?;
        let h = compute_h(state, spectrum, stats)?;
        Ok(DiagnosticsRecord {
            t: state.t,
            electron_count: m.electron_count,
            electron_energy: m.electron_energy,
            phonon_energy: m.phonon_energy,
            total_energy: m.total_energy,
            h_phonon: h.phonon,
            h_electron: h.electron,
            h: h.total,
            d_moment: compute_d_moment(state, rates, spectrum, stats)?,
            d_channel: compute_d_channel(state, &system.channels, stats)?,
            entropy: entropy(&h),
            dt,
        })
    }
}

/// Finite-difference entropy derivatives at an equilibrium and their
/// residuals against `-μ/T` and `1/T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoCheck {
    pub ds_dcount: f64,
    pub ds_denergy: f64,
    pub expected_ds_dcount: f64,
    pub expected_ds_denergy: f64,
    /// `|ds_dcount - expected| / |expected|` (absolute when `μ = 0`).
    pub count_residual: f64,
    pub energy_residual: f64,
}

/// Central differences of `S(count, energy)` along the equilibrium manifold
/// with step `h` in each conserved quantity.
pub fn thermo_identities(
    params: EquilibriumParams,
    spectrum: &Spectrum,
    stats: &StatisticsSet,
    h: f64,
) -> Result<ThermoCheck> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "step must be positive, got {h}"
        )));
    }
    let base = moments(&equilibrium_state(params, spectrum, stats)?, spectrum)?;
    let entropy_at = |count: f64, energy: f64| -> Result<f64> {
        let p = match_equilibrium(count, energy, spectrum, stats).map_err(|e| match e {
            Error::Infeasible { .. } => Error::InvalidParameter(alloc::format!(
                "perturbation {h} leaves the feasible region ({e}); try a smaller step"
            )),
            other => other,
        })?;
        let state = equilibrium_state(p, spectrum, stats)?;
        Ok(entropy(&compute_h(&state, spectrum, stats)?))
    };
    let (n, e) = (base.electron_count, base.total_energy);
    let ds_dcount = (entropy_at(n + h, e)? - entropy_at(n - h, e)?) / (2.0 * h);
    let ds_denergy = (entropy_at(n, e + h)? - entropy_at(n, e - h)?) / (2.0 * h);
    let expected_ds_dcount = -params.mu / params.temperature;
    let expected_ds_denergy = 1.0 / params.temperature;
    let rel = |x: f64, expected: f64| {
        let diff = (x - expected).abs();
        if expected == 0.0 {
            diff
        } else {
            diff / expected.abs()
        }
    };
    Ok(ThermoCheck {
        ds_dcount,
        ds_denergy,
        expected_ds_dcount,
        expected_ds_denergy,
        count_residual: rel(ds_dcount, expected_ds_dcount),
        energy_residual: rel(ds_denergy, expected_ds_denergy),
    })
}
