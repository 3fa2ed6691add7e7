//! Equilibrium occupations and moment matching.
//!
//! At equilibrium `ln ratio(N*) = -ω/T` for every phonon mode and
//! `ln ratio(n*) = (μ - ε)/T` for every electron level (`k_B = 1`). Both are
//! inverted with the monotone-ratio bisection of the statistics module.
//! [`match_equilibrium`] solves the inverse problem from the conserved
//! electron count and total energy with nested one-dimensional bisection.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bands::{moments, ElectronBand, KineticState, Moments, PhononBranch, Spectrum};
use crate::error::{Error, Location, Result};
use crate::statistics::StatisticsPair;
use crate::system::StatisticsSet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquilibriumParams {
    pub temperature: f64,
    pub mu: f64,
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!(
            "temperature must be positive, got {t}"
        )))
    }
}

pub fn equilibrium_phonon(
    temperature: f64,
    branches: &[PhononBranch],
    stats: &StatisticsPair,
) -> Result<Vec<Vec<f64>>> {
    check_temperature(temperature)?;
    branches
        .iter()
        .enumerate()
        .map(|(branch, b)| {
            b.modes()
                .iter()
                .enumerate()
                .map(|(mode, m)| {
                    stats
                        .inverse_ratio((-m.energy / temperature).exp())
                        .map_err(|e| e.at(Location::Phonon { branch, mode }))
                })
                .collect()
        })
        .collect()
}

pub fn equilibrium_electron(
    temperature: f64,
    mu: f64,
    band: &ElectronBand,
    stats: &StatisticsPair,
) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    band.levels()
        .iter()
        .map(|l| {
            stats
                .inverse_ratio(((mu - l.energy) / temperature).exp())
                .map_err(|e| e.at(Location::Electron { level: l.index }))
        })
        .collect()
}

pub fn equilibrium_state(
    params: EquilibriumParams,
    spectrum: &Spectrum,
    stats: &StatisticsSet,
) -> Result<KineticState> {
    Ok(KineticState {
        t: 0.0,
        electrons: equilibrium_electron(
            params.temperature,
            params.mu,
            &spectrum.band,
            &stats.electron,
        )?,
        phonons: equilibrium_phonon(params.temperature, &spectrum.branches, &stats.phonon)?,
    })
}

fn electron_count(
    temperature: f64,
    mu: f64,
    band: &ElectronBand,
    stats: &StatisticsPair,
) -> Result<f64> {
    let occ = equilibrium_electron(temperature, mu, band, stats)?;
    Ok(band
        .levels()
        .iter()
        .zip(&occ)
        .map(|(l, n)| l.weight * n)
        .sum())
}

const MAX_EXPANSIONS: usize = 200;
const MAX_BISECTIONS: usize = 2200;

/// Chemical potential reproducing `target` electrons at `temperature`.
///
/// An inversion that saturates (or leaves the attainable ratio range) is
/// treated as lying above the target.
fn solve_mu(
    temperature: f64,
    target: f64,
    band: &ElectronBand,
    stats: &StatisticsPair,
) -> Result<f64> {
    let above = |mu: f64| -> Result<bool> {
        match electron_count(temperature, mu, band, stats) {
            Ok(c) => Ok(c >= target),
            Err(Error::At { source, .. })
                if matches!(*source, Error::Saturated { .. } | Error::NotAttained { .. }) =>
            {
                Ok(true)
            }
            Err(e) => Err(e),
        }
    };

    let (mut lo, mut hi);
    let mut step = temperature.max(1.0);
    if above(0.0)? {
        hi = 0.0;
        lo = -step;
        let mut n = 0;
        while above(lo)? {
            hi = lo;
            step *= 2.0;
            lo = -step;
            n += 1;
            if n > MAX_EXPANSIONS || !lo.is_finite() {
                return Err(Error::NoConvergence { lo, hi });
            }
        }
    } else {
        lo = 0.0;
        hi = step;
        let mut n = 0;
        while !above(hi)? {
            lo = hi;
            step *= 2.0;
            hi = step;
            n += 1;
            if n > MAX_EXPANSIONS || !hi.is_finite() {
                let reached = electron_count(temperature, lo, band, stats).unwrap_or(f64::NAN);
                return Err(Error::Infeasible {
                    quantity: "electron count",
                    target,
                    min: 0.0,
                    max: reached,
                });
            }
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // `hi` may sit on the saturated side; `lo` always evaluates.
    let c_lo = electron_count(temperature, lo, band, stats)?;
    match electron_count(temperature, hi, band, stats) {
        Ok(c_hi) if (c_hi - target).abs() < (target - c_lo).abs() => Ok(hi),
        _ => Ok(lo),
    }
}

fn maximum_count(band: &ElectronBand, stats: &StatisticsPair) -> f64 {
    let max = stats.occupation_max();
    band.levels()
        .iter()
        .filter(|l| l.weight > 0.0)
        .map(|l| l.weight * max)
        .sum()
}

/// Temperature and chemical potential whose equilibrium has the given
/// electron count and total energy.
pub fn match_equilibrium(
    target_count: f64,
    target_energy: f64,
    spectrum: &Spectrum,
    stats: &StatisticsSet,
) -> Result<EquilibriumParams> {
    let count_max = maximum_count(&spectrum.band, &stats.electron);
    if !(target_count > 0.0) || !(target_count < count_max) {
        return Err(Error::Infeasible {
            quantity: "electron count",
            target: target_count,
            min: 0.0,
            max: count_max,
        });
    }
    if !target_energy.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!(
            "target energy must be finite, got {target_energy}"
        )));
    }

    let energy_at = |t: f64| -> Result<(f64, f64)> {
        let mu = solve_mu(t, target_count, &spectrum.band, &stats.electron)?;
        let state = equilibrium_state(EquilibriumParams { temperature: t, mu }, spectrum, stats)?;
        Ok((moments(&state, spectrum)?.total_energy, mu))
    };

    // Differences below this are roundoff in the nested solve.
    let noise = |e: f64| 1e-9 * e.abs().max(target_energy.abs()).max(f64::MIN_POSITIVE);

    // Bracket in ln T, starting from T = 1.
    let (mut ln_lo, mut ln_hi);
    let (e1, _) = energy_at(1.0)?;
    let (mut e_lo, mut e_hi);
    if e1 >= target_energy {
        ln_hi = 0.0;
        e_hi = e1;
        ln_lo = -core::f64::consts::LN_2;
        e_lo = energy_at(ln_lo.exp())?.0;
        let mut n = 0;
        while e_lo >= target_energy {
            if e_lo > e_hi + noise(e_hi) {
                return Err(Error::NonMonotoneEnergy {
                    t_lo: ln_lo.exp(),
                    t_hi: ln_hi.exp(),
                });
            }
            n += 1;
            if n > 40 || e_lo >= e_hi {
                return Err(Error::Infeasible {
                    quantity: "total energy",
                    target: target_energy,
                    min: e_lo,
                    max: f64::INFINITY,
                });
            }
            ln_hi = ln_lo;
            e_hi = e_lo;
            ln_lo -= core::f64::consts::LN_2;
            e_lo = energy_at(ln_lo.exp())?.0;
        }
    } else {
        ln_lo = 0.0;
        e_lo = e1;
        ln_hi = core::f64::consts::LN_2;
        e_hi = energy_at(ln_hi.exp())?.0;
        let mut n = 0;
        while e_hi < target_energy {
            if e_hi < e_lo - noise(e_lo) {
                return Err(Error::NonMonotoneEnergy {
                    t_lo: ln_lo.exp(),
                    t_hi: ln_hi.exp(),
                });
            }
            n += 1;
            // A plateau means the energy has saturated below the target.
            if n > 60 || e_hi <= e_lo {
                return Err(Error::Infeasible {
                    quantity: "total energy",
                    target: target_energy,
                    min: 0.0,
                    max: e_hi,
                });
            }
            ln_lo = ln_hi;
            e_lo = e_hi;
            ln_hi += core::f64::consts::LN_2;
            e_hi = energy_at(ln_hi.exp())?.0;
        }
    }

    for _ in 0..MAX_BISECTIONS {
        let mid = ln_lo + 0.5 * (ln_hi - ln_lo);
        if mid <= ln_lo || mid >= ln_hi {
            break;
        }
        let (e_mid, _) = energy_at(mid.exp())?;
        if e_mid < e_lo - noise(e_lo) || e_mid > e_hi + noise(e_hi) {
            return Err(Error::NonMonotoneEnergy {
                t_lo: ln_lo.exp(),
                t_hi: ln_hi.exp(),
            });
        }
        if e_mid == target_energy {
            ln_lo = mid;
            ln_hi = mid;
            break;
        }
        if e_mid < target_energy {
            ln_lo = mid;
            e_lo = e_mid;
        } else {
            ln_hi = mid;
            e_hi = e_mid;
        }
    }
    let ln_t = if (target_energy - e_lo).abs() <= (e_hi - target_energy).abs() {
        ln_lo
    } else {
        ln_hi
    };
    let temperature = ln_t.exp();
    let (_, mu) = energy_at(temperature)?;
    let params = EquilibriumParams { temperature, mu };

    let m = moments(&equilibrium_state(params, spectrum, stats)?, spectrum)?;
    if !matches_targets(&m, target_count, target_energy, 1e-10) {
        return Err(Error::NoConvergence {
            lo: ln_lo.exp(),
            hi: ln_hi.exp(),
        });
    }
    Ok(params)
}

fn matches_targets(m: &Moments, count: f64, energy: f64, rtol: f64) -> bool {
    (m.electron_count - count).abs() <= rtol * count.abs()
        && (m.total_energy - energy).abs() <= rtol * energy.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::{build_band, build_branch, BranchKind, DosKind, EnergyGrid};
    use core::f64::consts::E;

    fn toy() -> (Spectrum, StatisticsSet) {
        let grid = EnergyGrid::new(1.0, 2).unwrap();
        let band = build_band(&DosKind::Flat, &grid, 1.0).unwrap();
        let branch = build_branch(&BranchKind::Einstein { index: 1 }, &grid, 1.0).unwrap();
        (
            Spectrum::new(grid, band, alloc::vec![branch]).unwrap(),
            StatisticsSet {
                phonon: StatisticsPair::bose(),
                electron: StatisticsPair::fermi(),
            },
        )
    }

    #[test]
    fn phonon_examples() {
        let (s, _) = toy();
        let n = equilibrium_phonon(1.0, &s.branches, &StatisticsPair::bose()).unwrap();
        assert!((n[0][0] - 1.0 / (E - 1.0)).abs() < 1e-14);
        let n = equilibrium_phonon(2.0, &s.branches, &StatisticsPair::classical()).unwrap();
        assert!((n[0][0] - (-0.5f64).exp()).abs() < 1e-15);
        let n = equilibrium_phonon(1e-3, &s.branches, &StatisticsPair::bose()).unwrap();
        assert_eq!(n[0][0], 0.0);
    }

    #[test]
    fn electron_examples() {
        let (s, _) = toy();
        let fermi = StatisticsPair::fermi();
        let n = equilibrium_electron(1.0, 1.0, &s.band, &fermi).unwrap();
        assert!((n[1] - 0.5).abs() < 1e-15);
        let n = equilibrium_electron(1.0, 0.0, &s.band, &fermi).unwrap();
        assert!((n[1] - 1.0 / (E + 1.0)).abs() < 1e-15);
        let grid = EnergyGrid::new(1.0, 3).unwrap();
        let band = build_band(&DosKind::Flat, &grid, 1.0).unwrap();
        let n = equilibrium_electron(1.0, 0.0, &band, &StatisticsPair::classical()).unwrap();
        assert!((n[2] - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_temperature_rejected() {
        let (s, stats) = toy();
        assert!(equilibrium_phonon(0.0, &s.branches, &stats.phonon).is_err());
        assert!(equilibrium_electron(-1.0, 0.0, &s.band, &stats.electron).is_err());
    }

    #[test]
    fn saturation_is_reported() {
        let (s, _) = toy();
        let err = equilibrium_electron(0.01, 1.0, &s.band, &StatisticsPair::fermi()).unwrap_err();
        assert!(matches!(
            err,
            Error::At {
                location: Location::Electron { level: 0 },
                ..
            }
        ));
    }

    #[test]
    fn round_trip() {
        let (s, stats) = toy();
        let p = EquilibriumParams {
            temperature: 1.3,
            mu: -0.2,
        };
        let m = moments(&equilibrium_state(p, &s, &stats).unwrap(), &s).unwrap();
        let back = match_equilibrium(m.electron_count, m.total_energy, &s, &stats).unwrap();
        assert!((back.temperature - 1.3).abs() < 1e-8, "{back:?}");
        assert!((back.mu + 0.2).abs() < 1e-8, "{back:?}");
    }

    #[test]
    fn infeasible_counts() {
        let (s, stats) = toy();
        assert!(matches!(
            match_equilibrium(0.0, 1.0, &s, &stats),
            Err(Error::Infeasible {
                quantity: "electron count",
                ..
            })
        ));
        assert!(matches!(
            match_equilibrium(2.0, 1.0, &s, &stats),
            Err(Error::Infeasible {
                quantity: "electron count",
                ..
            })
        ));
    }

    #[test]
    fn infeasible_energy() {
        let (s, stats) = toy();
        // one electron cannot carry less than zero energy
        assert!(matches!(
            match_equilibrium(0.5, -1.0, &s, &stats),
            Err(Error::Infeasible {
                quantity: "total energy",
                ..
            })
        ));
    }
}
