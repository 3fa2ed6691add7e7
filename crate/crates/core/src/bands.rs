//! Energy lattice, electron band, phonon branches and moment functionals.
//!
//! Every energy is an integer multiple of the lattice step, so energy balance
//! in a collision channel reduces to integer index arithmetic. Weights carry
//! the density of states together with the spin degeneracy and the
//! `1/(8π³)` normalization; moments, H and D all sum against the same weights.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Location, Result};
use crate::statistics::StatisticsPair;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyGrid {
    delta: f64,
    electron_levels: usize,
}

impl EnergyGrid {
    pub fn new(delta: f64, electron_levels: usize) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "energy step must be positive, got {delta}"
            )));
        }
        if electron_levels < 2 {
            return Err(Error::InvalidParameter(format!(
                "at least 2 electron levels are required, got {electron_levels}"
            )));
        }
        Ok(EnergyGrid {
            delta,
            electron_levels,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn electron_levels(&self) -> usize {
        self.electron_levels
    }

    pub fn energy(&self, index: usize) -> f64 {
        index as f64 * self.delta
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DosKind {
    /// `w_i = scale Δ`.
    Flat,
    /// Parabolic band, `w_i = scale √ε_i Δ`.
    Sqrt,
    /// Weights as given, one per level; `scale` is ignored.
    Tabulated(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElectronLevel {
    pub index: usize,
    pub energy: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElectronBand {
    levels: Vec<ElectronLevel>,
}

impl ElectronBand {
    pub fn levels(&self) -> &[ElectronLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

pub fn build_band(kind: &DosKind, grid: &EnergyGrid, scale: f64) -> Result<ElectronBand> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "band scale must be positive, got {scale}"
        )));
    }
    let delta = grid.delta();
    let n = grid.electron_levels();
    let weights: Vec<f64> = match kind {
        DosKind::Flat => vec![scale * delta; n],
        DosKind::Sqrt => (0..n)
            .map(|i| scale * grid.energy(i).sqrt() * delta)
            .collect(),
        DosKind::Tabulated(weights) => {
            if weights.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{} tabulated band weights for {n} electron levels",
                    weights.len()
                )));
            }
            if let Some((index, &weight)) = weights
                .iter()
                .enumerate()
                .find(|(_, w)| !(**w >= 0.0) || !w.is_finite())
            {
                return Err(Error::NegativeWeight { index, weight });
            }
            weights.clone()
        }
    };
    let levels = weights
        .into_iter()
        .enumerate()
        .map(|(index, weight)| ElectronLevel {
            index,
            energy: grid.energy(index),
            weight,
        })
        .collect();
    Ok(ElectronBand { levels })
}

#[derive(Clone, Debug, PartialEq)]
pub enum BranchKind {
    /// A single dispersionless mode at grid index `index`.
    Einstein { index: usize },
    /// Modes `1..=cutoff` with weights `scale ω² Δ`.
    Debye { cutoff: usize },
    /// `(grid index, weight)` pairs in increasing index order.
    Tabulated(Vec<(usize, f64)>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhononMode {
    /// Grid index `a`; the mode energy is `a Δ`.
    pub index: usize,
    pub energy: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhononBranch {
    modes: Vec<PhononMode>,
}

impl PhononBranch {
    pub fn modes(&self) -> &[PhononMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

/// Builds a phonon branch. Einstein modes get weight `scale`.
pub fn build_branch(kind: &BranchKind, grid: &EnergyGrid, scale: f64) -> Result<PhononBranch> {
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "branch scale must be non-negative, got {scale}"
        )));
    }
    let delta = grid.delta();
    let mode = |index: usize, weight: f64| PhononMode {
        index,
        energy: grid.energy(index),
        weight,
    };
    let modes = match kind {
        BranchKind::Einstein { index } => {
            if *index == 0 {
                return Err(Error::ZeroEnergyMode);
            }
            vec![mode(*index, scale)]
        }
        BranchKind::Debye { cutoff } => {
            if *cutoff == 0 {
                return Err(Error::InvalidParameter(
                    "Debye cutoff index must be >= 1".into(),
                ));
            }
            (1..=*cutoff)
                .map(|a| {
                    let omega = grid.energy(a);
                    mode(a, scale * omega * omega * delta)
                })
                .collect()
        }
        BranchKind::Tabulated(entries) => {
            let mut modes = Vec::with_capacity(entries.len());
            for (k, &(index, weight)) in entries.iter().enumerate() {
                if index == 0 {
                    return Err(Error::ZeroEnergyMode);
                }
                if !(weight >= 0.0) || !weight.is_finite() {
                    return Err(Error::NegativeWeight { index: k, weight });
                }
                if k > 0 && entries[k - 1].0 >= index {
                    return Err(Error::InvalidParameter(format!(
                        "tabulated mode indices must be strictly increasing (entry {k})"
                    )));
                }
                modes.push(mode(index, weight));
            }
            modes
        }
    };
    Ok(PhononBranch { modes })
}

/// Band plus branches on one energy grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub grid: EnergyGrid,
    pub band: ElectronBand,
    pub branches: Vec<PhononBranch>,
}

impl Spectrum {
    pub fn new(grid: EnergyGrid, band: ElectronBand, branches: Vec<PhononBranch>) -> Result<Self> {
        if band.len() != grid.electron_levels() {
            return Err(Error::DimensionMismatch(format!(
                "band has {} levels, grid has {}",
                band.len(),
                grid.electron_levels()
            )));
        }
        Ok(Spectrum {
            grid,
            band,
            branches,
        })
    }

    /// An all-zero state with this spectrum's shape.
    pub fn zero_state(&self) -> KineticState {
        KineticState {
            t: 0.0,
            electrons: vec![0.0; self.band.len()],
            phonons: self.branches.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn check_shape(&self, state: &KineticState) -> Result<()> {
        let phonon_shape_ok = state.phonons.len() == self.branches.len()
            && state
                .phonons
                .iter()
                .zip(&self.branches)
                .all(|(occ, b)| occ.len() == b.len());
        if state.electrons.len() != self.band.len() || !phonon_shape_ok {
            return Err(Error::DimensionMismatch(format!(
                "state has {} electron levels and {} branches; spectrum has {} levels and {} branches",
                state.electrons.len(),
                state.phonons.len(),
                self.band.len(),
                self.branches.len()
            )));
        }
        Ok(())
    }
}

/// Occupations of every phonon mode and electron level at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct KineticState {
    pub t: f64,
    pub electrons: Vec<f64>,
    /// Indexed `[branch][mode position]`.
    pub phonons: Vec<Vec<f64>>,
}

impl KineticState {
    /// Checks every occupation against its statistics domain, naming the
    /// first offending entry.
    pub fn check_domain(&self, phonon: &StatisticsPair, electron: &StatisticsPair) -> Result<()> {
        for (level, &n) in self.electrons.iter().enumerate() {
            electron
                .check_occupation(n)
                .map_err(|e| e.at(Location::Electron { level }))?;
        }
        for (branch, occ) in self.phonons.iter().enumerate() {
            for (mode, &n) in occ.iter().enumerate() {
                phonon
                    .check_occupation(n)
                    .map_err(|e| e.at(Location::Phonon { branch, mode }))?;
            }
        }
        Ok(())
    }

    /// Largest absolute difference between corresponding occupations.
    pub fn sup_distance(&self, other: &KineticState) -> f64 {
        let e = self
            .electrons
            .iter()
            .zip(&other.electrons)
            .map(|(a, b)| (a - b).abs());
        let p = self
            .phonons
            .iter()
            .zip(&other.phonons)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()));
        e.chain(p).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub electron_count: f64,
    pub electron_energy: f64,
    pub phonon_energy: f64,
    pub total_energy: f64,
}

pub fn moments(state: &KineticState, spectrum: &Spectrum) -> Result<Moments> {
    spectrum.check_shape(state)?;
    let mut count = 0.0;
    let mut electron_energy = 0.0;
    for (level, &n) in spectrum.band.levels().iter().zip(&state.electrons) {
        count += level.weight * n;
        electron_energy += level.weight * level.energy * n;
    }
    let mut phonon_energy = 0.0;
    for (branch, occ) in spectrum.branches.iter().zip(&state.phonons) {
        for (mode, &n) in branch.modes().iter().zip(occ) {
            phonon_energy += mode.weight * mode.energy * n;
        }
    }
    Ok(Moments {
        electron_count: count,
        electron_energy,
        phonon_energy,
        total_energy: electron_energy + phonon_energy,
    })
}
