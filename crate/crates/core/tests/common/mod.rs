#![allow(dead_code)]

use ephkin_core::{
    build_band, build_branch, enumerate_channels, BranchKind, DosKind, EnergyGrid, KernelModel,
    KineticState, KineticSystem, Spectrum, StatisticsPair, StatisticsSet,
};
use rand::Rng;

pub fn set(phonon: StatisticsPair, electron: StatisticsPair) -> StatisticsSet {
    StatisticsSet { phonon, electron }
}

/// (label, statistics) for the families exercised throughout the suite.
pub fn families() -> Vec<(&'static str, StatisticsSet)> {
    vec![
        (
            "bose/fermi",
            set(StatisticsPair::bose(), StatisticsPair::fermi()),
        ),
        (
            "classical/classical",
            set(StatisticsPair::classical(), StatisticsPair::classical()),
        ),
        (
            "eta=0.5/eta=-0.5",
            set(
                StatisticsPair::eta(0.5).unwrap(),
                StatisticsPair::eta(-0.5).unwrap(),
            ),
        ),
    ]
}

/// Every catalogue pair in every slot.
pub fn catalogue_sets() -> Vec<StatisticsSet> {
    let catalogue = || {
        vec![
            StatisticsPair::bose(),
            StatisticsPair::fermi(),
            StatisticsPair::classical(),
            StatisticsPair::eta(0.5).unwrap(),
            StatisticsPair::eta(-0.5).unwrap(),
        ]
    };
    let mut out = Vec::new();
    for p in catalogue() {
        for e in catalogue() {
            out.push(set(p.clone(), e));
        }
    }
    out
}

pub fn spectrum(
    delta: f64,
    levels: usize,
    dos: DosKind,
    branches: &[(BranchKind, f64)],
) -> Spectrum {
    let grid = EnergyGrid::new(delta, levels).unwrap();
    let band = build_band(&dos, &grid, 1.0).unwrap();
    let branches = branches
        .iter()
        .map(|(kind, scale)| build_branch(kind, &grid, *scale).unwrap())
        .collect();
    Spectrum::new(grid, band, branches).unwrap()
}

/// A small spectrum with two branches, one of them optical.
pub fn small_spectrum() -> Spectrum {
    spectrum(
        0.25,
        12,
        DosKind::Sqrt,
        &[
            (BranchKind::Debye { cutoff: 5 }, 0.5),
            (BranchKind::Einstein { index: 3 }, 0.2),
        ],
    )
}

pub fn system(spectrum: Spectrum, model: KernelModel, statistics: StatisticsSet) -> KineticSystem {
    let channels = enumerate_channels(&spectrum, model).unwrap();
    KineticSystem {
        spectrum,
        channels,
        statistics,
    }
}

fn random_occupation<R: Rng>(rng: &mut R, pair: &StatisticsPair) -> f64 {
    let max = pair.occupation_max();
    if max.is_finite() {
        max * rng.random_range(0.01..0.99)
    } else {
        // Log-uniform over several decades.
        10f64.powf(rng.random_range(-3.0..1.0))
    }
}

/// Occupations drawn strictly inside each domain.
pub fn random_state<R: Rng>(
    rng: &mut R,
    spectrum: &Spectrum,
    stats: &StatisticsSet,
) -> KineticState {
    let mut state = spectrum.zero_state();
    for n in &mut state.electrons {
        *n = random_occupation(rng, &stats.electron);
    }
    for branch in &mut state.phonons {
        for n in branch {
            *n = random_occupation(rng, &stats.phonon);
        }
    }
    state
}

pub fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        d / s
    }
}
