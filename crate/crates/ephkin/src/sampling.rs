//! Random valid states for the validation report.

use ephkin_core::{KineticState, Spectrum, StatisticsPair, StatisticsSet};
use rand::Rng;

fn occupation<R: Rng>(rng: &mut R, pair: &StatisticsPair) -> f64 {
    let max = pair.occupation_max();
    if max.is_finite() {
        max * rng.random_range(0.01..0.99)
    } else {
        10f64.powf(rng.random_range(-3.0..1.0))
    }
}

/// Occupations drawn strictly inside each statistics domain: uniform over a
/// bounded domain, log-uniform on `[1e-3, 10)` otherwise.
pub fn random_state<R: Rng>(
    rng: &mut R,
    spectrum: &Spectrum,
    stats: &StatisticsSet,
) -> KineticState {
    let mut state = spectrum.zero_state();
    for n in &mut state.electrons {
        *n = occupation(rng, &stats.electron);
    }
    for branch in &mut state.phonons {
        for n in branch {
            *n = occupation(rng, &stats.phonon);
        }
    }
    state
}
