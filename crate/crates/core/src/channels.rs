//! Discrete collision channels and the generalized collision operator.
//!
//! Each physical process is enumerated once as a channel with a single
//! microreversible kernel. A channel's net flux is distributed to the entries
//! it touches with weight-divided signs, so electron number and total energy
//! balance term by term:
//!
//! * electron-phonon: `j -> i + (g, a)` with `ε_j = ε_i + ω_a`,
//!   `F = K [φ(n_j) ψ(n_i) Ψ(N_a) - φ(n_i) ψ(n_j) Φ(N_a)]`;
//! * phonon-phonon: `(g, a) -> (g₁, b) + (g₂, c)` with `ω_a = ω_b + ω_c`,
//!   `F = σ K [Φ(N_a) Ψ(N_b) Ψ(N_c) - Ψ(N_a) Φ(N_b) Φ(N_c)]`, `σ = 1/2` when
//!   both daughters are the same mode.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bands::{KineticState, Spectrum};
use crate::error::{Error, Result};
use crate::system::StatisticsSet;

/// A phonon mode addressed by branch and position within the branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModeRef {
    pub branch: usize,
    pub mode: usize,
}

/// Electron transition `upper -> lower` with emission of `phonon`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpChannel {
    pub lower: usize,
    pub upper: usize,
    pub phonon: ModeRef,
    pub kernel: f64,
}

/// Splitting of `parent` into `first + second`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PpChannel {
    pub parent: ModeRef,
    pub first: ModeRef,
    pub second: ModeRef,
    pub symmetry: f64,
    pub kernel: f64,
}

/// Occupation factors `up(x)`, `down(x)` of every entry of a state.
#[derive(Clone, Debug)]
pub struct OccupationFactors {
    electron_up: Vec<f64>,
    electron_down: Vec<f64>,
    phonon_up: Vec<Vec<f64>>,
    phonon_down: Vec<Vec<f64>>,
}

impl OccupationFactors {
    pub fn new(state: &KineticState, stats: &StatisticsSet) -> Result<Self> {
        state.check_domain(&stats.phonon, &stats.electron)?;
        let e = &stats.electron;
        let p = &stats.phonon;
        Ok(OccupationFactors {
            electron_up: state.electrons.iter().map(|&n| e.up(n)).collect(),
            electron_down: state.electrons.iter().map(|&n| e.down(n)).collect(),
            phonon_up: state
                .phonons
                .iter()
                .map(|b| b.iter().map(|&n| p.up(n)).collect())
                .collect(),
            phonon_down: state
                .phonons
                .iter()
                .map(|b| b.iter().map(|&n| p.down(n)).collect())
                .collect(),
        })
    }

    fn phonon(&self, m: ModeRef) -> (f64, f64) {
        (
            self.phonon_up[m.branch][m.mode],
            self.phonon_down[m.branch][m.mode],
        )
    }
}

impl EpChannel {
    /// `(emission, absorption)` product terms, without the kernel.
    pub fn terms(&self, f: &OccupationFactors) -> (f64, f64) {
        let (big_up, big_down) = f.phonon(self.phonon);
        let emission = f.electron_up[self.upper] * f.electron_down[self.lower] * big_down;
        let absorption = f.electron_up[self.lower] * f.electron_down[self.upper] * big_up;
        (emission, absorption)
    }

    pub fn flux_with(&self, f: &OccupationFactors) -> f64 {
        let (forward, reverse) = self.terms(f);
        self.kernel * (forward - reverse)
    }

    /// Net emission rate; positive when emission dominates.
    pub fn flux(&self, state: &KineticState, stats: &StatisticsSet) -> Result<f64> {
        let (e, p) = (&stats.electron, &stats.phonon);
        let n_lower = state.electrons[self.lower];
        let n_upper = state.electrons[self.upper];
        let big_n = state.phonons[self.phonon.branch][self.phonon.mode];
        for (sp, x) in [(e, n_lower), (e, n_upper), (p, big_n)] {
            sp.check_occupation(x)?;
        }
        let forward = e.up(n_upper) * e.down(n_lower) * p.down(big_n);
        let reverse = e.up(n_lower) * e.down(n_upper) * p.up(big_n);
        Ok(self.kernel * (forward - reverse))
    }
}

impl PpChannel {
    /// `(splitting, merging)` product terms, without kernel or symmetry factor.
    pub fn terms(&self, f: &OccupationFactors) -> (f64, f64) {
        let (up_a, down_a) = f.phonon(self.parent);
        let (up_b, down_b) = f.phonon(self.first);
        let (up_c, down_c) = f.phonon(self.second);
        (up_a * down_b * down_c, down_a * up_b * up_c)
    }

    pub fn flux_with(&self, f: &OccupationFactors) -> f64 {
        let (forward, reverse) = self.terms(f);
        self.symmetry * self.kernel * (forward - reverse)
    }

    /// Net splitting rate.
    pub fn flux(&self, state: &KineticState, stats: &StatisticsSet) -> Result<f64> {
        let p = &stats.phonon;
        let n = |m: ModeRef| state.phonons[m.branch][m.mode];
        let (a, b, c) = (n(self.parent), n(self.first), n(self.second));
        for x in [a, b, c] {
            p.check_occupation(x)?;
        }
        let forward = p.up(a) * p.down(b) * p.down(c);
        let reverse = p.down(a) * p.up(b) * p.up(c);
        Ok(self.symmetry * self.kernel * (forward - reverse))
    }
}

/// Kernel strengths: `K_ep = ep_k0 (ω_a/Δ)^ep_power`, `K_pp = pp_k0`.
/// `ep_power = 0` is the constant model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelModel {
    pub ep_k0: f64,
    pub ep_power: f64,
    pub pp_k0: f64,
}

impl KernelModel {
    pub fn constant(ep_k0: f64, pp_k0: f64) -> Self {
        KernelModel {
            ep_k0,
            ep_power: 0.0,
            pp_k0,
        }
    }

    pub fn ep_kernel(&self, mode_index: usize) -> f64 {
        if self.ep_power == 0.0 {
            self.ep_k0
        } else {
            self.ep_k0 * (mode_index as f64).powf(self.ep_power)
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.ep_k0 >= 0.0
            && self.pp_k0 >= 0.0
            && self.ep_k0.is_finite()
            && self.pp_k0.is_finite()
            && self.ep_power.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid kernel model {self:?}"
            )))
        }
    }
}

/// A per-channel kernel override. Modes are given by branch and grid index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelEntry {
    Ep {
        lower: usize,
        upper: usize,
        branch: usize,
        mode_index: usize,
        kernel: f64,
    },
    Pp {
        parent: (usize, usize),
        first: (usize, usize),
        second: (usize, usize),
        kernel: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    pub ep: Vec<EpChannel>,
    pub pp: Vec<PpChannel>,
    pub model: KernelModel,
}

impl ChannelSet {
    pub fn len(&self) -> usize {
        self.ep.len() + self.pp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Overrides kernels of existing channels.
    ///
    /// An entry naming a channel that was skipped because it touches a
    /// zero-weight entry is a configuration error, as is an entry that does
    /// not describe an energy-conserving channel on the grid.
    pub fn apply_table(&mut self, entries: &[KernelEntry], spectrum: &Spectrum) -> Result<()> {
        for entry in entries {
            match *entry {
                KernelEntry::Ep {
                    lower,
                    upper,
                    branch,
                    mode_index,
                    kernel,
                } => {
                    check_kernel(kernel, entry)?;
                    let label =
                        || format!("ep channel {upper} -> {lower} + ({branch}, {mode_index})");
                    let mode = find_mode(spectrum, branch, mode_index)
                        .filter(|_| upper == lower + mode_index && upper < spectrum.band.len())
                        .ok_or_else(|| Error::UnknownChannel(label()))?;
                    match self
                        .ep
                        .iter_mut()
                        .find(|c| c.lower == lower && c.upper == upper && c.phonon == mode)
                    {
                        Some(ch) => ch.kernel = kernel,
                        None => return Err(Error::ZeroWeightChannel(label())),
                    }
                }
                KernelEntry::Pp {
                    parent,
                    first,
                    second,
                    kernel,
                } => {
                    check_kernel(kernel, entry)?;
                    let label = || format!("pp channel {parent:?} -> {first:?} + {second:?}");
                    let lookup = |(b, a): (usize, usize)| find_mode(spectrum, b, a);
                    let (p, mut f, mut s) = match (lookup(parent), lookup(first), lookup(second)) {
                        (Some(p), Some(f), Some(s)) if parent.1 == first.1 + second.1 => (p, f, s),
                        _ => return Err(Error::UnknownChannel(label())),
                    };
                    if s < f {
                        core::mem::swap(&mut f, &mut s);
                    }
                    match self
                        .pp
                        .iter_mut()
                        .find(|c| c.parent == p && c.first == f && c.second == s)
                    {
                        Some(ch) => ch.kernel = kernel,
                        None => return Err(Error::ZeroWeightChannel(label())),
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_kernel(kernel: f64, entry: &KernelEntry) -> Result<()> {
    if kernel >= 0.0 && kernel.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "negative or non-finite kernel in {entry:?}"
        )))
    }
}

fn find_mode(spectrum: &Spectrum, branch: usize, index: usize) -> Option<ModeRef> {
    let modes = spectrum.branches.get(branch)?.modes();
    modes
        .binary_search_by_key(&index, |m| m.index)
        .ok()
        .map(|mode| ModeRef { branch, mode })
}

/// Enumerates every energy-conserving channel whose partners all lie on the
/// grid with positive weight.
pub fn enumerate_channels(spectrum: &Spectrum, model: KernelModel) -> Result<ChannelSet> {
    model.validate()?;
    let levels = spectrum.band.levels();
    let mut modes: Vec<(ModeRef, usize)> = Vec::new();
    for (branch, b) in spectrum.branches.iter().enumerate() {
        for (mode, m) in b.modes().iter().enumerate() {
            if m.weight > 0.0 {
                modes.push((ModeRef { branch, mode }, m.index));
            }
        }
    }

    let mut ep = Vec::new();
    for &(phonon, a) in &modes {
        let kernel = model.ep_kernel(a);
        for lower in 0..levels.len() {
            let upper = lower + a;
            if upper >= levels.len() {
                break;
            }
            if levels[lower].weight > 0.0 && levels[upper].weight > 0.0 {
                ep.push(EpChannel {
                    lower,
                    upper,
                    phonon,
                    kernel,
                });
            }
        }
    }

    let mut pp = Vec::new();
    for &(parent, a) in &modes {
        for (k, &(first, b)) in modes.iter().enumerate() {
            if b >= a {
                continue;
            }
            for &(second, c) in &modes[k..] {
                if b + c == a {
                    pp.push(PpChannel {
                        parent,
                        first,
                        second,
                        symmetry: if first == second { 0.5 } else { 1.0 },
                        kernel: model.pp_k0,
                    });
                }
            }
        }
    }
    Ok(ChannelSet { ep, pp, model })
}

/// Weighted net and gross rates, before division by entry weights.
///
/// Partial accumulators over disjoint channel ranges can be merged; merging in
/// a fixed order keeps the result deterministic.
#[derive(Clone, Debug)]
pub struct RateAccumulator {
    electrons: Vec<f64>,
    phonons: Vec<Vec<f64>>,
    electrons_gross: Vec<f64>,
    phonons_gross: Vec<Vec<f64>>,
}

impl RateAccumulator {
    pub fn zeros(spectrum: &Spectrum) -> Self {
        let phonons: Vec<Vec<f64>> = spectrum
            .branches
            .iter()
            .map(|b| vec![0.0; b.len()])
            .collect();
        RateAccumulator {
            electrons: vec![0.0; spectrum.band.len()],
            electrons_gross: vec![0.0; spectrum.band.len()],
            phonons_gross: phonons.clone(),
            phonons,
        }
    }

    pub fn add_ep(&mut self, channels: &[EpChannel], f: &OccupationFactors) {
        for ch in channels {
            let (forward, reverse) = ch.terms(f);
            let flux = ch.kernel * (forward - reverse);
            let gross = ch.kernel * (forward + reverse);
            let p = ch.phonon;
            self.electrons[ch.lower] += flux;
            self.electrons[ch.upper] -= flux;
            self.phonons[p.branch][p.mode] += flux;
            self.electrons_gross[ch.lower] += gross;
            self.electrons_gross[ch.upper] += gross;
            self.phonons_gross[p.branch][p.mode] += gross;
        }
    }

    pub fn add_pp(&mut self, channels: &[PpChannel], f: &OccupationFactors) {
        for ch in channels {
            let (forward, reverse) = ch.terms(f);
            let scale = ch.symmetry * ch.kernel;
            let flux = scale * (forward - reverse);
            let gross = scale * (forward + reverse);
            for (m, sign) in [(ch.parent, -1.0), (ch.first, 1.0), (ch.second, 1.0)] {
                self.phonons[m.branch][m.mode] += sign * flux;
                self.phonons_gross[m.branch][m.mode] += gross;
            }
        }
    }

    pub fn merge(&mut self, other: &RateAccumulator) {
        fn add(into: &mut [f64], from: &[f64]) {
            for (a, b) in into.iter_mut().zip(from) {
                *a += b;
            }
        }
        add(&mut self.electrons, &other.electrons);
        add(&mut self.electrons_gross, &other.electrons_gross);
        for (a, b) in self.phonons.iter_mut().zip(&other.phonons) {
            add(a, b);
        }
        for (a, b) in self.phonons_gross.iter_mut().zip(&other.phonons_gross) {
            add(a, b);
        }
    }

    /// Divides by entry weights; zero-weight entries get zero rate.
    pub fn finish(self, spectrum: &Spectrum) -> CollisionRates {
        let per_weight = |x: f64, w: f64| if w > 0.0 { x / w } else { 0.0 };
        let mut scale = 0.0_f64;
        let mut electrons = self.electrons;
        for ((rate, gross), level) in electrons
            .iter_mut()
            .zip(&self.electrons_gross)
            .zip(spectrum.band.levels())
        {
            *rate = per_weight(*rate, level.weight);
            scale = scale.max(per_weight(*gross, level.weight));
        }
        let mut phonons = self.phonons;
        for ((rates, gross), branch) in phonons
            .iter_mut()
            .zip(&self.phonons_gross)
            .zip(&spectrum.branches)
        {
            for ((rate, g), mode) in rates.iter_mut().zip(gross).zip(branch.modes()) {
                *rate = per_weight(*rate, mode.weight);
                scale = scale.max(per_weight(*g, mode.weight));
            }
        }
        CollisionRates {
            electrons,
            phonons,
            scale,
        }
    }
}

/// Occupation rates `dn/dt`, `dN/dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionRates {
    pub electrons: Vec<f64>,
    pub phonons: Vec<Vec<f64>>,
    /// Largest gross (gain plus loss) occupation rate of any entry; the
    /// characteristic flux scale against which net rates are judged.
    pub scale: f64,
}

impl CollisionRates {
    pub fn sup_norm(&self) -> f64 {
        self.electrons
            .iter()
            .chain(self.phonons.iter().flatten())
            .fold(0.0, |m, r| m.max(r.abs()))
    }

    /// True when every net rate is at most `rel_tol` times the flux scale.
    pub fn is_stationary(&self, rel_tol: f64) -> bool {
        self.sup_norm() <= rel_tol * self.scale
    }

    /// Relative residuals of electron-number and energy balance,
    /// `|Σ w ṅ| / Σ w |ṅ|` and the analogous energy expression.
    pub fn conservation_residuals(&self, spectrum: &Spectrum) -> (f64, f64) {
        let (mut count, mut count_abs) = (0.0, 0.0);
        let (mut energy, mut energy_abs) = (0.0, 0.0);
        for (rate, level) in self.electrons.iter().zip(spectrum.band.levels()) {
            count += level.weight * rate;
            count_abs += (level.weight * rate).abs();
            energy += level.weight * level.energy * rate;
            energy_abs += (level.weight * level.energy * rate).abs();
        }
        for (rates, branch) in self.phonons.iter().zip(&spectrum.branches) {
            for (rate, mode) in rates.iter().zip(branch.modes()) {
                energy += mode.weight * mode.energy * rate;
                energy_abs += (mode.weight * mode.energy * rate).abs();
            }
        }
        let rel = |x: f64, d: f64| if d > 0.0 { x.abs() / d } else { 0.0 };
        (rel(count, count_abs), rel(energy, energy_abs))
    }
}

/// Full collision operator evaluated serially in channel order.
pub fn accumulate_rates(
    channels: &ChannelSet,
    state: &KineticState,
    stats: &StatisticsSet,
    spectrum: &Spectrum,
) -> Result<CollisionRates> {
    spectrum.check_shape(state)?;
    let factors = OccupationFactors::new(state, stats)?;
    let mut acc = RateAccumulator::zeros(spectrum);
    acc.add_ep(&channels.ep, &factors);
    acc.add_pp(&channels.pp, &factors);
    Ok(acc.finish(spectrum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::{build_band, build_branch, BranchKind, DosKind, EnergyGrid};
    use crate::statistics::StatisticsPair;

    fn bose_fermi() -> StatisticsSet {
        StatisticsSet {
            phonon: StatisticsPair::bose(),
            electron: StatisticsPair::fermi(),
        }
    }

    fn spectrum(levels: usize, branch: BranchKind) -> Spectrum {
        let grid = EnergyGrid::new(1.0, levels).unwrap();
        let band = build_band(&DosKind::Flat, &grid, 1.0).unwrap();
        let branch = build_branch(&branch, &grid, 1.0).unwrap();
        Spectrum::new(grid, band, vec![branch]).unwrap()
    }

    fn single_channel() -> (Spectrum, ChannelSet) {
        let s = spectrum(2, BranchKind::Tabulated(vec![(1, 1.0)]));
        let ch = enumerate_channels(&s, KernelModel::constant(1.0, 1.0)).unwrap();
        (s, ch)
    }

    fn state(electrons: &[f64], phonons: &[f64]) -> KineticState {
        KineticState {
            t: 0.0,
            electrons: electrons.to_vec(),
            phonons: vec![phonons.to_vec()],
        }
    }

    #[test]
    fn enumeration_examples() {
        let (_, ch) = single_channel();
        assert_eq!(ch.ep.len(), 1);
        assert_eq!((ch.ep[0].lower, ch.ep[0].upper), (0, 1));
        assert!(ch.pp.is_empty());

        let debye = spectrum(2, BranchKind::Debye { cutoff: 3 });
        let ch = enumerate_channels(&debye, KernelModel::constant(1.0, 1.0)).unwrap();
        let triples: Vec<(usize, usize, usize, f64)> = ch
            .pp
            .iter()
            .map(|c| {
                (
                    c.parent.mode + 1,
                    c.first.mode + 1,
                    c.second.mode + 1,
                    c.symmetry,
                )
            })
            .collect();
        assert_eq!(triples, vec![(2, 1, 1, 0.5), (3, 1, 2, 1.0)]);

        let einstein = spectrum(2, BranchKind::Einstein { index: 2 });
        let ch = enumerate_channels(&einstein, KernelModel::constant(1.0, 1.0)).unwrap();
        assert!(ch.pp.is_empty());
        assert!(ch.ep.is_empty(), "ω = 2 does not fit between 2 levels");
    }

    #[test]
    fn zero_weight_entries_get_no_channels() {
        let grid = EnergyGrid::new(1.0, 3).unwrap();
        let band = build_band(&DosKind::Sqrt, &grid, 1.0).unwrap();
        let branch =
            build_branch(&BranchKind::Tabulated(vec![(1, 1.0), (2, 0.0)]), &grid, 1.0).unwrap();
        let s = Spectrum::new(grid, band, vec![branch]).unwrap();
        let ch = enumerate_channels(&s, KernelModel::constant(1.0, 1.0)).unwrap();
        // level 0 has zero weight, mode ω=2 has zero weight: only 1 -> 2 via ω=1 survives
        assert_eq!(ch.ep.len(), 1);
        assert_eq!((ch.ep[0].lower, ch.ep[0].upper), (1, 2));
        assert!(ch.pp.is_empty());
    }

    #[test]
    fn ep_flux_examples() {
        let (_, ch) = single_channel();
        let stats = bose_fermi();
        let f = ch.ep[0].flux(&state(&[0.5, 0.25], &[0.5]), &stats).unwrap();
        assert!(f.abs() < 1e-16, "{f}");
        let f = ch.ep[0].flux(&state(&[0.5, 0.5], &[0.5]), &stats).unwrap();
        assert!((f - 0.25).abs() < 1e-15);
        for stats in [
            bose_fermi(),
            StatisticsSet {
                phonon: StatisticsPair::classical(),
                electron: StatisticsPair::eta(-0.5).unwrap(),
            },
        ] {
            assert_eq!(
                ch.ep[0].flux(&state(&[0.0, 0.0], &[0.0]), &stats).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn pp_flux_examples() {
        let s = spectrum(2, BranchKind::Debye { cutoff: 2 });
        let ch = enumerate_channels(&s, KernelModel::constant(1.0, 1.0)).unwrap();
        assert_eq!(ch.pp.len(), 1);
        let st = state(&[0.0, 0.0], &[0.5, 1.0]);
        let f = ch.pp[0].flux(&st, &bose_fermi()).unwrap();
        assert!((f - 0.875).abs() < 1e-15);
        let zero = state(&[0.0, 0.0], &[0.0, 0.0]);
        assert_eq!(ch.pp[0].flux(&zero, &bose_fermi()).unwrap(), 0.0);
    }

    #[test]
    fn accumulate_single_channel() {
        let (s, ch) = single_channel();
        let rates = accumulate_rates(&ch, &state(&[0.5, 0.5], &[0.5]), &bose_fermi(), &s).unwrap();
        assert_eq!(rates.electrons, vec![0.25, -0.25]);
        assert_eq!(rates.phonons, vec![vec![0.25]]);
        let energy: f64 = 0.0 * 0.25 + 1.0 * -0.25 + 1.0 * 0.25;
        assert_eq!(energy, 0.0);
        assert_eq!(rates.conservation_residuals(&s), (0.0, 0.0));
    }

    #[test]
    fn empty_channel_set_gives_zero_rates() {
        let s = spectrum(3, BranchKind::Einstein { index: 5 });
        let ch = enumerate_channels(&s, KernelModel::constant(1.0, 1.0)).unwrap();
        assert!(ch.is_empty());
        let rates =
            accumulate_rates(&ch, &state(&[0.3, 0.2, 0.1], &[1.0]), &bose_fermi(), &s).unwrap();
        assert_eq!(rates.sup_norm(), 0.0);
    }

    #[test]
    fn domain_violation_propagates() {
        let (s, ch) = single_channel();
        let err =
            accumulate_rates(&ch, &state(&[0.5, 1.2], &[0.5]), &bose_fermi(), &s).unwrap_err();
        assert!(matches!(err, Error::At { .. }));
    }

    #[test]
    fn kernel_table_overrides() {
        let s = spectrum(4, BranchKind::Debye { cutoff: 2 });
        let mut ch = enumerate_channels(&s, KernelModel::constant(1.0, 1.0)).unwrap();
        ch.apply_table(
            &[
                KernelEntry::Ep {
                    lower: 1,
                    upper: 3,
                    branch: 0,
                    mode_index: 2,
                    kernel: 0.3,
                },
                KernelEntry::Pp {
                    parent: (0, 2),
                    first: (0, 1),
                    second: (0, 1),
                    kernel: 0.7,
                },
            ],
            &s,
        )
        .unwrap();
        let ep = ch.ep.iter().find(|c| c.lower == 1 && c.upper == 3).unwrap();
        assert_eq!(ep.kernel, 0.3);
        assert_eq!(ch.pp[0].kernel, 0.7);

        let bad = KernelEntry::Ep {
            lower: 1,
            upper: 2,
            branch: 0,
            mode_index: 2,
            kernel: 1.0,
        };
        assert!(matches!(
            ch.apply_table(&[bad], &s),
            Err(Error::UnknownChannel(_))
        ));
    }

    #[test]
    fn kernel_table_zero_weight_is_error() {
        let grid = EnergyGrid::new(1.0, 3).unwrap();
        let band = build_band(&DosKind::Sqrt, &grid, 1.0).unwrap();
        let branch = build_branch(&BranchKind::Debye { cutoff: 1 }, &grid, 1.0).unwrap();
        let s = Spectrum::new(grid, band, vec![branch]).unwrap();
        let mut ch = enumerate_channels(&s, KernelModel::constant(1.0, 1.0)).unwrap();
        let entry = KernelEntry::Ep {
            lower: 0,
            upper: 1,
            branch: 0,
            mode_index: 1,
            kernel: 1.0,
        };
        assert!(matches!(
            ch.apply_table(&[entry], &s),
            Err(Error::ZeroWeightChannel(_))
        ));
    }

    #[test]
    fn power_law_kernel() {
        let m = KernelModel {
            ep_k0: 2.0,
            ep_power: 2.0,
            pp_k0: 1.0,
        };
        assert_eq!(m.ep_kernel(3), 18.0);
        assert_eq!(KernelModel::constant(2.0, 1.0).ep_kernel(3), 2.0);
    }
}
