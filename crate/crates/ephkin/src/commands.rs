//! The `simulate`, `equilibrium` and `validate` workflows.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ephkin_core::{
    build_initial_state, compute_d_channel, compute_d_moment, equilibrium_state, match_equilibrium,
    moments, run, DynamicsError, EquilibriumParams, KineticSystem, RateEvaluator, RunStatus,
    SerialRates, StatisticsPair,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::output::{create, float, write_snapshot, write_timeseries};
use crate::parallel::ThreadedRates;
use crate::sampling::random_state;

/// Samples per statistics invariant check.
const INVARIANT_SAMPLES: usize = 2000;
/// Random states drawn by `validate`.
const VALIDATION_STATES: usize = 1000;

/// Integration stopped because the step fell below `dt_min`.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Stiffness(pub String);

pub fn evaluator(workers: usize) -> anyhow::Result<Box<dyn RateEvaluator>> {
    if workers <= 1 {
        Ok(Box::new(SerialRates))
    } else {
        Ok(Box::new(
            ThreadedRates::new(workers).context("cannot start the worker pool")?,
        ))
    }
}

/// Refuses statistics that fail their invariant suite.
fn require_invariants(label: &str, pair: &StatisticsPair) -> anyhow::Result<()> {
    let failed: Vec<String> = pair
        .check_invariants(INVARIANT_SAMPLES)
        .into_iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({})", c.property, c.detail))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        bail!(
            "{label} statistics `{}` fail: {}; run `validate` for the full report",
            pair.name(),
            failed.join(", ")
        )
    }
}

fn checked_system(config: &RunConfig) -> anyhow::Result<KineticSystem> {
    require_invariants("phonon", &config.statistics.phonon)?;
    require_invariants("electron", &config.statistics.electron)?;
    config
        .system()
        .context("cannot build the collision channels")
}

#[derive(Clone, Debug)]
pub struct SimulateSummary {
    pub status: RunStatus,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub final_d: f64,
    pub files: Vec<PathBuf>,
}

fn write_file(
    path: PathBuf,
    files: &mut Vec<PathBuf>,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> anyhow::Result<()> {
    let mut out = create(&path)?;
    body(&mut out)
        .and_then(|_| out.flush())
        .with_context(|| format!("writing {}", path.display()))?;
    files.push(path);
    Ok(())
}

/// Integrates the configured run and writes `timeseries.csv`, one
/// `snapshot_NNN.csv` per requested time and `final_state.csv`.
///
/// On stiffness the records so far and `last_valid_state.csv` are written
/// before a [`Stiffness`] error is returned.
pub fn simulate(
    config: &RunConfig,
    out_dir: &Path,
    workers: usize,
) -> anyhow::Result<SimulateSummary> {
    let system = checked_system(config)?;
    let initial = build_initial_state(&config.initial, &system.spectrum, &system.statistics)
        .context("cannot build the initial state")?;
    let evaluator = evaluator(workers)?;
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let mut files = Vec::new();

    match run(&initial, &config.integrator, &system, evaluator.as_ref()) {
        Ok(trajectory) => {
            write_file(out_dir.join("timeseries.csv"), &mut files, |w| {
                write_timeseries(w, &trajectory.records)
            })?;
            for (k, snap) in trajectory.snapshots.iter().enumerate() {
                write_file(
                    out_dir.join(format!("snapshot_{k:03}.csv")),
                    &mut files,
                    |w| write_snapshot(w, snap, &system.spectrum),
                )?;
            }
            write_file(out_dir.join("final_state.csv"), &mut files, |w| {
                write_snapshot(w, &trajectory.final_state, &system.spectrum)
            })?;
            let final_d = trajectory.records.last().map_or(0.0, |r| r.d_moment);
            Ok(SimulateSummary {
                status: trajectory.status,
                accepted_steps: trajectory.accepted_steps,
                rejected_steps: trajectory.rejected_steps,
                final_d,
                files,
            })
        }
        Err(DynamicsError::Stiff {
            location,
            t,
            dt,
            last_state,
            records,
        }) => {
            write_file(out_dir.join("timeseries.csv"), &mut files, |w| {
                write_timeseries(w, &records)
            })?;
            write_file(out_dir.join("last_valid_state.csv"), &mut files, |w| {
                write_snapshot(w, &last_state, &system.spectrum)
            })?;
            Err(Stiffness(format!(
                "stiffness: the step fell to {dt:e} at t = {t} keeping {location} inside its domain; \
                 reduce integrator.dt or the kernel strengths (partial output in {})",
                out_dir.display()
            ))
            .into())
        }
        Err(DynamicsError::Model(e)) => Err(e).context("integration failed"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EquilibriumQuery {
    /// Moments of the equilibrium at (T, μ).
    Params { temperature: f64, mu: f64 },
    /// (T, μ) and occupations reproducing the given moments.
    Targets { count: f64, energy: f64 },
    /// Targets taken from the configured initial state.
    FromInitial,
}

pub fn equilibrium(
    config: &RunConfig,
    query: EquilibriumQuery,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    let spectrum = &config.spectrum;
    let stats = &config.statistics;
    require_invariants("phonon", &stats.phonon)?;
    require_invariants("electron", &stats.electron)?;
    let (count, energy) = match query {
        EquilibriumQuery::Params { temperature, mu } => {
            let state = equilibrium_state(EquilibriumParams { temperature, mu }, spectrum, stats)
                .context("no equilibrium at these parameters")?;
            let m = moments(&state, spectrum)?;
            writeln!(out, "temperature,mu,count,E_e,E_p,E_total")?;
            let row = [
                temperature,
                mu,
                m.electron_count,
                m.electron_energy,
                m.phonon_energy,
                m.total_energy,
            ];
            writeln!(out, "{}", row.map(float).join(","))?;
            return Ok(());
        }
        EquilibriumQuery::Targets { count, energy } => (count, energy),
        EquilibriumQuery::FromInitial => {
            let initial = build_initial_state(&config.initial, spectrum, stats)?;
            let m = moments(&initial, spectrum)?;
            (m.electron_count, m.total_energy)
        }
    };
    let params = match_equilibrium(count, energy, spectrum, stats)
        .with_context(|| format!("cannot match count {count} and energy {energy}"))?;
    let state = equilibrium_state(params, spectrum, stats)?;
    writeln!(out, "# temperature = {}", float(params.temperature))?;
    writeln!(out, "# mu = {}", float(params.mu))?;
    writeln!(
        out,
        "# count = {}, energy = {}",
        float(count),
        float(energy)
    )?;
    write_snapshot(&mut *out, &state, spectrum)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportLine {
    pub property: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub lines: Vec<ReportLine>,
}

impl ValidationReport {
    fn push(&mut self, property: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.lines.push(ReportLine {
            property: property.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }

    pub fn write(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for l in &self.lines {
            let tag = if l.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{tag} {}: {}", l.property, l.detail)?;
        }
        let failed = self.lines.iter().filter(|l| !l.passed).count();
        writeln!(out, "{} checks, {failed} failed", self.lines.len())
    }
}

/// Statistics invariants, then conservation and entropy-production checks
/// on random states drawn with `seed`.
pub fn validate(config: &RunConfig, seed: u64) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (label, pair) in [
        ("phonon", &config.statistics.phonon),
        ("electron", &config.statistics.electron),
    ] {
        for c in pair.check_invariants(INVARIANT_SAMPLES) {
            report.push(
                format!("{label} statistics `{}`: {}", pair.name(), c.property),
                c.passed,
                c.detail,
            );
        }
    }

    let system = match config.system() {
        Ok(s) => {
            report.push(
                "channel precheck",
                true,
                format!(
                    "{} ep and {} pp channels",
                    s.channels.ep.len(),
                    s.channels.pp.len()
                ),
            );
            s
        }
        Err(e) => {
            report.push("channel precheck", false, e.to_string());
            return report;
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut count_worst, mut energy_worst) = (0.0f64, 0.0f64);
    let (mut d_gap, mut d_max) = (0.0f64, f64::NEG_INFINITY);
    let mut error = None;
    for _ in 0..VALIDATION_STATES {
        let state = random_state(&mut rng, &system.spectrum, &system.statistics);
        let result = SerialRates.rates(&system, &state).and_then(|rates| {
            let dm = compute_d_moment(&state, &rates, &system.spectrum, &system.statistics)?;
            let dc = compute_d_channel(&state, &system.channels, &system.statistics)?;
            Ok((rates.conservation_residuals(&system.spectrum), dm, dc))
        });
        match result {
            Ok(((c, e), dm, dc)) => {
                count_worst = count_worst.max(c);
                energy_worst = energy_worst.max(e);
                d_gap = d_gap.max((dm - dc).abs() / dm.abs().max(1.0));
                d_max = d_max.max(dm).max(dc);
            }
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    if let Some(e) = error {
        report.push("random-state evaluation", false, e);
        return report;
    }
    let states = format!("{VALIDATION_STATES} random states, seed {seed}");
    report.push(
        "count conservation",
        count_worst <= 1e-13,
        format!("worst relative residual {count_worst:.2e} (<= 1e-13) over {states}"),
    );
    report.push(
        "energy conservation",
        energy_worst <= 1e-13,
        format!("worst relative residual {energy_worst:.2e} (<= 1e-13) over {states}"),
    );
    report.push(
        "D_moment = D_channel",
        d_gap <= 1e-10,
        format!("worst gap {d_gap:.2e} (<= 1e-10 max(1, |D|)) over {states}"),
    );
    report.push(
        "D <= 0",
        d_max <= 1e-12,
        format!("largest D {d_max:.2e} (<= 1e-12) over {states}"),
    );
    report
}
