//! `match_equilibrium` against a brute-force scan of (T, μ) on a system whose
//! moments have closed forms.

mod common;

use common::*;
use ephkin_core::*;

// Fermi levels at ε = 0, 1 with unit weights; one Bose mode at ω = 1.
fn closed_moments(t: f64, mu: f64) -> (f64, f64) {
    let fermi = |e: f64| 1.0 / (((e - mu) / t).exp() + 1.0);
    let bose = 1.0 / ((1.0 / t).exp() - 1.0);
    let count = fermi(0.0) + fermi(1.0);
    (count, fermi(1.0) + bose)
}

fn misfit(t: f64, mu: f64, count: f64, energy: f64) -> f64 {
    let (c, e) = closed_moments(t, mu);
    ((c - count) / count).powi(2) + ((e - energy) / energy).powi(2)
}

fn scan(
    count: f64,
    energy: f64,
    t_range: (f64, f64),
    mu_range: (f64, f64),
    step: f64,
) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let nt = ((t_range.1 - t_range.0) / step).round() as usize;
    let nm = ((mu_range.1 - mu_range.0) / step).round() as usize;
    for i in 0..=nt {
        let t = t_range.0 + i as f64 * step;
        for j in 0..=nm {
            let mu = mu_range.0 + j as f64 * step;
            let m = misfit(t, mu, count, energy);
            if m < best.0 {
                best = (m, t, mu);
            }
        }
    }
    (best.1, best.2)
}

#[test]
fn matches_brute_force_scan() {
    let sp = spectrum(
        1.0,
        2,
        DosKind::Flat,
        &[(BranchKind::Einstein { index: 1 }, 1.0)],
    );
    let stats = set(StatisticsPair::bose(), StatisticsPair::fermi());

    let (count, energy) = closed_moments(1.0, 0.5);
    let (t0, mu0) = scan(count, energy, (0.3, 3.0), (-2.0, 2.0), 1e-2);
    let (t1, mu1) = scan(
        count,
        energy,
        (t0 - 0.02, t0 + 0.02),
        (mu0 - 0.02, mu0 + 0.02),
        1e-4,
    );
    assert!(
        (t1 - 1.0).abs() < 2e-4 && (mu1 - 0.5).abs() < 2e-4,
        "scan found ({t1}, {mu1})"
    );

    let p = match_equilibrium(count, energy, &sp, &stats).unwrap();
    assert!(
        (p.temperature - t1).abs() <= 1e-4,
        "T = {} vs scan {t1}",
        p.temperature
    );
    assert!((p.mu - mu1).abs() <= 1e-4, "μ = {} vs scan {mu1}", p.mu);
    assert!((p.temperature - 1.0).abs() < 1e-9);
    assert!((p.mu - 0.5).abs() < 1e-9);
}

#[test]
fn matches_scan_at_other_points() {
    let sp = spectrum(
        1.0,
        2,
        DosKind::Flat,
        &[(BranchKind::Einstein { index: 1 }, 1.0)],
    );
    let stats = set(StatisticsPair::bose(), StatisticsPair::fermi());
    for &(t, mu) in &[(0.6, 0.2), (2.0, -0.4), (1.5, 1.2)] {
        let (count, energy) = closed_moments(t, mu);
        let (t0, mu0) = scan(count, energy, (0.3, 3.0), (-2.0, 2.0), 1e-2);
        let (t1, mu1) = scan(
            count,
            energy,
            (t0 - 0.02, t0 + 0.02),
            (mu0 - 0.02, mu0 + 0.02),
            1e-4,
        );
        let p = match_equilibrium(count, energy, &sp, &stats).unwrap();
        assert!(
            (p.temperature - t1).abs() <= 1e-4,
            "T = {} vs scan {t1}",
            p.temperature
        );
        assert!((p.mu - mu1).abs() <= 1e-4, "μ = {} vs scan {mu1}", p.mu);
    }
}
