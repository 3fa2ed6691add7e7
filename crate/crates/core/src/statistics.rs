//! Generalized statistics pairs.
//!
//! A pair `(up, down)` replaces the gain/blocking factors of the ordinary
//! collision terms: `up` takes the role of `N` (or `n`), `down` the role of
//! `1 + N` (or `1 - n`). Everything the kinetic model needs from a pair is the
//! ratio `up/down`, its inverse, and the convex density whose derivative is
//! `ln(up/down)`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quadrature;

/// Relative distance kept between occupations and a finite `occupation_max`.
pub const GUARD_MARGIN: f64 = 1e-14;

/// Relative accuracy promised by [`StatisticsPair::inverse_ratio`] whenever
/// floating-point resolution allows it.
pub const RATIO_RTOL: f64 = 1e-12;

const QUADRATURE_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 2200;

/// User-supplied occupation functionals.
///
/// Implementations must satisfy `up(0) = 0`, `down(0) = 1`, both non-negative
/// on the domain, and `up/down` strictly increasing. [`StatisticsPair::custom`]
/// checks the normalization; the remaining properties are checked by
/// [`StatisticsPair::check_invariants`].
pub trait PairFunctions: Send + Sync {
    fn up(&self, x: f64) -> f64;
    fn down(&self, x: f64) -> f64;
}

#[derive(Clone)]
enum Form {
    /// `up = x`, `down = 1 + eta x`.
    Eta(f64),
    Custom(Arc<dyn PairFunctions>),
}

/// A statistics pair together with its occupation domain `[0, occupation_max)`.
#[derive(Clone)]
pub struct StatisticsPair {
    name: String,
    form: Form,
    occupation_max: f64,
}

impl fmt::Debug for StatisticsPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StatisticsPair")
            .field("name", &self.name)
            .field("eta", &self.eta_parameter())
            .field("occupation_max", &self.occupation_max)
            .finish()
    }
}

impl StatisticsPair {
    pub fn bose() -> Self {
        Self::eta_named("bose", 1.0)
    }

    pub fn fermi() -> Self {
        Self::eta_named("fermi", -1.0)
    }

    pub fn classical() -> Self {
        Self::eta_named("classical", 0.0)
    }

    /// One-parameter family `up = x`, `down = 1 + eta x`, `eta >= -1`.
    ///
    /// `eta = -1, 0, 1` give Fermi, classical and Bose statistics.
    pub fn eta(eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta < -1.0 {
            return Err(Error::InvalidParameter(format!(
                "eta must be a finite number >= -1, got {eta}"
            )));
        }
        Ok(Self::eta_named("eta", eta))
    }

    fn eta_named(name: &str, eta: f64) -> Self {
        let occupation_max = if eta < 0.0 { -1.0 / eta } else { f64::INFINITY };
        StatisticsPair {
            name: name.to_string(),
            form: Form::Eta(eta),
            occupation_max,
        }
    }

    /// Wraps user functionals. The domain end is detected as the first sign
    /// change of `down`; a `down` that stays positive gives an unbounded domain.
    pub fn custom(name: impl Into<String>, functions: Arc<dyn PairFunctions>) -> Result<Self> {
        let name = name.into();
        let up0 = functions.up(0.0);
        let down0 = functions.down(0.0);
        if up0 != 0.0 || down0 != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "statistics `{name}` must satisfy up(0) = 0 and down(0) = 1, got up(0) = {up0}, down(0) = {down0}"
            )));
        }
        let occupation_max = detect_down_zero(functions.as_ref());
        Ok(StatisticsPair {
            name,
            form: Form::Custom(functions),
            occupation_max,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The `eta` parameter for members of the one-parameter family.
    pub fn eta_parameter(&self) -> Option<f64> {
        match self.form {
            Form::Eta(eta) => Some(eta),
            Form::Custom(_) => None,
        }
    }

    pub fn occupation_max(&self) -> f64 {
        self.occupation_max
    }

    /// Largest occupation handed out by [`inverse_ratio`](Self::inverse_ratio).
    pub fn occupation_guard(&self) -> f64 {
        if self.occupation_max.is_finite() {
            self.occupation_max * (1.0 - GUARD_MARGIN)
        } else {
            f64::INFINITY
        }
    }

    pub fn up(&self, x: f64) -> f64 {
        match &self.form {
            Form::Eta(_) => x,
            Form::Custom(f) => f.up(x),
        }
    }

    pub fn down(&self, x: f64) -> f64 {
        match &self.form {
            Form::Eta(eta) => 1.0 + eta * x,
            Form::Custom(f) => f.down(x),
        }
    }

    pub fn check_occupation(&self, x: f64) -> Result<()> {
        if x.is_nan() || x < 0.0 || x >= self.occupation_max {
            Err(Error::Domain {
                statistics: self.name.clone(),
                value: x,
                max: self.occupation_max,
            })
        } else {
            Ok(())
        }
    }

    pub fn ratio(&self, x: f64) -> Result<f64> {
        self.check_occupation(x)?;
        Ok(self.up(x) / self.down(x))
    }

    /// `ln(up/down)`; `-inf` at `x = 0`.
    pub fn ln_ratio(&self, x: f64) -> Result<f64> {
        self.check_occupation(x)?;
        Ok(match self.form {
            Form::Eta(eta) => x.ln() - (eta * x).ln_1p(),
            Form::Custom(ref f) => f.up(x).ln() - f.down(x).ln(),
        })
    }

    /// The unique occupation with `ratio(x) = r`, found by bisection.
    ///
    /// `r = 0` maps to `x = 0`. Bisection runs until the bracket cannot be
    /// split further in floating point, which meets [`RATIO_RTOL`] wherever
    /// the ratio is resolvable at all.
    pub fn inverse_ratio(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::InvalidRatio(r));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let guard = self.occupation_guard();
        let mut lo = 0.0;
        let mut hi;
        if guard.is_finite() {
            let limit = self.raw_ratio(guard);
            if !(limit >= r) {
                return Err(Error::Saturated { target: r, limit });
            }
            hi = guard;
        } else {
            hi = 1.0;
            loop {
                let value = self.raw_ratio(hi);
                if value.is_nan() || value < 0.0 {
                    return Err(self.non_monotone(hi));
                }
                if value >= r {
                    break;
                }
                lo = hi;
                hi *= 2.0;
                if !hi.is_finite() || hi > 1e300 {
                    return Err(Error::NotAttained {
                        target: r,
                        reached: value,
                        at: lo,
                    });
                }
            }
        }

        for _ in 0..MAX_BISECTIONS {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                let r_lo = self.raw_ratio(lo);
                let r_hi = self.raw_ratio(hi);
                if r_lo > r_hi {
                    return Err(self.non_monotone(lo));
                }
                return Ok(if (r - r_lo).abs() <= (r_hi - r).abs() {
                    lo
                } else {
                    hi
                });
            }
            let value = self.raw_ratio(mid);
            if value.is_nan() {
                return Err(self.non_monotone(mid));
            }
            if value == r {
                return Ok(mid);
            }
            if value < r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::NoConvergence { lo, hi })
    }

    /// `h(x) = ∫₀ˣ ln ratio(s) ds`, the convex entropy density.
    ///
    /// Closed form for the one-parameter family, adaptive quadrature otherwise.
    pub fn h_density(&self, x: f64) -> Result<f64> {
        self.check_occupation(x)?;
        match self.form {
            Form::Eta(eta) => Ok(eta_h_density(eta, x)),
            Form::Custom(_) => self.h_density_quadrature(x),
        }
    }

    /// Quadrature evaluation of [`h_density`](Self::h_density), available for
    /// every pair. The substitution `s = x t²` removes the logarithmic
    /// singularity of the integrand at the origin.
    pub fn h_density_quadrature(&self, x: f64) -> Result<f64> {
        self.check_occupation(x)?;
        if x == 0.0 {
            return Ok(0.0);
        }
        let integrand = |t: f64| {
            let s = x * t * t;
            if s <= 0.0 {
                return 0.0;
            }
            2.0 * x * t * (self.up(s).ln() - self.down(s).ln())
        };
        let (value, _) = quadrature::integrate(integrand, 0.0, 1.0, QUADRATURE_TOL);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::InvalidParameter(format!(
                "ln ratio of statistics `{}` is not integrable on [0, {x}]",
                self.name
            )))
        }
    }

    fn raw_ratio(&self, x: f64) -> f64 {
        self.up(x) / self.down(x)
    }

    fn non_monotone(&self, at: f64) -> Error {
        Error::NonMonotoneRatio {
            statistics: self.name.clone(),
            at,
        }
    }

    /// Runs the pair invariant suite on `samples` interior points.
    pub fn check_invariants(&self, samples: usize) -> Vec<InvariantCheck> {
        let samples = samples.max(2);
        let span = if self.occupation_max.is_finite() {
            self.occupation_max
        } else {
            10.0
        };
        let grid: Vec<f64> = (1..=samples)
            .map(|k| span * k as f64 / (samples + 1) as f64)
            .collect();
        let mut checks = Vec::new();

        let up0 = self.up(0.0);
        let down0 = self.down(0.0);
        checks.push(InvariantCheck::new(
            "normalization",
            up0 == 0.0 && down0 == 1.0,
            format!("up(0) = {up0}, down(0) = {down0}"),
        ));

        let negative = grid
            .iter()
            .find(|&&x| !(self.up(x) >= 0.0 && self.down(x) >= 0.0));
        checks.push(InvariantCheck::new(
            "non-negativity",
            negative.is_none(),
            match negative {
                Some(x) => format!("negative factor at occupation {x}"),
                None => format!("{samples} samples on (0, {span})"),
            },
        ));

        let ratios: Vec<f64> = grid.iter().map(|&x| self.raw_ratio(x)).collect();
        let violation = ratios
            .windows(2)
            .zip(grid.iter())
            .find(|(w, _)| !(w[1] > w[0]));
        checks.push(InvariantCheck::new(
            "monotone ratio",
            violation.is_none(),
            match violation {
                Some((_, x)) => format!("ratio not increasing after occupation {x}"),
                None => format!("strictly increasing on {samples} samples"),
            },
        ));

        let near_zero = self.raw_ratio(span * 1e-14);
        let mut limits_ok = near_zero <= 1e-6;
        let mut detail = format!("ratio({:e}) = {near_zero:e}", span * 1e-14);
        if self.occupation_max.is_finite() {
            let top = self.raw_ratio(self.occupation_guard());
            limits_ok &= top >= 1e6;
            detail = format!("{detail}, ratio(guard) = {top:e}");
        }
        checks.push(InvariantCheck::new("ratio endpoints", limits_ok, detail));

        let integrable = self.h_density_quadrature(grid[samples / 2]);
        checks.push(InvariantCheck::new(
            "ln-ratio integrability",
            integrable.is_ok(),
            match integrable {
                Ok(v) => format!("h({}) = {v}", grid[samples / 2]),
                Err(e) => e.to_string(),
            },
        ));

        let mut worst = 0.0_f64;
        let mut failure = None;
        for &x in grid.iter().step_by((samples / 20).max(1)) {
            match self.ratio(x).and_then(|r| self.inverse_ratio(r)) {
                Ok(back) => worst = worst.max((back - x).abs() / x),
                Err(e) => {
                    failure = Some(e.to_string());
                    break;
                }
            }
        }
        checks.push(InvariantCheck::new(
            "inverse round trip",
            failure.is_none() && worst <= 1e-10,
            failure.unwrap_or_else(|| format!("max relative error {worst:e}")),
        ));
        checks
    }
}

/// Outcome of one property of [`StatisticsPair::check_invariants`].
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantCheck {
    pub property: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl InvariantCheck {
    fn new(property: &'static str, passed: bool, detail: String) -> Self {
        InvariantCheck {
            property,
            passed,
            detail,
        }
    }
}

fn x_ln_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn eta_h_density(eta: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if eta == 0.0 {
        return x_ln_x(x) - x;
    }
    let blocked = 1.0 + eta * x;
    let tail = if blocked == 0.0 {
        0.0
    } else {
        blocked * (eta * x).ln_1p() / eta
    };
    x_ln_x(x) - tail
}

fn detect_down_zero(f: &dyn PairFunctions) -> f64 {
    let mut prev = 0.0;
    let mut x = 1e-6;
    while x <= 1e6 {
        if !(f.down(x) > 0.0) {
            let (mut lo, mut hi) = (prev, x);
            loop {
                let mid = lo + 0.5 * (hi - lo);
                if mid <= lo || mid >= hi {
                    return hi;
                }
                if f.down(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        prev = x;
        x *= 1.02;
    }
    f64::INFINITY
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{E, LN_2};

    struct Quadratic;
    impl PairFunctions for Quadratic {
        fn up(&self, x: f64) -> f64 {
            x
        }
        fn down(&self, x: f64) -> f64 {
            (1.0 - x) * (1.0 + 2.0 * x)
        }
    }

    struct Humped;
    impl PairFunctions for Humped {
        fn up(&self, x: f64) -> f64 {
            x
        }
        fn down(&self, x: f64) -> f64 {
            1.0 + x * x
        }
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(StatisticsPair::bose().ratio(1.0).unwrap(), 0.5);
        assert_eq!(StatisticsPair::fermi().ratio(0.5).unwrap(), 1.0);
        assert_eq!(StatisticsPair::eta(0.5).unwrap().ratio(2.0).unwrap(), 1.0);
    }

    #[test]
    fn ratio_domain_errors() {
        let fermi = StatisticsPair::fermi();
        assert!(matches!(fermi.ratio(-0.1), Err(Error::Domain { .. })));
        assert!(matches!(fermi.ratio(1.0), Err(Error::Domain { .. })));
        assert!(matches!(fermi.ratio(f64::NAN), Err(Error::Domain { .. })));
        assert!(StatisticsPair::bose().ratio(1e9).is_ok());
    }

    #[test]
    fn inverse_ratio_examples() {
        let n = StatisticsPair::bose()
            .inverse_ratio((-1.0f64).exp())
            .unwrap();
        assert!((n - 1.0 / (E - 1.0)).abs() < 1e-14);
        assert!((n - 0.581977).abs() < 1e-6);
        assert!((StatisticsPair::fermi().inverse_ratio(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(StatisticsPair::fermi().inverse_ratio(0.0).unwrap(), 0.0);
    }

    #[test]
    fn inverse_ratio_errors() {
        assert!(matches!(
            StatisticsPair::bose().inverse_ratio(1.5),
            Err(Error::NotAttained { .. })
        ));
        assert!(matches!(
            StatisticsPair::fermi().inverse_ratio(1e20),
            Err(Error::Saturated { .. })
        ));
        assert!(matches!(
            StatisticsPair::fermi().inverse_ratio(-1.0),
            Err(Error::InvalidRatio(_))
        ));
    }

    #[test]
    fn h_density_examples() {
        let bose = StatisticsPair::bose().h_density(1.0).unwrap();
        assert!((bose + 2.0 * LN_2).abs() < 1e-15);
        let fermi = StatisticsPair::fermi().h_density(0.5).unwrap();
        assert!((fermi + LN_2).abs() < 1e-15);
        for sp in [StatisticsPair::bose(), StatisticsPair::fermi()] {
            assert_eq!(sp.h_density(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn quadrature_matches_bose_closed_form() {
        let bose = StatisticsPair::bose();
        let q = bose.h_density_quadrature(1.0).unwrap();
        assert!((q + 2.0 * LN_2).abs() < 1e-10, "{q}");
    }

    #[test]
    fn custom_pair_detects_domain_end() {
        let sp = StatisticsPair::custom("quadratic", Arc::new(Quadratic)).unwrap();
        assert!((sp.occupation_max() - 1.0).abs() < 1e-12);
        let x = sp.inverse_ratio(3.0).unwrap();
        assert!((sp.ratio(x).unwrap() - 3.0).abs() < 3e-12);
        assert!(sp.check_invariants(1000).iter().all(|c| c.passed));
    }

    #[test]
    fn custom_pair_normalization_rejected() {
        struct Shifted;
        impl PairFunctions for Shifted {
            fn up(&self, x: f64) -> f64 {
                x + 0.1
            }
            fn down(&self, _: f64) -> f64 {
                1.0
            }
        }
        assert!(StatisticsPair::custom("shifted", Arc::new(Shifted)).is_err());
    }

    #[test]
    fn non_monotone_pair_is_reported() {
        let sp = StatisticsPair::custom("humped", Arc::new(Humped)).unwrap();
        let checks = sp.check_invariants(1000);
        let monotone = checks
            .iter()
            .find(|c| c.property == "monotone ratio")
            .unwrap();
        assert!(!monotone.passed);
    }

    #[test]
    fn catalogue_passes_invariants() {
        for sp in [
            StatisticsPair::bose(),
            StatisticsPair::fermi(),
            StatisticsPair::classical(),
            StatisticsPair::eta(0.5).unwrap(),
            StatisticsPair::eta(-0.5).unwrap(),
        ] {
            for check in sp.check_invariants(1000) {
                assert!(
                    check.passed,
                    "{}: {} ({})",
                    sp.name(),
                    check.property,
                    check.detail
                );
            }
        }
    }

    #[test]
    fn eta_family_limits() {
        assert!(StatisticsPair::eta(-1.5).is_err());
        assert!(StatisticsPair::eta(f64::NAN).is_err());
        assert_eq!(StatisticsPair::eta(-0.5).unwrap().occupation_max(), 2.0);
        assert_eq!(StatisticsPair::eta(-1.0).unwrap().occupation_max(), 1.0);
    }
}
