//! Run configuration: a single TOML file.
//!
//! ```toml
//! [statistics.phonon]
//! name = "bose"                  # bose | fermi | classical | eta | custom
//! [statistics.electron]
//! name = "eta"
//! params = { eta = -0.5 }        # custom: params = { up = [0, 1], down = [1, -1] }
//!
//! [grid]
//! delta = 0.125
//! electron_levels = 64
//!
//! [band]
//! kind = "flat"                  # flat | sqrt | tabulated (with `weights`)
//! scale = 1.0
//!
//! [[branches]]
//! kind = "debye"                 # debye (cutoff) | einstein (index) | tabulated (indices, weights)
//! cutoff = 32
//! scale = 1.0
//!
//! [kernels]
//! ep = { k0 = 0.01, power_r = 0.0 }
//! pp = { k0 = 0.001 }
//! table = "kernels.txt"          # optional, relative to this file
//!
//! [initial]
//! kind = "two_temperature"       # equilibrium | two_temperature | power_law_phonons | tabulated
//! electron_temperature = 2.0
//! phonon_temperature = 1.0
//! mu = 4.0
//!
//! [integrator]
//! method = "rk4"
//! dt = 0.01
//! t_end = 100.0
//!
//! [output]
//! directory = "output"
//! snapshot_times = [0.0, 10.0]
//! ```
//!
//! Every problem in the file is collected and reported together; unknown
//! keys are errors, with a suggestion when a known key is close.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ephkin_core::{
    build_band, build_branch, enumerate_channels, BranchKind, DosKind, EnergyGrid,
    Error as ModelError, InitialSpec, IntegratorConfig, KernelEntry, KernelModel, KineticSystem,
    Method, PhononBranch, Spectrum, StatisticsPair, StatisticsSet,
};
use toml::{Table, Value};

use crate::kernel_table::read_table;
use crate::polynomial::{Polynomial, PolynomialPair};

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    /// Dotted key path, e.g. `grid.delta` or `branches[1].cutoff`.
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Syntax {
        path: String,
        source: Box<toml::de::Error>,
    },
    #[error("{}", format_errors(.path, .errors))]
    Invalid {
        path: String,
        errors: Vec<ConfigError>,
    },
}

fn format_errors(path: &str, errors: &[ConfigError]) -> String {
    let mut out = format!("{path}: {} configuration error(s)", errors.len());
    for e in errors {
        out.push_str("\n  ");
        out.push_str(&e.to_string());
    }
    out
}

#[derive(Clone, Debug)]
pub struct OutputConfig {
    pub directory: PathBuf,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub statistics: StatisticsSet,
    pub spectrum: Spectrum,
    pub kernels: KernelModel,
    pub kernel_table: Vec<KernelEntry>,
    pub initial: InitialSpec,
    pub integrator: IntegratorConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    /// Enumerates channels and applies the kernel table.
    pub fn system(&self) -> Result<KineticSystem, ModelError> {
        let mut channels = enumerate_channels(&self.spectrum, self.kernels)?;
        channels.apply_table(&self.kernel_table, &self.spectrum)?;
        Ok(KineticSystem {
            spectrum: self.spectrum.clone(),
            channels,
            statistics: self.statistics.clone(),
        })
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base).map_err(|e| match e {
        ParseError::Syntax(source) => LoadError::Syntax {
            path: path.display().to_string(),
            source: Box::new(source),
        },
        ParseError::Invalid(errors) => LoadError::Invalid {
            path: path.display().to_string(),
            errors,
        },
    })
}

#[derive(Debug)]
pub enum ParseError {
    Syntax(toml::de::Error),
    Invalid(Vec<ConfigError>),
}

/// Parses and validates a configuration; relative file references resolve
/// against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, ParseError> {
    let root: Table = text.parse().map_err(ParseError::Syntax)?;
    let mut w = Walker::default();
    let config = w.root(&root, base);
    match config {
        Some(c) if w.errors.is_empty() => Ok(c),
        _ => Err(ParseError::Invalid(w.errors)),
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn suggest<'a>(key: &str, allowed: &[&'a str]) -> Option<&'a str> {
    allowed
        .iter()
        .map(|a| (strsim::jaro_winkler(key, a), *a))
        .filter(|(score, _)| *score >= 0.85)
        .max_by(|x, y| x.0.total_cmp(&y.0))
        .map(|(_, a)| a)
}

#[derive(Default)]
struct Walker {
    errors: Vec<ConfigError>,
}

impl Walker {
    fn error(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.errors.push(ConfigError {
            key: key.into(),
            message: message.into(),
        });
    }

    fn check_keys(&mut self, table: &Table, path: &str, allowed: &[&str]) {
        for key in table.keys() {
            if allowed.contains(&key.as_str()) {
                continue;
            }
            let message = match suggest(key, allowed) {
                Some(s) => format!("unknown key, did you mean `{}`?", join(path, s)),
                None => format!("unknown key, expected one of: {}", allowed.join(", ")),
            };
            self.error(join(path, key), message);
        }
    }

    fn table<'a>(
        &mut self,
        table: &'a Table,
        path: &str,
        key: &str,
        required: bool,
    ) -> Option<&'a Table> {
        match table.get(key) {
            Some(Value::Table(t)) => Some(t),
            Some(other) => {
                self.error(
                    join(path, key),
                    format!("expected a table, found {}", other.type_str()),
                );
                None
            }
            None => {
                if required {
                    self.error(join(path, key), "missing required section");
                }
                None
            }
        }
    }

    fn float(&mut self, table: &Table, path: &str, key: &str) -> Option<f64> {
        match table.get(key) {
            Some(Value::Float(x)) => Some(*x),
            Some(Value::Integer(i)) => Some(*i as f64),
            Some(other) => {
                self.error(
                    join(path, key),
                    format!("expected a number, found {}", other.type_str()),
                );
                None
            }
            None => None,
        }
    }

    fn required_float(&mut self, table: &Table, path: &str, key: &str) -> Option<f64> {
        if !table.contains_key(key) {
            self.error(join(path, key), "missing required key");
        }
        self.float(table, path, key)
    }

    /// Reports `message` against the key unless `ok(value)`.
    fn check<T: Copy>(
        &mut self,
        path: &str,
        key: &str,
        value: Option<T>,
        ok: impl Fn(T) -> bool,
        message: &str,
    ) -> Option<T> {
        match value {
            Some(v) if ok(v) => Some(v),
            Some(_) => {
                self.error(join(path, key), message);
                None
            }
            None => None,
        }
    }

    fn positive(&mut self, table: &Table, path: &str, key: &str) -> Option<f64> {
        let v = self.required_float(table, path, key);
        self.check(
            path,
            key,
            v,
            |x| x > 0.0 && x.is_finite(),
            "must be a positive finite number",
        )
    }

    fn finite(&mut self, table: &Table, path: &str, key: &str) -> Option<f64> {
        let v = self.required_float(table, path, key);
        self.check(path, key, v, f64::is_finite, "must be finite")
    }

    fn integer(&mut self, table: &Table, path: &str, key: &str, required: bool) -> Option<usize> {
        match table.get(key) {
            Some(Value::Integer(i)) if *i >= 0 => Some(*i as usize),
            Some(Value::Integer(_)) => {
                self.error(join(path, key), "must be a non-negative integer");
                None
            }
            Some(other) => {
                self.error(
                    join(path, key),
                    format!("expected an integer, found {}", other.type_str()),
                );
                None
            }
            None => {
                if required {
                    self.error(join(path, key), "missing required key");
                }
                None
            }
        }
    }

    fn string<'a>(
        &mut self,
        table: &'a Table,
        path: &str,
        key: &str,
        required: bool,
    ) -> Option<&'a str> {
        match table.get(key) {
            Some(Value::String(s)) => Some(s),
            Some(other) => {
                self.error(
                    join(path, key),
                    format!("expected a string, found {}", other.type_str()),
                );
                None
            }
            None => {
                if required {
                    self.error(join(path, key), "missing required key");
                }
                None
            }
        }
    }

    fn choice<'a>(
        &mut self,
        table: &'a Table,
        path: &str,
        key: &str,
        options: &[&str],
    ) -> Option<&'a str> {
        let s = self.string(table, path, key, true)?;
        if options.contains(&s) {
            Some(s)
        } else {
            let hint = suggest(s, options)
                .map(|o| format!(", did you mean `{o}`?"))
                .unwrap_or_default();
            self.error(
                join(path, key),
                format!(
                    "unknown value `{s}`, expected one of: {}{hint}",
                    options.join(", ")
                ),
            );
            None
        }
    }

    fn floats(&mut self, table: &Table, path: &str, key: &str, required: bool) -> Option<Vec<f64>> {
        let Some(value) = table.get(key) else {
            if required {
                self.error(join(path, key), "missing required key");
            }
            return None;
        };
        self.float_array(value, &join(path, key))
    }

    fn float_array(&mut self, value: &Value, key: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = value else {
            self.error(
                key,
                format!("expected an array of numbers, found {}", value.type_str()),
            );
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for (k, item) in items.iter().enumerate() {
            match item {
                Value::Float(x) if x.is_finite() => out.push(*x),
                Value::Integer(i) => out.push(*i as f64),
                _ => {
                    self.error(format!("{key}[{k}]"), "expected a finite number");
                    return None;
                }
            }
        }
        Some(out)
    }

    fn root(&mut self, root: &Table, base: &Path) -> Option<RunConfig> {
        self.check_keys(
            root,
            "",
            &[
                "statistics",
                "grid",
                "band",
                "branches",
                "kernels",
                "initial",
                "integrator",
                "output",
            ],
        );
        let statistics = self.statistics(root);
        let grid = self.grid(root);
        let band = self.band(root, grid.as_ref());
        let branches = self.branches(root, grid.as_ref());
        let spectrum = match (grid, band, branches) {
            (Some(grid), Some(band), Some(branches)) => match Spectrum::new(grid, band, branches) {
                Ok(s) => Some(s),
                Err(e) => {
                    self.error("branches", e.to_string());
                    None
                }
            },
            _ => None,
        };
        let (kernels, kernel_table) = self.kernels(root, base).unzip();
        let initial = self.initial(root, spectrum.as_ref(), statistics.as_ref());
        let mut integrator = self.integrator(root);
        let (output, snapshot_times) = self.output(root).unzip();
        if let (Some(integrator), Some(times)) = (integrator.as_mut(), snapshot_times) {
            integrator.snapshot_times = times;
        }
        Some(RunConfig {
            statistics: statistics?,
            spectrum: spectrum?,
            kernels: kernels?,
            kernel_table: kernel_table?,
            initial: initial?,
            integrator: integrator?,
            output: output?,
        })
    }

    fn statistics(&mut self, root: &Table) -> Option<StatisticsSet> {
        let t = self.table(root, "", "statistics", true)?;
        self.check_keys(t, "statistics", &["phonon", "electron"]);
        let phonon = self
            .table(t, "statistics", "phonon", true)
            .and_then(|p| self.pair(p, "statistics.phonon"));
        let electron = self
            .table(t, "statistics", "electron", true)
            .and_then(|p| self.pair(p, "statistics.electron"));
        Some(StatisticsSet {
            phonon: phonon?,
            electron: electron?,
        })
    }

    fn pair(&mut self, t: &Table, path: &str) -> Option<StatisticsPair> {
        self.check_keys(t, path, &["name", "params"]);
        let name = self.choice(
            t,
            path,
            "name",
            &["bose", "fermi", "classical", "eta", "custom"],
        );
        let empty = Table::new();
        let params = self.table(t, path, "params", false).unwrap_or(&empty);
        let params_path = join(path, "params");
        match name? {
            "bose" | "fermi" | "classical" => {
                self.check_keys(params, &params_path, &[]);
                Some(match name? {
                    "bose" => StatisticsPair::bose(),
                    "fermi" => StatisticsPair::fermi(),
                    _ => StatisticsPair::classical(),
                })
            }
            "eta" => {
                self.check_keys(params, &params_path, &["eta"]);
                let eta = self.required_float(params, &params_path, "eta")?;
                match StatisticsPair::eta(eta) {
                    Ok(p) => Some(p),
                    Err(e) => {
                        self.error(join(&params_path, "eta"), e.to_string());
                        None
                    }
                }
            }
            _ => {
                self.check_keys(params, &params_path, &["up", "down"]);
                let up = self.floats(params, &params_path, "up", true);
                let down = self.floats(params, &params_path, "down", true);
                let functions = PolynomialPair {
                    up: Polynomial::new(up?),
                    down: Polynomial::new(down?),
                };
                match StatisticsPair::custom(format!("custom ({path})"), Arc::new(functions)) {
                    Ok(p) => Some(p),
                    Err(e) => {
                        self.error(params_path, e.to_string());
                        None
                    }
                }
            }
        }
    }

    fn grid(&mut self, root: &Table) -> Option<EnergyGrid> {
        let t = self.table(root, "", "grid", true)?;
        self.check_keys(t, "grid", &["delta", "electron_levels"]);
        let delta = self.positive(t, "grid", "delta");
        let levels = self.integer(t, "grid", "electron_levels", true);
        let levels = self.check(
            "grid",
            "electron_levels",
            levels,
            |n| n >= 2,
            "must be at least 2",
        );
        EnergyGrid::new(delta?, levels?).ok()
    }

    fn band(
        &mut self,
        root: &Table,
        grid: Option<&EnergyGrid>,
    ) -> Option<ephkin_core::ElectronBand> {
        let t = self.table(root, "", "band", true)?;
        self.check_keys(t, "band", &["kind", "scale", "weights"]);
        let kind = self.choice(t, "band", "kind", &["flat", "sqrt", "tabulated"]);
        let scale = self.float(t, "band", "scale");
        let scale = self
            .check(
                "band",
                "scale",
                scale,
                |x| x > 0.0 && x.is_finite(),
                "must be a positive finite number",
            )
            .or(if t.contains_key("scale") {
                None
            } else {
                Some(1.0)
            });
        let weights = self.floats(t, "band", "weights", kind == Some("tabulated"));
        if kind.is_some_and(|k| k != "tabulated") && t.contains_key("weights") {
            self.error("band.weights", "only used with kind = \"tabulated\"");
        }
        let grid = grid?;
        let dos = match kind? {
            "flat" => DosKind::Flat,
            "sqrt" => DosKind::Sqrt,
            _ => {
                let weights = weights?;
                if weights.len() != grid.electron_levels() {
                    self.error(
                        "band.weights",
                        format!(
                            "has {} entries but grid.electron_levels = {}",
                            weights.len(),
                            grid.electron_levels()
                        ),
                    );
                    return None;
                }
                DosKind::Tabulated(weights)
            }
        };
        match build_band(&dos, grid, scale?) {
            Ok(b) => Some(b),
            Err(e) => {
                self.error("band", e.to_string());
                None
            }
        }
    }

    fn branches(&mut self, root: &Table, grid: Option<&EnergyGrid>) -> Option<Vec<PhononBranch>> {
        let items = match root.get("branches") {
            Some(Value::Array(items)) if !items.is_empty() => items,
            Some(Value::Array(_)) | None => {
                self.error("branches", "at least one [[branches]] entry is required");
                return None;
            }
            Some(other) => {
                self.error(
                    "branches",
                    format!("expected an array of tables, found {}", other.type_str()),
                );
                return None;
            }
        };
        let mut out = Some(Vec::with_capacity(items.len()));
        for (k, item) in items.iter().enumerate() {
            let path = format!("branches[{k}]");
            let Value::Table(t) = item else {
                self.error(&path, "expected a table");
                out = None;
                continue;
            };
            let branch = self.branch(t, &path, grid);
            match (branch, out.as_mut()) {
                (Some(b), Some(v)) => v.push(b),
                _ => out = None,
            }
        }
        out
    }

    fn branch(&mut self, t: &Table, path: &str, grid: Option<&EnergyGrid>) -> Option<PhononBranch> {
        self.check_keys(
            t,
            path,
            &["kind", "cutoff", "index", "indices", "weights", "scale"],
        );
        let kind = self.choice(t, path, "kind", &["debye", "einstein", "tabulated"]);
        let relevant: &[&str] = match kind {
            Some("debye") => &["cutoff", "scale"],
            Some("einstein") => &["index", "scale"],
            Some(_) => &["indices", "weights"],
            None => &["cutoff", "index", "indices", "weights", "scale"],
        };
        for key in ["cutoff", "index", "indices", "weights", "scale"] {
            if t.contains_key(key) && !relevant.contains(&key) {
                self.error(
                    join(path, key),
                    format!("not used by kind = \"{}\"", kind.unwrap_or("?")),
                );
            }
        }
        let scale = if t.contains_key("scale") {
            let s = self.float(t, path, "scale");
            self.check(
                path,
                "scale",
                s,
                |x| x > 0.0 && x.is_finite(),
                "must be a positive finite number",
            )
        } else {
            Some(1.0)
        };
        let spec = match kind? {
            "debye" => {
                let cutoff = self.integer(t, path, "cutoff", true);
                BranchKind::Debye {
                    cutoff: self.check(path, "cutoff", cutoff, |c| c >= 1, "must be at least 1")?,
                }
            }
            "einstein" => {
                let index = self.integer(t, path, "index", true);
                BranchKind::Einstein {
                    index: self.check(
                        path,
                        "index",
                        index,
                        |i| i >= 1,
                        "must be at least 1 (zero-energy mode)",
                    )?,
                }
            }
            _ => {
                let indices = match t.get("indices") {
                    Some(Value::Array(items)) => {
                        let mut v = Vec::with_capacity(items.len());
                        for (k, item) in items.iter().enumerate() {
                            match item {
                                Value::Integer(i) if *i >= 1 => v.push(*i as usize),
                                _ => {
                                    self.error(
                                        format!("{path}.indices[{k}]"),
                                        "expected an integer >= 1",
                                    );
                                }
                            }
                        }
                        (v.len() == items.len()).then_some(v)
                    }
                    Some(other) => {
                        self.error(
                            join(path, "indices"),
                            format!("expected an array, found {}", other.type_str()),
                        );
                        None
                    }
                    None => {
                        self.error(join(path, "indices"), "missing required key");
                        None
                    }
                };
                let weights = self.floats(t, path, "weights", true);
                let (indices, weights) = (indices?, weights?);
                if indices.len() != weights.len() {
                    self.error(
                        join(path, "weights"),
                        format!(
                            "has {} entries but indices has {}",
                            weights.len(),
                            indices.len()
                        ),
                    );
                    return None;
                }
                BranchKind::Tabulated(indices.into_iter().zip(weights).collect())
            }
        };
        match build_branch(&spec, grid?, scale?) {
            Ok(b) => Some(b),
            Err(e) => {
                self.error(path, e.to_string());
                None
            }
        }
    }

    fn kernels(&mut self, root: &Table, base: &Path) -> Option<(KernelModel, Vec<KernelEntry>)> {
        let t = self.table(root, "", "kernels", true)?;
        self.check_keys(t, "kernels", &["ep", "pp", "table"]);
        let non_negative = |w: &mut Self, t: &Table, path: &str, key: &str| {
            let v = w.required_float(t, path, key);
            w.check(
                path,
                key,
                v,
                |x| x >= 0.0 && x.is_finite(),
                "must be finite and non-negative",
            )
        };
        let ep = self.table(t, "kernels", "ep", true).and_then(|ep| {
            self.check_keys(ep, "kernels.ep", &["k0", "power_r"]);
            let k0 = non_negative(self, ep, "kernels.ep", "k0");
            let power = if ep.contains_key("power_r") {
                self.finite(ep, "kernels.ep", "power_r")
            } else {
                Some(0.0)
            };
            Some((k0?, power?))
        });
        let pp = self.table(t, "kernels", "pp", true).and_then(|pp| {
            self.check_keys(pp, "kernels.pp", &["k0"]);
            non_negative(self, pp, "kernels.pp", "k0")
        });
        let table = match self.string(t, "kernels", "table", false) {
            None if t.contains_key("table") => None,
            None => Some(Vec::new()),
            Some(file) => match read_table(&base.join(file)) {
                Ok(entries) => Some(entries),
                Err(e) => {
                    self.error("kernels.table", e.to_string());
                    None
                }
            },
        };
        let (ep_k0, ep_power) = ep?;
        Some((
            KernelModel {
                ep_k0,
                ep_power,
                pp_k0: pp?,
            },
            table?,
        ))
    }

    fn initial(
        &mut self,
        root: &Table,
        spectrum: Option<&Spectrum>,
        stats: Option<&StatisticsSet>,
    ) -> Option<InitialSpec> {
        let t = self.table(root, "", "initial", true)?;
        let path = "initial";
        let kind = self.choice(
            t,
            path,
            "kind",
            &[
                "equilibrium",
                "two_temperature",
                "power_law_phonons",
                "tabulated",
            ],
        );
        let keys: &[&str] = match kind {
            Some("equilibrium") => &["kind", "temperature", "mu"],
            Some("two_temperature") => {
                &["kind", "electron_temperature", "phonon_temperature", "mu"]
            }
            Some("power_law_phonons") => &[
                "kind",
                "amplitude",
                "exponent",
                "electron_temperature",
                "mu",
            ],
            Some(_) => &["kind", "electrons", "phonons"],
            None => &[
                "kind",
                "temperature",
                "mu",
                "electron_temperature",
                "phonon_temperature",
                "amplitude",
                "exponent",
                "electrons",
                "phonons",
            ],
        };
        self.check_keys(t, path, keys);
        let spec = match kind? {
            "equilibrium" => {
                let temperature = self.positive(t, path, "temperature");
                let mu = self.finite(t, path, "mu");
                InitialSpec::Equilibrium {
                    temperature: temperature?,
                    mu: mu?,
                }
            }
            "two_temperature" => {
                let te = self.positive(t, path, "electron_temperature");
                let tp = self.positive(t, path, "phonon_temperature");
                let mu = self.finite(t, path, "mu");
                InitialSpec::TwoTemperature {
                    electron_temperature: te?,
                    mu: mu?,
                    phonon_temperature: tp?,
                }
            }
            "power_law_phonons" => {
                let amplitude = self.required_float(t, path, "amplitude");
                let amplitude = self.check(
                    path,
                    "amplitude",
                    amplitude,
                    |a| a >= 0.0 && a.is_finite(),
                    "must be finite and non-negative",
                );
                let exponent = self.finite(t, path, "exponent");
                let te = self.positive(t, path, "electron_temperature");
                let mu = self.finite(t, path, "mu");
                InitialSpec::PowerLawPhonons {
                    amplitude: amplitude?,
                    exponent: exponent?,
                    electron_temperature: te?,
                    mu: mu?,
                }
            }
            _ => {
                let electrons = self.floats(t, path, "electrons", true);
                let phonons = match t.get("phonons") {
                    Some(Value::Array(rows)) => {
                        let mut out = Some(Vec::with_capacity(rows.len()));
                        for (k, row) in rows.iter().enumerate() {
                            match (
                                self.float_array(row, &format!("initial.phonons[{k}]")),
                                out.as_mut(),
                            ) {
                                (Some(r), Some(v)) => v.push(r),
                                _ => out = None,
                            }
                        }
                        out
                    }
                    Some(other) => {
                        self.error(
                            "initial.phonons",
                            format!("expected an array of arrays, found {}", other.type_str()),
                        );
                        None
                    }
                    None => {
                        self.error("initial.phonons", "missing required key");
                        None
                    }
                };
                InitialSpec::Tabulated {
                    electrons: electrons?,
                    phonons: phonons?,
                }
            }
        };
        // Shape and domain can only be checked once the model is known.
        if let (Some(spectrum), Some(stats)) = (spectrum, stats) {
            if let InitialSpec::Tabulated { electrons, phonons } = &spec {
                let shape_ok = electrons.len() == spectrum.band.len()
                    && phonons.len() == spectrum.branches.len()
                    && phonons
                        .iter()
                        .zip(&spectrum.branches)
                        .all(|(p, b)| p.len() == b.len());
                if !shape_ok {
                    let expected: Vec<String> = spectrum
                        .branches
                        .iter()
                        .map(|b| b.len().to_string())
                        .collect();
                    self.error(
                        "initial",
                        format!(
                            "tabulated state needs {} electron occupations and phonon rows of lengths [{}]",
                            spectrum.band.len(),
                            expected.join(", ")
                        ),
                    );
                    return None;
                }
            }
            if let Err(e) = ephkin_core::build_initial_state(&spec, spectrum, stats) {
                self.error("initial", e.to_string());
                return None;
            }
        }
        Some(spec)
    }

    fn integrator(&mut self, root: &Table) -> Option<IntegratorConfig> {
        let t = self.table(root, "", "integrator", true)?;
        let path = "integrator";
        self.check_keys(
            t,
            path,
            &["method", "dt", "t_end", "dt_min", "output_stride", "safety"],
        );
        let method = if t.contains_key("method") {
            match self.choice(t, path, "method", &["rk4", "euler"]) {
                Some("euler") => Some(Method::Euler),
                Some(_) => Some(Method::Rk4),
                None => None,
            }
        } else {
            Some(Method::Rk4)
        };
        let dt = self.positive(t, path, "dt");
        let t_end = self.positive(t, path, "t_end");
        let mut config = IntegratorConfig::new(dt.unwrap_or(1.0), t_end.unwrap_or(1.0));
        let mut ok = dt.is_some() && t_end.is_some() && method.is_some();
        if t.contains_key("dt_min") {
            let v = self.float(t, path, "dt_min");
            let limit = dt.unwrap_or(f64::INFINITY);
            match self.check(
                path,
                "dt_min",
                v,
                |x| x > 0.0 && x < limit,
                "must lie in (0, integrator.dt)",
            ) {
                Some(x) => config.dt_min = x,
                None => ok = false,
            }
        }
        if t.contains_key("output_stride") {
            let v = self.integer(t, path, "output_stride", true);
            match self.check(path, "output_stride", v, |n| n >= 1, "must be at least 1") {
                Some(n) => config.output_stride = n,
                None => ok = false,
            }
        }
        if t.contains_key("safety") {
            let v = self.float(t, path, "safety");
            match self.check(
                path,
                "safety",
                v,
                |x| (0.0..1.0).contains(&x),
                "must lie in [0, 1)",
            ) {
                Some(x) => config.safety = x,
                None => ok = false,
            }
        }
        config.method = method?;
        if !ok {
            return None;
        }
        Some(config)
    }

    fn output(&mut self, root: &Table) -> Option<(OutputConfig, Vec<f64>)> {
        let empty = Table::new();
        let t = self.table(root, "", "output", false).unwrap_or(&empty);
        self.check_keys(t, "output", &["directory", "snapshot_times"]);
        let directory = if t.contains_key("directory") {
            PathBuf::from(self.string(t, "output", "directory", true)?)
        } else {
            PathBuf::from("output")
        };
        let times = self
            .floats(t, "output", "snapshot_times", false)
            .unwrap_or_default();
        for (k, x) in times.iter().enumerate() {
            if *x < 0.0 {
                self.error(
                    format!("output.snapshot_times[{k}]"),
                    "must be non-negative",
                );
            }
        }
        Some((OutputConfig { directory }, times))
    }
}
