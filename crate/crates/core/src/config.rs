//! Run configuration.
//!
//! A configuration is a TOML document with four sections, `landscape`,
//! `solver`, `drive` and `sweep`, written either as tables or as dotted keys
//! (`landscape.beta = 0.78`). Units are part of the key name (`_mhz` for
//! `ω/2π` in MHz, `_ghz`, `_ns`, `_us`). Parsing is strict: every key is
//! either consumed or reported, and all problems are collected at once.
//!
//! Any key can be overridden from the environment as
//! `GIANT_ATOM_<SECTION>__<KEY>`, e.g. `GIANT_ATOM_LANDSCAPE__BETA=0.5`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::driven::{Dissipator, MasterOptions};
use crate::landscape::{self, CouplingLandscape};
use crate::relaxation::{RateConvention, SolverTag};
use crate::units;

pub const ENV_PREFIX: &str = "GIANT_ATOM_";

pub const QUANTITIES: [&str; 5] = ["gamma_eff", "pe_trace", "evolve", "steady_pe", "map"];
pub const PRESETS: [&str; 6] = ["fig2b", "fig2c", "fig3b", "fig3d", "fig3f", "fig4i"];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Str(String),
    List(Vec<String>),
    #[serde(serialize_with = "ser_unset")]
    Unset,
}

fn ser_unset<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_none()
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(x) => write!(f, "{x}"),
            Value::Int(x) => write!(f, "{x}"),
            Value::Bool(x) => write!(f, "{x}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::List(l) => write!(f, "{l:?}"),
            Value::Unset => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Float,
    Int,
    Bool,
    Choice(&'static [&'static str]),
    ChoiceList(&'static [&'static str]),
}

struct KeySpec {
    path: &'static str,
    kind: Kind,
    default: fn() -> Value,
}

const CONVENTIONS: &[&str] = &["amplitude_half_rates", "population_rates"];
const RELAX_SOLVERS: &[&str] = &["series", "dde", "mode_oracle"];

macro_rules! key {
    ($path:literal, $kind:expr, $default:expr) => {
        KeySpec { path: $path, kind: $kind, default: || $default }
    };
}

fn landscape_default(key: &str) -> Value {
    let v = landscape::DEFAULT_CONFIG.iter().find(|(k, _)| *k == key).expect("known landscape key").1;
    if key == "n_pairs" {
        Value::Int(v as u64)
    } else {
        Value::Float(v)
    }
}

static KEYS: &[KeySpec] = &[
    key!("landscape.gamma_peak_mhz", Kind::Float, landscape_default("gamma_peak_mhz")),
    key!("landscape.omega_center_ghz", Kind::Float, landscape_default("omega_center_ghz")),
    key!("landscape.n_pairs", Kind::Int, landscape_default("n_pairs")),
    key!("landscape.beta", Kind::Float, landscape_default("beta")),
    key!("landscape.delay_t_ns", Kind::Float, landscape_default("delay_t_ns")),
    key!("landscape.gamma_in_c0_mhz", Kind::Float, landscape_default("gamma_in_c0_mhz")),
    key!("landscape.gamma_in_slope", Kind::Float, landscape_default("gamma_in_slope")),
    key!("landscape.band_lo_ghz", Kind::Float, landscape_default("band_lo_ghz")),
    key!("landscape.band_hi_ghz", Kind::Float, landscape_default("band_hi_ghz")),
    key!("solver.dt_ns", Kind::Float, Value::Unset),
    key!("solver.n_modes", Kind::Int, Value::Int(4000)),
    key!("solver.bandwidth_mhz", Kind::Float, Value::Unset),
    key!("solver.convention", Kind::Choice(CONVENTIONS), Value::Str("amplitude_half_rates".into())),
    key!("solver.secular", Kind::Bool, Value::Bool(false)),
    key!("solver.seed", Kind::Int, Value::Int(0)),
    key!("solver.extra_dephasing_mhz", Kind::Float, Value::Float(0.0)),
    key!("solver.relax_solver", Kind::Choice(RELAX_SOLVERS), Value::Str("series".into())),
    key!("solver.tomography_shots", Kind::Int, Value::Int(1000)),
    key!("drive.rabi_mhz", Kind::Float, Value::Float(0.2)),
    key!("drive.detuning_mhz", Kind::Float, Value::Float(0.0)),
    key!("drive.duration_us", Kind::Float, Value::Float(3.8)),
    key!("sweep.quantity", Kind::ChoiceList(&QUANTITIES), Value::List(vec!["gamma_eff".into()])),
    key!("sweep.preset", Kind::Choice(&PRESETS), Value::Unset),
    key!("sweep.qubit_ghz", Kind::Float, Value::Float(4.891)),
    key!("sweep.freq_start_ghz", Kind::Float, Value::Float(4.0)),
    key!("sweep.freq_stop_ghz", Kind::Float, Value::Float(5.0)),
    key!("sweep.freq_count", Kind::Int, Value::Int(1001)),
    key!("sweep.rabi_start_mhz", Kind::Float, Value::Float(0.0)),
    key!("sweep.rabi_stop_mhz", Kind::Float, Value::Float(40.0)),
    key!("sweep.rabi_count", Kind::Int, Value::Int(101)),
    key!("sweep.delta_start_mhz", Kind::Float, Value::Float(-5.0)),
    key!("sweep.delta_stop_mhz", Kind::Float, Value::Float(-5.0)),
    key!("sweep.delta_count", Kind::Int, Value::Int(1)),
    key!("sweep.t_max_ns", Kind::Float, Value::Float(1250.0)),
    key!("sweep.t_count", Kind::Int, Value::Int(501)),
    key!("sweep.samples", Kind::Int, Value::Int(256)),
];

const UNIT_SUFFIXES: [&str; 7] = ["_mhz", "_ghz", "_khz", "_hz", "_ns", "_us", "_s"];

fn split_unit(key: &str) -> (&str, Option<&'static str>) {
    for u in UNIT_SUFFIXES {
        if let Some(stem) = key.strip_suffix(u) {
            return (stem, Some(u));
        }
    }
    (key, None)
}

/// Every recognised key path with its default, in canonical order.
pub fn known_keys() -> Vec<(&'static str, Value)> {
    KEYS.iter().map(|k| (k.path, (k.default)())).collect()
}

/// One problem found while reading a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted key path, or `<document>` / `<env:NAME>` for problems not tied
    /// to a key.
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self { key: key.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Explicit step (s); `None` picks a solver-specific default.
    pub dt: Option<f64>,
    pub n_modes: usize,
    /// Oracle bandwidth (rad/s); `None` sizes it from the horizon.
    pub bandwidth: Option<f64>,
    pub convention: RateConvention,
    pub dissipator: Dissipator,
    pub seed: u64,
    pub extra_dephasing: f64,
    pub relax_solver: SolverTag,
    pub tomography_shots: u64,
}

impl SolverConfig {
    pub fn master_options(&self) -> MasterOptions {
        MasterOptions { dissipator: self.dissipator, extra_dephasing: self.extra_dephasing }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriveConfig {
    pub rabi: f64,
    pub detuning: f64,
    pub duration: f64,
}

/// Linear range in config units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeCfg {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub quantities: Vec<String>,
    pub preset: Option<String>,
    pub qubit_ghz: f64,
    pub freq_ghz: RangeCfg,
    pub rabi_mhz: RangeCfg,
    pub delta_mhz: RangeCfg,
    pub t_max_ns: f64,
    pub t_count: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub landscape: CouplingLandscape,
    pub solver: SolverConfig,
    pub drive: DriveConfig,
    pub sweep: SweepConfig,
    values: BTreeMap<String, Value>,
}

impl Default for RunConfig {
    fn default() -> Self {
        validate_config("").expect("empty configuration is valid")
    }
}

impl RunConfig {
    /// Resolved values keyed by path, in config units.
    pub fn values(&self) -> &BTreeMap<String, Value> {
        &self.values
    }

    /// Resolved values converted to SI (`_ns`/`_us` → `_s`, `_mhz`/`_ghz` →
    /// `_hz`; frequencies stay `ω/2π`).
    pub fn si_echo(&self) -> BTreeMap<String, Value> {
        self.values
            .iter()
            .map(|(k, v)| {
                let (stem, unit) = split_unit(k);
                let scale = match unit {
                    Some("_ns") => Some(("_s", 1e9, false)),
                    Some("_us") => Some(("_s", 1e6, false)),
                    Some("_mhz") => Some(("_hz", 1e6, true)),
                    Some("_ghz") => Some(("_hz", 1e9, true)),
                    _ => None,
                };
                match (scale, v) {
                    (Some((suffix, f, mul)), Value::Float(x)) => {
                        let y = if mul { x * f } else { x / f };
                        (format!("{stem}{suffix}"), Value::Float(y))
                    }
                    _ => (k.clone(), v.clone()),
                }
            })
            .collect()
    }

    /// SHA-256 of the canonical resolved configuration, hex encoded.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(&self.values).expect("config values serialise");
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Resolved configuration as a TOML-style listing.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (k, v) in self.canonical() {
            let (s, name) = k.split_once('.').expect("dotted key");
            if s != section {
                if !out.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{s}]\n"));
                section = s;
            }
            match v {
                Value::Unset => out.push_str(&format!("# {name} = auto\n")),
                _ => out.push_str(&format!("{name} = {v}\n")),
            }
        }
        out
    }

    fn canonical(&self) -> impl Iterator<Item = (&'static str, &Value)> {
        KEYS.iter().map(move |k| (k.path, &self.values[k.path]))
    }
}

/// Strict parse with no environment overrides.
pub fn validate_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    validate_config_with(text, std::iter::empty::<(String, String)>())
}

/// Strict parse followed by overrides given as `(dotted key, raw value)`.
pub fn validate_config_with<I, K, V>(text: &str, overrides: I) -> Result<RunConfig, Vec<ConfigError>>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let mut errors = Vec::new();
    let mut raw: BTreeMap<String, toml::Value> = BTreeMap::new();

    match text.parse::<toml::Table>() {
        Ok(table) => flatten("", &table, &mut raw),
        Err(e) => {
            let at = e.span().map(|s| line_col(text, s.start));
            let msg = e.message().trim().to_string();
            let message = match at {
                Some((l, c)) => format!("syntax error at line {l}, column {c}: {msg}"),
                None => format!("syntax error: {msg}"),
            };
            return Err(vec![ConfigError::new("<document>", message)]);
        }
    }
    for (k, v) in overrides {
        let key = k.as_ref().to_string();
        raw.insert(key, parse_override(v.as_ref()));
    }

    let mut values: BTreeMap<String, Value> = KEYS.iter().map(|k| (k.path.to_string(), (k.default)())).collect();
    for (key, v) in &raw {
        match KEYS.iter().find(|k| k.path == key) {
            Some(spec) => match coerce(spec.kind, v) {
                Ok(val) => {
                    values.insert(key.clone(), val);
                }
                Err(m) => errors.push(ConfigError::new(key.clone(), m)),
            },
            None => errors.push(ConfigError::new(key.clone(), unknown_key_message(key))),
        }
    }
    match build(values) {
        Ok(c) if errors.is_empty() => Ok(c),
        Ok(_) => Err(errors),
        Err(more) => {
            errors.extend(more);
            errors.sort_by(|a, b| a.key.cmp(&b.key));
            Err(errors)
        }
    }
}

/// Collect `GIANT_ATOM_SECTION__KEY` variables as dotted overrides.
pub fn env_overrides<I: IntoIterator<Item = (String, String)>>(vars: I) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = vars
        .into_iter()
        .filter_map(|(k, v)| {
            let rest = k.strip_prefix(ENV_PREFIX)?;
            Some((rest.to_ascii_lowercase().replace("__", "."), v))
        })
        .collect();
    out.sort();
    out
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) if prefix.is_empty() => flatten(&path, t, out),
            _ => {
                out.insert(path, v.clone());
            }
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn parse_override(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn unknown_key_message(key: &str) -> String {
    let Some((section, name)) = key.split_once('.') else {
        return match KEYS.iter().any(|k| k.path.starts_with(&format!("{key}."))) {
            true => format!("'{key}' must be a table"),
            false => format!("unknown section '{key}'"),
        };
    };
    let (stem, unit) = split_unit(name);
    let same_stem = KEYS.iter().find(|k| {
        k.path.split_once('.').is_some_and(|(s, n)| s == section && split_unit(n).0 == stem && split_unit(n).1.is_some())
    });
    match (same_stem, unit) {
        (Some(k), _) => {
            let expected = split_unit(k.path).1.unwrap_or("").trim_start_matches('_');
            let given = unit.map_or("no unit".to_string(), |u| u.trim_start_matches('_').to_string());
            format!("unit mismatch: '{key}' is given in {given}, expected '{}' in {expected}", k.path)
        }
        (None, _) if !KEYS.iter().any(|k| k.path.starts_with(&format!("{section}."))) => {
            format!("unknown section '{section}'")
        }
        (None, _) => format!("unknown key '{key}'"),
    }
}

fn coerce(kind: Kind, v: &toml::Value) -> Result<Value, String> {
    use toml::Value as T;
    match (kind, v) {
        (Kind::Float, T::Float(x)) => Ok(Value::Float(*x)),
        (Kind::Float, T::Integer(i)) => Ok(Value::Float(*i as f64)),
        (Kind::Int, T::Integer(i)) if *i >= 0 => Ok(Value::Int(*i as u64)),
        (Kind::Int, T::Integer(i)) => Err(format!("expected a non-negative integer, got {i}")),
        (Kind::Bool, T::Boolean(b)) => Ok(Value::Bool(*b)),
        (Kind::Choice(opts), T::String(s)) => choice(opts, s).map(Value::Str),
        (Kind::ChoiceList(opts), T::String(s)) => choice(opts, s).map(|s| Value::List(vec![s])),
        (Kind::ChoiceList(opts), T::Array(items)) => {
            let mut out = Vec::new();
            for it in items {
                match it {
                    T::String(s) => out.push(choice(opts, s)?),
                    other => return Err(format!("expected strings, got {}", other.type_str())),
                }
            }
            if out.is_empty() {
                return Err("list must not be empty".into());
            }
            Ok(Value::List(out))
        }
        (k, other) => Err(format!("expected {}, got {}", kind_name(k), other.type_str())),
    }
}

fn choice(opts: &[&str], s: &str) -> Result<String, String> {
    if opts.contains(&s) {
        Ok(s.to_string())
    } else {
        Err(format!("'{s}' is not one of {}", opts.join(", ")))
    }
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Float => "a number",
        Kind::Int => "an integer",
        Kind::Bool => "a boolean",
        Kind::Choice(_) => "a string",
        Kind::ChoiceList(_) => "a string or list of strings",
    }
}

fn build(values: BTreeMap<String, Value>) -> Result<RunConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let f = |k: &str| match &values[k] {
        Value::Float(x) => *x,
        _ => unreachable!("{k} is a float key"),
    };
    let of = |k: &str| match &values[k] {
        Value::Float(x) => Some(*x),
        _ => None,
    };
    let i = |k: &str| match &values[k] {
        Value::Int(x) => *x,
        _ => unreachable!("{k} is an integer key"),
    };
    let s = |k: &str| match &values[k] {
        Value::Str(x) => Some(x.clone()),
        _ => None,
    };

    let land_vals: Vec<(&str, f64)> = landscape::CONFIG_KEYS
        .iter()
        .map(|k| {
            let path = format!("landscape.{k}");
            let v = match &values[&path] {
                Value::Int(n) => *n as f64,
                Value::Float(x) => *x,
                _ => unreachable!(),
            };
            (*k, v)
        })
        .collect();
    let landscape = match CouplingLandscape::from_config_values(&land_vals) {
        Ok(l) => Some(l),
        Err(e) => {
            let msg = e.to_string();
            let key = landscape::CONFIG_KEYS
                .iter()
                .find(|k| msg.contains(*k) || (**k == "delay_t_ns" && msg.contains("delay_T")))
                .map_or("landscape".to_string(), |k| format!("landscape.{k}"));
            errors.push(ConfigError::new(key, msg.trim_start_matches("validation failed: ").to_string()));
            None
        }
    };

    let mut positive = |k: &str, x: Option<f64>, allow_zero: bool| {
        if let Some(x) = x {
            let ok = if allow_zero { x >= 0.0 } else { x > 0.0 };
            if !ok || !x.is_finite() {
                let bound = if allow_zero { ">= 0" } else { "> 0" };
                errors.push(ConfigError::new(k, format!("must be {bound}, got {x}")));
            }
        }
    };
    positive("solver.dt_ns", of("solver.dt_ns"), false);
    positive("solver.bandwidth_mhz", of("solver.bandwidth_mhz"), false);
    positive("solver.extra_dephasing_mhz", Some(f("solver.extra_dephasing_mhz")), true);
    positive("drive.rabi_mhz", Some(f("drive.rabi_mhz")), true);
    positive("drive.duration_us", Some(f("drive.duration_us")), true);
    positive("sweep.qubit_ghz", Some(f("sweep.qubit_ghz")), false);
    positive("sweep.t_max_ns", Some(f("sweep.t_max_ns")), false);
    positive("sweep.rabi_start_mhz", Some(f("sweep.rabi_start_mhz")), true);
    positive("sweep.freq_start_ghz", Some(f("sweep.freq_start_ghz")), false);

    let mut range = |name: &str, unit: &str| {
        let r = RangeCfg {
            start: f(&format!("sweep.{name}_start_{unit}")),
            stop: f(&format!("sweep.{name}_stop_{unit}")),
            count: i(&format!("sweep.{name}_count")) as usize,
        };
        if r.count == 0 {
            errors.push(ConfigError::new(format!("sweep.{name}_count"), "count must be >= 1"));
        }
        if r.start > r.stop {
            errors.push(ConfigError::new(format!("sweep.{name}_start_{unit}"), format!("start {} exceeds stop {}", r.start, r.stop)));
        }
        if r.count == 1 && r.start != r.stop {
            errors.push(ConfigError::new(format!("sweep.{name}_count"), "a 1-point axis needs start == stop"));
        }
        r
    };
    let freq_ghz = range("freq", "ghz");
    let rabi_mhz = range("rabi", "mhz");
    let delta_mhz = range("delta", "mhz");

    for (k, min) in [("sweep.t_count", 2), ("sweep.samples", 2), ("solver.tomography_shots", 1), ("solver.n_modes", 1)] {
        if i(k) < min {
            errors.push(ConfigError::new(k, format!("must be >= {min}, got {}", i(k))));
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    let relax_solver = match s("solver.relax_solver").as_deref() {
        Some("dde") => SolverTag::Dde,
        Some("mode_oracle") => SolverTag::ModeOracle,
        _ => SolverTag::Series,
    };
    let solver = SolverConfig {
        dt: of("solver.dt_ns").map(units::ns),
        n_modes: i("solver.n_modes") as usize,
        bandwidth: of("solver.bandwidth_mhz").map(units::mhz),
        convention: RateConvention::parse(&s("solver.convention").expect("has default")).expect("validated choice"),
        dissipator: match values["solver.secular"] {
            Value::Bool(true) => Dissipator::Secular,
            _ => Dissipator::Full,
        },
        seed: i("solver.seed"),
        extra_dephasing: units::mhz(f("solver.extra_dephasing_mhz")),
        relax_solver,
        tomography_shots: i("solver.tomography_shots"),
    };
    let drive = DriveConfig {
        rabi: units::mhz(f("drive.rabi_mhz")),
        detuning: units::mhz(f("drive.detuning_mhz")),
        duration: units::us(f("drive.duration_us")),
    };
    let quantities = match &values["sweep.quantity"] {
        Value::List(l) => l.clone(),
        _ => unreachable!(),
    };
    let sweep = SweepConfig {
        quantities,
        preset: s("sweep.preset"),
        qubit_ghz: f("sweep.qubit_ghz"),
        freq_ghz,
        rabi_mhz,
        delta_mhz,
        t_max_ns: f("sweep.t_max_ns"),
        t_count: i("sweep.t_count") as usize,
        samples: i("sweep.samples") as usize,
    };
    Ok(RunConfig { landscape: landscape.expect("no errors"), solver, drive, sweep, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errs(text: &str) -> Vec<ConfigError> {
        validate_config(text).unwrap_err()
    }

    #[test]
    fn empty_document_is_device_default() {
        let c = validate_config("").unwrap();
        assert_eq!(c.landscape, CouplingLandscape::device_default());
        assert_eq!(c.solver.convention, RateConvention::AmplitudeHalfRates);
        assert_eq!(c.solver.dissipator, Dissipator::Full);
        assert_eq!(c.solver.tomography_shots, 1000);
        assert!((c.drive.duration - 3.8e-6).abs() < 1e-20);
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn delay_echoed_in_seconds() {
        let c = validate_config("[landscape]\ndelay_t_ns = 125\n").unwrap();
        assert_eq!(c.si_echo()["landscape.delay_t_s"], Value::Float(1.25e-7));
        assert_eq!(c.landscape.delay, 1.25e-7);
    }

    #[test]
    fn beta_out_of_range() {
        let e = errs("landscape.beta = 1.5");
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].key, "landscape.beta");
        assert!(e[0].message.contains("beta out of [0,1]"), "{}", e[0]);
    }

    #[test]
    fn dotted_and_table_forms_agree() {
        let a = validate_config("landscape.beta = 0.5\nsolver.seed = 7\n").unwrap();
        let b = validate_config("[landscape]\nbeta = 0.5\n[solver]\nseed = 7\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), RunConfig::default().hash());
    }

    #[test]
    fn all_errors_reported_together() {
        let e = errs("[landscape]\nbetta = 0.5\ndelay_t_us = 0.125\n[drive]\nrabi_mhz = \"fast\"\n[warp]\nx = 1\n");
        let keys: Vec<&str> = e.iter().map(|e| e.key.as_str()).collect();
        assert_eq!(keys, ["drive.rabi_mhz", "landscape.betta", "landscape.delay_t_us", "warp.x"]);
        assert!(e[1].message.contains("unknown key"));
        assert!(e[2].message.contains("unit mismatch") && e[2].message.contains("landscape.delay_t_ns"), "{}", e[2]);
        assert!(e[3].message.contains("unknown section"));
    }

    #[test]
    fn syntax_error_has_position() {
        let e = errs("[landscape]\nbeta = = 3\n");
        assert_eq!(e.len(), 1);
        assert!(e[0].message.contains("line 2, column"), "{}", e[0]);
    }

    #[test]
    fn overrides_and_env() {
        let env = vec![
            ("GIANT_ATOM_LANDSCAPE__BETA".to_string(), "0.25".to_string()),
            ("GIANT_ATOM_SOLVER__CONVENTION".to_string(), "population_rates".to_string()),
            ("HOME".to_string(), "/root".to_string()),
        ];
        let ov = env_overrides(env);
        assert_eq!(ov.len(), 2);
        let c = validate_config_with("landscape.beta = 0.5", ov).unwrap();
        assert_eq!(c.landscape.beta, 0.25);
        assert_eq!(c.solver.convention, RateConvention::PopulationRates);
        let e = validate_config_with("", [("landscape.nope", "1")]).unwrap_err();
        assert_eq!(e[0].key, "landscape.nope");
    }

    #[test]
    fn sweep_axes_validated() {
        let e = errs("[sweep]\nrabi_start_mhz = 5\nrabi_stop_mhz = 1\nfreq_count = 0\nquantity = [\"map\", \"bogus\"]\n");
        assert_eq!(e.len(), 3, "{e:?}");
        let c = validate_config("sweep.quantity = [\"map\", \"steady_pe\"]\nsweep.preset = \"fig4i\"").unwrap();
        assert_eq!(c.sweep.quantities, ["map", "steady_pe"]);
        assert_eq!(c.sweep.preset.as_deref(), Some("fig4i"));
    }

    #[test]
    fn render_round_trips() {
        let c = validate_config("landscape.beta = 0.5\nsolver.dt_ns = 0.125\nsweep.quantity = \"map\"").unwrap();
        let text = c.render();
        let text: String = text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
        let back = validate_config(&text).unwrap();
        assert_eq!(back, c);
    }
}
