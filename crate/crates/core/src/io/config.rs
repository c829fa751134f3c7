//! JSON run configuration.
//!
//! ```json
//! {
//!   "preset": "theorem1-demo",
//!   "name": "demo",
//!   "initial": {"kind": "perturbed_circle",
//!               "modes": [{"m": 2, "amplitude": 0.001, "phase": 0.0}]},
//!   "length": 6.283185307179586, "omega": 1, "n": 256,
//!   "scheme": "imex_bdf2", "dt": 0.0001, "dealias": false,
//!   "t_max": 1.0, "energy_tol": 1e-16, "blowup_cap": null,
//!   "output_stride": 100, "closure_stride": 100,
//!   "tolerances": {"winding": 1e-8, "constraint": 1e-10, "monotone_slack": 1e-12,
//!                  "smallness_energy": 0.01, "bound_slack": 1e-10, "closure": 1e-6},
//!   "decay_window": null, "out_dir": null, "seed": 0
//! }
//! ```
//!
//! `initial.kind` is one of `circle`, `perturbed_circle` (with `modes`),
//! `samples_file` (with `path`, a CSV with a `k` column) and `random`
//! (with `max_mode` and `amplitude`, drawn from `seed`). Without a preset,
//! `initial`, `length`, `omega` and `n` are required.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::curve::{make_circle, make_perturbed_circle, CurvatureProfile, Mode};
use crate::diagnostics::Tolerances;
use crate::error::{Error, Result};
use crate::flow::{IntegratorConfig, Scheme, StopCriteria};
use crate::grid::{GridFunction, MIN_NODES};
use crate::ineq::{AmplitudeLaw, ProfileSampler};
use crate::io::presets;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    UnknownKey(String),
    OutOfRange { key: String, reason: String },
    MissingRequired(String),
    WrongType { key: String, expected: &'static str },
    UnknownPreset(String),
    Syntax(String),
}

impl ConfigError {
    pub fn key(&self) -> &str {
        match self {
            ConfigError::UnknownKey(k)
            | ConfigError::MissingRequired(k)
            | ConfigError::OutOfRange { key: k, .. }
            | ConfigError::WrongType { key: k, .. } => k,
            ConfigError::UnknownPreset(_) => "preset",
            ConfigError::Syntax(_) => "<document>",
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey(k) => write!(f, "unknown key `{k}`"),
            ConfigError::OutOfRange { key, reason } => write!(f, "`{key}` out of range: {reason}"),
            ConfigError::MissingRequired(k) => write!(f, "missing required key `{k}`"),
            ConfigError::WrongType { key, expected } => write!(f, "`{key}` must be {expected}"),
            ConfigError::UnknownPreset(p) => write!(f, "unknown preset `{p}`"),
            ConfigError::Syntax(msg) => write!(f, "invalid JSON: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Circle,
    PerturbedCircle { modes: Vec<Mode> },
    SamplesFile { path: PathBuf },
    Random { max_mode: u32, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub initial: InitialData,
    pub length: f64,
    pub omega: i64,
    pub n: usize,
    pub integrator: IntegratorConfig,
    pub output_stride: usize,
    pub tolerances: Tolerances,
    pub decay_window: Option<(f64, f64)>,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    /// Builds the initial curvature profile.
    pub fn initial_profile(&self) -> Result<CurvatureProfile> {
        match &self.initial {
            InitialData::Circle => make_circle(self.length, self.omega, self.n),
            InitialData::PerturbedCircle { modes } => {
                make_perturbed_circle(self.length, self.omega, self.n, modes)
            }
            InitialData::Random {
                max_mode,
                amplitude,
            } => {
                let sampler = ProfileSampler {
                    seed: self.seed,
                    min_mode: 2,
                    max_mode: *max_mode,
                    amplitude_law: AmplitudeLaw::Uniform { a_max: *amplitude },
                    length: self.length,
                    omega: self.omega,
                    n: self.n,
                };
                Ok(sampler.profiles(1)?.remove(0))
            }
            InitialData::SamplesFile { path } => {
                let k = read_samples(path, self.length)?;
                if k.len() != self.n {
                    return Err(Error::SamplesFile {
                        path: path.clone(),
                        reason: format!("{} samples, config says n = {}", k.len(), self.n),
                    });
                }
                CurvatureProfile::new(k, self.omega)
            }
        }
    }

    /// Serializes every field explicitly, so the text parses back to `self`.
    pub fn to_json_value(&self) -> Value {
        let stop = &self.integrator.stop;
        serde_json::json!({
            "name": self.name,
            "initial": serde_json::to_value(&self.initial).expect("serializable"),
            "length": self.length,
            "omega": self.omega,
            "n": self.n,
            "scheme": self.integrator.scheme.name(),
            "dt": self.integrator.dt,
            "dealias": self.integrator.dealias,
            "t_max": stop.t_max,
            "energy_tol": stop.energy_tol,
            "blowup_cap": stop.blowup_cap,
            "output_stride": self.output_stride,
            "closure_stride": self.integrator.closure_stride,
            "tolerances": serde_json::to_value(self.tolerances).expect("serializable"),
            "decay_window": self.decay_window.map(|(a, b)| vec![a, b]),
            "out_dir": self.out_dir,
            "seed": self.seed,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("serializable");
        s.push('\n');
        s
    }
}

/// Reads the `k` column of a CSV file (a single unnamed column also works).
pub fn read_samples(path: &Path, length: f64) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::SamplesFile {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let (column, mut values) = match columns.iter().position(|c| *c == "k") {
        Some(i) => (i, Vec::new()),
        None if columns.len() == 1 => {
            let v: f64 = columns[0]
                .parse()
                .map_err(|_| bad("no `k` column".into()))?;
            (0, vec![v])
        }
        None => return Err(bad("no `k` column".into())),
    };
    for (i, line) in lines.enumerate() {
        let field = line
            .split(',')
            .nth(column)
            .ok_or_else(|| bad(format!("row {} is short", i + 1)))?;
        values.push(
            field
                .trim()
                .parse()
                .map_err(|_| bad(format!("row {}: cannot parse `{}`", i + 1, field.trim())))?,
        );
    }
    GridFunction::new(values, length)
}

/// Every field optional; presets and the document fill it in order.
#[derive(Debug, Default, Clone)]
pub(crate) struct Partial {
    pub name: Option<String>,
    pub initial: Option<InitialData>,
    pub length: Option<f64>,
    pub omega: Option<i64>,
    pub n: Option<usize>,
    pub scheme: Option<Scheme>,
    pub dt: Option<f64>,
    pub dealias: Option<bool>,
    pub t_max: Option<f64>,
    pub energy_tol: Option<Option<f64>>,
    pub blowup_cap: Option<Option<f64>>,
    pub output_stride: Option<usize>,
    pub closure_stride: Option<usize>,
    pub tolerances: Option<Tolerances>,
    pub decay_window: Option<Option<(f64, f64)>>,
    pub out_dir: Option<Option<PathBuf>>,
    pub seed: Option<u64>,
}

impl Partial {
    pub fn from_config(c: &RunConfig) -> Self {
        Partial {
            name: Some(c.name.clone()),
            initial: Some(c.initial.clone()),
            length: Some(c.length),
            omega: Some(c.omega),
            n: Some(c.n),
            scheme: Some(c.integrator.scheme),
            dt: Some(c.integrator.dt),
            dealias: Some(c.integrator.dealias),
            t_max: Some(c.integrator.stop.t_max),
            energy_tol: Some(c.integrator.stop.energy_tol),
            blowup_cap: Some(c.integrator.stop.blowup_cap),
            output_stride: Some(c.output_stride),
            closure_stride: Some(c.integrator.closure_stride),
            tolerances: Some(c.tolerances),
            decay_window: Some(c.decay_window),
            out_dir: Some(c.out_dir.clone()),
            seed: Some(c.seed),
        }
    }
}

struct Reader<'a> {
    errors: &'a mut Vec<ConfigError>,
}

impl Reader<'_> {
    fn wrong(&mut self, key: &str, expected: &'static str) {
        self.errors.push(ConfigError::WrongType {
            key: key.to_string(),
            expected,
        });
    }

    fn range(&mut self, key: &str, reason: impl Into<String>) {
        self.errors.push(ConfigError::OutOfRange {
            key: key.to_string(),
            reason: reason.into(),
        });
    }

    fn f64(&mut self, key: &str, v: &Value) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            Some(_) => {
                self.range(key, "must be finite");
                None
            }
            None => {
                self.wrong(key, "a number");
                None
            }
        }
    }

    fn opt_f64(&mut self, key: &str, v: &Value) -> Option<Option<f64>> {
        if v.is_null() {
            Some(None)
        } else {
            self.f64(key, v).map(Some)
        }
    }

    fn int(&mut self, key: &str, v: &Value) -> Option<i64> {
        match v.as_i64() {
            Some(x) => Some(x),
            None => {
                self.wrong(key, "an integer");
                None
            }
        }
    }

    fn uint(&mut self, key: &str, v: &Value) -> Option<u64> {
        match v.as_u64() {
            Some(x) => Some(x),
            None => {
                self.wrong(key, "a non-negative integer");
                None
            }
        }
    }

    fn string(&mut self, key: &str, v: &Value) -> Option<String> {
        match v.as_str() {
            Some(s) => Some(s.to_string()),
            None => {
                self.wrong(key, "a string");
                None
            }
        }
    }

    fn object<'v>(&mut self, key: &str, v: &'v Value) -> Option<&'v Map<String, Value>> {
        match v.as_object() {
            Some(m) => Some(m),
            None => {
                self.wrong(key, "an object");
                None
            }
        }
    }

    fn initial(&mut self, v: &Value) -> Option<InitialData> {
        let obj = self.object("initial", v)?;
        let kind = match obj.get("kind") {
            Some(k) => self.string("initial.kind", k)?,
            None => {
                self.errors
                    .push(ConfigError::MissingRequired("initial.kind".into()));
                return None;
            }
        };
        let allowed: &[&str] = match kind.as_str() {
            "circle" => &["kind"],
            "perturbed_circle" => &["kind", "modes"],
            "samples_file" => &["kind", "path"],
            "random" => &["kind", "max_mode", "amplitude"],
            _ => {
                self.range("initial.kind", format!("unknown kind `{kind}`"));
                return None;
            }
        };
        for k in obj.keys() {
            if !allowed.contains(&k.as_str()) {
                self.errors
                    .push(ConfigError::UnknownKey(format!("initial.{k}")));
            }
        }
        let need = |r: &mut Self, k: &str| -> Option<&Value> {
            let v = obj.get(k);
            if v.is_none() {
                r.errors
                    .push(ConfigError::MissingRequired(format!("initial.{k}")));
            }
            v
        };
        match kind.as_str() {
            "circle" => Some(InitialData::Circle),
            "perturbed_circle" => {
                let list = need(self, "modes")?;
                let Some(items) = list.as_array() else {
                    self.wrong("initial.modes", "an array");
                    return None;
                };
                let mut modes = Vec::new();
                let mut ok = true;
                for (i, item) in items.iter().enumerate() {
                    match self.mode(&format!("initial.modes[{i}]"), item) {
                        Some(m) => modes.push(m),
                        None => ok = false,
                    }
                }
                ok.then_some(InitialData::PerturbedCircle { modes })
            }
            "samples_file" => {
                let path = need(self, "path")?;
                let path = self.string("initial.path", path)?;
                Some(InitialData::SamplesFile { path: path.into() })
            }
            _ => {
                let max_mode =
                    need(self, "max_mode").and_then(|v| self.uint("initial.max_mode", v));
                let amplitude =
                    need(self, "amplitude").and_then(|v| self.f64("initial.amplitude", v));
                let (max_mode, amplitude) = (max_mode?, amplitude?);
                if max_mode < 2 || max_mode > u32::MAX as u64 {
                    self.range("initial.max_mode", "must be at least 2");
                    return None;
                }
                if amplitude < 0.0 {
                    self.range("initial.amplitude", "must be non-negative");
                    return None;
                }
                Some(InitialData::Random {
                    max_mode: max_mode as u32,
                    amplitude,
                })
            }
        }
    }

    fn mode(&mut self, key: &str, v: &Value) -> Option<Mode> {
        let obj = self.object(key, v)?;
        for k in obj.keys() {
            if !["m", "amplitude", "phase"].contains(&k.as_str()) {
                self.errors
                    .push(ConfigError::UnknownKey(format!("{key}.{k}")));
            }
        }
        let m = match obj.get("m") {
            Some(v) => self.uint(&format!("{key}.m"), v),
            None => {
                self.errors
                    .push(ConfigError::MissingRequired(format!("{key}.m")));
                None
            }
        };
        let amplitude = match obj.get("amplitude") {
            Some(v) => self.f64(&format!("{key}.amplitude"), v),
            None => {
                self.errors
                    .push(ConfigError::MissingRequired(format!("{key}.amplitude")));
                None
            }
        };
        let phase = match obj.get("phase") {
            Some(v) => self.f64(&format!("{key}.phase"), v),
            None => Some(0.0),
        };
        let (m, amplitude, phase) = (m?, amplitude?, phase?);
        if m == 0 || m > u32::MAX as u64 {
            self.range(&format!("{key}.m"), "mode index must be at least 1");
            return None;
        }
        Some(Mode::new(m as u32, amplitude, phase))
    }

    fn tolerances(&mut self, base: Tolerances, v: &Value) -> Option<Tolerances> {
        let obj = self.object("tolerances", v)?;
        let mut t = base;
        let mut ok = true;
        for (k, val) in obj {
            let key = format!("tolerances.{k}");
            let slot = match k.as_str() {
                "winding" => &mut t.winding,
                "constraint" => &mut t.constraint,
                "monotone_slack" => &mut t.monotone_slack,
                "smallness_energy" => &mut t.smallness_energy,
                "bound_slack" => &mut t.bound_slack,
                "closure" => &mut t.closure,
                _ => {
                    self.errors.push(ConfigError::UnknownKey(key));
                    ok = false;
                    continue;
                }
            };
            match self.f64(&key, val) {
                Some(x) if x >= 0.0 => *slot = x,
                Some(_) => {
                    self.range(&key, "must be non-negative");
                    ok = false;
                }
                None => ok = false,
            }
        }
        ok.then_some(t)
    }
}

const TOP_LEVEL_KEYS: &[&str] = &[
    "preset",
    "name",
    "initial",
    "length",
    "omega",
    "n",
    "scheme",
    "dt",
    "dealias",
    "t_max",
    "energy_tol",
    "blowup_cap",
    "output_stride",
    "closure_stride",
    "tolerances",
    "decay_window",
    "out_dir",
    "seed",
];

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::Config(vec![ConfigError::Syntax(e.to_string())]))?;
    config_from_value(&value)
}

pub fn config_from_value(value: &Value) -> Result<RunConfig> {
    let mut errors = Vec::new();
    let Some(obj) = value.as_object() else {
        return Err(Error::Config(vec![ConfigError::WrongType {
            key: "<document>".into(),
            expected: "an object",
        }]));
    };

    for k in obj.keys() {
        if !TOP_LEVEL_KEYS.contains(&k.as_str()) {
            errors.push(ConfigError::UnknownKey(k.clone()));
        }
    }

    let mut partial = Partial::default();
    if let Some(p) = obj.get("preset") {
        match p.as_str() {
            Some(name) => match presets::preset(name) {
                Some(cfg) => partial = Partial::from_config(&cfg),
                None => errors.push(ConfigError::UnknownPreset(name.to_string())),
            },
            None => errors.push(ConfigError::WrongType {
                key: "preset".into(),
                expected: "a string",
            }),
        }
    }

    let mut r = Reader {
        errors: &mut errors,
    };
    for (key, v) in obj {
        match key.as_str() {
            "name" => partial.name = r.string(key, v).or(partial.name),
            "initial" => partial.initial = r.initial(v).or(partial.initial),
            "length" => partial.length = r.f64(key, v).or(partial.length),
            "omega" => partial.omega = r.int(key, v).or(partial.omega),
            "n" => partial.n = r.uint(key, v).map(|x| x as usize).or(partial.n),
            "scheme" => {
                if let Some(s) = r.string(key, v) {
                    match Scheme::from_name(&s) {
                        Some(sc) => partial.scheme = Some(sc),
                        None => r.range(key, format!("unknown scheme `{s}`")),
                    }
                }
            }
            "dt" => partial.dt = r.f64(key, v).or(partial.dt),
            "dealias" => match v.as_bool() {
                Some(b) => partial.dealias = Some(b),
                None => r.wrong(key, "a boolean"),
            },
            "t_max" => partial.t_max = r.f64(key, v).or(partial.t_max),
            "energy_tol" => partial.energy_tol = r.opt_f64(key, v).or(partial.energy_tol),
            "blowup_cap" => partial.blowup_cap = r.opt_f64(key, v).or(partial.blowup_cap),
            "output_stride" => {
                partial.output_stride = r.uint(key, v).map(|x| x as usize).or(partial.output_stride)
            }
            "closure_stride" => {
                partial.closure_stride = r
                    .uint(key, v)
                    .map(|x| x as usize)
                    .or(partial.closure_stride)
            }
            "tolerances" => {
                let base = partial.tolerances.unwrap_or_default();
                partial.tolerances = r.tolerances(base, v).or(partial.tolerances);
            }
            "decay_window" => {
                if v.is_null() {
                    partial.decay_window = Some(None);
                } else {
                    match v
                        .as_array()
                        .map(|a| a.iter().map(Value::as_f64).collect::<Vec<_>>())
                    {
                        Some(w) if w.len() == 2 && w.iter().all(Option::is_some) => {
                            partial.decay_window = Some(Some((w[0].unwrap(), w[1].unwrap())))
                        }
                        _ => r.wrong(key, "null or a pair of numbers"),
                    }
                }
            }
            "out_dir" => {
                if v.is_null() {
                    partial.out_dir = Some(None);
                } else if let Some(s) = r.string(key, v) {
                    partial.out_dir = Some(Some(s.into()));
                }
            }
            "seed" => partial.seed = r.uint(key, v).or(partial.seed),
            _ => {}
        }
    }

    // a stride override without a closure stride keeps the two aligned
    if obj.contains_key("output_stride") && !obj.contains_key("closure_stride") {
        partial.closure_stride = partial.output_stride;
    }
    finish(partial, &mut errors)
}

fn finish(p: Partial, errors: &mut Vec<ConfigError>) -> Result<RunConfig> {
    let mut require = |key: &str, present: bool| {
        if !present {
            errors.push(ConfigError::MissingRequired(key.to_string()));
        }
    };
    require("initial", p.initial.is_some());
    require("length", p.length.is_some());
    require("omega", p.omega.is_some());
    require("n", p.n.is_some());

    let defaults = IntegratorConfig::default();
    let output_stride = p.output_stride.unwrap_or(100);
    let cfg = RunConfig {
        name: p.name.unwrap_or_else(|| "run".to_string()),
        initial: p.initial.unwrap_or(InitialData::Circle),
        length: p.length.unwrap_or(1.0),
        omega: p.omega.unwrap_or(1),
        n: p.n.unwrap_or(MIN_NODES),
        integrator: IntegratorConfig {
            scheme: p.scheme.unwrap_or(defaults.scheme),
            dt: p.dt.unwrap_or(defaults.dt),
            dealias: p.dealias.unwrap_or(defaults.dealias),
            stop: StopCriteria {
                t_max: p.t_max.unwrap_or(defaults.stop.t_max),
                energy_tol: p.energy_tol.unwrap_or(defaults.stop.energy_tol),
                blowup_cap: p.blowup_cap.unwrap_or(defaults.stop.blowup_cap),
            },
            closure_stride: p.closure_stride.unwrap_or(output_stride),
        },
        output_stride,
        tolerances: p.tolerances.unwrap_or_default(),
        decay_window: p.decay_window.unwrap_or(None),
        out_dir: p.out_dir.unwrap_or(None),
        seed: p.seed.unwrap_or(0),
    };
    validate_ranges(&cfg, errors);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(std::mem::take(errors)))
    }
}

fn validate_ranges(c: &RunConfig, errors: &mut Vec<ConfigError>) {
    let mut bad = |key: &str, reason: &str| {
        // a missing key was already reported
        if !errors.iter().any(|e| e.key() == key) {
            errors.push(ConfigError::OutOfRange {
                key: key.to_string(),
                reason: reason.to_string(),
            });
        }
    };
    if c.length <= 0.0 {
        bad("length", "must be positive");
    }
    if c.omega == 0 {
        bad("omega", "winding number must be nonzero");
    }
    if c.n < MIN_NODES || !c.n.is_multiple_of(2) {
        bad("n", "must be even and at least 16");
    }
    let ic = &c.integrator;
    if ic.dt <= 0.0 {
        bad("dt", "must be positive");
    }
    if ic.stop.t_max < 0.0 {
        bad("t_max", "must be non-negative");
    }
    if ic.stop.energy_tol.is_some_and(|x| x < 0.0) {
        bad("energy_tol", "must be non-negative");
    }
    if ic.stop.blowup_cap.is_some_and(|x| x <= 0.0) {
        bad("blowup_cap", "must be positive");
    }
    if c.output_stride == 0 {
        bad("output_stride", "must be at least 1");
    }
    if ic.closure_stride == 0
        || (c.output_stride > 0 && !c.output_stride.is_multiple_of(ic.closure_stride))
    {
        bad(
            "closure_stride",
            "must be positive and divide output_stride",
        );
    }
    if let Some((a, b)) = c.decay_window {
        if !(a.is_finite() && b.is_finite() && a < b) {
            bad("decay_window", "needs finite t_lo < t_hi");
        }
    }
    if let InitialData::PerturbedCircle { modes } = &c.initial {
        if c.n >= MIN_NODES && modes.iter().any(|m| 2 * m.m as usize >= c.n) {
            bad("initial.modes", "mode index must be below n / 2");
        }
    }
}
