//! Run configuration.
//!
//! The file format is flat `key = value` lines with dotted keys, `#` starts a
//! comment line. Every key and its default is listed in [`KEYS`]; unknown
//! keys, duplicates and keys that do not apply to the chosen model are
//! rejected with the offending field and line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use casimir_core::corrugation::OperatorKind;
use casimir_core::materials::{load_optical_table, TableFormat};
use casimir_core::materials::MaterialError;
use casimir_core::{MaterialModel, QuadratureSpec};
use thiserror::Error;

/// Where a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => f.write_str("command-line override"),
            Origin::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field} ({origin}): {message}")]
pub struct ConfigError {
    pub field: String,
    pub origin: Origin,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, origin: Origin, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), origin, message: message.into() }
    }
}

/// Every accepted key with its documented default (`None`: no default).
/// `mirror2.*` defaults to a copy of `mirror1.*`.
pub const KEYS: &[(&str, Option<&str>)] = &[
    ("command", None),
    ("mirror1.model", Some("gold-plasma")),
    ("mirror1.lambda_P", None),
    ("mirror1.table", None),
    ("mirror1.format", None),
    ("mirror2.model", None),
    ("mirror2.lambda_P", None),
    ("mirror2.table", None),
    ("mirror2.format", None),
    ("geometry.separation_L", None),
    ("geometry.area_A", Some("1e-4")),
    ("geometry.temperature_T", Some("0")),
    ("corrugation.a1", None),
    ("corrugation.a2", None),
    ("corrugation.kappa_C", None),
    ("corrugation.b", Some("0")),
    ("corrugation.operator", Some("rayleigh")),
    ("quadrature.rel_tol", None),
    ("quadrature.abs_tol", Some("0")),
    ("quadrature.max_subdivisions", Some("4000")),
    ("sweep.L_min", None),
    ("sweep.L_max", None),
    ("sweep.L_points", None),
    ("sweep.kappaL_min", None),
    ("sweep.kappaL_max", None),
    ("sweep.kappaL_points", None),
    ("sweep.b_points", None),
    ("ingest.input", None),
    ("ingest.format", None),
    ("output.path", None),
    ("run.threads", Some("0")),
];

/// Relative tolerance used when `quadrature.rel_tol` is absent.
pub fn default_rel_tol(command: Command) -> f64 {
    match command {
        Command::Kernel | Command::RhoSweep => 1e-5,
        _ => 1e-8,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Ideal,
    Lifshitz,
    EtaSweep,
    LateralPfa,
    Kernel,
    RhoSweep,
    Ingest,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Ideal,
        Command::Lifshitz,
        Command::EtaSweep,
        Command::LateralPfa,
        Command::Kernel,
        Command::RhoSweep,
        Command::Ingest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Ideal => "ideal",
            Command::Lifshitz => "lifshitz",
            Command::EtaSweep => "eta-sweep",
            Command::LateralPfa => "lateral-pfa",
            Command::Kernel => "kernel",
            Command::RhoSweep => "rho-sweep",
            Command::Ingest => "ingest",
        }
    }

    fn needs_separation(self) -> bool {
        !matches!(self, Command::EtaSweep | Command::Ingest)
    }

    fn needs_corrugation(self) -> bool {
        matches!(self, Command::LateralPfa | Command::Kernel)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaterialSpec {
    GoldPlasma,
    Perfect,
    Plasma { lambda_p: f64 },
    Table { path: PathBuf, format: TableFormat },
}

impl MaterialSpec {
    pub fn build(&self) -> Result<MaterialModel, MaterialError> {
        match self {
            MaterialSpec::GoldPlasma => Ok(MaterialModel::gold_plasma()),
            MaterialSpec::Perfect => Ok(MaterialModel::PerfectReflector),
            MaterialSpec::Plasma { lambda_p } => MaterialModel::plasma_wavelength(*lambda_p),
            MaterialSpec::Table { path, format } => load_optical_table(path, Some(*format)).map(MaterialModel::Tabulated),
        }
    }

    /// `(suffix, value)` pairs for a `mirrorN.` prefix.
    fn entries(&self) -> Vec<(&'static str, String)> {
        match self {
            MaterialSpec::GoldPlasma => vec![("model", "gold-plasma".into())],
            MaterialSpec::Perfect => vec![("model", "perfect".into())],
            MaterialSpec::Plasma { lambda_p } => vec![("model", "plasma".into()), ("lambda_P", num(*lambda_p))],
            MaterialSpec::Table { path, format } => vec![
                ("model", "table".into()),
                ("table", path.display().to_string()),
                ("format", format_name(*format).into()),
            ],
        }
    }

    /// Parse the command-line shorthand: `gold-plasma`, `perfect`,
    /// `plasma:<lambda_P>` or `table:<A|B>:<path>`.
    pub fn shorthand_entries(s: &str) -> Result<Vec<(&'static str, String)>, String> {
        let mut parts = s.splitn(3, ':');
        let head = parts.next().unwrap_or_default();
        let out = match head {
            "gold-plasma" | "perfect" => vec![("model", head.to_string())],
            "plasma" => {
                let lp = parts.next().ok_or("expected plasma:<lambda_P in m>")?;
                vec![("model", "plasma".into()), ("lambda_P", lp.to_string())]
            }
            "table" => {
                let fmt = parts.next().ok_or("expected table:<A|B>:<path>")?;
                let path = parts.next().ok_or("expected table:<A|B>:<path>")?;
                vec![("model", "table".into()), ("format", fmt.to_string()), ("table", path.to_string())]
            }
            other => return Err(format!("unknown material '{other}'")),
        };
        Ok(out)
    }
}

fn format_name(f: TableFormat) -> &'static str {
    match f {
        TableFormat::EpsilonImagAxis => "A",
        TableFormat::NAndKRealAxis => "B",
    }
}

fn parse_format(s: &str) -> Option<TableFormat> {
    match s {
        "A" => Some(TableFormat::EpsilonImagAxis),
        "B" => Some(TableFormat::NAndKRealAxis),
        _ => None,
    }
}

fn operator_name(op: OperatorKind) -> &'static str {
    match op {
        OperatorKind::Rayleigh => "rayleigh",
        OperatorKind::SpecularLimit => "specular-limit",
    }
}

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corrugation {
    pub a1: f64,
    pub a2: f64,
    pub kappa_c: f64,
    pub b: f64,
    pub operator: OperatorKind,
}

/// Log-spaced grid with `points` nodes from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn nodes(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let ratio = (self.max / self.min).ln();
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.max
                } else {
                    self.min * (ratio * i as f64 / (self.points - 1) as f64).exp()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingest {
    pub input: PathBuf,
    pub format: TableFormat,
}

/// A fully resolved run. Every field is explicit; [`emit`] writes all of
/// them so that the emitted text alone determines the run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub mirror1: MaterialSpec,
    pub mirror2: MaterialSpec,
    pub separation: Option<f64>,
    pub area: f64,
    pub temperature: f64,
    pub corrugation: Option<Corrugation>,
    pub quadrature: QuadratureSpec,
    pub separation_grid: Option<Grid>,
    pub kappa_grid: Option<Grid>,
    pub b_points: Option<usize>,
    pub ingest: Option<Ingest>,
    pub output: PathBuf,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    origin: Origin,
}

/// Parsed but unresolved key/value pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let origin = Origin::Line(idx + 1);
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::new(line, origin, "expected 'key = value'"));
            };
            let (key, value) = (key.trim(), value.trim());
            if !known(key) {
                return Err(ConfigError::new(key, origin, "unknown key"));
            }
            if let Some(prev) = raw.entries.get(key) {
                return Err(ConfigError::new(key, origin, format!("duplicate key, first set at {}", prev.origin)));
            }
            raw.entries.insert(key.to_string(), Entry { value: value.to_string(), origin });
        }
        Ok(raw)
    }

    /// Override one key (later overrides win).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !known(key) {
            return Err(ConfigError::new(key, Origin::Override, "unknown key"));
        }
        self.entries.insert(key.to_string(), Entry { value: value.trim().to_string(), origin: Origin::Override });
        Ok(())
    }

    /// Parse `key=value`.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| ConfigError::new(pair, Origin::Override, "expected KEY=VALUE"))?;
        self.set(k.trim(), v)
    }

    /// Replace every `prefix.*` key (`prefix` is `mirror1` or `mirror2`)
    /// with the material given in shorthand.
    pub fn set_material(&mut self, prefix: &str, shorthand: &str) -> Result<(), ConfigError> {
        let field = format!("{prefix}.model");
        let entries = MaterialSpec::shorthand_entries(shorthand)
            .map_err(|m| ConfigError::new(&field, Origin::Override, m))?;
        self.entries.retain(|k, _| !k.starts_with(&format!("{prefix}.")));
        for (suffix, value) in entries {
            self.set(&format!("{prefix}.{suffix}"), &value)?;
        }
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn get(&self, key: &str) -> Option<(&str, Origin)> {
        self.entries.get(key).map(|e| (e.value.as_str(), e.origin))
    }

    fn value<T: FromStr>(&self, key: &str) -> Result<Option<(T, Origin)>, ConfigError> {
        let Some((text, origin)) = self.get(key) else {
            return Ok(None);
        };
        text.parse::<T>()
            .map(|v| Some((v, origin)))
            .map_err(|_| ConfigError::new(key, origin, format!("cannot parse '{text}'")))
    }

    fn value_or_default<T: FromStr>(&self, key: &str) -> Result<(T, Origin), ConfigError> {
        if let Some(v) = self.value(key)? {
            return Ok(v);
        }
        let default = KEYS.iter().find(|(k, _)| *k == key).and_then(|(_, d)| *d);
        match default {
            Some(d) => d
                .parse::<T>()
                .map(|v| (v, Origin::Default))
                .map_err(|_| ConfigError::new(key, Origin::Default, "bad default")),
            None => Err(ConfigError::new(key, Origin::Default, "required but not set")),
        }
    }

    fn positive(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.value::<f64>(key)? {
            Some((v, origin)) if !(v.is_finite() && v > 0.0) => {
                Err(ConfigError::new(key, origin, format!("must be finite and > 0 (got {v:e})")))
            }
            other => Ok(other.map(|(v, _)| v)),
        }
    }

    fn required<T>(&self, key: &str, v: Option<T>, why: &str) -> Result<T, ConfigError> {
        v.ok_or_else(|| ConfigError::new(key, Origin::Default, format!("required {why}")))
    }

    fn material(&self, prefix: &str) -> Result<MaterialSpec, ConfigError> {
        let key = |s: &str| format!("{prefix}.{s}");
        let (model, origin) = self.value_or_default::<String>(&key("model"))?;
        let allowed: &[&str] = match model.as_str() {
            "gold-plasma" | "perfect" => &[],
            "plasma" => &["lambda_P"],
            "table" => &["table", "format"],
            other => {
                return Err(ConfigError::new(
                    key("model"),
                    origin,
                    format!("unknown model '{other}' (gold-plasma, perfect, plasma, table)"),
                ))
            }
        };
        for suffix in ["lambda_P", "table", "format"] {
            if let Some((_, o)) = self.get(&key(suffix)) {
                if !allowed.contains(&suffix) {
                    return Err(ConfigError::new(key(suffix), o, format!("does not apply to model = {model}")));
                }
            }
        }
        Ok(match model.as_str() {
            "gold-plasma" => MaterialSpec::GoldPlasma,
            "perfect" => MaterialSpec::Perfect,
            "plasma" => {
                let lp = self.positive(&key("lambda_P"))?;
                MaterialSpec::Plasma { lambda_p: self.required(&key("lambda_P"), lp, "for model = plasma")? }
            }
            _ => {
                let (path, _) = self.value_or_default::<String>(&key("table"))?;
                let (f, o) = self.value_or_default::<String>(&key("format"))?;
                let format = parse_format(&f).ok_or_else(|| ConfigError::new(key("format"), o, "expected A or B"))?;
                MaterialSpec::Table { path: PathBuf::from(path), format }
            }
        })
    }

    fn grid(&self, name: &str) -> Result<Option<Grid>, ConfigError> {
        let (kmin, kmax, kpts) =
            (format!("sweep.{name}_min"), format!("sweep.{name}_max"), format!("sweep.{name}_points"));
        if ![&kmin, &kmax, &kpts].iter().any(|k| self.contains(k)) {
            return Ok(None);
        }
        let min = self.positive(&kmin)?;
        let max = self.positive(&kmax)?;
        let min = self.required(&kmin, min, "for this sweep")?;
        let max = self.required(&kmax, max, "for this sweep")?;
        let (points, origin) = self.value_or_default::<usize>(&kpts)?;
        if points == 0 {
            return Err(ConfigError::new(kpts, origin, "must be at least 1"));
        }
        if max < min || (points > 1 && max == min) {
            let o = self.get(&kmax).map(|(_, o)| o).unwrap_or(Origin::Default);
            return Err(ConfigError::new(kmax, o, format!("must exceed {kmin} = {min}")));
        }
        Ok(Some(Grid { min, max, points }))
    }

    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let (command_text, origin) = self.value_or_default::<String>("command")?;
        let command: Command = command_text.parse().map_err(|m| ConfigError::new("command", origin, m))?;

        let mirror1 = self.material("mirror1")?;
        let mirror2 = if self.entries.keys().any(|k| k.starts_with("mirror2.")) {
            self.material("mirror2")?
        } else {
            mirror1.clone()
        };

        let separation = self.positive("geometry.separation_L")?;
        if command.needs_separation() {
            self.required("geometry.separation_L", separation, &format!("for command {command}"))?;
        }
        let (area, o) = self.value_or_default::<f64>("geometry.area_A")?;
        if !(area.is_finite() && area > 0.0) {
            return Err(ConfigError::new("geometry.area_A", o, format!("must be finite and > 0 (got {area})")));
        }
        let (temperature, o) = self.value_or_default::<f64>("geometry.temperature_T")?;
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(ConfigError::new("geometry.temperature_T", o, format!("must be finite and >= 0 (got {temperature})")));
        }
        if matches!(command, Command::Kernel | Command::RhoSweep) && temperature > 0.0 {
            return Err(ConfigError::new("geometry.temperature_T", o, format!("command {command} runs at T = 0 only")));
        }

        let corr_keys = ["corrugation.a1", "corrugation.a2", "corrugation.kappa_C"];
        let corrugation = if command.needs_corrugation() || corr_keys.iter().any(|k| self.contains(k)) {
            let mut amps = [0.0; 2];
            for (a, key) in amps.iter_mut().zip(["corrugation.a1", "corrugation.a2"]) {
                let (v, o) = self.value_or_default::<f64>(key)?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(ConfigError::new(key, o, format!("must be finite and >= 0 (got {v})")));
                }
                *a = v;
            }
            let k = self.positive("corrugation.kappa_C")?;
            let kappa_c = self.required("corrugation.kappa_C", k, "when corrugation is given")?;
            let (b, o) = self.value_or_default::<f64>("corrugation.b")?;
            if !b.is_finite() {
                return Err(ConfigError::new("corrugation.b", o, "must be finite"));
            }
            let (op, o) = self.value_or_default::<String>("corrugation.operator")?;
            let operator = match op.as_str() {
                "rayleigh" => OperatorKind::Rayleigh,
                "specular-limit" => OperatorKind::SpecularLimit,
                _ => return Err(ConfigError::new("corrugation.operator", o, "expected rayleigh or specular-limit")),
            };
            Some(Corrugation { a1: amps[0], a2: amps[1], kappa_c, b, operator })
        } else {
            None
        };

        let rel_tol = match self.value::<f64>("quadrature.rel_tol")? {
            Some((v, _)) => v,
            None => default_rel_tol(command),
        };
        let (abs_tol, _) = self.value_or_default::<f64>("quadrature.abs_tol")?;
        let (max_sub, _) = self.value_or_default::<usize>("quadrature.max_subdivisions")?;
        let quadrature = QuadratureSpec::new(rel_tol, abs_tol, max_sub, Default::default()).map_err(|e| {
            let key = match e {
                casimir_core::QuadratureError::InvalidAbsTol(_) => "quadrature.abs_tol",
                casimir_core::QuadratureError::TooFewSubdivisions(_) => "quadrature.max_subdivisions",
                _ => "quadrature.rel_tol",
            };
            let origin = self.get(key).map(|(_, o)| o).unwrap_or(Origin::Default);
            ConfigError::new(key, origin, e.to_string())
        })?;

        let separation_grid = self.grid("L")?;
        let kappa_grid = self.grid("kappaL")?;
        if command == Command::EtaSweep {
            self.required("sweep.L_min", separation_grid, "for command eta-sweep")?;
        }
        if command == Command::RhoSweep {
            self.required("sweep.kappaL_min", kappa_grid, "for command rho-sweep")?;
        }
        let b_points = match self.value::<usize>("sweep.b_points")? {
            Some((0, o)) => return Err(ConfigError::new("sweep.b_points", o, "must be at least 1")),
            other => other.map(|(v, _)| v),
        };

        let ingest = if command == Command::Ingest || self.contains("ingest.input") {
            let (input, _) = self.value_or_default::<String>("ingest.input")?;
            let (f, o) = self.value_or_default::<String>("ingest.format")?;
            let format = parse_format(&f).ok_or_else(|| ConfigError::new("ingest.format", o, "expected A or B"))?;
            Some(Ingest { input: PathBuf::from(input), format })
        } else {
            None
        };

        let output = match self.value::<String>("output.path")? {
            Some((p, o)) if p.is_empty() => return Err(ConfigError::new("output.path", o, "must not be empty")),
            Some((p, _)) => PathBuf::from(p),
            None => PathBuf::from(format!("{command}.csv")),
        };
        let (threads, _) = self.value_or_default::<usize>("run.threads")?;

        Ok(RunConfig {
            command,
            mirror1,
            mirror2,
            separation,
            area,
            temperature,
            corrugation,
            quadrature,
            separation_grid,
            kappa_grid,
            b_points,
            ingest,
            output,
            threads,
        })
    }
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    RawConfig::parse(text)?.resolve()
}

/// Canonical text of a resolved configuration; `parse(emit(c)) == c`.
pub fn emit(c: &RunConfig) -> String {
    let mut lines: Vec<(String, String)> = vec![("command".into(), c.command.to_string())];
    for (prefix, m) in [("mirror1", &c.mirror1), ("mirror2", &c.mirror2)] {
        lines.extend(m.entries().into_iter().map(|(s, v)| (format!("{prefix}.{s}"), v)));
    }
    if let Some(l) = c.separation {
        lines.push(("geometry.separation_L".into(), num(l)));
    }
    lines.push(("geometry.area_A".into(), num(c.area)));
    lines.push(("geometry.temperature_T".into(), num(c.temperature)));
    if let Some(k) = &c.corrugation {
        lines.push(("corrugation.a1".into(), num(k.a1)));
        lines.push(("corrugation.a2".into(), num(k.a2)));
        lines.push(("corrugation.kappa_C".into(), num(k.kappa_c)));
        lines.push(("corrugation.b".into(), num(k.b)));
        lines.push(("corrugation.operator".into(), operator_name(k.operator).into()));
    }
    lines.push(("quadrature.rel_tol".into(), num(c.quadrature.rel_tol)));
    lines.push(("quadrature.abs_tol".into(), num(c.quadrature.abs_tol)));
    lines.push(("quadrature.max_subdivisions".into(), c.quadrature.max_subdivisions.to_string()));
    for (name, grid) in [("L", &c.separation_grid), ("kappaL", &c.kappa_grid)] {
        if let Some(g) = grid {
            lines.push((format!("sweep.{name}_min"), num(g.min)));
            lines.push((format!("sweep.{name}_max"), num(g.max)));
            lines.push((format!("sweep.{name}_points"), g.points.to_string()));
        }
    }
    if let Some(n) = c.b_points {
        lines.push(("sweep.b_points".into(), n.to_string()));
    }
    if let Some(i) = &c.ingest {
        lines.push(("ingest.input".into(), i.input.display().to_string()));
        lines.push(("ingest.format".into(), format_name(i.format).into()));
    }
    lines.push(("output.path".into(), c.output.display().to_string()));
    lines.push(("run.threads".into(), c.threads.to_string()));

    lines.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
