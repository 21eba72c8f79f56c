//! Experiment batch files.
//!
//! A batch is a TOML document holding one `[[experiment]]` table per
//! experiment, each with flat keys:
//!
//! ```toml
//! [[experiment]]
//! name = "lab"
//! mode = "monte_carlo"        # single | monte_carlo | ring
//! start_x = -2.0
//! start_y = -5.5
//! start_heading = "30deg"     # radians, or a string with a deg/rad suffix
//! runs = 100
//! ```
//!
//! Every key that is left out takes its laboratory default.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use polarstab::{ControllerParams, LawVariant, NoiseBounds, Pose, SimConfig};
use serde::Serialize;
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Single,
    MonteCarlo,
    Ring,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::MonteCarlo => "monte_carlo",
            Mode::Ring => "ring",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "single" => Ok(Mode::Single),
            "monte_carlo" => Ok(Mode::MonteCarlo),
            "ring" => Ok(Mode::Ring),
            other => Err(format!("unknown mode `{other}` (expected single, monte_carlo or ring)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingParams {
    pub radius: f64,
    pub n_starts: usize,
    /// Shared start heading, radians.
    pub heading: f64,
}

impl Default for RingParams {
    fn default() -> Self {
        Self {
            radius: 12.0,
            n_starts: 8,
            heading: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub mode: Mode,
    pub sim: SimConfig,
    /// Monte-Carlo run count.
    pub runs: usize,
    pub ring: RingParams,
}

impl ExperimentSpec {
    /// A spec with every default applied.
    pub fn defaults(name: &str, mode: Mode) -> Self {
        Self {
            name: name.to_owned(),
            mode,
            sim: SimConfig::default(),
            runs: 100,
            ring: RingParams::default(),
        }
    }

    /// Renders the spec with all values materialized, in the batch format.
    pub fn to_toml(&self) -> String {
        let s = &self.sim;
        let c = &s.controller;
        let b = &s.bounds;
        let mut t = Table::new();
        let mut put = |k: &str, v: Value| {
            t.insert(k.to_owned(), v);
        };
        put("name", self.name.clone().into());
        put("mode", self.mode.as_str().into());
        put("law", s.law.to_string().into());
        put("start_x", s.start.x.into());
        put("start_y", s.start.y.into());
        put("start_heading", s.start.theta.into());
        put("goal_x", s.goal.x.into());
        put("goal_y", s.goal.y.into());
        put("goal_heading", s.goal.theta.into());
        put("ts", s.ts.into());
        put("max_steps", int(s.max_steps as u64));
        put("rho_tol", s.rho_tol.into());
        put("theta_tol", s.theta_tol.into());
        put("seed", int(s.seed));
        put("runs", int(self.runs as u64));
        put("radius", self.ring.radius.into());
        put("n_starts", int(self.ring.n_starts as u64));
        put("heading", self.ring.heading.into());
        put("gamma", c.gamma.into());
        put("k", c.k.into());
        put("h", c.h.into());
        put("k2", c.k2.into());
        put("eps_p", c.eps_p.into());
        if let Some(w) = c.omega_limit {
            put("omega_limit", w.into());
        }
        put("eps_x_max", b.eps_x_max.into());
        put("eps_y_max", b.eps_y_max.into());
        put("eps_theta_max", b.eps_theta_max.into());
        put("eps_v_max", b.eps_v_max.into());
        put("eps_omega_max", b.eps_omega_max.into());
        let mut doc = Table::new();
        doc.insert("experiment".into(), Value::Array(vec![Value::Table(t)]));
        toml::to_string(&doc).expect("plain table serializes")
    }
}

fn int(v: u64) -> Value {
    Value::Integer(i64::try_from(v).expect("counts and seeds fit in i64"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(k) => write!(f, "line {}: `{k}`: {}", self.line, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

const KEYS: &[&str] = &[
    "name",
    "mode",
    "law",
    "start_x",
    "start_y",
    "start_heading",
    "goal_x",
    "goal_y",
    "goal_heading",
    "ts",
    "max_steps",
    "rho_tol",
    "theta_tol",
    "seed",
    "runs",
    "radius",
    "n_starts",
    "heading",
    "gamma",
    "k",
    "h",
    "k2",
    "eps_p",
    "omega_limit",
    "noise",
    "eps_x_max",
    "eps_y_max",
    "eps_theta_max",
    "eps_v_max",
    "eps_omega_max",
];

/// Parses a batch; experiments without a `mode` key run as `single`.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentSpec>, ConfigError> {
    parse(text, Mode::Single, false)
}

/// Parses a batch for a verb that fixes the mode. A `mode` key that names a
/// different mode is an error.
pub fn parse_config_for(text: &str, mode: Mode) -> Result<Vec<ExperimentSpec>, ConfigError> {
    parse(text, mode, true)
}

fn parse(text: &str, default_mode: Mode, strict_mode: bool) -> Result<Vec<ExperimentSpec>, ConfigError> {
    let doc: Table = toml::from_str(text).map_err(|e| ConfigError {
        line: e.span().map_or(1, |s| line_of_offset(text, s.start)),
        key: None,
        message: e.message().to_owned(),
    })?;
    let lines = LineIndex::new(text);
    if let Some(key) = doc.keys().find(|k| *k != "experiment") {
        return Err(ConfigError {
            line: lines.top_level(key),
            key: Some(key.clone()),
            message: "unknown top-level key (expected [[experiment]] tables)".into(),
        });
    }
    let tables = match doc.get("experiment") {
        None => {
            return Err(ConfigError {
                line: 1,
                key: None,
                message: "no [[experiment]] table".into(),
            })
        }
        Some(Value::Array(items)) => items,
        Some(_) => {
            return Err(ConfigError {
                line: lines.top_level("experiment"),
                key: Some("experiment".into()),
                message: "must be written as [[experiment]] tables".into(),
            })
        }
    };
    let mut names = HashSet::new();
    let mut specs = Vec::with_capacity(tables.len());
    for (i, item) in tables.iter().enumerate() {
        let Value::Table(table) = item else {
            return Err(ConfigError {
                line: lines.block_start(i),
                key: None,
                message: "experiment entry is not a table".into(),
            });
        };
        let reader = Reader {
            table,
            lines: &lines,
            block: i,
        };
        let spec = reader.spec(default_mode, strict_mode)?;
        if !names.insert(spec.name.clone()) {
            return Err(reader.err("name", format!("duplicate experiment name `{}`", spec.name)));
        }
        specs.push(spec);
    }
    Ok(specs)
}

struct Reader<'a> {
    table: &'a Table,
    lines: &'a LineIndex,
    block: usize,
}

impl Reader<'_> {
    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.lines.key_line(self.block, key),
            key: Some(key.to_owned()),
            message: message.into(),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn string(&self, key: &str) -> Result<Option<&str>, ConfigError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.err(key, "expected a string")),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v = match self.table.get(key) {
            None => return Ok(None),
            Some(Value::Float(f)) => *f,
            Some(Value::Integer(i)) => *i as f64,
            Some(_) => return Err(self.err(key, "expected a number")),
        };
        if !v.is_finite() {
            return Err(self.err(key, "must be finite"));
        }
        Ok(Some(v))
    }

    fn positive(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.float(key)? {
            Some(v) if v <= 0.0 => Err(self.err(key, format!("must be > 0, got {v}"))),
            v => Ok(v),
        }
    }

    fn non_negative(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.float(key)? {
            Some(v) if v < 0.0 => Err(self.err(key, format!("must be >= 0, got {v}"))),
            v => Ok(v),
        }
    }

    /// Radians as a number, or a string such as `"30deg"` or `"0.17rad"`.
    fn angle(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.table.get(key) {
            Some(Value::String(s)) => parse_angle(s).map(Some).map_err(|m| self.err(key, m)),
            _ => self.float(key),
        }
    }

    fn non_negative_angle(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.angle(key)? {
            Some(v) if v < 0.0 => Err(self.err(key, format!("must be >= 0, got {v}"))),
            v => Ok(v),
        }
    }

    fn unsigned(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(Value::Integer(i)) => Err(self.err(key, format!("must be >= 0, got {i}"))),
            Some(_) => Err(self.err(key, "expected an integer")),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.unsigned(key)? {
            Some(0) => Err(self.err(key, "must be >= 1")),
            v => Ok(v.map(|n| n as usize)),
        }
    }

    fn spec(&self, default_mode: Mode, strict_mode: bool) -> Result<ExperimentSpec, ConfigError> {
        if let Some(key) = self.table.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(self.err(key, "unknown key"));
        }
        let name = match self.string("name")? {
            Some(n) if !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) => n,
            Some(_) => return Err(self.err("name", "must be a non-empty identifier of [A-Za-z0-9_.-]")),
            None => {
                return Err(ConfigError {
                    line: self.lines.block_start(self.block),
                    key: Some("name".into()),
                    message: "missing required field".into(),
                })
            }
        };
        let mode = match self.string("mode")? {
            None => default_mode,
            Some(m) => {
                let m: Mode = m.parse().map_err(|e: String| self.err("mode", e))?;
                if strict_mode && m != default_mode {
                    return Err(self.err(
                        "mode",
                        format!(
                            "experiment is `{}` but this command runs `{}`",
                            m.as_str(),
                            default_mode.as_str()
                        ),
                    ));
                }
                m
            }
        };
        let mut spec = ExperimentSpec::defaults(name, mode);
        let sim = &mut spec.sim;

        if let Some(l) = self.string("law")? {
            sim.law = l.parse::<LawVariant>().map_err(|e| self.err("law", e.to_string()))?;
        }
        if mode != Mode::Ring {
            for key in ["start_x", "start_y"] {
                if !self.has(key) {
                    return Err(ConfigError {
                        line: self.lines.block_start(self.block),
                        key: Some(key.into()),
                        message: "missing required field".into(),
                    });
                }
            }
        }
        let start_x = self.float("start_x")?.unwrap_or(sim.start.x);
        let start_y = self.float("start_y")?.unwrap_or(sim.start.y);
        let start_heading = self.angle("start_heading")?.unwrap_or(0.0);
        sim.start = Pose::new(start_x, start_y, start_heading).map_err(|e| self.err("start_heading", e.to_string()))?;
        let goal = (
            self.float("goal_x")?.unwrap_or(0.0),
            self.float("goal_y")?.unwrap_or(0.0),
            self.angle("goal_heading")?.unwrap_or(0.0),
        );
        sim.goal = Pose::new(goal.0, goal.1, goal.2).map_err(|e| self.err("goal_heading", e.to_string()))?;

        if let Some(v) = self.positive("ts")? {
            sim.ts = v;
        }
        if let Some(v) = self.count("max_steps")? {
            sim.max_steps = v;
        }
        if let Some(v) = self.positive("rho_tol")? {
            sim.rho_tol = v;
        }
        if let Some(v) = self.angle("theta_tol")? {
            if v <= 0.0 {
                return Err(self.err("theta_tol", format!("must be > 0, got {v}")));
            }
            sim.theta_tol = v;
        }
        if let Some(v) = self.unsigned("seed")? {
            sim.seed = v;
        }
        if let Some(v) = self.count("runs")? {
            spec.runs = v;
        }
        if let Some(v) = self.positive("radius")? {
            spec.ring.radius = v;
        }
        if let Some(v) = self.count("n_starts")? {
            spec.ring.n_starts = v;
        }
        if let Some(v) = self.angle("heading")? {
            spec.ring.heading = v;
        }

        let mut c = ControllerParams::default();
        for (key, slot) in [
            ("gamma", &mut c.gamma),
            ("k", &mut c.k),
            ("h", &mut c.h),
            ("k2", &mut c.k2),
            ("eps_p", &mut c.eps_p),
        ] {
            if let Some(v) = self.positive(key)? {
                *slot = v;
            }
        }
        c.omega_limit = self.positive("omega_limit")?;

        let mut b = match self.string("noise")? {
            None | Some("lab") => NoiseBounds::lab(),
            Some("none") => NoiseBounds::zero(),
            Some(other) => return Err(self.err("noise", format!("unknown preset `{other}` (expected lab or none)"))),
        };
        for (key, slot) in [
            ("eps_x_max", &mut b.eps_x_max),
            ("eps_y_max", &mut b.eps_y_max),
            ("eps_v_max", &mut b.eps_v_max),
            ("eps_omega_max", &mut b.eps_omega_max),
        ] {
            if let Some(v) = self.non_negative(key)? {
                *slot = v;
            }
        }
        if let Some(v) = self.non_negative_angle("eps_theta_max")? {
            b.eps_theta_max = v;
        }
        sim.controller = c;
        sim.bounds = b;

        if let Err(e) = c.validate(&b) {
            return Err(self.err("eps_p", e.to_string()));
        }
        sim.validate().map_err(|e| self.err("name", e.to_string()))?;
        Ok(spec)
    }
}

pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (num, deg) = if let Some(n) = t.strip_suffix("deg").or_else(|| t.strip_suffix('°')) {
        (n, true)
    } else if let Some(n) = t.strip_suffix("rad") {
        (n, false)
    } else {
        return Err(format!(
            "angle `{s}` needs a unit suffix (deg or rad) or must be a number"
        ));
    };
    let v: f64 = num.trim().parse().map_err(|_| format!("invalid angle `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("invalid angle `{s}`"));
    }
    Ok(if deg { v.to_radians() } else { v })
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Locates experiment headers and keys in the source text for error messages.
struct LineIndex {
    lines: Vec<String>,
    /// 0-based line index of each `[[experiment]]` header.
    headers: Vec<usize>,
}

impl LineIndex {
    fn new(text: &str) -> Self {
        let lines: Vec<String> = text.lines().map(str::to_owned).collect();
        let headers = lines
            .iter()
            .enumerate()
            .filter(|(_, l)| {
                let compact: String = l.split('#').next().unwrap_or("").split_whitespace().collect();
                compact == "[[experiment]]"
            })
            .map(|(i, _)| i)
            .collect();
        Self { lines, headers }
    }

    fn block_start(&self, block: usize) -> usize {
        self.headers.get(block).map_or(1, |&i| i + 1)
    }

    fn find_key(&self, from: usize, to: usize, key: &str) -> Option<usize> {
        (from..to.min(self.lines.len())).find(|&i| {
            let l = self.lines[i].trim_start();
            let l = l.strip_prefix(key).unwrap_or("");
            l.trim_start().starts_with('=') && self.lines[i].trim_start().starts_with(key)
        })
    }

    fn key_line(&self, block: usize, key: &str) -> usize {
        let Some(&start) = self.headers.get(block) else {
            return 1;
        };
        let end = self.headers.get(block + 1).copied().unwrap_or(self.lines.len());
        self.find_key(start + 1, end, key).map_or(start + 1, |i| i + 1)
    }

    fn top_level(&self, key: &str) -> usize {
        let end = self.headers.first().copied().unwrap_or(self.lines.len());
        self.find_key(0, end, key).map_or(1, |i| i + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[[experiment]]\nname = \"lab\"\nstart_x = -2.0\nstart_y = -5.5\nstart_heading = \"30deg\"\n";

    #[test]
    fn minimal_spec_takes_lab_defaults() {
        let specs = parse_config(MINIMAL).unwrap();
        assert_eq!(specs.len(), 1);
        let s = &specs[0];
        assert_eq!(s.mode, Mode::Single);
        assert_eq!(s.sim, SimConfig::default());
        assert_eq!(s.sim.controller.gamma, 1.3);
        assert_eq!(s.sim.controller.k2, 2.7);
    }

    #[test]
    fn zero_sample_time_is_rejected_with_its_line() {
        let err = parse_config(&format!("{MINIMAL}ts = 0\n")).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("ts"));
        assert_eq!(err.line, 6);
        assert!(err.to_string().contains("line 6"));
    }

    #[test]
    fn ring_spec() {
        let text =
            "[[experiment]]\nname = \"ring220\"\nmode = \"ring\"\nradius = 12\nn_starts = 8\nheading = \"220deg\"\n";
        let s = &parse_config(text).unwrap()[0];
        assert_eq!(s.mode, Mode::Ring);
        assert_eq!(s.ring.radius, 12.0);
        assert_eq!(s.ring.n_starts, 8);
        assert!((s.ring.heading - 220f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config(&format!("{MINIMAL}gama = 1.0\n")).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("gama"));
        assert_eq!(err.line, 6);
    }

    #[test]
    fn missing_start_is_reported() {
        let err = parse_config("[[experiment]]\nname = \"x\"\nstart_x = 1.0\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("start_y"));
        assert_eq!(err.line, 1);
    }

    #[test]
    fn switch_radius_must_cover_noise() {
        let err = parse_config(&format!("{MINIMAL}eps_p = 0.3\n")).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("eps_p"));
        assert_eq!(err.line, 6);
        let ok = parse_config(&format!("{MINIMAL}eps_p = 0.3\nnoise = \"none\"\n")).unwrap();
        assert!(ok[0].sim.bounds.is_zero());
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = parse_config(&format!("{MINIMAL}{MINIMAL}")).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("name"));
        assert_eq!(err.line, 7);
    }

    #[test]
    fn verb_mode_conflict() {
        let text = format!("{MINIMAL}mode = \"ring\"\n");
        let err = parse_config_for(&text, Mode::MonteCarlo).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("mode"));
        assert_eq!(
            parse_config_for(MINIMAL, Mode::MonteCarlo).unwrap()[0].mode,
            Mode::MonteCarlo
        );
    }

    #[test]
    fn syntax_error_has_line() {
        let err = parse_config("[[experiment]]\nname = \"x\"\nstart_x = = 1\n").unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn angles() {
        assert!((parse_angle("30deg").unwrap() - 30f64.to_radians()).abs() < 1e-15);
        assert_eq!(parse_angle("0.17 rad").unwrap(), 0.17);
        assert!(parse_angle("30").is_err());
        assert!(parse_angle("xdeg").is_err());
    }

    #[test]
    fn resolved_spec_round_trips() {
        let text = format!("{MINIMAL}omega_limit = 2.0\nseed = 7\nlaw = \"global-only\"\n");
        let spec = parse_config(&text).unwrap().remove(0);
        let back = parse_config(&spec.to_toml()).unwrap().remove(0);
        assert_eq!(back, spec);
    }
}
