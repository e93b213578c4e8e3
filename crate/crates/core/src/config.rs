//! Flat `key = value` configuration and its resolution into a [`Scenario`].
//!
//! ```text
//! # comment
//! preset = fig4c-map
//! rabi.omega_p_khz = 0.5
//! sweep.dp_points = 801
//! ```
//!
//! Resolution layers, lowest first: built-in defaults, the named preset,
//! then explicit keys. Command-line `--set` entries replace keys from the
//! file before resolution.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::geometry::{
    default_scenario, layout_to_params, preset, AxisSpec, CalibrationTable, GeometryError,
    Provenance, Scenario,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: duplicate key '{key}'")]
    DuplicateKey { key: String, line: usize },
    #[error("{key}: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Ident(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => write!(f, "{x}"),
            Value::Ident(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Number,
    Count,
    Ident,
}

const KEYS: &[(&str, Kind)] = &[
    ("preset", Kind::Ident),
    ("rabi.omega_c_khz", Kind::Number),
    ("rabi.omega_p_khz", Kind::Number),
    ("rabi.omega_a_khz", Kind::Number),
    ("detuning.delta_c_khz", Kind::Number),
    ("detuning.delta_p_khz", Kind::Number),
    ("detuning.delta_a_khz", Kind::Number),
    ("decay.gamma0_khz", Kind::Number),
    ("decay.gamma_opt_khz", Kind::Number),
    ("decay.gamma_ground_khz", Kind::Number),
    ("decay.ground_mix_khz", Kind::Number),
    ("decay.beta1", Kind::Number),
    ("decay.beta2", Kind::Number),
    ("decay.beta3", Kind::Number),
    ("sweep.dp_min_khz", Kind::Number),
    ("sweep.dp_max_khz", Kind::Number),
    ("sweep.dp_points", Kind::Count),
    ("sweep.d_min_khz", Kind::Number),
    ("sweep.d_max_khz", Kind::Number),
    ("sweep.d_points", Kind::Count),
    ("evolve.t_end_ms", Kind::Number),
    ("evolve.dt_ms", Kind::Number),
    ("evolve.initial_level", Kind::Count),
    ("geometry.l_nm", Kind::Number),
    ("geometry.l1_nm", Kind::Number),
    ("geometry.l2_nm", Kind::Number),
];

/// Every accepted key, in documentation order.
pub fn known_keys() -> impl Iterator<Item = &'static str> {
    KEYS.iter().map(|(k, _)| *k)
}

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, t)| *t)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, Value>,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

fn parse_value(raw: &str) -> Result<Value, String> {
    if raw.is_empty() {
        return Err("missing value".into());
    }
    if let Ok(x) = raw.parse::<f64>() {
        if !x.is_finite() {
            return Err(format!("non-finite number '{raw}'"));
        }
        return Ok(Value::Number(x));
    }
    if is_ident(raw) {
        Ok(Value::Ident(raw.to_string()))
    } else {
        Err(format!("'{raw}' is neither a number nor an identifier"))
    }
}

fn check_kind(key: &str, value: &Value, line: usize) -> Result<(), ConfigError> {
    let kind = kind_of(key).ok_or_else(|| ConfigError::UnknownKey { key: key.to_string(), line })?;
    let ok = match (kind, value) {
        (Kind::Number, Value::Number(_)) => true,
        (Kind::Count, Value::Number(x)) => *x >= 0.0 && x.fract() == 0.0,
        (Kind::Ident, Value::Ident(_)) => true,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        let expected = match kind {
            Kind::Number => "a number",
            Kind::Count => "a non-negative integer",
            Kind::Ident => "an identifier",
        };
        Err(ConfigError::ParseError { line, reason: format!("{key} expects {expected}, got '{value}'") })
    }
}

/// Splits `key = value`, validating the key and the value type.
fn parse_assignment(text: &str, line: usize) -> Result<(String, Value), ConfigError> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| ConfigError::ParseError { line, reason: "expected 'key = value'".into() })?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::ParseError { line, reason: "missing key".into() });
    }
    let value = parse_value(raw.trim()).map_err(|reason| ConfigError::ParseError { line, reason })?;
    check_kind(key, &value, line)?;
    Ok((key.to_string(), value))
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut config = Config::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = parse_assignment(content, line)?;
        if config.entries.contains_key(&key) {
            return Err(ConfigError::DuplicateKey { key, line });
        }
        config.entries.insert(key, value);
    }
    Ok(config)
}

impl Config {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Sets a key, replacing any previous value.
    pub fn set(&mut self, key: &str, value: Value) -> Result<(), ConfigError> {
        check_kind(key, &value, 0)?;
        self.entries.insert(key.to_string(), value);
        Ok(())
    }

    /// Applies a `key=value` override as given on the command line.
    pub fn set_assignment(&mut self, text: &str) -> Result<(), ConfigError> {
        let (key, value) = parse_assignment(text, 0)?;
        self.entries.insert(key, value);
        Ok(())
    }

    fn number(&self, key: &str) -> Option<f64> {
        match self.entries.get(key) {
            Some(Value::Number(x)) => Some(*x),
            _ => None,
        }
    }

    fn count(&self, key: &str) -> Option<usize> {
        self.number(key).map(|x| x as usize)
    }

    /// Builds the scenario: defaults, then the preset, then explicit keys.
    pub fn resolve(&self) -> Result<Scenario, ConfigError> {
        let mut s = match self.entries.get("preset") {
            Some(Value::Ident(name)) => preset(name)?,
            _ => default_scenario(),
        };
        self.apply_geometry(&mut s)?;

        let p = &mut s.params;
        let numeric: [(&str, &mut f64); 8] = [
            ("rabi.omega_c_khz", &mut p.omega_c),
            ("rabi.omega_p_khz", &mut p.omega_p),
            ("rabi.omega_a_khz", &mut p.omega_a),
            ("detuning.delta_c_khz", &mut p.delta_c),
            ("detuning.delta_p_khz", &mut p.delta_p),
            ("detuning.delta_a_khz", &mut p.delta_a),
            ("decay.gamma0_khz", &mut p.decay.gamma_pop),
            ("decay.gamma_ground_khz", &mut p.decay.gamma_ground),
        ];
        let mut touched = Vec::new();
        for (key, slot) in numeric {
            if let Some(x) = self.number(key) {
                *slot = x;
                touched.push(key);
            }
        }
        if let Some(x) = self.number("decay.ground_mix_khz") {
            p.decay.ground_mix = x;
            touched.push("decay.ground_mix_khz");
        }
        if let Some(x) = self.number("decay.gamma_opt_khz") {
            p.decay.gamma_opt = [x; 3];
            touched.push("decay.gamma_opt_khz");
        }
        for (i, key) in ["decay.beta1", "decay.beta2", "decay.beta3"].iter().enumerate() {
            if let Some(x) = self.number(key) {
                p.decay.branching[i] = x;
                touched.push("decay.beta");
            }
        }
        for key in touched {
            s.tag(key, Provenance::Config);
        }

        self.apply_axes(&mut s)?;
        self.apply_evolve(&mut s)?;
        s.params.validate().map_err(|e| ConfigError::InvalidValue {
            key: "parameters".into(),
            reason: e.to_string(),
        })?;
        Ok(s)
    }

    /// Stripe lengths set δ_c and δ_A through the calibration; explicit
    /// detuning keys still win because they are applied afterwards.
    fn apply_geometry(&self, s: &mut Scenario) -> Result<(), ConfigError> {
        let keys = ["geometry.l_nm", "geometry.l1_nm", "geometry.l2_nm"];
        if keys.iter().all(|k| self.number(k).is_none()) {
            return Ok(());
        }
        let mut layout = s.layout.unwrap_or_default();
        if let Some(x) = self.number("geometry.l_nm") {
            layout.l = x;
        }
        if let Some(x) = self.number("geometry.l1_nm") {
            layout.l1 = x;
            s.tag("geometry.l1_nm", Provenance::Config);
        }
        if let Some(x) = self.number("geometry.l2_nm") {
            layout.l2 = x;
            s.tag("geometry.l2_nm", Provenance::Config);
        }
        s.params = layout_to_params(&layout, &s.params, &CalibrationTable::default())?;
        s.layout = Some(layout);
        s.tag("detuning.delta_c_khz", Provenance::Config);
        s.tag("detuning.delta_a_khz", Provenance::Config);
        Ok(())
    }

    fn apply_axes(&self, s: &mut Scenario) -> Result<(), ConfigError> {
        let dp = merge_axis(
            s.dp_axis,
            self.number("sweep.dp_min_khz"),
            self.number("sweep.dp_max_khz"),
            self.count("sweep.dp_points"),
        );
        if dp != s.dp_axis {
            s.dp_axis = dp;
            s.tag("sweep.dp_axis", Provenance::Config);
        }
        check_axis("sweep.dp", &s.dp_axis)?;

        let fallback = s.d_axis.unwrap_or_else(|| {
            let w = s.params.omega_c.max(1.0);
            AxisSpec::new(-w, w, 201)
        });
        let d = merge_axis(
            fallback,
            self.number("sweep.d_min_khz"),
            self.number("sweep.d_max_khz"),
            self.count("sweep.d_points"),
        );
        if s.d_axis.is_none() || d != fallback {
            s.d_axis = Some(d);
            if d != fallback {
                s.tag("sweep.d_axis", Provenance::Config);
            }
        }
        check_axis("sweep.d", &d)
    }

    fn apply_evolve(&self, s: &mut Scenario) -> Result<(), ConfigError> {
        if let Some(t) = self.number("evolve.t_end_ms") {
            s.evolve.t_end_ms = t;
        }
        if let Some(dt) = self.number("evolve.dt_ms") {
            s.evolve.dt_ms = (dt > 0.0).then_some(dt);
        }
        if let Some(level) = self.count("evolve.initial_level") {
            if !(1..=4).contains(&level) {
                return Err(ConfigError::InvalidValue {
                    key: "evolve.initial_level".into(),
                    reason: format!("level must be 1..=4, got {level}"),
                });
            }
            s.evolve.initial_level = level;
        }
        if !(s.evolve.t_end_ms.is_finite() && s.evolve.t_end_ms > 0.0) {
            return Err(ConfigError::InvalidValue {
                key: "evolve.t_end_ms".into(),
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

fn merge_axis(base: AxisSpec, min: Option<f64>, max: Option<f64>, points: Option<usize>) -> AxisSpec {
    AxisSpec {
        min: min.unwrap_or(base.min),
        max: max.unwrap_or(base.max),
        points: points.unwrap_or(base.points),
    }
}

fn check_axis(prefix: &str, a: &AxisSpec) -> Result<(), ConfigError> {
    if a.points < 2 || a.max <= a.min {
        return Err(ConfigError::InvalidValue {
            key: format!("{prefix}_*"),
            reason: format!("need min < max and at least 2 points, got [{}, {}] with {}", a.min, a.max, a.points),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_numeric_entry() {
        let c = parse_config("rabi.omega_c_khz = 10").unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.get("rabi.omega_c_khz"), Some(&Value::Number(10.0)));
    }

    #[test]
    fn comments_blank_lines_and_identifiers() {
        let c = parse_config("# header\n\npreset = fig4c-map  # trailing\nsweep.dp_points = 11\n").unwrap();
        assert_eq!(c.get("preset"), Some(&Value::Ident("fig4c-map".into())));
        assert_eq!(c.get("sweep.dp_points"), Some(&Value::Number(11.0)));
    }

    #[test]
    fn duplicate_key_reports_second_line() {
        let err = parse_config("rabi.omega_c_khz = 10\nrabi.omega_c_khz = 12").unwrap_err();
        assert_eq!(err, ConfigError::DuplicateKey { key: "rabi.omega_c_khz".into(), line: 2 });
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse_config("a b c"), Err(ConfigError::ParseError { line: 1, .. })));
        assert!(matches!(parse_config("\n = 3"), Err(ConfigError::ParseError { line: 2, .. })));
        assert!(matches!(parse_config("rabi.omega_c_khz ="), Err(ConfigError::ParseError { .. })));
        assert!(matches!(parse_config("rabi.omega_c_khz = ten"), Err(ConfigError::ParseError { .. })));
        assert!(matches!(parse_config("preset = 3"), Err(ConfigError::ParseError { .. })));
        assert!(matches!(parse_config("sweep.dp_points = 2.5"), Err(ConfigError::ParseError { .. })));
        assert!(matches!(parse_config("rabi.omega_c_khz = inf"), Err(ConfigError::ParseError { .. })));
        assert_eq!(
            parse_config("rabi.omega_x_khz = 1"),
            Err(ConfigError::UnknownKey { key: "rabi.omega_x_khz".into(), line: 1 })
        );
    }

    #[test]
    fn three_layer_precedence() {
        // Default layer only.
        let s = parse_config("").unwrap().resolve().unwrap();
        assert_eq!(s.name, "default");
        assert_eq!(s.params.omega_p, 1.0);
        assert_eq!(s.params.delta_c, 0.0);

        // Preset over defaults.
        let s = parse_config("preset = fig4d-traces").unwrap().resolve().unwrap();
        assert_eq!(s.params.delta_c, 2.0);
        assert_eq!(s.params.omega_p, 1.0);
        assert_eq!(s.provenance_of("detuning.delta_c_khz"), Some(Provenance::Paper));

        // Explicit key over preset, preset value kept elsewhere.
        let mut c = parse_config("preset = fig4d-traces\nrabi.omega_p_khz = 0.5").unwrap();
        c.set_assignment("detuning.delta_c_khz=3").unwrap();
        let s = c.resolve().unwrap();
        assert_eq!(s.params.omega_p, 0.5);
        assert_eq!(s.params.delta_c, 3.0);
        assert_eq!(s.params.delta_a, -2.0);
        assert_eq!(s.provenance_of("rabi.omega_p_khz"), Some(Provenance::Config));
        assert_eq!(s.provenance_of("rabi.omega_c_khz"), Some(Provenance::Paper));
    }

    #[test]
    fn set_overrides_file_value() {
        let mut c = parse_config("rabi.omega_p_khz = 0.5").unwrap();
        c.set_assignment("rabi.omega_p_khz = 0.25").unwrap();
        assert_eq!(c.resolve().unwrap().params.omega_p, 0.25);
        assert!(c.set_assignment("nonsense").is_err());
    }

    #[test]
    fn geometry_keys_drive_detunings_unless_overridden() {
        let s = parse_config("preset = fig3-row1\ngeometry.l1_nm = 114\ngeometry.l2_nm = 122")
            .unwrap()
            .resolve()
            .unwrap();
        assert!((s.params.delta_c - 3.0).abs() < 1e-12);
        assert!((s.params.delta_a + 3.0).abs() < 1e-12);
        let s = parse_config("geometry.l1_nm = 114\ndetuning.delta_c_khz = 1")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(s.params.delta_c, 1.0);
    }

    #[test]
    fn axis_and_evolve_keys() {
        let s = parse_config("sweep.dp_points = 11\nsweep.d_min_khz = -2\nevolve.initial_level = 1\nevolve.dt_ms = 0.001")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(s.dp_axis.points, 11);
        assert_eq!(s.d_axis.unwrap().min, -2.0);
        assert_eq!(s.evolve.initial_level, 1);
        assert_eq!(s.evolve.dt_ms, Some(0.001));
        assert!(parse_config("sweep.dp_points = 1").unwrap().resolve().is_err());
        assert!(parse_config("evolve.initial_level = 5").unwrap().resolve().is_err());
    }

    #[test]
    fn invalid_physics_and_unknown_preset_are_reported() {
        assert!(matches!(
            parse_config("decay.beta1 = 0.9").unwrap().resolve(),
            Err(ConfigError::InvalidValue { .. })
        ));
        assert!(matches!(
            parse_config("preset = nope").unwrap().resolve(),
            Err(ConfigError::Geometry(GeometryError::UnknownPreset(_)))
        ));
    }
}
