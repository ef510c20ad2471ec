//! Resolved run configuration: built-in defaults < config file < flags.
//!
//! The configuration is one flat JSON object with SI keys. Material, trap and
//! cavity keys are those of `DefaultParameterSet`; run keys and protocol
//! thresholds share the same namespace.

use merid_core::constants::{pascal_to_torr, torr_to_pascal};
use merid_core::params::DefaultParameterSet;
use merid_core::protocol::Thresholds;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{usage, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    /// Pa
    pub pressure: f64,
    /// K
    pub t_internal: f64,
    pub chi: f64,
    /// superposition size, m
    pub d: f64,
    /// sphere diameter for single-point commands, m
    pub diameter: f64,
    /// diameter sweep for `diagram` and `optomech`, m
    pub diameter_min: f64,
    pub diameter_max: f64,
    pub per_decade: usize,
    /// time grid for `coherence`, s
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    /// comma-separated source list; empty selects the command default
    pub models: String,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            pressure: torr_to_pascal(1e-12).expect("positive"),
            t_internal: 200.0,
            chi: 1000.0,
            d: 30e-9,
            diameter: 100e-9,
            diameter_min: 10e-9,
            diameter_max: 2e-6,
            per_decade: 40,
            t_min: 1e-6,
            t_max: 1e3,
            t_points: 361,
            models: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Resolved {
    pub params: DefaultParameterSet,
    pub run: RunSettings,
    pub thresholds: Thresholds,
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("configuration structs serialize to objects"),
    }
}

impl Resolved {
    pub fn to_map(&self) -> Map<String, Value> {
        let mut m = object(serde_json::to_value(self.params).expect("serializable"));
        m.extend(object(serde_json::to_value(&self.run).expect("serializable")));
        m.extend(object(serde_json::to_value(self.thresholds).expect("serializable")));
        m
    }

    fn from_map(m: &Map<String, Value>) -> CliResult<Self> {
        let d = Resolved::default();
        let pick = |template: Map<String, Value>| -> Value {
            Value::Object(template.keys().filter_map(|k| m.get(k).map(|v| (k.clone(), v.clone()))).collect())
        };
        let bad = |e: serde_json::Error| usage(format!("invalid configuration value: {e}"));
        Ok(Resolved {
            params: serde_json::from_value(pick(object(serde_json::to_value(d.params).unwrap()))).map_err(bad)?,
            run: serde_json::from_value(pick(object(serde_json::to_value(&d.run).unwrap()))).map_err(bad)?,
            thresholds: serde_json::from_value(pick(object(serde_json::to_value(d.thresholds).unwrap())))
                .map_err(bad)?,
        })
    }

    pub fn pressure_torr(&self) -> f64 {
        pascal_to_torr(self.run.pressure).unwrap_or(f64::NAN)
    }
}

/// Overrides collected from the command line, in CLI units.
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub set: Vec<String>,
    pub models: Option<String>,
    pub d_nm: Option<f64>,
    pub diameter_nm: Option<f64>,
    pub pressure_torr: Option<f64>,
    pub tint_k: Option<f64>,
    pub chi: Option<f64>,
}

fn overlay(base: &mut Map<String, Value>, key: &str, value: Value, origin: &str) -> CliResult<()> {
    match base.get_mut(key) {
        Some(slot) => {
            *slot = value;
            Ok(())
        }
        None => {
            let mut keys: Vec<&str> = base.keys().map(String::as_str).collect();
            keys.sort_unstable();
            Err(usage(format!("unknown configuration key '{key}' in {origin}; known keys: {}", keys.join(", "))))
        }
    }
}

/// Config files are flat objects; a run manifest is accepted too, in which case
/// its resolved parameters are used.
pub fn parse_config_text(text: &str) -> CliResult<Map<String, Value>> {
    let v: Value = serde_json::from_str(text).map_err(|e| usage(format!("config is not valid JSON: {e}")))?;
    let Value::Object(mut m) = v else {
        return Err(usage("config must be a JSON object"));
    };
    if m.contains_key("command") {
        if let Some(Value::Object(p)) = m.remove("parameters") {
            return Ok(p);
        }
    }
    Ok(m)
}

fn parse_set(s: &str) -> CliResult<(String, Value)> {
    let (k, v) = s.split_once('=').ok_or_else(|| usage(format!("--set expects key=value, got '{s}'")))?;
    let v = v.trim();
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

fn num(x: f64) -> CliResult<Value> {
    serde_json::Number::from_f64(x).map(Value::Number).ok_or_else(|| usage(format!("non-finite value {x}")))
}

pub fn resolve(config_text: Option<&str>, flags: &FlagOverrides) -> CliResult<Resolved> {
    let mut m = Resolved::default().to_map();
    if let Some(text) = config_text {
        for (k, v) in parse_config_text(text)? {
            overlay(&mut m, &k, v, "config file")?;
        }
    }
    for s in &flags.set {
        let (k, v) = parse_set(s)?;
        overlay(&mut m, &k, v, "--set")?;
    }
    if let Some(p) = flags.pressure_torr {
        overlay(&mut m, "pressure", num(torr_to_pascal(p)?)?, "--pressure-torr")?;
    }
    if let Some(t) = flags.tint_k {
        overlay(&mut m, "t_internal", num(t)?, "--tint-k")?;
    }
    if let Some(c) = flags.chi {
        overlay(&mut m, "chi", num(c)?, "--chi")?;
    }
    if let Some(d) = flags.d_nm {
        overlay(&mut m, "d", num(d / 1e9)?, "--d-nm")?;
    }
    if let Some(d) = flags.diameter_nm {
        overlay(&mut m, "diameter", num(d / 1e9)?, "--diameter-nm")?;
    }
    if let Some(models) = &flags.models {
        overlay(&mut m, "models", Value::String(models.clone()), "--models")?;
    }
    Resolved::from_map(&m)
}
