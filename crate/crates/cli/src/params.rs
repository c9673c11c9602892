//! Named parameters shared by flags, config files and manifests.
//!
//! Every parameter has one canonical name. A value can come from a flag,
//! from the JSON config (a flat object keyed by those names), or from the
//! built-in default, in that order of precedence. Resolved values are
//! recorded so the run manifest can be fed back as a config.

use std::collections::BTreeSet;
use std::path::Path;

use fohnn_core::export::format_number;
use serde_json::{Map, Value};

use crate::UsageError;

/// A value that can be given on the command line or in JSON.
pub trait Param: Sized + Clone {
    fn parse_str(s: &str) -> Result<Self, String>;
    fn from_json(v: &Value) -> Result<Self, String>;
    fn to_json(&self) -> Value;
}

fn number(v: &Value) -> Result<f64, String> {
    v.as_f64().ok_or_else(|| format!("expected a number, got {v}"))
}

impl Param for f64 {
    fn parse_str(s: &str) -> Result<Self, String> {
        s.trim().parse().map_err(|_| format!("malformed number '{s}'"))
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        match v {
            Value::String(s) => Self::parse_str(s),
            _ => number(v),
        }
    }
    fn to_json(&self) -> Value {
        Value::from(*self)
    }
}

impl Param for usize {
    fn parse_str(s: &str) -> Result<Self, String> {
        s.trim().parse().map_err(|_| format!("malformed count '{s}'"))
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        match v {
            Value::String(s) => Self::parse_str(s),
            _ => v
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| format!("expected a non-negative integer, got {v}")),
        }
    }
    fn to_json(&self) -> Value {
        Value::from(*self as u64)
    }
}

impl Param for u64 {
    fn parse_str(s: &str) -> Result<Self, String> {
        s.trim().parse().map_err(|_| format!("malformed integer '{s}'"))
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        match v {
            Value::String(s) => Self::parse_str(s),
            _ => v.as_u64().ok_or_else(|| format!("expected a non-negative integer, got {v}")),
        }
    }
    fn to_json(&self) -> Value {
        Value::from(*self)
    }
}

impl Param for String {
    fn parse_str(s: &str) -> Result<Self, String> {
        Ok(s.to_string())
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        v.as_str().map(str::to_string).ok_or_else(|| format!("expected a string, got {v}"))
    }
    fn to_json(&self) -> Value {
        Value::from(self.as_str())
    }
}

/// Comma-separated list of numbers, e.g. `0.05,0.025,0.01`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl Param for FloatList {
    fn parse_str(s: &str) -> Result<Self, String> {
        s.split(',').map(f64::parse_str).collect::<Result<_, _>>().map(FloatList)
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        match v {
            Value::String(s) => Self::parse_str(s),
            Value::Array(a) => a.iter().map(number).collect::<Result<_, _>>().map(FloatList),
            _ => Err(format!("expected a list of numbers, got {v}")),
        }
    }
    fn to_json(&self) -> Value {
        Value::from(self.0.clone())
    }
}

/// A point in state space, `x1,x2,x3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3(pub [f64; 3]);

impl Param for Vec3 {
    fn parse_str(s: &str) -> Result<Self, String> {
        let FloatList(v) = FloatList::parse_str(s)?;
        <[f64; 3]>::try_from(v)
            .map(Vec3)
            .map_err(|_| format!("expected three comma-separated numbers, got '{s}'"))
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        let FloatList(list) = FloatList::from_json(v)?;
        <[f64; 3]>::try_from(list)
            .map(Vec3)
            .map_err(|_| format!("expected three numbers, got {v}"))
    }
    fn to_json(&self) -> Value {
        Value::from(self.0.to_vec())
    }
}

/// Semicolon-separated points, e.g. `2,2,2;-2,-2,-2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointList(pub Vec<[f64; 3]>);

impl Param for PointList {
    fn parse_str(s: &str) -> Result<Self, String> {
        s.split(';')
            .map(|p| Vec3::parse_str(p).map(|v| v.0))
            .collect::<Result<_, _>>()
            .map(PointList)
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        match v {
            Value::String(s) => Self::parse_str(s),
            Value::Array(a) => a
                .iter()
                .map(|p| Vec3::from_json(p).map(|v| v.0))
                .collect::<Result<_, _>>()
                .map(PointList),
            _ => Err(format!("expected a list of points, got {v}")),
        }
    }
    fn to_json(&self) -> Value {
        Value::Array(self.0.iter().map(|p| Vec3(*p).to_json()).collect())
    }
}

/// Uniform grid `lo:hi:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.hi } else { self.lo + step * k as f64 })
            .collect()
    }

    pub fn check(&self, name: &str) -> Result<(), UsageError> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(UsageError(format!("{name}: need finite lo <= hi, got {}:{}", self.lo, self.hi)));
        }
        if self.count == 0 {
            return Err(UsageError(format!("{name}: count must be positive")));
        }
        Ok(())
    }
}

impl Param for Grid {
    fn parse_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else {
            return Err(format!("expected lo:hi:count, got '{s}'"));
        };
        Ok(Grid {
            lo: f64::parse_str(lo)?,
            hi: f64::parse_str(hi)?,
            count: usize::parse_str(count)?,
        })
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        v.as_str()
            .ok_or_else(|| format!("expected a 'lo:hi:count' string, got {v}"))
            .and_then(Self::parse_str)
    }
    fn to_json(&self) -> Value {
        Value::from(format!("{}:{}:{}", format_number(self.lo), format_number(self.hi), self.count))
    }
}

/// Clap value parser for any [`Param`].
pub fn parse<T: Param>(s: &str) -> Result<T, String> {
    T::parse_str(s)
}

/// Loads the config file and resolves parameters against it.
#[derive(Debug, Default)]
pub struct Resolver {
    config: Map<String, Value>,
    /// Subcommand recorded in a manifest used as config.
    pub manifest_subcommand: Option<String>,
    resolved: Map<String, Value>,
    seen: BTreeSet<String>,
}

fn canonical(key: &str) -> String {
    key.replace('-', "_")
}

impl Resolver {
    pub fn from_file(path: Option<&Path>) -> Result<Self, UsageError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("config {} is not valid JSON: {e}", path.display())))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, UsageError> {
        let Value::Object(mut map) = value else {
            return Err(UsageError("config must be a JSON object".into()));
        };
        let mut manifest_subcommand = None;
        // A run manifest doubles as a config: its resolved parameters.
        if let (Some(Value::String(sub)), Some(Value::Object(params))) =
            (map.get("subcommand"), map.get("parameters"))
        {
            manifest_subcommand = Some(sub.clone());
            map = params.clone();
        }
        let config = map.into_iter().map(|(k, v)| (canonical(&k), v)).collect();
        Ok(Self {
            config,
            manifest_subcommand,
            ..Self::default()
        })
    }

    /// Flag, else config entry, else default; the result is recorded.
    pub fn get<T: Param>(&mut self, name: &str, flag: Option<T>, default: T) -> Result<T, UsageError> {
        self.seen.insert(name.to_string());
        let value = match (flag, self.config.get(name)) {
            (Some(v), _) => v,
            (None, Some(v)) => T::from_json(v).map_err(|e| UsageError(format!("config entry '{name}': {e}")))?,
            (None, None) => default,
        };
        self.resolved.insert(name.to_string(), value.to_json());
        Ok(value)
    }

    /// Rejects config entries that no resolved parameter consumed.
    pub fn finish(self) -> Result<Map<String, Value>, UsageError> {
        let unknown: Vec<&String> = self.config.keys().filter(|k| !self.seen.contains(*k)).collect();
        if !unknown.is_empty() {
            return Err(UsageError(format!("unknown config entries: {unknown:?}")));
        }
        Ok(self.resolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn precedence_is_flag_config_default() {
        let mut r = Resolver::from_value(json!({"h": 0.02, "T": "300"})).unwrap();
        assert_eq!(r.get("h", Some(0.05), 0.01).unwrap(), 0.05);
        assert_eq!(r.get("T", None, 200.0).unwrap(), 300.0);
        assert_eq!(r.get("q", None, 0.9).unwrap(), 0.9);
        let resolved = r.finish().unwrap();
        assert_eq!(resolved["h"], json!(0.05));
        assert_eq!(resolved["T"], json!(300.0));
    }

    #[test]
    fn unknown_and_malformed_entries_are_usage_errors() {
        let r = Resolver::from_value(json!({"bogus": 1})).unwrap();
        assert!(r.finish().is_err());
        let mut r = Resolver::from_value(json!({"h": "abc"})).unwrap();
        assert!(r.get("h", None, 0.01).is_err());
        assert!(Resolver::from_value(json!([1, 2])).is_err());
    }

    #[test]
    fn manifests_are_accepted_as_config() {
        let r = Resolver::from_value(json!({"subcommand": "integrate", "parameters": {"corrector-iterations": 2}})).unwrap();
        assert_eq!(r.manifest_subcommand.as_deref(), Some("integrate"));
        assert!(r.config.contains_key("corrector_iterations"));
    }

    #[test]
    fn values_round_trip_through_json() {
        let g = Grid::parse_str("0.94:1:300").unwrap();
        assert_eq!(Grid::from_json(&g.to_json()).unwrap(), g);
        let p = PointList::parse_str("2,2,2;-2,-2,-2").unwrap();
        assert_eq!(PointList::from_json(&p.to_json()).unwrap(), p);
        let x = 0.1f64 + 0.2;
        let text = serde_json::to_string(&x.to_json()).unwrap();
        assert_eq!(f64::from_json(&serde_json::from_str(&text).unwrap()).unwrap().to_bits(), x.to_bits());
        assert!(Vec3::parse_str("1,2").is_err());
        assert!(Grid::parse_str("1:2").is_err());
    }

    #[test]
    fn grid_values_hit_both_ends() {
        let g = Grid { lo: 0.05, hi: 0.95, count: 19 };
        let v = g.values();
        assert_eq!(v.len(), 19);
        assert_eq!(v[18], 0.95);
        assert!((v[1] - 0.1).abs() < 1e-15);
    }
}
