//! Line-oriented `key=value` reports with a JSON rendering of the same
//! content.

use serde_json::{json, Map, Value as Json};

/// Key of the only field allowed to differ between identical runs.
pub const WALL_TIME_KEY: &str = "wall_time_ms";

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Str(String),
    Int(u64),
    Float(f64),
    Bool(bool),
    Indices(Vec<usize>),
    Floats(Vec<f64>),
}

impl Value {
    fn text(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            Value::Int(i) => i.to_string(),
            Value::Float(x) => fmt_float(*x),
            Value::Bool(b) => b.to_string(),
            Value::Indices(v) => join(v.iter().map(|i| i.to_string())),
            Value::Floats(v) => join(v.iter().map(|x| fmt_float(*x))),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Str(s) => json!(s),
            Value::Int(i) => json!(i),
            Value::Float(x) => float_json(*x),
            Value::Bool(b) => json!(b),
            Value::Indices(v) => json!(v),
            Value::Floats(v) => Json::Array(v.iter().map(|x| float_json(*x)).collect()),
        }
    }
}

fn join<I: Iterator<Item = String>>(it: I) -> String {
    it.collect::<Vec<_>>().join(" ")
}

/// Shortest representation that reads back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        x.to_string()
    }
}

fn float_json(x: f64) -> Json {
    serde_json::Number::from_f64(x)
        .map(Json::Number)
        .unwrap_or_else(|| json!(fmt_float(x)))
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<usize> for Value {
    fn from(i: usize) -> Self {
        Value::Int(i as u64)
    }
}

impl From<u64> for Value {
    fn from(i: u64) -> Self {
        Value::Int(i)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<Vec<usize>> for Value {
    fn from(v: Vec<usize>) -> Self {
        Value::Indices(v)
    }
}

impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Self {
        Value::Floats(v)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Self::default();
        r.push("command", command);
        r
    }

    pub fn push<V: Into<Value>>(&mut self, key: impl Into<String>, value: V) -> &mut Self {
        self.entries.push((key.into(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn entries(&self) -> &[(String, Value)] {
        &self.entries
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(&v.text());
            out.push('\n');
        }
        out
    }

    pub fn json(&self) -> Json {
        let mut map = Map::new();
        for (k, v) in &self.entries {
            map.insert(k.clone(), v.json());
        }
        Json::Object(map)
    }
}

/// Drops the wall-time line from a text report or the field from a JSON
/// report.
pub fn strip_wall_time(report: &str) -> String {
    if let Ok(Json::Object(mut map)) = serde_json::from_str::<Json>(report) {
        map.remove(WALL_TIME_KEY);
        return Json::Object(map).to_string();
    }
    report
        .lines()
        .filter(|l| !l.starts_with(&format!("{WALL_TIME_KEY}=")))
        .map(|l| format!("{l}\n"))
        .collect()
}
