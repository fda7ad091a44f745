//! Deterministic text emission: 17-significant-digit decimals, fixed row
//! and key order.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use crate::flow::MonitorSample;

pub const MONITOR_HEADER: &str = "t,sup_ut,inf_ut,osc_u,sup_grad,margin";

/// Formats with 17 significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_monitor_csv<W: Write>(history: &[MonitorSample], mut w: W) -> io::Result<()> {
    writeln!(w, "{MONITOR_HEADER}")?;
    for s in history {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt17(s.t),
            fmt17(s.sup_ut),
            fmt17(s.inf_ut),
            fmt17(s.osc_u),
            fmt17(s.sup_grad),
            fmt17(s.margin)
        )?;
    }
    Ok(())
}

/// One value in a [`Summary`].
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    Floats(Vec<f64>),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Self {
        Value::Floats(v)
    }
}

fn render(v: &Value) -> String {
    match v {
        Value::Float(f) => fmt17(*f),
        Value::Int(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) => {
            let mut out = String::from("\"");
            for ch in s.chars() {
                match ch {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    c if (c as u32) < 0x20 => {
                        let _ = write!(out, "\\u{:04X}", c as u32);
                    }
                    c => out.push(c),
                }
            }
            out.push('"');
            out
        }
        Value::Floats(v) => {
            let items: Vec<String> = v.iter().map(|f| fmt17(*f)).collect();
            format!("[{}]", items.join(", "))
        }
    }
}

/// TOML summary with keys emitted in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    sections: Vec<(String, Vec<(String, Value)>)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a `[name]` table; later `put` calls land in it.
    pub fn section(&mut self, name: &str) -> &mut Self {
        self.sections.push((name.to_string(), Vec::new()));
        self
    }

    pub fn put(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        if self.sections.is_empty() {
            self.section("");
        }
        let last = self.sections.last_mut().expect("section exists");
        last.1.push((key.to_string(), v.into()));
        self
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Value> {
        self.sections
            .iter()
            .filter(|s| s.0 == section)
            .flat_map(|s| s.1.iter())
            .find(|kv| kv.0 == key)
            .map(|kv| &kv.1)
    }

    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        for (i, (name, kvs)) in self.sections.iter().enumerate() {
            if !name.is_empty() {
                if i > 0 {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{name}]");
            }
            for (k, v) in kvs {
                let _ = writeln!(out, "{k} = {}", render(v));
            }
        }
        out
    }
}

/// Writes `contents` to `dir/name`, creating `dir`.
pub fn write_file(dir: &Path, name: &str, contents: &[u8]) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt17(f64::NEG_INFINITY), "-inf");
        let s = fmt17(std::f64::consts::PI);
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
    }

    #[test]
    fn summary_parses_as_toml_in_order() {
        let mut s = Summary::new();
        s.section("result")
            .put("c", -0.5)
            .put("steps", 10u64)
            .put("ok", true)
            .put("note", "a \"q\"")
            .put("v", vec![1.0, f64::INFINITY, f64::NAN]);
        s.section("more").put("z", 1.0).put("a", 2.0);
        let text = s.to_toml();
        let t: toml::Table = toml::from_str(&text).unwrap();
        assert_eq!(t["result"]["c"].as_float(), Some(-0.5));
        assert_eq!(t["result"]["steps"].as_integer(), Some(10));
        assert_eq!(t["result"]["note"].as_str(), Some("a \"q\""));
        assert!(t["result"]["v"][2].as_float().unwrap().is_nan());
        assert!(text.find("z =").unwrap() < text.find("a =").unwrap());
        assert_eq!(s.get("more", "a"), Some(&Value::Float(2.0)));
    }

    #[test]
    fn monitor_header() {
        let mut buf = Vec::new();
        write_monitor_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{MONITOR_HEADER}\n"));
    }
}
