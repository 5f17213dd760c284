//! Run reports. The structured format is a canonical JSON tree: keys sorted,
//! floats printed with 17 significant digits, no timestamps or timings, so
//! two runs of the same config are byte-identical. The text format is a
//! human-readable table and may include timings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    List(Vec<Value>),
    Map(BTreeMap<String, Value>),
}

impl Value {
    pub fn map() -> BTreeMap<String, Value> {
        BTreeMap::new()
    }

    pub fn num_list(xs: &[f64]) -> Value {
        Value::List(xs.iter().map(|&x| Value::Num(x)).collect())
    }
}

/// 17 significant digits round-trips every f64 exactly.
fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "\"nan\"".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "\"inf\"" } else { "\"-inf\"" }.to_string();
    }
    format!("{x:.16e}")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Value::Num(x) => out.push_str(&fmt_f64(*x)),
        Value::Str(s) => {
            let _ = write!(out, "\"{}\"", escape(s));
        }
        Value::List(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad);
                out.push_str("  ");
                write_value(out, item, indent + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad);
            out.push(']');
        }
        Value::Map(entries) => {
            if entries.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in entries.iter().enumerate() {
                let _ = write!(out, "{pad}  \"{}\": ", escape(k));
                write_value(out, item, indent + 1);
                if i + 1 < entries.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad);
            out.push('}');
        }
    }
}

#[derive(Debug, Clone)]
pub struct TaskReport {
    /// Config key `task.N`.
    pub id: u64,
    pub kind: String,
    pub pass: bool,
    pub detail: BTreeMap<String, Value>,
    /// Wall time, text output only.
    pub elapsed: std::time::Duration,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub tasks: Vec<TaskReport>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.tasks.iter().all(|t| t.pass)
    }

    pub fn structured(&self) -> String {
        let mut root = Value::map();
        let tasks: Vec<Value> = self
            .tasks
            .iter()
            .map(|t| {
                let mut m = Value::map();
                m.insert("id".into(), Value::Int(t.id as i64));
                m.insert("kind".into(), Value::Str(t.kind.clone()));
                m.insert("pass".into(), Value::Bool(t.pass));
                m.insert("detail".into(), Value::Map(t.detail.clone()));
                Value::Map(m)
            })
            .collect();
        root.insert("pass".into(), Value::Bool(self.all_passed()));
        root.insert("tasks".into(), Value::List(tasks));
        let mut out = String::new();
        write_value(&mut out, &Value::Map(root), 0);
        out.push('\n');
        out
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<6} {:<22} {:<6} {:>10}", "task", "kind", "pass", "ms");
        for t in &self.tasks {
            let _ = writeln!(
                out,
                "{:<6} {:<22} {:<6} {:>10.3}",
                t.id,
                t.kind,
                if t.pass { "pass" } else { "FAIL" },
                t.elapsed.as_secs_f64() * 1e3
            );
            for (k, v) in &t.detail {
                let mut rendered = String::new();
                write_value(&mut rendered, v, 2);
                let _ = writeln!(out, "       {k} = {rendered}");
            }
        }
        let _ = writeln!(
            out,
            "overall: {}",
            if self.all_passed() { "pass" } else { "FAIL" }
        );
        out
    }
}
