use serde_json::{json, Map, Value};

use crate::error::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct Defect {
    pub location: String,
    pub value: Value,
}

impl Defect {
    pub fn new(location: impl Into<String>, value: impl Into<Value>) -> Self {
        Defect {
            location: location.into(),
            value: value.into(),
        }
    }

    /// Located rendering of a property failure.
    pub fn from_error(context: &str, e: &Error) -> Self {
        let at = |what: String| {
            if context.is_empty() {
                what
            } else {
                format!("{context}: {what}")
            }
        };
        match e {
            Error::NotPoisson { triple, value } => {
                Defect::new(at(format!("jacobiator({triple})")), value.clone())
            }
            Error::McFailure { order, value } => {
                Defect::new(at(format!("order {order}")), value.clone())
            }
            Error::NotAssociative { order } => {
                Defect::new(at(format!("assoc order {order}")), e.to_string())
            }
            Error::NotClosed(msg) => Defect::new(at("closedness".into()), msg.clone()),
            Error::CurvingMismatch(msg) => Defect::new(at("curving".into()), msg.clone()),
            Error::NotDerivation { f, g, defect, .. } => {
                Defect::new(at(format!("derivation({f}, {g})")), defect.clone())
            }
            Error::NotSpecial(sym) => Defect::new(at("special".into()), sym.clone()),
            other => Defect::new(at(error_tag(other).into()), other.to_string()),
        }
    }
}

fn error_tag(e: &Error) -> &'static str {
    match e {
        Error::NotBiderivation(_) => "biderivation",
        Error::NoSolution { .. } => "solve",
        Error::Convention(_) => "convention",
        _ => "error",
    }
}

/// Result of one command: `ok` iff there are no defects.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub payload: Value,
    pub defects: Vec<Defect>,
    pub timing_ms: Option<u128>,
}

impl Report {
    pub fn new(command: impl Into<String>, payload: Value) -> Self {
        Report {
            command: command.into(),
            payload,
            defects: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn with_defects(mut self, defects: Vec<Defect>) -> Self {
        self.defects = defects;
        self
    }

    pub fn ok(&self) -> bool {
        self.defects.is_empty()
    }

    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("command".into(), json!(self.command));
        obj.insert("ok".into(), json!(self.ok()));
        obj.insert("payload".into(), self.payload.clone());
        let defects: Vec<Value> = self
            .defects
            .iter()
            .map(|d| json!({ "location": d.location, "value": d.value }))
            .collect();
        obj.insert("defects".into(), Value::Array(defects));
        if let Some(ms) = self.timing_ms {
            obj.insert("timing_ms".into(), json!(ms as u64));
        }
        Value::Object(obj)
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn render_human(&self) -> String {
        let mut out = format!(
            "{}: {}\n",
            self.command,
            if self.ok() { "ok" } else { "FAILED" }
        );
        human_value(&self.payload, 1, &mut out);
        for d in &self.defects {
            out.push_str(&format!("  defect at {}:", d.location));
            match &d.value {
                Value::String(s) => out.push_str(&format!(" {s}\n")),
                other => {
                    out.push('\n');
                    human_value(other, 2, &mut out);
                }
            }
        }
        if let Some(ms) = self.timing_ms {
            out.push_str(&format!("  ({ms} ms)\n"));
        }
        out
    }
}

fn human_value(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(obj) => {
            if let (Some(payload), Some(kind)) = (obj.get("payload"), obj.get("kind")) {
                let kind = kind.as_str().unwrap_or("");
                if term_block(payload, kind, &pad, out) {
                    return;
                }
                // star, gauge and qc payloads: named lists of term arrays
                if let Value::Object(fields) = payload {
                    let mut text = format!("{pad}{kind}:\n");
                    let inner = format!("{pad}  ");
                    let all = fields.iter().all(|(k, x)| match x {
                        Value::Array(items)
                            if !items.is_empty() && items.iter().all(Value::is_array) =>
                        {
                            items.iter().enumerate().all(|(i, t)| {
                                term_block(t, &format!("{k}{}", i + 1), &inner, &mut text)
                            })
                        }
                        other => term_block(other, k, &inner, &mut text),
                    });
                    if all {
                        out.push_str(&text);
                        return;
                    }
                }
            }
            for (k, x) in obj {
                match x {
                    Value::Array(a) if !a.iter().any(|x| x.is_object() || x.is_array()) => {
                        out.push_str(&format!("{pad}{k}: {x}\n"));
                    }
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        human_value(x, depth + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                }
            }
        }
        Value::Array(items) if !items.iter().any(|x| x.is_object() || x.is_array()) => {
            out.push_str(&format!("{pad}{v}\n"));
        }
        Value::Array(items) => {
            for x in items {
                match x {
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{pad}-\n"));
                        human_value(x, depth + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}- {}\n", scalar(x))),
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}

/// Renders an array of `{indices|orders, coeff}` terms one per line; false
/// (and nothing written) for anything else.
fn term_block(v: &Value, label: &str, pad: &str, out: &mut String) -> bool {
    let Value::Array(terms) = v else { return false };
    let key = if terms.iter().all(|t| t.get("indices").is_some()) {
        "indices"
    } else if terms.iter().all(|t| t.get("orders").is_some()) {
        "orders"
    } else {
        return false;
    };
    out.push_str(&format!("{pad}{label}:\n"));
    if terms.is_empty() {
        out.push_str(&format!("{pad}  0\n"));
    }
    for t in terms {
        out.push_str(&format!("{pad}  {} : {}\n", t[key], scalar(&t["coeff"])));
    }
    true
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
