//! JSON/CSV output and structured errors.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use cbe_mom::Error;

/// `{"num", "den", "rational", "decimal"}` for an exact value.
pub fn rational_json(r: &BigRational) -> Value {
    json!({
        "num": r.numer().to_string(),
        "den": r.denom().to_string(),
        "rational": r.to_string(),
        "decimal": r.to_f64(),
    })
}

pub fn decimal_json(x: f64) -> Value {
    json!({ "decimal": x })
}

/// One output record. Keys serialize in sorted order.
pub struct Record {
    fields: Map<String, Value>,
}

impl Record {
    /// Unset (null) inputs are dropped.
    pub fn new(command: &str, mut inputs: Value) -> Self {
        if let Value::Object(m) = &mut inputs {
            m.retain(|_, v| !v.is_null());
        }
        let mut fields = Map::new();
        fields.insert("command".into(), command.into());
        fields.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        fields.insert("inputs".into(), inputs);
        Self { fields }
    }

    pub fn set(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.fields.insert(key.into(), value.into());
        self
    }

    pub fn set_opt(self, key: &str, value: Option<impl Into<Value>>) -> Self {
        match value {
            Some(v) => self.set(key, v),
            None => self,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.fields).expect("record serializes")
    }
}

/// JSON body for a failed run; structured for library errors.
pub fn error_json(err: &anyhow::Error) -> Value {
    let body = match err.downcast_ref::<Error>() {
        Some(Error::Resource {
            what,
            limit,
            reached,
            hint,
        }) => json!({
            "kind": "resource",
            "message": err.to_string(),
            "what": what,
            "limit": limit,
            "reached": reached,
            "hint": hint,
        }),
        Some(Error::Refused { reason, report }) => json!({
            "kind": "refused",
            "message": err.to_string(),
            "reason": reason,
            "finiteness": report,
        }),
        Some(e) => json!({ "kind": kind(e), "message": e.to_string() }),
        None => json!({ "kind": "usage", "message": format!("{err:#}") }),
    };
    json!({ "error": body })
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Contract(_) => "contract",
        Error::Domain(_) => "domain",
        Error::Resource { .. } => "resource",
        Error::Numerical(_) => "numerical",
        Error::Refused { .. } => "refused",
        Error::Insufficient(_) => "insufficient",
    }
}

/// A CSV field: finite floats in shortest round-trip form, empty for none.
pub fn csv_num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
