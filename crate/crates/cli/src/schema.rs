//! Validation of report documents against the shipped JSON schema.
//!
//! Supports the keywords the report schema uses: `type`, `const`, `enum`,
//! `required`, `properties`, `additionalProperties` (boolean), `items`,
//! `minimum`, `maximum`, `minLength` and `maxLength`.

use std::sync::OnceLock;

use serde_json::Value;

pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

pub fn report_schema() -> &'static Value {
    static SCHEMA: OnceLock<Value> = OnceLock::new();
    SCHEMA.get_or_init(|| serde_json::from_str(REPORT_SCHEMA).expect("shipped schema is valid JSON"))
}

/// All violations of `schema` by `doc`, as `path: message` strings.
pub fn validate(schema: &Value, doc: &Value) -> Vec<String> {
    let mut errors = Vec::new();
    check(schema, doc, "$", &mut errors);
    errors
}

fn type_matches(name: &str, v: &Value) -> bool {
    match name {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64() || v.as_f64().is_some_and(|x| x.fract() == 0.0),
        "null" => v.is_null(),
        _ => false,
    }
}

fn check(schema: &Value, v: &Value, path: &str, errors: &mut Vec<String>) {
    let Some(rules) = schema.as_object() else {
        return;
    };
    if let Some(t) = rules.get("type").and_then(Value::as_str) {
        if !type_matches(t, v) {
            errors.push(format!("{path}: expected {t}, found {v}"));
            return;
        }
    }
    if let Some(c) = rules.get("const") {
        if c != v {
            errors.push(format!("{path}: expected {c}, found {v}"));
        }
    }
    if let Some(options) = rules.get("enum").and_then(Value::as_array) {
        if !options.contains(v) {
            errors.push(format!("{path}: {v} is not one of the allowed values"));
        }
    }
    if let Some(x) = v.as_f64() {
        if let Some(min) = rules.get("minimum").and_then(Value::as_f64) {
            if x < min {
                errors.push(format!("{path}: {x} is below the minimum {min}"));
            }
        }
        if let Some(max) = rules.get("maximum").and_then(Value::as_f64) {
            if x > max {
                errors.push(format!("{path}: {x} is above the maximum {max}"));
            }
        }
    }
    if let Some(s) = v.as_str() {
        let len = s.chars().count() as u64;
        if rules.get("minLength").and_then(Value::as_u64).is_some_and(|m| len < m) {
            errors.push(format!("{path}: string too short"));
        }
        if rules.get("maxLength").and_then(Value::as_u64).is_some_and(|m| len > m) {
            errors.push(format!("{path}: string too long"));
        }
    }
    if let Some(obj) = v.as_object() {
        let props = rules.get("properties").and_then(Value::as_object);
        for key in rules.get("required").and_then(Value::as_array).into_iter().flatten() {
            if let Some(k) = key.as_str() {
                if !obj.contains_key(k) {
                    errors.push(format!("{path}: missing required field {k:?}"));
                }
            }
        }
        for (k, child) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(sub) => check(sub, child, &format!("{path}.{k}"), errors),
                None if rules.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    errors.push(format!("{path}: unexpected field {k:?}"));
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (rules.get("items"), v.as_array()) {
        for (i, child) in arr.iter().enumerate() {
            check(items, child, &format!("{path}[{i}]"), errors);
        }
    }
}
