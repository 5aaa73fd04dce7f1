//! Scenario files: schema text, exhaustive validation, and typed loading.

use horizonlab::{RadialMetric, TimeProfile};
use serde_json::Value;

pub const TASKS: &[&str] = &[
    "trajectories",
    "horizon",
    "classify",
    "stationary2d",
    "wave-dn",
    "figures",
];

/// Canonical scenario schema (JSON Schema draft-07 subset), kept in sync
/// with `validate` below.
pub const SCHEMA: &str = r#"{
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "horizonlab scenario",
  "type": "object",
  "required": ["task", "metric"],
  "additionalProperties": false,
  "properties": {
    "task": {
      "enum": ["trajectories", "horizon", "classify", "stationary2d", "wave-dn", "figures"]
    },
    "metric": {
      "type": "object",
      "required": ["kind"],
      "additionalProperties": false,
      "properties": {
        "kind": { "enum": ["minkowski", "acoustic", "polar"] },
        "profile": {
          "type": "object",
          "required": ["kind"],
          "additionalProperties": false,
          "properties": {
            "kind": { "enum": ["constant", "tanh", "table"] },
            "value": { "type": "number" },
            "base": { "type": "number" },
            "amplitude": { "type": "number" },
            "center": { "type": "number" },
            "width": { "type": "number", "exclusiveMinimum": 0 },
            "points": {
              "type": "array",
              "minItems": 2,
              "items": { "type": "array", "items": { "type": "number" }, "minItems": 2, "maxItems": 2 }
            }
          }
        },
        "a": { "type": "number" },
        "b": { "type": "number" }
      }
    },
    "seed": { "type": "integer", "minimum": 0 },
    "out": { "type": "string" },
    "tolerance": { "type": "number", "exclusiveMinimum": 0 },
    "params": { "type": "object" }
  }
}"#;

pub struct Scenario {
    pub task: String,
    pub metric: Value,
    pub seed: u64,
    pub out: Option<String>,
    pub tolerance: f64,
    pub params: Value,
}

/// Validate a scenario document, returning *all* violations found rather
/// than stopping at the first.
pub fn validate(doc: &Value) -> Vec<String> {
    let mut errs = Vec::new();
    let obj = match doc.as_object() {
        Some(o) => o,
        None => return vec!["scenario must be a JSON object".into()],
    };
    for key in obj.keys() {
        if !["task", "metric", "seed", "out", "tolerance", "params"].contains(&key.as_str()) {
            errs.push(format!("unknown top-level field `{key}`"));
        }
    }

    let task = match obj.get("task") {
        Some(Value::String(t)) if TASKS.contains(&t.as_str()) => Some(t.as_str()),
        Some(Value::String(t)) => {
            errs.push(format!("unknown task `{t}` (expected one of {TASKS:?})"));
            None
        }
        Some(_) => {
            errs.push("`task` must be a string".into());
            None
        }
        None => {
            errs.push("missing required field `task`".into());
            None
        }
    };

    match obj.get("metric") {
        Some(m) => validate_metric(m, task, &mut errs),
        None => errs.push("missing required field `metric`".into()),
    }

    if let Some(v) = obj.get("seed") {
        if v.as_u64().is_none() {
            errs.push("`seed` must be a non-negative integer".into());
        }
    }
    if let Some(v) = obj.get("out") {
        if !v.is_string() {
            errs.push("`out` must be a string".into());
        }
    }
    if let Some(v) = obj.get("tolerance") {
        match v.as_f64() {
            Some(t) if t > 0.0 => {}
            _ => errs.push("`tolerance` must be a positive number".into()),
        }
    }

    if let Some(task) = task {
        let params = obj.get("params").cloned().unwrap_or(Value::Object(Default::default()));
        match params.as_object() {
            Some(p) => validate_params(task, p, &mut errs),
            None => errs.push("`params` must be an object".into()),
        }
    }
    errs
}

fn validate_metric(m: &Value, task: Option<&str>, errs: &mut Vec<String>) {
    let obj = match m.as_object() {
        Some(o) => o,
        None => {
            errs.push("`metric` must be an object".into());
            return;
        }
    };
    for key in obj.keys() {
        if !["kind", "profile", "a", "b"].contains(&key.as_str()) {
            errs.push(format!("unknown metric field `{key}`"));
        }
    }
    let kind = obj.get("kind").and_then(Value::as_str);
    match kind {
        Some("minkowski") => {}
        Some("acoustic") => match obj.get("profile") {
            Some(p) => validate_profile(p, errs),
            None => errs.push("acoustic metric requires `profile`".into()),
        },
        Some("polar") => {
            for field in ["a", "b"] {
                match obj.get(field).and_then(Value::as_f64) {
                    Some(_) => {}
                    None => errs.push(format!("polar metric requires numeric `{field}`")),
                }
            }
            if obj.get("a").and_then(Value::as_f64) == Some(0.0) {
                errs.push("polar metric requires a != 0".into());
            }
        }
        Some(k) => errs.push(format!("unknown metric kind `{k}`")),
        None => errs.push("metric requires string `kind`".into()),
    }
    if task == Some("stationary2d") && kind.is_some() && kind != Some("polar") {
        errs.push("the stationary2d task requires a polar metric".into());
    }
    if matches!(task, Some("horizon" | "trajectories" | "classify" | "wave-dn" | "figures"))
        && kind == Some("polar")
    {
        errs.push(format!("the {} task requires a radial metric", task.unwrap()));
    }
}

fn validate_profile(p: &Value, errs: &mut Vec<String>) {
    let obj = match p.as_object() {
        Some(o) => o,
        None => {
            errs.push("`profile` must be an object".into());
            return;
        }
    };
    let known = ["kind", "value", "base", "amplitude", "center", "width", "points"];
    for key in obj.keys() {
        if !known.contains(&key.as_str()) {
            errs.push(format!("unknown profile field `{key}`"));
        }
    }
    match obj.get("kind").and_then(Value::as_str) {
        Some("constant") => {
            if obj.get("value").and_then(Value::as_f64).is_none() {
                errs.push("constant profile requires numeric `value`".into());
            }
        }
        Some("tanh") => {
            for field in ["base", "amplitude", "center", "width"] {
                if obj.get(field).and_then(Value::as_f64).is_none() {
                    errs.push(format!("tanh profile requires numeric `{field}`"));
                }
            }
            if let Some(w) = obj.get("width").and_then(Value::as_f64) {
                if w <= 0.0 {
                    errs.push("tanh profile `width` must be positive".into());
                }
            }
        }
        Some("table") => match obj.get("points") {
            Some(Value::Array(pts)) if pts.len() >= 2 => {
                for (i, pt) in pts.iter().enumerate() {
                    let ok = pt
                        .as_array()
                        .map(|a| a.len() == 2 && a.iter().all(|v| v.as_f64().is_some()))
                        .unwrap_or(false);
                    if !ok {
                        errs.push(format!("table point {i} must be [x0, value]"));
                    }
                }
            }
            _ => errs.push("table profile requires `points` with at least 2 pairs".into()),
        },
        Some(k) => errs.push(format!("unknown profile kind `{k}`")),
        None => errs.push("profile requires string `kind`".into()),
    }
}

fn validate_params(task: &str, p: &serde_json::Map<String, Value>, errs: &mut Vec<String>) {
    let known: &[&str] = match task {
        "trajectories" => &["family", "x0_start", "x0_end", "radii"],
        "horizon" => &["kind", "method", "anchor", "window", "samples"],
        "classify" => &["x0", "radii"],
        "stationary2d" => &["census_seeds", "census_radius", "n_theta"],
        "wave-dn" => &["method", "cylinder", "pulse_center", "pulse_sigma", "cells", "x0_end", "area_power", "stencil_h"],
        "figures" => &["radii", "x0_end"],
        _ => &[],
    };
    for key in p.keys() {
        if !known.contains(&key.as_str()) {
            errs.push(format!("unknown `{task}` parameter `{key}`"));
        }
    }
    let num = |k: &str| p.get(k).and_then(Value::as_f64);
    match task {
        "trajectories" => {
            if let Some(f) = p.get("family") {
                if !matches!(f.as_str(), Some("plus" | "minus")) {
                    errs.push("`family` must be \"plus\" or \"minus\"".into());
                }
            }
            check_radii(p.get("radii"), errs);
        }
        "horizon" => {
            if let Some(k) = p.get("kind") {
                if !matches!(
                    k.as_str(),
                    Some("outer-black" | "inner-black" | "outer-white" | "inner-white")
                ) {
                    errs.push("horizon `kind` must be outer-black|inner-black|outer-white|inner-white".into());
                }
            }
            if let Some(m) = p.get("method") {
                if !matches!(m.as_str(), Some("shooting" | "picard")) {
                    errs.push("horizon `method` must be \"shooting\" or \"picard\"".into());
                }
            }
            if let Some(w) = p.get("window") {
                let ok = w
                    .as_array()
                    .map(|a| a.len() == 2 && a.iter().all(|v| v.as_f64().is_some()))
                    .unwrap_or(false);
                if !ok {
                    errs.push("horizon `window` must be [x0_min, x0_max]".into());
                } else {
                    let a = w.as_array().unwrap();
                    if a[0].as_f64() >= a[1].as_f64() {
                        errs.push("horizon `window` must be increasing".into());
                    }
                }
            }
        }
        "classify" => {
            check_radii(p.get("radii"), errs);
        }
        "wave-dn" => {
            if let Some(m) = p.get("method") {
                if !matches!(m.as_str(), Some("direct" | "characteristic" | "both")) {
                    errs.push("wave-dn `method` must be direct|characteristic|both".into());
                }
            }
            for k in ["cylinder", "pulse_sigma"] {
                if let Some(v) = num(k) {
                    if v <= 0.0 {
                        errs.push(format!("`{k}` must be positive"));
                    }
                }
            }
        }
        _ => {}
    }
}

fn check_radii(v: Option<&Value>, errs: &mut Vec<String>) {
    if let Some(v) = v {
        let ok = v
            .as_array()
            .map(|a| !a.is_empty() && a.iter().all(|r| r.as_f64().map(|x| x > 0.0).unwrap_or(false)))
            .unwrap_or(false);
        if !ok {
            errs.push("`radii` must be a non-empty array of positive numbers".into());
        }
    }
}

/// Load an already-validated document into the typed scenario.
pub fn load(doc: Value) -> Scenario {
    let obj = doc.as_object().unwrap();
    Scenario {
        task: obj["task"].as_str().unwrap().to_string(),
        metric: obj["metric"].clone(),
        seed: obj.get("seed").and_then(Value::as_u64).unwrap_or(0),
        out: obj.get("out").and_then(Value::as_str).map(str::to_string),
        tolerance: obj.get("tolerance").and_then(Value::as_f64).unwrap_or(1e-9),
        params: obj
            .get("params")
            .cloned()
            .unwrap_or(Value::Object(Default::default())),
    }
}

pub fn build_radial_metric(spec: &Value) -> anyhow::Result<RadialMetric> {
    let obj = spec.as_object().unwrap();
    match obj["kind"].as_str().unwrap() {
        "minkowski" => Ok(RadialMetric::minkowski()),
        "acoustic" => Ok(RadialMetric::acoustic(build_profile(&obj["profile"])?)),
        other => anyhow::bail!("metric kind `{other}` is not radial"),
    }
}

pub fn build_profile(spec: &Value) -> anyhow::Result<TimeProfile> {
    let obj = spec.as_object().unwrap();
    match obj["kind"].as_str().unwrap() {
        "constant" => Ok(TimeProfile::constant(obj["value"].as_f64().unwrap())),
        "tanh" => Ok(TimeProfile::tanh_ramp(
            obj["base"].as_f64().unwrap(),
            obj["amplitude"].as_f64().unwrap(),
            obj["center"].as_f64().unwrap(),
            obj["width"].as_f64().unwrap(),
        )?),
        "table" => {
            let pts: Vec<(f64, f64)> = obj["points"]
                .as_array()
                .unwrap()
                .iter()
                .map(|p| {
                    let a = p.as_array().unwrap();
                    (a[0].as_f64().unwrap(), a[1].as_f64().unwrap())
                })
                .collect();
            Ok(TimeProfile::tabulated(&pts)?)
        }
        other => anyhow::bail!("unknown profile kind `{other}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shipped() -> Vec<(String, Value)> {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
        let mut out = Vec::new();
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().and_then(|e| e.to_str()) == Some("json") {
                let doc = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
                out.push((path.file_name().unwrap().to_string_lossy().into_owned(), doc));
            }
        }
        assert!(!out.is_empty());
        out
    }

    #[test]
    fn schema_text_parses() {
        let v: Value = serde_json::from_str(SCHEMA).unwrap();
        let tasks: Vec<&str> = v["properties"]["task"]["enum"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| t.as_str().unwrap())
            .collect();
        assert_eq!(tasks, TASKS);
    }

    #[test]
    fn shipped_scenarios_validate() {
        for (name, doc) in shipped() {
            let errs = validate(&doc);
            assert!(errs.is_empty(), "{name}: {errs:?}");
        }
    }

    #[test]
    fn removing_required_field_is_rejected() {
        for (name, doc) in shipped() {
            let mut broken = doc.clone();
            broken.as_object_mut().unwrap().remove("task");
            assert!(!validate(&broken).is_empty(), "{name} without task validated");
            let mut broken = doc;
            broken.as_object_mut().unwrap().remove("metric");
            assert!(!validate(&broken).is_empty(), "{name} without metric validated");
        }
    }

    #[test]
    fn validation_is_exhaustive_not_first_error_only() {
        let doc: Value = serde_json::json!({
            "task": "nope",
            "metric": { "kind": "acoustic" },
            "seed": -1,
            "bogus": true
        });
        let errs = validate(&doc);
        assert!(errs.len() >= 4, "{errs:?}");
    }

    #[test]
    fn shipped_metrics_build() {
        for (name, doc) in shipped() {
            let metric = &doc["metric"];
            if metric["kind"].as_str() != Some("polar") {
                build_radial_metric(metric).unwrap_or_else(|e| panic!("{name}: {e}"));
            }
        }
    }
}
