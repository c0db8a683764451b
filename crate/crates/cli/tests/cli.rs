//! End-to-end command tests: exit codes, output shape against the shipped
//! schemas, and byte-for-byte reproducibility.

use std::process::{Command, Output};

use serde_json::Value;

fn zorich(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zorich"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Minimal structural validator for the shipped schema subset:
/// type / required / properties / items.
fn validate(schema: &Value, value: &Value) -> Result<(), String> {
    if let Some(ty) = schema.get("type") {
        let tys: Vec<&str> = match ty {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(|v| v.as_str()).collect(),
            _ => vec![],
        };
        let ok = tys.iter().any(|t| match *t {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_i64() || value.is_u64(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            _ => false,
        });
        if !ok {
            return Err(format!("expected {tys:?}, got {value}"));
        }
    }
    if let Some(req) = schema.get("required").and_then(|r| r.as_array()) {
        for key in req.iter().filter_map(|k| k.as_str()) {
            if value.get(key).is_none() {
                return Err(format!("missing required key {key}"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        for (key, sub) in props {
            if let Some(v) = value.get(key) {
                validate(sub, v).map_err(|e| format!("{key}: {e}"))?;
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate(items, v).map_err(|e| format!("[{i}]: {e}"))?;
            }
        }
    }
    Ok(())
}

fn schema(name: &str) -> Value {
    let path = format!("{}/schemas/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn rauzy_class_dot_and_json() {
    let out = zorich(&["rauzy", "--perm", "3,2,1", "--format", "dot"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches("label=").count(), 9, "3 nodes + 6 edges");
    assert!(String::from_utf8(out.stderr).unwrap().contains("class size 3"));

    let out = zorich(&["rauzy", "--perm", "2,1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    validate(&schema("rauzy.v1.json"), &v).unwrap();
    assert_eq!(v["size"], 1);
}

#[test]
fn rauzy_rejects_reducible() {
    let out = zorich(&["rauzy", "--perm", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("reducible"));
}

#[test]
fn orbit_golden_alternates() {
    let out = zorich(&["orbit", "--lambda", "golden", "--depth", "4"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    validate(&schema("orbit.v1.json"), &v).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row["n"], 1);
        assert_eq!(row["c"], if i % 2 == 0 { "a" } else { "b" });
    }
    let phi: f64 = (1.0 + 5f64.sqrt()) / 2.0;
    let total = v["total_roof"].as_f64().unwrap();
    assert!((total - 4.0 * phi.ln()).abs() < 1e-9);
}

#[test]
fn orbit_rational_first_letter() {
    let out = zorich(&["orbit", "--lambda", "7/10,3/10", "--depth", "1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["backend"], "rational");
    assert_eq!(v["rows"][0]["c"], "a");
    assert_eq!(v["rows"][0]["n"], 2);
    let tau0 = v["rows"][0]["tau0"].as_f64().unwrap();
    assert!((tau0 - (-0.7f64.ln())).abs() < 1e-12);
    // the accelerated step sums both induction roofs: -log(7/10 * 4/7)
    let tau1 = v["rows"][0]["tau1"].as_f64().unwrap();
    assert!((tau1 - 2.5f64.ln()).abs() < 1e-12);
}

#[test]
fn orbit_depth_zero_empty_trace() {
    let out = zorich(&["orbit", "--lambda", "7/10,3/10", "--depth", "0", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.is_empty()).count(), 1, "header only");
}

#[test]
fn orbit_boundary_partial_trace() {
    // a terminating continued fraction dies on the boundary mid-run
    let out = zorich(&["orbit", "--lambda", "3/5,2/5", "--depth", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let v = stdout_json(&out);
    assert!(v["truncated"].is_string(), "diagnostic recorded");
    assert!(!v["rows"].as_array().unwrap().is_empty(), "partial trace kept");
}

#[test]
fn entropy_finite_values() {
    let out = zorich(&["entropy", "finite", "--roofs", "log2,log2"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    validate(&schema("entropy.v1.json"), &v).unwrap();
    assert!((v["beta"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let out = zorich(&["entropy", "finite", "--roofs", "1,2"]);
    let v = stdout_json(&out);
    let phi: f64 = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((v["beta"].as_f64().unwrap() - phi.ln()).abs() < 1e-8);
}

#[test]
fn entropy_flow_bounds() {
    // tiny bound retains a single letter: flagged, lower bound only
    let out = zorich(&["entropy", "flow", "--bound", "4"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    validate(&schema("entropy.v1.json"), &v).unwrap();
    assert_eq!(v["estimate"]["route"], "TruncationDominated");
    assert!(!v["estimate"]["flags"].as_array().unwrap().is_empty());

    // moderate bound trends toward the maximal value 2
    let out = zorich(&["entropy", "flow", "--bound", "16"]);
    let v = stdout_json(&out);
    let beta = v["estimate"]["beta"].as_f64().unwrap();
    assert!(beta > 1.4 && beta < 2.0, "beta = {beta}");
}

#[test]
fn entropy_bernoulli_zeta() {
    let out = zorich(&["entropy", "bernoulli", "--zeta", "2", "--budget", "20000"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    validate(&schema("entropy.v1.json"), &v).unwrap();
    assert!((v["estimate"]["beta"].as_f64().unwrap() - 0.5).abs() < 1e-3);
}

#[test]
fn margulis_deterministic_bytes() {
    let args = [
        "margulis",
        "--iterations",
        "100000",
        "--returns",
        "5",
        "--seed",
        "9",
        "--threads",
        "2",
    ];
    let out1 = zorich(&args);
    assert!(out1.status.success(), "{}", String::from_utf8_lossy(&out1.stderr));
    let out2 = zorich(&args);
    assert_eq!(out1.stdout, out2.stdout, "identical seeds give identical bytes");
    let v = stdout_json(&out1);
    validate(&schema("margulis.v1.json"), &v).unwrap();
    let s = v["fitted_s"].as_f64().unwrap();
    assert!(s > 1.5 && s < 2.5, "fitted s = {s} at small sample size");
}
