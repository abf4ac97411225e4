#![allow(dead_code)]

use std::path::PathBuf;

use serde_json::Value;
use wicktorus::harness::{Experiment, ExperimentConfig};

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
        .join(name)
}

pub fn write_golden(name: &str, records: &[Value]) {
    let text: String = records.iter().map(|r| format!("{r}\n")).collect();
    std::fs::write(golden_path(name), text).unwrap();
}

pub fn read_golden(name: &str) -> Vec<Value> {
    let path = golden_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| {
        panic!(
            "{}: {e}; regenerate with `cargo test --test golden -- --ignored`",
            path.display()
        )
    });
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

/// Structural equality with floats compared to relative tolerance `rtol`.
pub fn json_close(a: &Value, b: &Value, rtol: f64) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) if x.is_f64() || y.is_f64() => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= rtol * x.abs().max(y.abs()) {
                Ok(())
            } else {
                Err(format!("{x} vs {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(format!("lengths {} vs {}", x.len(), y.len()));
            }
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                json_close(p, q, rtol).map_err(|e| format!("[{i}] {e}"))?;
            }
            Ok(())
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.len() != y.len() || x.keys().any(|k| !y.contains_key(k)) {
                return Err(format!(
                    "keys {:?} vs {:?}",
                    x.keys().collect::<Vec<_>>(),
                    y.keys().collect::<Vec<_>>()
                ));
            }
            for (k, p) in x {
                json_close(p, &y[k], rtol).map_err(|e| format!(".{k} {e}"))?;
            }
            Ok(())
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{a} vs {b}")),
    }
}

pub fn assert_matches_golden(name: &str, records: &[Value], rtol: f64) {
    let golden = read_golden(name);
    assert_eq!(golden.len(), records.len(), "{name}: record count");
    for (i, (g, r)) in golden.iter().zip(records).enumerate() {
        if let Err(e) = json_close(g, r, rtol) {
            panic!("{name}: record {i} differs: {e}");
        }
    }
}

/// The reference chain without the space-time differences, which cost
/// minutes and are not part of the baseline.
pub fn converge_reference_config() -> ExperimentConfig {
    ExperimentConfig {
        xsb_differences: false,
        ..ExperimentConfig::reference(Experiment::Converge)
    }
}
