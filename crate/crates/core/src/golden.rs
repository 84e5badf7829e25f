//! Golden-fixture regression replay.
//!
//! A fixture manifest lists configurations with frozen expected outputs.
//! Three tolerance classes are supported:
//!
//! * `exact` — byte-for-byte digest match;
//! * `tol_1e9` — numeric tokens compared to absolute 1e-9 (layout fixed);
//! * `statistical` — the expected file stores `{"value": v, "allowance": a}`
//!   and the replayed report's `value` field must land within the allowance.
//!
//! Fixtures are generated by the implementation once its independent
//! oracles pass; they guard against regressions, not correctness.

use crate::commands::run_command;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceClass {
    Exact,
    Tol1e9,
    Statistical,
}

/// One frozen fixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldenFixture {
    pub name: String,
    pub command: String,
    /// Config path, relative to the manifest.
    pub config: String,
    /// Expected-output path, relative to the manifest.
    pub expected: String,
    pub class: ToleranceClass,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureManifest {
    pub fixtures: Vec<GoldenFixture>,
}

/// Result of replaying one fixture.
#[derive(Debug, Clone)]
pub struct FixtureResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn numeric_tokens(text: &str) -> Vec<std::result::Result<f64, String>> {
    text.split(|c: char| c.is_whitespace() || ",;[]{}()\"".contains(c))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| t.to_string()))
        .collect()
}

fn compare_tol(a: &str, b: &str, tol: f64) -> std::result::Result<(), String> {
    let ta = numeric_tokens(a);
    let tb = numeric_tokens(b);
    if ta.len() != tb.len() {
        return Err(format!("token count {} vs {}", ta.len(), tb.len()));
    }
    for (i, (x, y)) in ta.iter().zip(&tb).enumerate() {
        match (x, y) {
            (Ok(x), Ok(y)) => {
                if !((x - y).abs() <= tol || (x.is_nan() && y.is_nan())) {
                    return Err(format!("token {i}: {x} vs {y}"));
                }
            }
            (Err(x), Err(y)) => {
                if x != y {
                    return Err(format!("token {i}: {x:?} vs {y:?}"));
                }
            }
            _ => return Err(format!("token {i}: kind mismatch")),
        }
    }
    Ok(())
}

/// Replays every fixture in the manifest. An empty manifest succeeds with a
/// warning on stderr.
pub fn regression_run(manifest_path: &Path) -> Result<Vec<FixtureResult>> {
    let dir = manifest_path
        .parent()
        .map(PathBuf::from)
        .unwrap_or_default();
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| Error::InvalidConfig(format!("manifest {manifest_path:?}: {e}")))?;
    let manifest: FixtureManifest =
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    if manifest.fixtures.is_empty() {
        eprintln!("warning: empty fixture manifest {manifest_path:?}");
        return Ok(vec![]);
    }
    let mut results = Vec::new();
    for fx in &manifest.fixtures {
        results.push(replay_one(&dir, fx));
    }
    Ok(results)
}

fn replay_one(dir: &Path, fx: &GoldenFixture) -> FixtureResult {
    let fail = |detail: String| FixtureResult {
        name: fx.name.clone(),
        passed: false,
        detail,
    };
    let cfg_text = match std::fs::read_to_string(dir.join(&fx.config)) {
        Ok(t) => t,
        Err(e) => return fail(format!("config: {e}")),
    };
    let expected = match std::fs::read_to_string(dir.join(&fx.expected)) {
        Ok(t) => t,
        Err(e) => return fail(format!("expected: {e}")),
    };
    let cfg = match ExperimentConfig::from_json(&cfg_text) {
        Ok(c) => c,
        Err(e) => return fail(format!("config parse: {e}")),
    };
    let seed = cfg.execution.seed.unwrap_or(0);
    let workers = cfg.execution.workers.unwrap_or(2);
    let out = match run_command(&fx.command, &cfg, seed, workers) {
        Ok(o) => o,
        Err(e) => return fail(format!("run: {e}")),
    };
    let verdict = match fx.class {
        ToleranceClass::Exact => {
            if out.report.trim_end() == expected.trim_end() {
                Ok(())
            } else {
                Err("digest mismatch".to_string())
            }
        }
        ToleranceClass::Tol1e9 => compare_tol(&out.report, &expected, 1e-9),
        ToleranceClass::Statistical => {
            let exp: serde_json::Value = match serde_json::from_str(&expected) {
                Ok(v) => v,
                Err(e) => return fail(format!("expected parse: {e}")),
            };
            let got: serde_json::Value = match serde_json::from_str(&out.report) {
                Ok(v) => v,
                Err(e) => return fail(format!("report parse: {e}")),
            };
            let want = exp.get("value").and_then(|v| v.as_f64());
            let allow = exp.get("allowance").and_then(|v| v.as_f64());
            let have = got.get("value").and_then(|v| v.as_f64());
            match (want, allow, have) {
                (Some(w), Some(a), Some(h)) => {
                    if (w - h).abs() <= a {
                        Ok(())
                    } else {
                        Err(format!("value {h} outside {w} ± {a}"))
                    }
                }
                _ => Err("statistical fixture needs value/allowance and a value field".into()),
            }
        }
    };
    match verdict {
        Ok(()) => FixtureResult {
            name: fx.name.clone(),
            passed: true,
            detail: String::new(),
        },
        Err(d) => fail(d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerant_comparison() {
        assert!(compare_tol("a,1.0,2.0", "a,1.0000000001,2.0", 1e-9).is_ok());
        assert!(compare_tol("a,1.0", "a,1.01", 1e-9).is_err());
        assert!(compare_tol("a,1.0", "b,1.0", 1e-9).is_err());
        assert!(compare_tol("nan,1.0", "nan,1.0", 1e-9).is_ok());
    }

    #[test]
    fn empty_manifest_warns_and_succeeds() {
        let dir = std::env::temp_dir().join("smoothlab_golden_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("manifest.json");
        std::fs::write(&path, r#"{"fixtures": []}"#).unwrap();
        let results = regression_run(&path).unwrap();
        assert!(results.is_empty());
    }
}
