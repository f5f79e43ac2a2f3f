//! Report envelope, experiment manifest and parameter resolution.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use cocycle_lab::circle::{parse_point, parse_rational, CirclePoint};
use cocycle_lab::contfrac::{AlphaHandle, AlphaSpec};
use cocycle_lab::ostrowski::{synthesize, OstrowskiDigits};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "v1";

/// Everything needed to rerun a command and get the same bytes back.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command_line: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    pub points: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    pub precision_cap: usize,
    pub horizons: BTreeMap<String, u64>,
    /// Only with `--timing`, since it breaks bit-identical replay.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

pub struct Context {
    pub manifest: Manifest,
    timing: bool,
    start: Instant,
}

/// A point together with the digits it came from, when given as a plan file.
pub struct ResolvedPoint {
    pub point: CirclePoint,
    pub digits: Option<OstrowskiDigits>,
}

impl Context {
    pub fn new(command_line: &[String], timing: bool) -> Self {
        Context {
            manifest: Manifest {
                tool: "cocycle-lab",
                version: env!("CARGO_PKG_VERSION"),
                command_line: command_line.to_vec(),
                alpha: None,
                points: BTreeMap::new(),
                seeds: BTreeMap::new(),
                precision_cap: cocycle_lab::contfrac::DEFAULT_MAX_DEPTH,
                horizons: BTreeMap::new(),
                wall_clock_seconds: None,
            },
            timing,
            start: Instant::now(),
        }
    }

    pub fn alpha(&mut self, text: &str) -> CliResult<AlphaHandle> {
        let spec: AlphaSpec = text.parse()?;
        let h = AlphaHandle::new(spec);
        self.manifest.alpha = Some(h.spec().to_string());
        self.manifest.precision_cap = h.max_depth();
        Ok(h)
    }

    /// Resolves `r:p/q`, `lat:r+m*alpha`, `d:<decimal>` or a plan file (`plan:<path>` or
    /// a path ending in `.json`).
    pub fn point(&mut self, h: &AlphaHandle, name: &str, text: &str) -> CliResult<ResolvedPoint> {
        let plan_path = text.strip_prefix("plan:").or_else(|| text.ends_with(".json").then_some(text));
        let resolved = match plan_path {
            Some(path) => {
                let digits = load_plan(path)?;
                ResolvedPoint { point: synthesize(h, &digits)?, digits: Some(digits) }
            }
            None => ResolvedPoint { point: parse_point(h, text)?, digits: None },
        };
        self.manifest.points.insert(name.to_string(), resolved.point.to_string());
        Ok(resolved)
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.manifest.seeds.insert(name.to_string(), seed);
    }

    pub fn horizon(&mut self, name: &str, value: u64) {
        self.manifest.horizons.insert(name.to_string(), value);
    }

    /// Pretty JSON `{schema, manifest, result}` with a trailing newline.
    pub fn finish<T: Serialize>(mut self, kind: &str, result: &T) -> CliResult<String> {
        if self.timing {
            self.manifest.wall_clock_seconds = Some(self.start.elapsed().as_secs_f64());
        }
        let doc = serde_json::json!({
            "schema": format!("cocycle-lab/{kind}/{SCHEMA_VERSION}"),
            "manifest": self.manifest,
            "result": result,
        });
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Usage(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

pub fn read_json(path: &str) -> CliResult<Value> {
    let text = std::fs::read_to_string(Path::new(path)).map_err(|e| CliError::File { path: path.into(), message: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| CliError::File { path: path.into(), message: e.to_string() })
}

/// First object holding a `digits` map, searched depth-first in key order.
fn find_digits(v: &Value) -> Option<&serde_json::Map<String, Value>> {
    let obj = v.as_object()?;
    if obj.get("digits").is_some_and(Value::is_object) {
        return Some(obj);
    }
    obj.values().find_map(find_digits)
}

/// Reads Ostrowski digits `{"digits": {"j": "b_j", ...}, "tail_bound": "p/q"}`. Any
/// report containing such an object (for example `ostrowski construct-beta`) works.
pub fn load_plan(path: &str) -> CliResult<OstrowskiDigits> {
    let bad = |m: String| CliError::File { path: path.into(), message: m };
    let doc = read_json(path)?;
    let obj = find_digits(&doc).ok_or_else(|| bad("no object with a `digits` map".into()))?;
    let mut digits = BTreeMap::new();
    for (k, v) in obj["digits"].as_object().unwrap() {
        let j: usize = k.parse().map_err(|_| bad(format!("digit index `{k}` is not a nonnegative integer")))?;
        let b: BigInt = match v {
            Value::String(s) => s.parse().map_err(|_| bad(format!("digit `{s}` is not an integer")))?,
            Value::Number(n) if n.is_i64() => BigInt::from(n.as_i64().unwrap()),
            other => return Err(bad(format!("digit {other} must be an integer string"))),
        };
        if b != BigInt::from(0) {
            digits.insert(j, b);
        }
    }
    let tail_bound = match obj.get("tail_bound") {
        Some(Value::String(s)) => parse_rational(s)?,
        None => num_bigint::BigInt::from(0).into(),
        Some(other) => return Err(bad(format!("tail_bound {other} must be a fraction string"))),
    };
    let horizon = digits.keys().last().copied().unwrap_or(0);
    Ok(OstrowskiDigits { digits, horizon, tail_bound })
}
