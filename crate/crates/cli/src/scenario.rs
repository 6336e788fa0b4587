//! Scenario files: a JSON description of the system, grid and outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use selgrade_core::linalg::{Matrix, Vector};
use selgrade_core::morse::{AnalysisOptions, AutoOr, GridSettings};
use selgrade_core::system::{AffineControlSystem, ControlBox, SplitMarker};

use crate::error::{CliError, CliResult};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// Smallest accepted cells per face edge.
pub const MIN_RESOLUTION: usize = 4;

/// Largest state dimension the analysis handles.
pub const MAX_STATE_DIM: usize = 3;

fn schema_version() -> u32 {
    SCENARIO_SCHEMA_VERSION
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub name: String,
    pub system: SystemSpec,
    pub grid: GridSettings,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// `x' = A0 x + a0 + sum_i u_i (A_i x + a_i)` with `u` in `omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    /// `[A0, A1, .., Am]`, each a list of rows.
    #[serde(rename = "A")]
    pub matrices: Vec<Vec<Vec<f64>>>,
    /// `[a0, a1, .., am]`; all zero when absent.
    #[serde(rename = "a", default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<Vec<f64>>>,
    pub omega: OmegaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub inhomogeneous: Vec<usize>,
    pub homogeneous: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default, alias = "delta_eq")]
    pub delta_eq: AutoOr,
    #[serde(default = "yes")]
    pub run_lifted: bool,
    #[serde(default = "yes")]
    pub run_homogeneous: bool,
    #[serde(default = "yes")]
    pub run_oracles: bool,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            delta_eq: AutoOr::Auto,
            run_lifted: true,
            run_homogeneous: true,
            run_oracles: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_path: Option<PathBuf>,
    #[serde(default)]
    pub plot_arrows: bool,
}

impl ScenarioConfig {
    pub fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            grid: self.grid.clone(),
            delta_eq: self.analysis.delta_eq,
            run_lifted: self.analysis.run_lifted,
            run_homogeneous: self.analysis.run_homogeneous,
        }
    }

    /// Checks everything short of building the graphs.
    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schemaVersion {} is not supported (expected {SCENARIO_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.system()?;
        let g = &self.grid;
        if g.resolution < MIN_RESOLUTION {
            return Err(CliError::Config(format!(
                "grid.resolution: {} is below the minimum {MIN_RESOLUTION}",
                g.resolution
            )));
        }
        if !(g.time.is_finite() && g.time > 0.0) {
            return Err(CliError::Config(format!(
                "grid.T: {} must be positive and finite",
                g.time
            )));
        }
        if let AutoOr::Value(eps) = g.eps {
            if !(eps.is_finite() && eps >= 0.0) {
                return Err(CliError::Config(format!(
                    "grid.eps: {eps} must be non-negative and finite"
                )));
            }
        }
        if g.samples_per_cell == 0 {
            return Err(CliError::Config(
                "grid.samplesPerCell: must be positive".into(),
            ));
        }
        if g.control_grid_per_axis == 0 {
            return Err(CliError::Config(
                "grid.controlGridPerAxis: must be positive".into(),
            ));
        }
        if let AutoOr::Value(delta) = self.analysis.delta_eq {
            if !(delta.is_finite() && delta >= 0.0) {
                return Err(CliError::Config(format!(
                    "analysis.deltaEq: {delta} must be non-negative and finite"
                )));
            }
        }
        Ok(())
    }

    /// The control system described by the `system` section.
    pub fn system(&self) -> CliResult<AffineControlSystem<f64>> {
        let spec = &self.system;
        let Some(first) = spec.matrices.first() else {
            return Err(CliError::Config("system.A: at least A0 is required".into()));
        };
        let d = first.len();
        if d == 0 || d > MAX_STATE_DIM {
            return Err(CliError::Config(format!(
                "system.A[0]: state dimension {d} outside 1..={MAX_STATE_DIM}"
            )));
        }
        let mut matrices = Vec::with_capacity(spec.matrices.len());
        for (i, rows) in spec.matrices.iter().enumerate() {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                let cols = rows.first().map_or(0, Vec::len);
                return Err(CliError::Config(format!(
                    "system.A[{i}]: expected a {d}x{d} matrix, found {} rows (first of length {cols})",
                    rows.len()
                )));
            }
            if rows.iter().flatten().any(|x| !x.is_finite()) {
                return Err(CliError::Config(format!(
                    "system.A[{i}]: entries must be finite"
                )));
            }
            matrices.push(Matrix::from_rows(rows).map_err(|e| config_at("system.A", e))?);
        }
        let offsets = match &spec.offsets {
            None => vec![Vector::zeros(d); matrices.len()],
            Some(list) => {
                if list.len() != matrices.len() {
                    return Err(CliError::Config(format!(
                        "system.a: {} offset vectors for {} matrices",
                        list.len(),
                        matrices.len()
                    )));
                }
                let mut out = Vec::with_capacity(list.len());
                for (i, v) in list.iter().enumerate() {
                    if v.len() != d {
                        return Err(CliError::Config(format!(
                            "system.a[{i}]: expected length {d}, found {}",
                            v.len()
                        )));
                    }
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(CliError::Config(format!(
                            "system.a[{i}]: entries must be finite"
                        )));
                    }
                    out.push(Vector::from_slice(v).map_err(|e| config_at("system.a", e))?);
                }
                out
            }
        };
        let m = matrices.len() - 1;
        let omega = &spec.omega;
        if omega.lower.len() != m || omega.upper.len() != m {
            return Err(CliError::Config(format!(
                "system.omega: bounds of lengths {} and {} for {m} control matrices",
                omega.lower.len(),
                omega.upper.len()
            )));
        }
        let omega = ControlBox::new(omega.lower.clone(), omega.upper.clone())
            .map_err(|e| config_at("system.omega", e))?;
        let split = spec.split.as_ref().map(|s| SplitMarker {
            inhomogeneous: s.inhomogeneous.clone(),
            homogeneous: s.homogeneous.clone(),
        });
        AffineControlSystem::new(matrices, offsets, omega, split)
            .map_err(|e| config_at("system", e))
    }
}

fn config_at(field: &str, e: selgrade_core::Error) -> CliError {
    CliError::Config(format!("{field}: {e}"))
}

/// Parses and validates scenario text. `origin` names the source in
/// diagnostics.
pub fn parse_scenario_str(text: &str, origin: &str) -> CliResult<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path.is_empty() || path == "." {
            CliError::Config(format!("{origin}: {inner}"))
        } else {
            CliError::Config(format!("{origin}: field `{path}`: {inner}"))
        }
    })?;
    cfg.validate().map_err(|e| e.context(origin))?;
    Ok(cfg)
}

pub fn parse_scenario(path: &Path) -> CliResult<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario_str(&text, &path.display().to_string())
}

pub fn to_json(cfg: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("scenario serializes")
}

/// Replaces the value at a dotted path (`grid.resolution`) with `value`,
/// then revalidates.
pub fn apply_override(cfg: &ScenarioConfig, key: &str, value: Value) -> CliResult<ScenarioConfig> {
    let mut tree = serde_json::to_value(cfg).expect("scenario serializes");
    let mut node = &mut tree;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert((*part).to_string(), value);
                    break;
                }
                map.entry((*part).to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| {
                    CliError::Config(format!("override `{key}`: `{part}` is not an index"))
                })?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| {
                    CliError::Config(format!(
                        "override `{key}`: index {idx} out of range (length {len})"
                    ))
                })?;
                if last {
                    *slot = value;
                    break;
                }
                slot
            }
            _ => {
                return Err(CliError::Config(format!(
                    "override `{key}`: `{part}` is inside a scalar field"
                )))
            }
        };
    }
    let text = serde_json::to_string(&tree).expect("value serializes");
    parse_scenario_str(&text, &format!("override `{key}`"))
}

/// Parses `key=value`; the value is read as JSON when possible and as a
/// string otherwise.
pub fn parse_assignment(s: &str) -> CliResult<(String, Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("`{s}` is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.trim().to_string(), value))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SADDLE: &str = r#"{
        "name": "saddle",
        "system": {
            "A": [[[1, 0], [0, -1]], [[0, 0], [0, 0]]],
            "a": [[0, 0], [1, 1]],
            "omega": {"lower": [-1], "upper": [1]}
        },
        "grid": {"resolution": 16}
    }"#;

    #[test]
    fn defaults_applied() {
        let cfg = parse_scenario_str(SADDLE, "t").unwrap();
        assert_eq!(cfg.schema_version, 1);
        assert_eq!(cfg.grid.samples_per_cell, 4);
        assert_eq!(cfg.grid.eps, AutoOr::Auto);
        assert!(cfg.analysis.run_lifted && cfg.analysis.run_oracles);
        assert_eq!(cfg.system().unwrap().state_dim(), 2);
    }

    #[test]
    fn unknown_field_has_location() {
        let text = SADDLE.replace("\"resolution\": 16", "\"resolution\": 16, \"bogus\": 1");
        let CliError::Config(msg) = parse_scenario_str(&text, "t").unwrap_err() else {
            panic!()
        };
        assert!(msg.contains("bogus") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn syntax_error_has_line() {
        let CliError::Config(msg) = parse_scenario_str("{\n  \"name\": ,\n}", "t").unwrap_err()
        else {
            panic!()
        };
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn delta_eq_alias() {
        let text = SADDLE.replace("\"grid\"", "\"analysis\": {\"delta_eq\": 0.2}, \"grid\"");
        let cfg = parse_scenario_str(&text, "t").unwrap();
        assert_eq!(cfg.analysis.delta_eq, AutoOr::Value(0.2));
    }

    #[test]
    fn override_nested_field() {
        let cfg = parse_scenario_str(SADDLE, "t").unwrap();
        let cfg = apply_override(&cfg, "grid.resolution", Value::from(24)).unwrap();
        assert_eq!(cfg.grid.resolution, 24);
        let cfg = apply_override(&cfg, "system.omega.upper.0", Value::from(2.0)).unwrap();
        assert_eq!(cfg.system.omega.upper, vec![2.0]);
        assert!(apply_override(&cfg, "grid.resolution", Value::from(2)).is_err());
        assert!(apply_override(&cfg, "grid.nope", Value::from(2)).is_err());
    }

    #[test]
    fn assignment_values() {
        assert_eq!(
            parse_assignment("grid.eps=auto").unwrap(),
            ("grid.eps".into(), Value::from("auto"))
        );
        assert_eq!(
            parse_assignment("grid.T=0.5").unwrap(),
            ("grid.T".into(), Value::from(0.5))
        );
        assert!(parse_assignment("grid.T").is_err());
    }
}
