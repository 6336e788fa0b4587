//! Running a scenario and the report it produces.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use selgrade_core::grid::CellGrid;
use selgrade_core::morse::{analyze_affine_cached, DecompositionReport, GraphCache};
use selgrade_core::oracle::{
    bounded_solution_constant, lifted_central_dimension, lyapunov_decomposition,
    LyapunovDecomposition,
};
use selgrade_core::projective::h1;
use selgrade_core::system::AffineControlSystem;

use crate::error::{CliError, CliResult};
use crate::scenario::ScenarioConfig;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// How the order between lifted components is witnessed.
pub const ORDER_LABEL: &str = "empirical order";

/// Environment variable overriding the scenario's cache directory.
pub const CACHE_ENV: &str = "SELGRADE_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub scenario: ScenarioConfig,
    pub order_label: String,
    pub decomposition: DecompositionReport,
    pub chain_control_box: Option<BoundingBox>,
    /// Box of the central core cells, without the cells reached only
    /// through jumps.
    pub chain_control_core_box: Option<BoundingBox>,
    pub oracle: Option<OracleReport>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl From<(Vec<f64>, Vec<f64>)> for BoundingBox {
    fn from((lower, upper): (Vec<f64>, Vec<f64>)) -> Self {
        Self { lower, upper }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleReport {
    /// Lyapunov spaces of `A0`.
    pub lyapunov: LyapunovDecomposition<f64>,
    pub lifted_central_dimension: usize,
    /// `a0 = 0`, so the zero control fixes the origin.
    pub offset_vanishes_at_zero: bool,
    pub bounded_solutions: Vec<BoundedSolutionSample>,
    /// For autonomous systems: the number of at-infinity components equals
    /// the number of Lyapunov levels.
    pub level_count_matches: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundedSolutionSample {
    pub control: Vec<f64>,
    pub equilibrium: Option<Vec<f64>>,
    /// Unit representative of the central line over this control.
    pub central_line_point: Option<Vec<f64>>,
    /// Whether the line point falls in a cell of the central component.
    pub in_central_component: Option<bool>,
    pub error: Option<String>,
}

/// Run metadata that may differ between otherwise identical runs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub engine_version: String,
    pub lifted_graph_hash: Option<String>,
    pub homogeneous_graph_hash: Option<String>,
    pub lifted_cache_hit: Option<bool>,
    pub homogeneous_cache_hit: Option<bool>,
    pub lifted_build_seconds: Option<f64>,
    pub lifted_analysis_seconds: Option<f64>,
    pub homogeneous_build_seconds: Option<f64>,
    pub homogeneous_analysis_seconds: Option<f64>,
    pub total_seconds: f64,
}

impl AnalysisReport {
    /// The report with provenance and timings cleared; equal for repeated
    /// runs of one scenario.
    pub fn content(&self) -> Self {
        let mut out = Self {
            provenance: Provenance::default(),
            ..self.clone()
        };
        if let Some(run) = out.decomposition.lifted.as_mut() {
            run.timing = Default::default();
        }
        out.decomposition.homogeneous_timing = Default::default();
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Cache directory in order of precedence: `explicit`, the environment,
/// the scenario.
pub fn resolve_cache_dir(cfg: &ScenarioConfig, explicit: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.to_path_buf());
    }
    if let Some(p) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
        return Some(PathBuf::from(p));
    }
    cfg.output.cache_path.clone()
}

pub fn run_scenario(cfg: &ScenarioConfig, cache_dir: Option<&Path>) -> CliResult<AnalysisReport> {
    let start = Instant::now();
    cfg.validate()?;
    let sys = cfg.system()?;
    let cache = cache_dir.map(|dir| GraphCache { dir });
    let mut decomposition = analyze_affine_cached(&sys, &cfg.analysis_options(), cache)?;
    sampling_caveats(cfg, &sys, &mut decomposition.warnings);
    let oracle = if cfg.analysis.run_oracles {
        let mut extra = Vec::new();
        let oracle = oracle_report(cfg, &sys, Some(&decomposition), &mut extra)?;
        decomposition.warnings.extend(extra);
        Some(oracle)
    } else {
        None
    };
    let lifted = decomposition.lifted.as_ref();
    let homogeneous = decomposition.homogeneous.as_ref();
    let h_timing = decomposition.homogeneous_timing;
    let provenance = Provenance {
        engine_version: selgrade_core::VERSION.to_string(),
        lifted_graph_hash: lifted.map(|r| r.summary.graph_hash.clone()),
        homogeneous_graph_hash: homogeneous.map(|s| s.graph_hash.clone()),
        lifted_cache_hit: lifted.map(|r| r.timing.cache_hit),
        homogeneous_cache_hit: homogeneous.map(|_| h_timing.cache_hit),
        lifted_build_seconds: lifted.map(|r| r.timing.build_seconds),
        lifted_analysis_seconds: lifted.map(|r| r.timing.analysis_seconds),
        homogeneous_build_seconds: homogeneous.map(|_| h_timing.build_seconds),
        homogeneous_analysis_seconds: homogeneous.map(|_| h_timing.analysis_seconds),
        total_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(AnalysisReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scenario: cfg.clone(),
        order_label: ORDER_LABEL.to_string(),
        chain_control_box: decomposition.chain_control_box().map(Into::into),
        chain_control_core_box: decomposition.chain_control_core_box().map(Into::into),
        decomposition,
        oracle,
        provenance,
    })
}

fn sampling_caveats(
    cfg: &ScenarioConfig,
    sys: &AffineControlSystem<f64>,
    warnings: &mut Vec<String>,
) {
    if sys.control_dim() > 0 && cfg.grid.control_grid_per_axis < 2 {
        warnings.push("control grid omits the vertices of the control range".into());
    }
    if cfg.grid.samples_per_cell == 1 {
        warnings.push("one sample per cell; edges between thin cell overlaps may be missed".into());
    }
}

/// Exact references for the scenario. With a decomposition at hand, the
/// central line points are also located in the central component.
pub fn oracle_report(
    cfg: &ScenarioConfig,
    sys: &AffineControlSystem<f64>,
    decomposition: Option<&DecompositionReport>,
    warnings: &mut Vec<String>,
) -> CliResult<OracleReport> {
    let a0 = &sys.matrices()[0];
    let lyapunov = lyapunov_decomposition(a0).map_err(|e| CliError::from(e).context("A0"))?;
    let lifted_dim = lifted_central_dimension(a0).map_err(|e| CliError::from(e).context("A0"))?;
    let offset_vanishes_at_zero = sys.offsets()[0].norm_inf() == 0.0;
    if !offset_vanishes_at_zero {
        warnings.push(
            "a0 is nonzero: the zero control does not fix the origin; central line computed anyway"
                .into(),
        );
    }

    let central = decomposition.and_then(|d| d.central());
    let grid = match central {
        Some(_) => Some(CellGrid::new(sys.state_dim() + 1, cfg.grid.resolution)?),
        None => None,
    };
    let mut samples = Vec::new();
    let mut outside = 0;
    for u in sys.omega().sample_grid(cfg.grid.control_grid_per_axis) {
        let mut sample = BoundedSolutionSample {
            control: u.clone(),
            equilibrium: None,
            central_line_point: None,
            in_central_component: None,
            error: None,
        };
        match bounded_solution_constant(sys, &u) {
            Ok(x) => {
                let p = h1(&x);
                let rep = p.rep().to_vec();
                sample.equilibrium = Some(x.to_vec());
                if let (Some(comp), Some(grid)) = (central, &grid) {
                    let hit = grid
                        .cells_within(&p, 0.0)?
                        .iter()
                        .any(|c| comp.cells.binary_search(c).is_ok());
                    if !hit {
                        outside += 1;
                    }
                    sample.in_central_component = Some(hit);
                }
                sample.central_line_point = Some(rep);
            }
            Err(e) => sample.error = Some(e.to_string()),
        }
        samples.push(sample);
    }
    if outside > 0 {
        warnings.push(format!(
            "{outside} central line points lie outside the central component"
        ));
    }
    let level_count_matches = match decomposition {
        Some(d) if sys.control_dim() == 0 && d.homogeneous.is_some() => {
            Some(d.at_infinity_components.len() == lyapunov.level_count())
        }
        _ => None,
    };
    Ok(OracleReport {
        lyapunov,
        lifted_central_dimension: lifted_dim,
        offset_vanishes_at_zero,
        bounded_solutions: samples,
        level_count_matches,
    })
}

pub fn write_report(report: &AnalysisReport, path: &Path) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, report.to_json()).map_err(|e| CliError::io(path, e))
}

pub fn read_report(path: &Path) -> CliResult<AnalysisReport> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let report: AnalysisReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: not a report: {e}", path.display())))?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "{}: report schemaVersion {} is not supported",
            path.display(),
            report.schema_version
        )));
    }
    Ok(report)
}
