//! Ordering, spectra and classification of recurrent components, and the
//! full decomposition of an affine control system.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::mean_cycle::{howard_max_mean, karp_max_mean, karp_min_mean, LocalGraph};
use super::scc::tarjan;
use crate::error::{Error, Result};
use crate::graph::{
    build_graph, graph_hash, load_graph, save_graph, ChainGraph, GraphParams, DEFAULT_EPS_FACTOR,
};
use crate::grid::{CellGrid, CellId};
use crate::projective::chord_distance;
use crate::system::{AffineControlSystem, BilinearSystem};

/// Components up to this many cells use Karp; larger ones use Howard.
pub const KARP_NODE_LIMIT: usize = 1024;

/// Multiple of the cell diameter used for `delta_eq` when left to the engine.
pub const DEFAULT_DELTA_EQ_FACTOR: f64 = 1.5;

/// Error allowance for growth rates computed from exact propagators.
pub const QUADRATURE_ERROR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumInterval {
    pub min: f64,
    pub max: f64,
}

impl SpectrumInterval {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.min - tol <= x && x <= self.max + tol
    }

    pub fn contains_interval(&self, other: &Self, tol: f64) -> bool {
        self.min - tol <= other.min && other.max <= self.max + tol
    }

    /// `0` in the interior, with a margin of `tol` on both sides.
    pub fn zero_in_interior(&self, tol: f64) -> bool {
        self.min < -tol && self.max > tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Central,
    AtInfinity,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MorseComponent {
    pub cells: Vec<CellId>,
    pub index_in_order: usize,
    pub spectrum: SpectrumInterval,
    pub classification: Classification,
    /// Cells of the equator grid met by the component, empty for runs
    /// without an equator.
    pub equator_contact: Vec<CellId>,
    /// Largest last coordinate over the cell centers.
    pub max_height: f64,
    /// Cells that recur without jumps beyond half a cell diameter.
    pub core_cells: Vec<CellId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentOrder {
    /// Component indices, flow sources first.
    pub linear: Vec<usize>,
    /// Pairs `(i, j)` with a chain of graph edges from component `i` to `j`.
    pub precedes: Vec<(usize, usize)>,
    pub non_linear_order: bool,
}

pub use super::scc::strongly_connected_components;

fn reach_matrix(g: &ChainGraph, comps: &[Vec<CellId>]) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let cond = tarjan(n, |v| g.successors(CellId(v as u32)));
    let k = comps.len();
    let words = k.div_ceil(64).max(1);
    let mut bits = vec![0u64; cond.count * words];
    let mut by_label: Vec<Vec<u32>> = vec![Vec::new(); cond.count];
    for (v, &l) in cond.labels.iter().enumerate() {
        by_label[l as usize].push(v as u32);
    }
    for (i, comp) in comps.iter().enumerate() {
        let l = cond.labels[comp[0].index()] as usize;
        bits[l * words + i / 64] |= 1 << (i % 64);
    }
    // edges between labels only go downwards
    for l in (0..cond.count).rev() {
        let own: Vec<u64> = bits[l * words..(l + 1) * words].to_vec();
        if own.iter().all(|&w| w == 0) {
            continue;
        }
        for &v in &by_label[l] {
            for &t in g.successors(CellId(v)) {
                let lt = cond.labels[t as usize] as usize;
                if lt != l {
                    for (w, &o) in own.iter().enumerate() {
                        bits[lt * words + w] |= o;
                    }
                }
            }
        }
    }
    let mut reach = vec![vec![false; k]; k];
    for (j, comp) in comps.iter().enumerate() {
        let l = cond.labels[comp[0].index()] as usize;
        for (i, row) in reach.iter_mut().enumerate() {
            row[j] = i != j && bits[l * words + i / 64] & (1 << (i % 64)) != 0;
        }
    }
    reach
}

/// Reachability order of the components on the condensation, linearized
/// with ties broken by `key` (smaller first).
pub fn component_order_by<K: PartialOrd>(
    g: &ChainGraph,
    comps: &[Vec<CellId>],
    key: impl Fn(usize) -> K,
) -> ComponentOrder {
    let k = comps.len();
    let reach = reach_matrix(g, comps);
    let mut precedes = Vec::new();
    let mut non_linear_order = false;
    for i in 0..k {
        for j in 0..k {
            if reach[i][j] {
                precedes.push((i, j));
            }
            if i < j && !reach[i][j] && !reach[j][i] {
                non_linear_order = true;
            }
        }
    }
    let mut indeg: Vec<usize> = (0..k)
        .map(|j| (0..k).filter(|&i| reach[i][j]).count())
        .collect();
    let mut done = vec![false; k];
    let mut linear = Vec::with_capacity(k);
    for _ in 0..k {
        let next = (0..k)
            .filter(|&i| !done[i] && indeg[i] == 0)
            .min_by(|&a, &b| {
                key(a)
                    .partial_cmp(&key(b))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            })
            .expect("reachability between distinct components is acyclic");
        done[next] = true;
        linear.push(next);
        for j in 0..k {
            if reach[next][j] {
                indeg[j] -= 1;
            }
        }
    }
    ComponentOrder {
        linear,
        precedes,
        non_linear_order,
    }
}

/// Reachability order, ties broken by the smallest cell.
pub fn component_order(g: &ChainGraph, comps: &[Vec<CellId>]) -> ComponentOrder {
    component_order_by(g, comps, |i| comps[i][0])
}

/// Extremal cycle means of the subgraph induced by `cells`: the minimum over
/// `w_min` weights and the maximum over `w_max` weights.
pub fn spectrum_interval(g: &ChainGraph, cells: &[CellId]) -> Result<SpectrumInterval> {
    let mut local = vec![u32::MAX; g.node_count()];
    for (i, c) in cells.iter().enumerate() {
        local[c.index()] = i as u32;
    }
    let n = cells.len();
    let internal = |c: &CellId| {
        g.edges(*c)
            .filter(|e| local[e.target.index()] != u32::MAX)
            .collect::<Vec<_>>()
    };
    let (min, max) = if n <= KARP_NODE_LIMIT {
        let mut lo_edges = Vec::new();
        let mut hi_edges = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            for e in internal(c) {
                let j = local[e.target.index()] as usize;
                lo_edges.push((i, j, e.w_min));
                hi_edges.push((i, j, e.w_max));
            }
        }
        (karp_min_mean(n, &lo_edges), karp_max_mean(n, &hi_edges))
    } else {
        // one adjacency, weights swapped between the two solves
        let mut lg = LocalGraph {
            offsets: Vec::with_capacity(n + 1),
            ..LocalGraph::default()
        };
        lg.offsets.push(0);
        for c in cells {
            for e in internal(c) {
                lg.targets.push(local[e.target.index()]);
                lg.weights.push(-e.w_min);
            }
            lg.offsets.push(lg.targets.len());
        }
        let min = howard_max_mean(&lg).map(|m| -m);
        let mut k = 0;
        for c in cells {
            for e in internal(c) {
                lg.weights[k] = e.w_max;
                k += 1;
            }
        }
        (min, howard_max_mean(&lg))
    };
    match (min, max) {
        (Some(min), Some(max)) => Ok(SpectrumInterval { min, max }),
        _ => Err(Error::NoCycle),
    }
}

/// Largest last coordinate over the cell centers of `cells`.
pub fn max_height(grid: &CellGrid, cells: &[CellId]) -> f64 {
    let n = grid.ambient_dim();
    cells
        .iter()
        .map(|&c| grid.center(c)[n - 1].abs())
        .fold(0.0, f64::max)
}

/// Classification of lifted-run components.
///
/// A component is central when it reaches above `delta_eq` and carries a
/// cycle of zero growth (within `zero_tol`); the growth of `(x, 1)` along a
/// bounded orbit telescopes to zero. Components that stay within `delta_eq`
/// of the equator are at infinity, as are those that touch the equator and
/// have no zero-growth cycle. The remaining ones are unclassified.
pub fn classify_component(
    height: f64,
    touches_equator: bool,
    spectrum: &SpectrumInterval,
    delta_eq: f64,
    zero_tol: f64,
) -> Classification {
    if height <= delta_eq {
        Classification::AtInfinity
    } else if spectrum.contains(0.0, zero_tol) {
        Classification::Central
    } else if touches_equator {
        Classification::AtInfinity
    } else {
        Classification::Unclassified
    }
}

/// The value of a setting, or a rule computed by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AutoOr {
    #[default]
    Auto,
    Value(f64),
}

impl AutoOr {
    pub fn resolve(self, auto: f64) -> f64 {
        match self {
            AutoOr::Auto => auto,
            AutoOr::Value(v) => v,
        }
    }
}

impl Serialize for AutoOr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AutoOr::Auto => s.serialize_str("auto"),
            AutoOr::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for AutoOr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(AutoOr::Value(v)),
            Raw::Text(t) if t == "auto" => Ok(AutoOr::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"auto\", found \"{t}\""
            ))),
        }
    }
}

fn default_time() -> f64 {
    1.0
}
fn default_samples() -> usize {
    4
}
fn default_per_axis() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GridSettings {
    pub resolution: usize,
    #[serde(default)]
    pub eps: AutoOr,
    #[serde(rename = "T", default = "default_time")]
    pub time: f64,
    #[serde(default = "default_samples")]
    pub samples_per_cell: usize,
    #[serde(default = "default_per_axis")]
    pub control_grid_per_axis: usize,
    #[serde(default)]
    pub switches_per_hop: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

impl GridSettings {
    pub fn new(resolution: usize) -> Self {
        Self {
            resolution,
            eps: AutoOr::Auto,
            time: default_time(),
            samples_per_cell: default_samples(),
            control_grid_per_axis: default_per_axis(),
            switches_per_hop: 0,
            rng_seed: 0,
        }
    }

    pub fn graph_params(&self, grid: &CellGrid, sys: &dyn BilinearSystem<f64>) -> GraphParams {
        GraphParams {
            time: self.time,
            eps: self.eps.resolve(DEFAULT_EPS_FACTOR * grid.diameter()),
            resolution: self.resolution,
            samples_per_cell: self.samples_per_cell,
            control_samples: sys.omega().sample_grid(self.control_grid_per_axis),
            switches_per_hop: self.switches_per_hop,
            rng_seed: self.rng_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AnalysisOptions {
    pub grid: GridSettings,
    #[serde(default)]
    pub delta_eq: AutoOr,
    #[serde(default = "yes")]
    pub run_lifted: bool,
    #[serde(default = "yes")]
    pub run_homogeneous: bool,
}

fn yes() -> bool {
    true
}

impl AnalysisOptions {
    pub fn new(grid: GridSettings) -> Self {
        Self {
            grid,
            delta_eq: AutoOr::Auto,
            run_lifted: true,
            run_homogeneous: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunSummary {
    pub ambient_dim: usize,
    pub resolution: usize,
    pub cell_count: usize,
    pub cell_diameter: f64,
    pub grid_constant: f64,
    pub eps: f64,
    #[serde(rename = "T")]
    pub time: f64,
    pub control_samples: usize,
    pub edge_count: usize,
    /// Recurrent components dropped as jump artifacts.
    pub discarded_components: usize,
    pub graph_hash: String,
}

/// Components of one graph run, listed in their linear order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunResult {
    pub summary: RunSummary,
    pub components: Vec<MorseComponent>,
    /// Pairs of order indices `(i, j)` with component `i` before `j`.
    pub precedes: Vec<(usize, usize)>,
    pub non_linear_order: bool,
    #[serde(skip)]
    pub timing: RunTiming,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunTiming {
    pub build_seconds: f64,
    pub analysis_seconds: f64,
    pub cache_hit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InclusionFlags {
    /// The central component comes within `eps` of the embedded component.
    pub geometric: bool,
    /// `0` lies in the interior of the spectrum interval (sufficient, not necessary).
    pub spectral: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecompositionReport {
    pub lifted: Option<RunResult>,
    /// Order index of the central component in the lifted run.
    pub central_index: Option<usize>,
    pub central_count: usize,
    /// Components of the linear part on the equator, in their order.
    pub at_infinity_components: Vec<MorseComponent>,
    pub homogeneous: Option<RunSummary>,
    pub homogeneous_precedes: Vec<(usize, usize)>,
    pub homogeneous_non_linear_order: bool,
    #[serde(skip)]
    pub homogeneous_timing: RunTiming,
    /// Parallel to `at_infinity_components`.
    pub inclusion_flags: Vec<InclusionFlags>,
    /// Centers of central cells above `delta_eq`, mapped back to the state space.
    pub chain_control_set: Vec<Vec<f64>>,
    /// The same for the central core cells only.
    pub chain_control_core: Vec<Vec<f64>>,
    pub dim_central_is_one: Option<bool>,
    pub delta_eq: f64,
    pub zero_tolerance: f64,
    pub warnings: Vec<String>,
}

impl DecompositionReport {
    pub fn central(&self) -> Option<&MorseComponent> {
        Some(&self.lifted.as_ref()?.components[self.central_index?])
    }

    /// Components of the linear part not contained in the central bundle.
    pub fn bundles_at_infinity(&self) -> Vec<&MorseComponent> {
        self.at_infinity_components
            .iter()
            .zip(&self.inclusion_flags)
            .filter(|(_, f)| !f.geometric)
            .map(|(c, _)| c)
            .collect()
    }

    /// Bounding box `(lower, upper)` of the chain control set samples.
    pub fn chain_control_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        bounding_box(&self.chain_control_set)
    }

    pub fn chain_control_core_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        bounding_box(&self.chain_control_core)
    }
}

/// Componentwise `(min, max)` of a point cloud.
pub fn bounding_box(points: &[Vec<f64>]) -> Option<(Vec<f64>, Vec<f64>)> {
    let first = points.first()?;
    let mut lo = first.clone();
    let mut hi = first.clone();
    for p in points {
        for (i, &x) in p.iter().enumerate() {
            lo[i] = lo[i].min(x);
            hi[i] = hi[i].max(x);
        }
    }
    Some((lo, hi))
}

/// Where chain graphs are cached between runs.
#[derive(Debug, Clone, Copy)]
pub struct GraphCache<'a> {
    pub dir: &'a Path,
}

fn obtain_graph(
    sys: &dyn BilinearSystem<f64>,
    grid: Arc<CellGrid>,
    params: &GraphParams,
    cache: Option<GraphCache<'_>>,
    warnings: &mut Vec<String>,
) -> Result<(ChainGraph, String, bool)> {
    let hash = graph_hash(params, sys);
    let path = cache.map(|c| c.dir.join(format!("{hash}.graph")));
    if let Some(path) = &path {
        if path.exists() {
            match load_graph(path, &hash) {
                Ok(g) => return Ok((g, hash, true)),
                Err(e) => warnings.push(format!(
                    "ignoring unreadable cache file {}: {e}",
                    path.display()
                )),
            }
        }
    }
    let g = build_graph(sys, grid, params)?;
    if let Some(path) = &path {
        std::fs::create_dir_all(cache.expect("cache").dir)
            .map_err(|e| Error::Cache(e.to_string()))?;
        save_graph(path, &g, &hash)?;
    }
    Ok((g, hash, false))
}

/// Recurrent components that contain a recurrent component of the jump-free
/// subgraph, and the number of recurrent components without one. The
/// latter only recur through jumps across slowly drifting cells and vanish
/// under refinement.
pub fn persistent_components(g: &ChainGraph) -> (Vec<Vec<CellId>>, usize) {
    let (kept, _, dropped) = split_persistent(g);
    (kept, dropped)
}

/// Kept components, their core cells, and the number dropped.
fn split_persistent(g: &ChainGraph) -> (Vec<Vec<CellId>>, Vec<Vec<CellId>>, usize) {
    let comps = strongly_connected_components(g);
    let mut core = vec![false; g.node_count()];
    for c in strongly_connected_components(&g.restricted(0.0)) {
        for cell in c {
            core[cell.index()] = true;
        }
    }
    let total = comps.len();
    let kept: Vec<Vec<CellId>> = comps
        .into_iter()
        .filter(|c| c.iter().any(|x| core[x.index()]))
        .collect();
    let cores = kept
        .iter()
        .map(|c| c.iter().copied().filter(|x| core[x.index()]).collect())
        .collect();
    let dropped = total - kept.len();
    (kept, cores, dropped)
}

/// Builds the chain graph of `sys` and extracts its ordered components,
/// without classification.
pub fn analyze_bilinear(
    sys: &dyn BilinearSystem<f64>,
    settings: &GridSettings,
    cache: Option<GraphCache<'_>>,
    warnings: &mut Vec<String>,
) -> Result<RunResult> {
    let grid = Arc::new(CellGrid::new(sys.ambient_dim(), settings.resolution)?);
    analyze_on_grid(sys, grid, settings, cache, warnings)
}

fn analyze_on_grid(
    sys: &dyn BilinearSystem<f64>,
    grid: Arc<CellGrid>,
    settings: &GridSettings,
    cache: Option<GraphCache<'_>>,
    warnings: &mut Vec<String>,
) -> Result<RunResult> {
    let start = Instant::now();
    let params = settings.graph_params(&grid, sys);
    let (g, hash, cache_hit) = obtain_graph(sys, grid.clone(), &params, cache, warnings)?;
    let build_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();

    let (comps, cores, discarded_components) = split_persistent(&g);
    let spectra = comps
        .iter()
        .map(|c| spectrum_interval(&g, c))
        .collect::<Result<Vec<_>>>()?;
    let order = component_order_by(&g, &comps, |i| {
        (spectra[i].min, spectra[i].max, comps[i][0])
    });
    let mut position = vec![0; comps.len()];
    for (pos, &i) in order.linear.iter().enumerate() {
        position[i] = pos;
    }
    let n = grid.ambient_dim();
    let components = order
        .linear
        .iter()
        .enumerate()
        .map(|(pos, &i)| MorseComponent {
            cells: comps[i].clone(),
            index_in_order: pos,
            spectrum: spectra[i],
            classification: Classification::Unclassified,
            equator_contact: Vec::new(),
            max_height: comps[i]
                .iter()
                .map(|&c| grid.center(c)[n - 1])
                .fold(0.0, f64::max),
            core_cells: cores[i].clone(),
        })
        .collect();
    let mut precedes: Vec<(usize, usize)> = order
        .precedes
        .iter()
        .map(|&(i, j)| (position[i], position[j]))
        .collect();
    precedes.sort_unstable();
    Ok(RunResult {
        summary: RunSummary {
            ambient_dim: n,
            resolution: grid.resolution(),
            cell_count: grid.cell_count(),
            cell_diameter: grid.diameter(),
            grid_constant: grid.grid_constant(),
            eps: params.eps,
            time: params.time,
            control_samples: params.control_samples.len(),
            edge_count: g.edge_count(),
            discarded_components,
            graph_hash: hash,
        },
        components,
        precedes,
        non_linear_order: order.non_linear_order,
        timing: RunTiming {
            build_seconds,
            analysis_seconds: start.elapsed().as_secs_f64(),
            cache_hit,
        },
    })
}

/// Tolerance for zero growth and spectrum containment at cell scale.
pub fn spectrum_tolerance(cell_diameter: f64, time: f64) -> f64 {
    2.0 * (QUADRATURE_ERROR + cell_diameter / time)
}

pub fn analyze_affine(
    sys: &AffineControlSystem<f64>,
    opts: &AnalysisOptions,
) -> Result<DecompositionReport> {
    analyze_affine_cached(sys, opts, None)
}

/// Lifted run on `P^d`, homogeneous run on `P^(d-1)`, and their comparison.
pub fn analyze_affine_cached(
    sys: &AffineControlSystem<f64>,
    opts: &AnalysisOptions,
    cache: Option<GraphCache<'_>>,
) -> Result<DecompositionReport> {
    let d = sys.state_dim();
    if d > 3 {
        return Err(Error::Unsupported(format!(
            "state dimension {d} (at most 3)"
        )));
    }
    let mut warnings = Vec::new();
    let lifted_grid = Arc::new(CellGrid::new(d + 1, opts.grid.resolution)?);
    let lifted_grid_diameter = lifted_grid.diameter();
    let delta_eq = opts
        .delta_eq
        .resolve(DEFAULT_DELTA_EQ_FACTOR * lifted_grid_diameter);
    let zero_tol = spectrum_tolerance(lifted_grid_diameter, opts.grid.time);
    let equator_grid = Arc::new(CellGrid::new(d, opts.grid.resolution)?);

    let mut lifted = if opts.run_lifted {
        Some(analyze_on_grid(
            &sys.lift(),
            Arc::clone(&lifted_grid),
            &opts.grid,
            cache,
            &mut warnings,
        )?)
    } else {
        None
    };
    let mut central_index = None;
    let mut central_count = 0;
    if let Some(run) = lifted.as_mut() {
        let grid = &lifted_grid;
        for comp in run.components.iter_mut() {
            let mut contact: Vec<CellId> = comp
                .cells
                .iter()
                .map(|&c| grid.center(c))
                .filter(|v| v[d].abs() <= delta_eq)
                .map(|v| equator_grid.locate(&v[..d]))
                .collect();
            contact.sort_unstable();
            contact.dedup();
            comp.classification = classify_component(
                comp.max_height,
                !contact.is_empty(),
                &comp.spectrum,
                delta_eq,
                zero_tol,
            );
            comp.equator_contact = contact;
        }
        let centrals: Vec<usize> = run
            .components
            .iter()
            .filter(|c| c.classification == Classification::Central)
            .map(|c| c.index_in_order)
            .collect();
        central_count = centrals.len();
        match centrals.len() {
            0 => warnings.push("no central component found".into()),
            1 => {}
            k => warnings.push(format!(
                "{k} central components found; reporting the largest"
            )),
        }
        central_index = centrals
            .iter()
            .copied()
            .max_by_key(|&i| (run.components[i].cells.len(), usize::MAX - i));
        if run.non_linear_order {
            warnings.push("lifted components are not linearly ordered by the chain graph".into());
        }
        if run
            .components
            .iter()
            .any(|c| c.classification == Classification::Unclassified)
        {
            warnings.push("some lifted components could not be classified".into());
        }
    }

    let homogeneous = if opts.run_homogeneous {
        Some(analyze_on_grid(
            &sys.linear_part(),
            Arc::clone(&equator_grid),
            &opts.grid,
            cache,
            &mut warnings,
        )?)
    } else {
        None
    };

    let mut inclusion_flags = Vec::new();
    let mut chain_control_set = Vec::new();
    let mut chain_control_core = Vec::new();
    let mut dim_central_is_one = None;
    if let (Some(run), Some(ci)) = (&lifted, central_index) {
        let central = &run.components[ci];
        let grid = &lifted_grid;
        dim_central_is_one = Some(central.equator_contact.is_empty());
        let pullback = |cells: &[CellId]| -> Vec<Vec<f64>> {
            cells
                .iter()
                .map(|&c| grid.center(c))
                .filter(|v| v[d] > delta_eq)
                .map(|v| v[..d].iter().map(|x| x / v[d]).collect())
                .collect()
        };
        chain_control_set = pullback(&central.cells);
        chain_control_core = pullback(&central.core_cells);
        if let Some(h) = &homogeneous {
            let reach = run.summary.eps + 0.5 * (grid.diameter() + equator_grid.diameter());
            let central_centers: Vec<&[f64]> =
                central.cells.iter().map(|&c| grid.center(c)).collect();
            for comp in &h.components {
                let geometric = comp.cells.iter().any(|&c| {
                    let mut e = equator_grid.center(c).to_vec();
                    e.push(0.0);
                    central_centers
                        .iter()
                        .any(|v| chord_distance(v, &e) <= reach)
                });
                inclusion_flags.push(InclusionFlags {
                    geometric,
                    spectral: comp.spectrum.zero_in_interior(zero_tol),
                });
            }
        }
    } else if let Some(h) = &homogeneous {
        for comp in &h.components {
            inclusion_flags.push(InclusionFlags {
                geometric: false,
                spectral: comp.spectrum.zero_in_interior(zero_tol),
            });
        }
    }
    if let Some(h) = &homogeneous {
        if h.non_linear_order {
            warnings.push(
                "components of the linear part are not linearly ordered by the chain graph".into(),
            );
        }
    }

    Ok(DecompositionReport {
        central_index,
        central_count,
        homogeneous: homogeneous.as_ref().map(|h| h.summary.clone()),
        homogeneous_precedes: homogeneous
            .as_ref()
            .map(|h| h.precedes.clone())
            .unwrap_or_default(),
        homogeneous_non_linear_order: homogeneous.as_ref().is_some_and(|h| h.non_linear_order),
        homogeneous_timing: homogeneous.as_ref().map(|h| h.timing).unwrap_or_default(),
        at_infinity_components: homogeneous.map(|h| h.components).unwrap_or_default(),
        lifted,
        inclusion_flags,
        chain_control_set,
        chain_control_core,
        dim_central_is_one,
        delta_eq,
        zero_tolerance: zero_tol,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n_cells_grid: usize, edges: Vec<(u32, u32, f64, f64)>) -> ChainGraph {
        jump_graph(
            n_cells_grid,
            edges
                .into_iter()
                .map(|(a, b, lo, hi)| (a, b, lo, hi, 0.0))
                .collect(),
        )
    }

    fn jump_graph(n_cells_grid: usize, edges: Vec<(u32, u32, f64, f64, f32)>) -> ChainGraph {
        let grid = Arc::new(CellGrid::new(2, n_cells_grid).unwrap());
        let params = GraphParams {
            time: 1.0,
            eps: 0.0,
            resolution: n_cells_grid,
            samples_per_cell: 1,
            control_samples: vec![vec![]],
            switches_per_hop: 0,
            rng_seed: 0,
        };
        ChainGraph::from_edges(grid, params, edges).unwrap()
    }

    #[test]
    fn jump_only_recurrence_is_discarded() {
        // 0 <-> 1 recur without jumps; 2 only through a jump; 3 mixes both
        let g = jump_graph(
            4,
            vec![
                (0, 1, 0.0, 0.0, 0.0),
                (1, 0, 0.0, 0.0, 0.0),
                (1, 2, 0.0, 0.0, 0.0),
                (2, 2, 0.1, 0.1, 0.05),
                (2, 3, 0.0, 0.0, 0.0),
                (3, 4, 0.0, 0.0, 0.01),
                (4, 3, 0.0, 0.0, 0.0),
                (4, 4, 0.0, 0.0, 0.0),
            ],
        );
        let (kept, dropped) = persistent_components(&g);
        assert_eq!(
            kept,
            vec![vec![CellId(0), CellId(1)], vec![CellId(3), CellId(4)]]
        );
        assert_eq!(dropped, 1);
    }

    #[test]
    fn single_self_loop_spectrum() {
        let g = graph(4, vec![(0, 0, 0.0, 0.0)]);
        let comps = strongly_connected_components(&g);
        assert_eq!(comps, vec![vec![CellId(0)]]);
        let s = spectrum_interval(&g, &comps[0]).unwrap();
        assert_eq!((s.min, s.max), (0.0, 0.0));
        assert_eq!(component_order(&g, &comps).linear, vec![0]);
    }

    #[test]
    fn two_cycle_spectrum() {
        let g = graph(4, vec![(0, 1, 0.5, 1.0), (1, 0, -1.0, 3.0)]);
        let s = spectrum_interval(&g, &[CellId(0), CellId(1)]).unwrap();
        assert_eq!((s.min, s.max), (-0.25, 2.0));
    }

    #[test]
    fn no_cycle_is_an_error() {
        let g = graph(4, vec![(0, 1, 0.0, 0.0)]);
        assert_eq!(
            spectrum_interval(&g, &[CellId(0), CellId(1)]),
            Err(Error::NoCycle)
        );
    }

    #[test]
    fn chain_of_components_is_ordered() {
        // C <- B <- A by cell number, so the order must not follow ids
        let g = graph(
            4,
            vec![
                (2, 2, 0.0, 0.0),
                (2, 1, 0.0, 0.0),
                (1, 1, 0.0, 0.0),
                (1, 0, 0.0, 0.0),
                (0, 0, 0.0, 0.0),
            ],
        );
        let comps = strongly_connected_components(&g);
        let order = component_order(&g, &comps);
        assert_eq!(order.linear, vec![2, 1, 0]);
        assert!(!order.non_linear_order);
        assert!(order.precedes.contains(&(2, 0)));
    }

    #[test]
    fn transient_cells_carry_reachability() {
        let g = graph(
            4,
            vec![
                (0, 0, 0.0, 0.0),
                (0, 3, 0.0, 0.0),
                (3, 2, 0.0, 0.0),
                (2, 2, 0.0, 0.0),
                (1, 1, 0.0, 0.0),
            ],
        );
        let comps = strongly_connected_components(&g);
        assert_eq!(comps.len(), 3);
        let order = component_order(&g, &comps);
        assert_eq!(order.precedes, vec![(0, 2)]);
        assert!(order.non_linear_order);
    }

    #[test]
    fn classification_rules() {
        let zero = SpectrumInterval {
            min: -0.1,
            max: 0.1,
        };
        let pos = SpectrumInterval { min: 0.9, max: 1.1 };
        assert_eq!(
            classify_component(0.05, true, &zero, 0.1, 0.05),
            Classification::AtInfinity
        );
        assert_eq!(
            classify_component(0.5, false, &zero, 0.1, 0.05),
            Classification::Central
        );
        assert_eq!(
            classify_component(0.5, true, &pos, 0.1, 0.05),
            Classification::AtInfinity
        );
        assert_eq!(
            classify_component(0.5, false, &pos, 0.1, 0.05),
            Classification::Unclassified
        );
    }

    #[test]
    fn auto_settings_round_trip() {
        let s: GridSettings = serde_json::from_str(r#"{"resolution": 8, "eps": "auto"}"#).unwrap();
        assert_eq!(s, GridSettings::new(8));
        let s: GridSettings =
            serde_json::from_str(r#"{"resolution": 8, "eps": 0.25, "T": 2}"#).unwrap();
        assert_eq!((s.eps, s.time), (AutoOr::Value(0.25), 2.0));
        assert!(
            serde_json::from_str::<GridSettings>(r#"{"resolution": 8, "eps": "big"}"#).is_err()
        );
        assert!(
            serde_json::from_str::<GridSettings>(r#"{"resolution": 8, "epsilon": 1}"#).is_err()
        );
        let back: GridSettings = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
