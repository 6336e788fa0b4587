//! Controlled `(eps, T)`-chain transition graphs over a cell grid.
//!
//! Every sampled point of a cell is pushed through the propagator of each
//! control signal for one hop of length `T`. The endpoint direction is
//! inflated by `eps` and every cell met becomes a target. Edge weights are
//! growth rates `ln|z'| / T` of unit vectors `z`, merged to (min, max).
//!
//! Besides the cell samples, the invariant lines of every constant control
//! are pushed through the flow, so fixed directions are never missed
//! between samples. Each edge also records its jump: how far beyond half a
//! cell diameter the nearest image point lies from the target center.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{CellGrid, CellId, Scratch};
use crate::linalg::{expm, invariant_directions, Matrix};
use crate::projective::{canonicalize_in_place, chord_distance};
use crate::system::{BilinearSystem, ControlBox};

/// Multiple of the cell diameter used when `eps` is left to the engine.
pub const DEFAULT_EPS_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GraphParams {
    /// Flow time per hop.
    pub time: f64,
    /// Jump radius in the projective metric.
    pub eps: f64,
    pub resolution: usize,
    pub samples_per_cell: usize,
    pub control_samples: Vec<Vec<f64>>,
    pub switches_per_hop: usize,
    pub rng_seed: u64,
}

impl GraphParams {
    /// Constant controls from the tensor grid of `omega`, `eps` from the grid diameter.
    pub fn with_defaults(
        omega: &ControlBox<f64>,
        grid: &CellGrid,
        time: f64,
        per_axis: usize,
    ) -> Self {
        Self {
            time,
            eps: DEFAULT_EPS_FACTOR * grid.diameter(),
            resolution: grid.resolution(),
            samples_per_cell: 1,
            control_samples: omega.sample_grid(per_axis),
            switches_per_hop: 0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self, omega: &ControlBox<f64>) -> Result<()> {
        if !(self.time > 0.0 && self.time.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "hop time {} must be positive",
                self.time
            )));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "eps {} must be non-negative",
                self.eps
            )));
        }
        if self.resolution == 0 || self.samples_per_cell == 0 {
            return Err(Error::InvalidParams(
                "resolution and samples per cell must be positive".into(),
            ));
        }
        if self.control_samples.is_empty() {
            return Err(Error::InvalidParams("no control samples".into()));
        }
        for u in &self.control_samples {
            omega.check(u)?;
        }
        if !self
            .control_samples
            .iter()
            .any(|u| u.iter().all(|&x| x == 0.0))
        {
            return Err(Error::InvalidParams(
                "control samples must contain 0".into(),
            ));
        }
        Ok(())
    }
}

/// Compressed adjacency: the targets of cell `i` are
/// `targets[offsets[i]..offsets[i + 1]]`, sorted ascending.
#[derive(Debug, Clone)]
pub struct ChainGraph {
    grid: Arc<CellGrid>,
    params: GraphParams,
    offsets: Vec<u64>,
    targets: Vec<u32>,
    w_min: Vec<f64>,
    w_max: Vec<f64>,
    jump: Vec<f32>,
}

impl PartialEq for ChainGraph {
    fn eq(&self, other: &Self) -> bool {
        self.grid.ambient_dim() == other.grid.ambient_dim()
            && self.params == other.params
            && self.offsets == other.offsets
            && self.targets == other.targets
            && self
                .w_min
                .iter()
                .map(|w| w.to_bits())
                .eq(other.w_min.iter().map(|w| w.to_bits()))
            && self
                .w_max
                .iter()
                .map(|w| w.to_bits())
                .eq(other.w_max.iter().map(|w| w.to_bits()))
            && self
                .jump
                .iter()
                .map(|w| w.to_bits())
                .eq(other.jump.iter().map(|w| w.to_bits()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub target: CellId,
    pub w_min: f64,
    pub w_max: f64,
    /// Zero when an image point lies within half a diameter of the target
    /// center or inside the target.
    pub jump: f32,
}

impl ChainGraph {
    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<CellGrid> {
        Arc::clone(&self.grid)
    }

    pub fn params(&self) -> &GraphParams {
        &self.params
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    fn range(&self, cell: usize) -> std::ops::Range<usize> {
        self.offsets[cell] as usize..self.offsets[cell + 1] as usize
    }

    pub fn successors(&self, cell: CellId) -> &[u32] {
        &self.targets[self.range(cell.index())]
    }

    pub fn edges(&self, cell: CellId) -> impl Iterator<Item = Edge> + '_ {
        self.range(cell.index()).map(move |i| Edge {
            target: CellId(self.targets[i]),
            w_min: self.w_min[i],
            w_max: self.w_max[i],
            jump: self.jump[i],
        })
    }

    pub fn edge(&self, from: CellId, to: CellId) -> Option<Edge> {
        let r = self.range(from.index());
        let pos = self.targets[r.clone()].binary_search(&to.0).ok()?;
        let i = r.start + pos;
        Some(Edge {
            target: to,
            w_min: self.w_min[i],
            w_max: self.w_max[i],
            jump: self.jump[i],
        })
    }

    /// The subgraph of edges with `jump <= max_jump`.
    pub fn restricted(&self, max_jump: f32) -> ChainGraph {
        let mut offsets = Vec::with_capacity(self.offsets.len());
        let (mut targets, mut w_min, mut w_max, mut jump) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        offsets.push(0u64);
        for cell in 0..self.node_count() {
            for i in self.range(cell).filter(|&i| self.jump[i] <= max_jump) {
                targets.push(self.targets[i]);
                w_min.push(self.w_min[i]);
                w_max.push(self.w_max[i]);
                jump.push(self.jump[i]);
            }
            offsets.push(targets.len() as u64);
        }
        ChainGraph {
            grid: Arc::clone(&self.grid),
            params: self.params.clone(),
            offsets,
            targets,
            w_min,
            w_max,
            jump,
        }
    }
}

impl ChainGraph {
    /// Assembles a graph from explicit `(from, to, w_min, w_max, jump)`
    /// edges; repeated pairs are merged by min/max.
    pub fn from_edges(
        grid: Arc<CellGrid>,
        params: GraphParams,
        mut edges: Vec<(u32, u32, f64, f64, f32)>,
    ) -> Result<Self> {
        let n = grid.cell_count();
        if let Some(e) = edges
            .iter()
            .find(|e| e.0 as usize >= n || e.1 as usize >= n || !(e.2 <= e.3) || !(e.4 >= 0.0))
        {
            return Err(Error::InvalidParams(format!(
                "edge {e:?} invalid for {n} cells"
            )));
        }
        edges.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut offsets = vec![0u64; n + 1];
        let (mut targets, mut w_min, mut w_max, mut jump): (
            Vec<u32>,
            Vec<f64>,
            Vec<f64>,
            Vec<f32>,
        ) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut last: Option<(u32, u32)> = None;
        for (a, b, lo, hi, j) in edges {
            if last == Some((a, b)) {
                let i = targets.len() - 1;
                w_min[i] = w_min[i].min(lo);
                w_max[i] = w_max[i].max(hi);
                jump[i] = jump[i].min(j);
                continue;
            }
            last = Some((a, b));
            targets.push(b);
            w_min.push(lo);
            w_max.push(hi);
            jump.push(j);
            offsets[a as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Ok(Self {
            grid,
            params,
            offsets,
            targets,
            w_min,
            w_max,
            jump,
        })
    }
}

/// Propagators `exp(T M(u))` for the constant samples, then for the random
/// switching signals.
fn propagators<B: BilinearSystem<f64> + ?Sized>(
    sys: &B,
    params: &GraphParams,
) -> Result<Vec<Matrix<f64>>> {
    let mut out = Vec::new();
    for u in &params.control_samples {
        out.push(expm(&sys.generator(u), params.time)?);
    }
    if params.switches_per_hop > 0 {
        let omega = sys.omega();
        let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
        for _ in 0..params.control_samples.len() {
            let mut cuts: Vec<f64> = (0..params.switches_per_hop)
                .map(|_| rng.gen_range(0.0..params.time))
                .collect();
            cuts.sort_by(f64::total_cmp);
            cuts.push(params.time);
            let mut prop = Matrix::identity(sys.ambient_dim());
            let mut start = 0.0;
            for &end in &cuts {
                let u: Vec<f64> = (0..omega.dim())
                    .map(|i| {
                        let (lo, hi) = (omega.lower()[i], omega.upper()[i]);
                        if lo < hi {
                            rng.gen_range(lo..=hi)
                        } else {
                            lo
                        }
                    })
                    .collect();
                if end > start {
                    prop = &expm(&sys.generator(&u), end - start)? * &prop;
                }
                start = end;
            }
            out.push(prop);
        }
    }
    Ok(out)
}

/// Cells processed per parallel batch; bounds the transient edge buffers.
const BUILD_CHUNK: u32 = 16_384;

/// Builds the chain graph. The result does not depend on the number of threads.
pub fn build_graph<B: BilinearSystem<f64> + ?Sized>(
    sys: &B,
    grid: Arc<CellGrid>,
    params: &GraphParams,
) -> Result<ChainGraph> {
    let n = sys.ambient_dim();
    if grid.ambient_dim() != n {
        return Err(Error::Dimension(format!(
            "grid of R^{} for a system on R^{n}",
            grid.ambient_dim()
        )));
    }
    if grid.resolution() != params.resolution {
        return Err(Error::InvalidParams(format!(
            "grid resolution {} but parameters ask for {}",
            grid.resolution(),
            params.resolution
        )));
    }
    params.validate(sys.omega())?;
    let props = propagators(sys, params)?;
    let anchors = anchor_points(sys, &grid, params)?;
    let inv_t = 1.0 / params.time;
    let half = grid.half_diameter();

    let cell_count = grid.cell_count() as u32;
    let mut offsets = Vec::with_capacity(cell_count as usize + 1);
    let (mut targets, mut w_min, mut w_max, mut jump) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    offsets.push(0u64);
    let mut first = 0u32;
    while first < cell_count {
        let last = cell_count.min(first.saturating_add(BUILD_CHUNK));
        let per_cell: Vec<Vec<(u32, f64, f64, f32)>> = (first..last)
            .into_par_iter()
            .map_init(
                || {
                    (
                        Scratch::default(),
                        Vec::new(),
                        Vec::new(),
                        Vec::new(),
                        vec![0.0; n],
                    )
                },
                |(scratch, points, hits, found, z), cell| {
                    grid.sample_points_into(
                        CellId(cell),
                        params.samples_per_cell,
                        params.rng_seed,
                        points,
                    );
                    let lo = anchors.partition_point(|a| a.0 < cell);
                    for (_, p) in anchors[lo..].iter().take_while(|a| a.0 == cell) {
                        points.extend_from_slice(p);
                    }
                    hits.clear();
                    for p in points.chunks(n) {
                        for prop in &props {
                            for (r, zr) in z.iter_mut().enumerate() {
                                *zr = (0..n).map(|c| prop[(r, c)] * p[c]).sum();
                            }
                            let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
                            let rate = norm.ln() * inv_t;
                            z.iter_mut().for_each(|x| *x /= norm);
                            canonicalize_in_place(z);
                            let home = grid.locate(z).0;
                            grid.cells_within_into(z, params.eps, scratch, found);
                            hits.extend(found.iter().map(|&t| {
                                let jump = if t == home {
                                    0.0
                                } else {
                                    (chord_distance(z, grid.center(CellId(t))) - half).max(0.0)
                                        as f32
                                };
                                (t, rate, jump)
                            }));
                        }
                    }
                    hits.sort_unstable_by(|a: &(u32, f64, f32), b| {
                        a.0.cmp(&b.0).then(a.1.total_cmp(&b.1))
                    });
                    let mut merged: Vec<(u32, f64, f64, f32)> = Vec::new();
                    for &(t, r, j) in hits.iter() {
                        match merged.last_mut() {
                            Some(last) if last.0 == t => {
                                last.2 = r;
                                last.3 = last.3.min(j);
                            }
                            _ => merged.push((t, r, r, j)),
                        }
                    }
                    merged
                },
            )
            .collect();

        let total: usize = per_cell.iter().map(Vec::len).sum();
        targets.reserve_exact(total);
        w_min.reserve_exact(total);
        w_max.reserve_exact(total);
        jump.reserve_exact(total);
        for edges in per_cell {
            for (t, lo, hi, j) in edges {
                targets.push(t);
                w_min.push(lo);
                w_max.push(hi);
                jump.push(j);
            }
            offsets.push(targets.len() as u64);
        }
        first = last;
    }
    Ok(ChainGraph {
        grid,
        params: params.clone(),
        offsets,
        targets,
        w_min,
        w_max,
        jump,
    })
}

/// Invariant directions of the constant controls, keyed by their cell.
fn anchor_points<B: BilinearSystem<f64> + ?Sized>(
    sys: &B,
    grid: &CellGrid,
    params: &GraphParams,
) -> Result<Vec<(u32, Vec<f64>)>> {
    let mut out = Vec::new();
    for u in &params.control_samples {
        for v in invariant_directions(&sys.generator(u), 4 * params.resolution)? {
            let mut p = v.to_vec();
            canonicalize_in_place(&mut p);
            out.push((grid.locate(&p).0, p));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

const HASH_DOMAIN: &[u8] = b"selgrade-chain-graph/2";

/// Hex SHA-256 over the system coefficients and the graph parameters.
/// The order of control samples is part of the key.
pub fn graph_hash<B: BilinearSystem<f64> + ?Sized>(params: &GraphParams, sys: &B) -> String {
    let mut h = Sha256::new();
    h.update(HASH_DOMAIN);
    let fp = sys.fingerprint();
    h.update((fp.len() as u64).to_le_bytes());
    for x in fp {
        h.update(x.to_bits().to_le_bytes());
    }
    h.update(params.time.to_bits().to_le_bytes());
    h.update(params.eps.to_bits().to_le_bytes());
    h.update((params.resolution as u64).to_le_bytes());
    h.update((params.samples_per_cell as u64).to_le_bytes());
    h.update((params.control_samples.len() as u64).to_le_bytes());
    for u in &params.control_samples {
        h.update((u.len() as u64).to_le_bytes());
        for x in u {
            h.update(x.to_bits().to_le_bytes());
        }
    }
    h.update((params.switches_per_hop as u64).to_le_bytes());
    h.update(params.rng_seed.to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

const CACHE_MAGIC: &[u8; 8] = b"SELGRAPH";
const CACHE_VERSION: u32 = 2;

fn io_err(e: std::io::Error) -> Error {
    Error::Cache(e.to_string())
}

fn write_u64s(w: &mut impl Write, xs: impl Iterator<Item = u64>) -> Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(io_err)?;
    Ok(u64::from_le_bytes(b))
}

/// Writes the graph under its hash; layout: magic, version, hash, parameter
/// JSON, ambient dimension, then the CSR arrays in little endian.
pub fn save_graph(path: &Path, graph: &ChainGraph, hash: &str) -> Result<()> {
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(CACHE_MAGIC).map_err(io_err)?;
    w.write_all(&CACHE_VERSION.to_le_bytes()).map_err(io_err)?;
    let params = serde_json::to_vec(&graph.params).map_err(|e| Error::Cache(e.to_string()))?;
    for blob in [hash.as_bytes(), params.as_slice()] {
        write_u64s(&mut w, std::iter::once(blob.len() as u64))?;
        w.write_all(blob).map_err(io_err)?;
    }
    write_u64s(
        &mut w,
        [
            graph.grid.ambient_dim() as u64,
            graph.node_count() as u64,
            graph.edge_count() as u64,
        ]
        .into_iter(),
    )?;
    write_u64s(&mut w, graph.offsets.iter().copied())?;
    for t in &graph.targets {
        w.write_all(&t.to_le_bytes()).map_err(io_err)?;
    }
    write_u64s(&mut w, graph.w_min.iter().map(|x| x.to_bits()))?;
    write_u64s(&mut w, graph.w_max.iter().map(|x| x.to_bits()))?;
    for j in &graph.jump {
        w.write_all(&j.to_bits().to_le_bytes()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads a graph written by [`save_graph`]; fails unless the stored hash equals `hash`.
pub fn load_graph(path: &Path, hash: &str) -> Result<ChainGraph> {
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut r = std::io::BufReader::new(file);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Cache("not a chain graph cache file".into()));
    }
    let mut version = [0u8; 4];
    r.read_exact(&mut version).map_err(io_err)?;
    if u32::from_le_bytes(version) != CACHE_VERSION {
        return Err(Error::Cache(format!(
            "unsupported cache version {}",
            u32::from_le_bytes(version)
        )));
    }
    let mut blobs = Vec::new();
    for _ in 0..2 {
        let len = read_u64(&mut r)? as usize;
        if len > 1 << 24 {
            return Err(Error::Cache("corrupt header".into()));
        }
        let mut blob = vec![0u8; len];
        r.read_exact(&mut blob).map_err(io_err)?;
        blobs.push(blob);
    }
    if blobs[0] != hash.as_bytes() {
        return Err(Error::Cache("hash mismatch".into()));
    }
    let params: GraphParams =
        serde_json::from_slice(&blobs[1]).map_err(|e| Error::Cache(e.to_string()))?;
    let dim = read_u64(&mut r)? as usize;
    let nodes = read_u64(&mut r)? as usize;
    let edges = read_u64(&mut r)? as usize;
    let grid = CellGrid::new(dim, params.resolution)?;
    if grid.cell_count() != nodes {
        return Err(Error::Cache("node count does not match grid".into()));
    }
    let offsets = (0..=nodes)
        .map(|_| read_u64(&mut r))
        .collect::<Result<Vec<_>>>()?;
    let mut targets = Vec::with_capacity(edges);
    let mut b = [0u8; 4];
    for _ in 0..edges {
        r.read_exact(&mut b).map_err(io_err)?;
        targets.push(u32::from_le_bytes(b));
    }
    let w_min = (0..edges)
        .map(|_| read_u64(&mut r).map(f64::from_bits))
        .collect::<Result<Vec<_>>>()?;
    let w_max = (0..edges)
        .map(|_| read_u64(&mut r).map(f64::from_bits))
        .collect::<Result<Vec<_>>>()?;
    let mut jump = Vec::with_capacity(edges);
    for _ in 0..edges {
        r.read_exact(&mut b).map_err(io_err)?;
        jump.push(f32::from_bits(u32::from_le_bytes(b)));
    }
    if offsets.last().copied() != Some(edges as u64) || targets.iter().any(|&t| t as usize >= nodes)
    {
        return Err(Error::Cache("corrupt adjacency".into()));
    }
    Ok(ChainGraph {
        grid: Arc::new(grid),
        params,
        offsets,
        targets,
        w_min,
        w_max,
        jump,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Matrix, Vector};
    use crate::system::{AffineControlSystem, HomogeneousSystem};

    fn params(grid: &CellGrid, eps: f64, controls: Vec<Vec<f64>>) -> GraphParams {
        GraphParams {
            time: 1.0,
            eps,
            resolution: grid.resolution(),
            samples_per_cell: 1,
            control_samples: controls,
            switches_per_hop: 0,
            rng_seed: 0,
        }
    }

    #[test]
    fn zero_system_self_loops() {
        let sys = HomogeneousSystem::new(vec![Matrix::zeros(3, 3)], ControlBox::empty()).unwrap();
        let grid = Arc::new(CellGrid::new(3, 6).unwrap());
        let g = build_graph(&sys, grid.clone(), &params(&grid, 0.0, vec![vec![]])).unwrap();
        for c in grid.cells() {
            let e = g.edge(c, c).expect("self-loop");
            assert!(e.w_min.abs() < 1e-14 && e.w_max.abs() < 1e-14);
        }
    }

    #[test]
    fn expanding_line_on_circle() {
        // x' = x lifted: M = diag(1, 0)
        let sys = AffineControlSystem::autonomous(Matrix::from_diagonal(&[1.0]), Vector::zeros(1))
            .unwrap()
            .lift();
        // odd resolution centers cells on both fixed directions
        let grid = Arc::new(CellGrid::new(2, 15).unwrap());
        let g = build_graph(&sys, grid.clone(), &params(&grid, 0.0, vec![vec![]])).unwrap();
        let pole = grid.locate(&[0.0, 1.0]);
        let axis = grid.locate(&[1.0, 0.0]);
        let e = g.edge(pole, pole).unwrap();
        assert!(e.w_max.abs() < 1e-2, "{e:?}");
        let e = g.edge(axis, axis).unwrap();
        assert!((e.w_min - 1.0).abs() < 1e-2, "{e:?}");
    }

    #[test]
    fn every_node_has_successor() {
        let sys = HomogeneousSystem::new(
            vec![
                Matrix::from_rows(&[[0.0, 1.0, 0.0], [-1.0, 0.0, 0.5], [0.2, 0.0, -1.0]]).unwrap(),
            ],
            ControlBox::empty(),
        )
        .unwrap();
        let grid = Arc::new(CellGrid::new(3, 8).unwrap());
        let g = build_graph(&sys, grid.clone(), &params(&grid, 0.0, vec![vec![]])).unwrap();
        assert!(grid.cells().all(|c| !g.successors(c).is_empty()));
    }

    #[test]
    fn rejects_bad_parameters() {
        let omega = ControlBox::symmetric(&[1.0]).unwrap();
        let sys =
            HomogeneousSystem::new(vec![Matrix::identity(2), Matrix::identity(2)], omega).unwrap();
        let grid = Arc::new(CellGrid::new(2, 8).unwrap());
        let ok = params(&grid, 0.1, vec![vec![0.0], vec![1.0]]);
        assert!(build_graph(&sys, grid.clone(), &ok).is_ok());
        let no_zero = GraphParams {
            control_samples: vec![vec![1.0]],
            ..ok.clone()
        };
        assert!(build_graph(&sys, grid.clone(), &no_zero).is_err());
        let outside = GraphParams {
            control_samples: vec![vec![0.0], vec![2.0]],
            ..ok.clone()
        };
        assert!(build_graph(&sys, grid.clone(), &outside).is_err());
        let bad_t = GraphParams {
            time: 0.0,
            ..ok.clone()
        };
        assert!(build_graph(&sys, grid.clone(), &bad_t).is_err());
        let wrong_grid = Arc::new(CellGrid::new(3, 8).unwrap());
        assert!(build_graph(&sys, wrong_grid, &ok).is_err());
    }

    #[test]
    fn hash_identity() {
        let omega = ControlBox::symmetric(&[1.0]).unwrap();
        let a = HomogeneousSystem::new(
            vec![Matrix::identity(2), Matrix::identity(2)],
            omega.clone(),
        )
        .unwrap();
        let grid = CellGrid::new(2, 8).unwrap();
        let p = params(&grid, 0.1, vec![vec![0.0], vec![1.0]]);
        assert_eq!(graph_hash(&p, &a), graph_hash(&p.clone(), &a.clone()));
        let mut m = Matrix::identity(2);
        m[(0, 1)] = 1e-3;
        let b = HomogeneousSystem::new(vec![m, Matrix::identity(2)], omega).unwrap();
        assert_ne!(graph_hash(&p, &a), graph_hash(&p, &b));
        let q = params(&grid, 0.1, vec![vec![1.0], vec![0.0]]);
        assert_ne!(graph_hash(&p, &a), graph_hash(&q, &a));
    }

    #[test]
    fn cache_round_trip() {
        let omega = ControlBox::symmetric(&[1.0]).unwrap();
        let sys = HomogeneousSystem::new(
            vec![
                Matrix::from_rows(&[[0.0, 1.0], [0.5, -0.2]]).unwrap(),
                Matrix::identity(2),
            ],
            omega,
        )
        .unwrap();
        let grid = Arc::new(CellGrid::new(2, 32).unwrap());
        let p = GraphParams {
            samples_per_cell: 3,
            switches_per_hop: 2,
            ..params(&grid, 0.05, vec![vec![0.0], vec![1.0]])
        };
        let g = build_graph(&sys, grid, &p).unwrap();
        let hash = graph_hash(&p, &sys);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.bin");
        save_graph(&path, &g, &hash).unwrap();
        assert_eq!(load_graph(&path, &hash).unwrap(), g);
        assert!(matches!(load_graph(&path, "other"), Err(Error::Cache(_))));
        std::fs::write(&path, b"garbage").unwrap();
        assert!(load_graph(&path, &hash).is_err());
    }
}
