//! Equiangular cube-map decomposition of real projective space.
//!
//! A unit vector is assigned to the face of its largest coordinate (in
//! absolute value, lowest axis on ties). Antipodal vectors share a face, so
//! the `2n` faces of the cube fold to `n`. Within a face the remaining
//! coordinates `v_j / v_f` are mapped through `atan` to `[-1, 1]` and cut
//! into `N` equal slots, which keeps cells close to uniform in angle.

use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projective::{canonicalize_in_place, ProjectivePoint};

/// Largest distance between two points of projective space.
pub const PROJECTIVE_DIAMETER: f64 = std::f64::consts::SQRT_2;

pub const MIN_AMBIENT_DIM: usize = 1;
pub const MAX_AMBIENT_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(pub u32);

impl CellId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
pub struct CellGrid {
    dim: usize,
    resolution: usize,
    per_face: usize,
    centers: Vec<f64>,
    diameter: f64,
    neighbor_start: Vec<u32>,
    neighbors: Vec<u32>,
}

/// Reusable buffers for [`CellGrid::cells_within_into`].
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    stamp: Vec<u32>,
    generation: u32,
    queue: Vec<u32>,
}

impl Scratch {
    fn reset(&mut self, cells: usize) {
        if self.stamp.len() != cells {
            self.stamp = vec![0; cells];
            self.generation = 0;
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        self.queue.clear();
    }
}

fn slot(t: f64, n: usize) -> usize {
    let k = (((t + 1.0) * 0.5) * n as f64).ceil() as isize - 1;
    k.clamp(0, n as isize - 1) as usize
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Chord distance between two canonical unit vectors.
fn unit_distance(a: &[f64], b: &[f64]) -> f64 {
    (2.0 - 2.0 * dot(a, b).abs()).max(0.0).sqrt()
}

impl CellGrid {
    /// Builds the grid of `P^{dim-1}` with `resolution` cells per face axis.
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        if !(MIN_AMBIENT_DIM..=MAX_AMBIENT_DIM).contains(&dim) {
            return Err(Error::Unsupported(format!(
                "cell grid in ambient dimension {dim}"
            )));
        }
        if resolution == 0 {
            return Err(Error::InvalidParams(
                "grid resolution must be positive".into(),
            ));
        }
        let per_face = (resolution as u64).pow(dim as u32 - 1);
        let count = per_face * dim as u64;
        if count > u32::MAX as u64 / 2 {
            return Err(Error::InvalidParams(format!("{count} cells is too many")));
        }
        let mut grid = Self {
            dim,
            resolution,
            per_face: per_face as usize,
            centers: Vec::with_capacity(count as usize * dim),
            diameter: 0.0,
            neighbor_start: Vec::new(),
            neighbors: Vec::new(),
        };
        let half = vec![0.5; dim - 1];
        let mut buf = vec![0.0; dim];
        for id in 0..count as u32 {
            grid.point_in_cell(CellId(id), &half, &mut buf);
            grid.centers.extend_from_slice(&buf);
        }
        grid.diameter = grid.face_diameter();
        grid.build_neighbors();
        Ok(grid)
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cell_count(&self) -> usize {
        self.per_face * self.dim
    }

    /// Largest projective diameter of a cell.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn half_diameter(&self) -> f64 {
        0.5 * self.diameter
    }

    /// `c` in the bound `diameter <= c / N`.
    pub fn grid_constant(&self) -> f64 {
        self.diameter * self.resolution as f64
    }

    pub fn cells(&self) -> impl Iterator<Item = CellId> {
        (0..self.cell_count() as u32).map(CellId)
    }

    pub fn face(&self, cell: CellId) -> usize {
        cell.index() / self.per_face
    }

    /// Slot indices along the free axes of the face, in increasing axis order.
    pub fn multi_index(&self, cell: CellId) -> Vec<usize> {
        let mut rest = cell.index() % self.per_face;
        let mut idx = vec![0; self.dim - 1];
        for k in (0..self.dim - 1).rev() {
            idx[k] = rest % self.resolution;
            rest /= self.resolution;
        }
        idx
    }

    pub fn cell_from_parts(&self, face: usize, index: &[usize]) -> Result<CellId> {
        if face >= self.dim || index.len() != self.dim - 1 {
            return Err(Error::Dimension(format!(
                "face {face} with {}-index in ambient dimension {}",
                index.len(),
                self.dim
            )));
        }
        let mut id = 0usize;
        for &i in index {
            if i >= self.resolution {
                return Err(Error::InvalidParams(format!(
                    "slot {i} outside resolution {}",
                    self.resolution
                )));
            }
            id = id * self.resolution + i;
        }
        Ok(CellId((face * self.per_face + id) as u32))
    }

    /// Canonical unit vector at the cell center.
    pub fn center(&self, cell: CellId) -> &[f64] {
        let i = cell.index() * self.dim;
        &self.centers[i..i + self.dim]
    }

    pub fn cell_center(&self, cell: CellId) -> ProjectivePoint<f64> {
        ProjectivePoint::from_slice(self.center(cell)).expect("unit center")
    }

    /// Cells sharing a boundary point with `cell`.
    pub fn neighbors(&self, cell: CellId) -> &[u32] {
        let i = cell.index();
        self.neighbor_start_slice(i)
    }

    fn neighbor_start_slice(&self, i: usize) -> &[u32] {
        &self.neighbors[self.neighbor_start[i] as usize..self.neighbor_start[i + 1] as usize]
    }

    /// Locates a nonzero vector of the ambient space; its sign and norm are irrelevant.
    pub fn locate(&self, v: &[f64]) -> CellId {
        debug_assert_eq!(v.len(), self.dim);
        let mut face = 0;
        let mut best = v[0].abs();
        for (i, x) in v.iter().enumerate().skip(1) {
            if x.abs() > best {
                best = x.abs();
                face = i;
            }
        }
        let pivot = v[face];
        let mut id = 0usize;
        for (j, &x) in v.iter().enumerate() {
            if j == face {
                continue;
            }
            let t = (x / pivot).atan() / FRAC_PI_4;
            id = id * self.resolution + slot(t, self.resolution);
        }
        CellId((face * self.per_face + id) as u32)
    }

    pub fn locate_cell(&self, p: &ProjectivePoint<f64>) -> Result<CellId> {
        self.check_dim(p.ambient_dim())?;
        Ok(self.locate(p.rep().as_slice()))
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim {
            return Err(Error::Dimension(format!(
                "point in R^{n} on grid of R^{}",
                self.dim
            )));
        }
        Ok(())
    }

    /// Writes the canonical unit vector with fractional cell coordinates `frac`
    /// (each in `[0, 1]`, `0.5` is the center).
    pub fn point_in_cell(&self, cell: CellId, frac: &[f64], out: &mut [f64]) {
        let face = self.face(cell);
        let mut rest = cell.index() % self.per_face;
        let width = 2.0 / self.resolution as f64;
        let mut free = self.dim - 1;
        for j in (0..self.dim).rev() {
            if j == face {
                out[j] = 1.0;
                continue;
            }
            free -= 1;
            let i = rest % self.resolution;
            rest /= self.resolution;
            let t = -1.0 + width * (i as f64 + frac[free]);
            out[j] = (t * FRAC_PI_4).tan();
        }
        let norm = dot(out, out).sqrt();
        out.iter_mut().for_each(|x| *x /= norm);
        canonicalize_in_place(out);
    }

    fn face_diameter(&self) -> f64 {
        let free = self.dim - 1;
        let corners = 1usize << free;
        let mut pts = vec![0.0; corners * self.dim];
        let mut frac = vec![0.0; free];
        let mut diameter: f64 = 0.0;
        for id in 0..self.per_face as u32 {
            for c in 0..corners {
                for (k, f) in frac.iter_mut().enumerate() {
                    *f = ((c >> k) & 1) as f64;
                }
                self.point_in_cell(
                    CellId(id),
                    &frac,
                    &mut pts[c * self.dim..(c + 1) * self.dim],
                );
            }
            for a in 0..corners {
                for b in a + 1..corners {
                    let d = unit_distance(
                        &pts[a * self.dim..(a + 1) * self.dim],
                        &pts[b * self.dim..(b + 1) * self.dim],
                    );
                    diameter = diameter.max(d);
                }
            }
        }
        diameter
    }

    /// Neighbors are found by locating probes just beyond the cell boundary,
    /// which also catches cells across face seams.
    fn build_neighbors(&mut self) {
        const OFFSETS: [f64; 5] = [-0.05, 0.25, 0.5, 0.75, 1.05];
        let free = self.dim - 1;
        let probes = OFFSETS.len().pow(free as u32);
        let mut frac = vec![0.0; free];
        let mut buf = vec![0.0; self.dim];
        let mut found = Vec::new();
        self.neighbor_start = Vec::with_capacity(self.cell_count() + 1);
        self.neighbor_start.push(0);
        for id in 0..self.cell_count() as u32 {
            found.clear();
            for p in 0..probes {
                let mut rest = p;
                let mut outside = false;
                for f in frac.iter_mut() {
                    let k = rest % OFFSETS.len();
                    rest /= OFFSETS.len();
                    *f = OFFSETS[k];
                    outside |= k == 0 || k == OFFSETS.len() - 1;
                }
                if !outside {
                    continue;
                }
                self.point_in_cell(CellId(id), &frac, &mut buf);
                let other = self.locate(&buf).0;
                if other != id {
                    found.push(other);
                }
            }
            found.sort_unstable();
            found.dedup();
            self.neighbors.extend_from_slice(&found);
            self.neighbor_start.push(self.neighbors.len() as u32);
        }
    }

    /// Cells whose center lies within `radius + diameter / 2` of `p`, plus the
    /// cell containing `p`. Sorted ascending.
    pub fn cells_within(&self, p: &ProjectivePoint<f64>, radius: f64) -> Result<Vec<CellId>> {
        self.check_dim(p.ambient_dim())?;
        if !(radius >= 0.0) {
            return Err(Error::InvalidParams(format!("radius {radius}")));
        }
        let mut out = Vec::new();
        self.cells_within_into(
            p.rep().as_slice(),
            radius,
            &mut Scratch::default(),
            &mut out,
        );
        Ok(out.into_iter().map(CellId).collect())
    }

    /// Raw form of [`cells_within`](Self::cells_within) for a canonical unit
    /// vector; appends sorted ids to `out` after clearing it.
    pub fn cells_within_into(
        &self,
        v: &[f64],
        radius: f64,
        scratch: &mut Scratch,
        out: &mut Vec<u32>,
    ) {
        out.clear();
        let accept = radius + self.half_diameter();
        if accept >= PROJECTIVE_DIAMETER {
            out.extend(0..self.cell_count() as u32);
            return;
        }
        let expand = accept;
        scratch.reset(self.cell_count());
        let start = self.locate(v).0;
        let generation = scratch.generation;
        scratch.stamp[start as usize] = generation;
        scratch.queue.push(start);
        out.push(start);
        let mut head = 0;
        while head < scratch.queue.len() {
            let cell = scratch.queue[head];
            head += 1;
            for &n in self.neighbor_start_slice(cell as usize) {
                if scratch.stamp[n as usize] == generation {
                    continue;
                }
                scratch.stamp[n as usize] = generation;
                let d = unit_distance(v, self.center(CellId(n)));
                if d <= accept {
                    out.push(n);
                }
                if d <= expand {
                    scratch.queue.push(n);
                }
            }
        }
        out.sort_unstable();
    }

    /// Writes `k` points of `cell` into `out` (flattened): the center first,
    /// then a seeded low-discrepancy sequence strictly inside the cell.
    pub fn sample_points_into(&self, cell: CellId, k: usize, seed: u64, out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(self.center(cell));
        if k <= 1 {
            return;
        }
        let free = self.dim - 1;
        let alpha = kronecker_steps(free);
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (cell.0 as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let shift: Vec<f64> = (0..free).map(|_| rng.gen::<f64>()).collect();
        let mut frac = vec![0.0; free];
        let mut buf = vec![0.0; self.dim];
        for i in 1..k {
            for j in 0..free {
                let s = (shift[j] + i as f64 * alpha[j]).fract();
                frac[j] = 0.02 + 0.96 * s;
            }
            self.point_in_cell(cell, &frac, &mut buf);
            out.extend_from_slice(&buf);
        }
    }
}

/// Additive recurrence steps from the generalized golden ratio, the root of
/// `x^(dim+1) = x + 1`.
fn kronecker_steps(dim: usize) -> Vec<f64> {
    let mut phi: f64 = 2.0;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    (1..=dim).map(|j| phi.powi(-(j as i32)).fract()).collect()
}

/// `k` points of `cell`: its center, then `k - 1` deterministic points inside it.
pub fn sample_cell_points(
    grid: &CellGrid,
    cell: CellId,
    k: usize,
    seed: u64,
) -> Result<Vec<ProjectivePoint<f64>>> {
    if k == 0 {
        return Err(Error::InvalidParams("at least one sample per cell".into()));
    }
    if cell.index() >= grid.cell_count() {
        return Err(Error::InvalidParams(format!(
            "cell {} outside grid",
            cell.0
        )));
    }
    let mut flat = Vec::new();
    grid.sample_points_into(cell, k, seed, &mut flat);
    flat.chunks(grid.ambient_dim())
        .map(ProjectivePoint::from_slice)
        .collect()
}
