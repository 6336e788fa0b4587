//! Extremal cycle means.
//!
//! Karp's characterization with every node as a source: with `D_k(v)` the
//! largest weight of a walk of exactly `k` edges ending in `v`,
//! `max mean = max_v min_k (D_n(v) - D_k(v)) / (n - k)`. The table is never
//! stored; a first sweep yields `D_n`, a second recomputes `D_k` row by row.
//!
//! Howard's policy iteration is used for large components, where the
//! `O(n m)` cost of Karp is prohibitive.

use std::ops::{Add, Div, Neg, Sub};

use num_traits::{FromPrimitive, Zero};

/// Scalar usable for exact or floating cycle means.
pub trait CycleWeight:
    Clone
    + PartialOrd
    + Zero
    + FromPrimitive
    + Add<Output = Self>
    + Sub<Output = Self>
    + Div<Output = Self>
{
}

impl<T> CycleWeight for T where
    T: Clone
        + PartialOrd
        + Zero
        + FromPrimitive
        + Add<Output = T>
        + Sub<Output = T>
        + Div<Output = T>
{
}

fn relax<W: CycleWeight>(
    n: usize,
    edges: &[(usize, usize, W)],
    prev: &[Option<W>],
    next: &mut [Option<W>],
) {
    next.iter_mut().for_each(|x| *x = None);
    for (from, to, w) in edges {
        if let Some(d) = &prev[*from] {
            let cand = d.clone() + w.clone();
            match &next[*to] {
                Some(cur) if *cur >= cand => {}
                _ => next[*to] = Some(cand),
            }
        }
    }
    debug_assert_eq!(next.len(), n);
}

/// Largest mean weight over all cycles of the graph on nodes `0..n`, or
/// `None` if it is acyclic.
pub fn karp_max_mean<W: CycleWeight>(n: usize, edges: &[(usize, usize, W)]) -> Option<W> {
    if n == 0 {
        return None;
    }
    assert!(
        edges.iter().all(|e| e.0 < n && e.1 < n),
        "edge endpoint out of range"
    );
    let start: Vec<Option<W>> = vec![Some(W::zero()); n];
    let mut prev = start.clone();
    let mut next = vec![None; n];
    for _ in 0..n {
        relax(n, edges, &prev, &mut next);
        std::mem::swap(&mut prev, &mut next);
    }
    let d_n = prev;
    if d_n.iter().all(Option::is_none) {
        return None;
    }
    let mut worst: Vec<Option<W>> = vec![None; n];
    let mut row = start;
    for k in 0..n {
        let len = W::from_usize(n - k).expect("walk length");
        for v in 0..n {
            if let (Some(dn), Some(dk)) = (&d_n[v], &row[v]) {
                let ratio = (dn.clone() - dk.clone()) / len.clone();
                match &worst[v] {
                    Some(w) if *w <= ratio => {}
                    _ => worst[v] = Some(ratio),
                }
            }
        }
        relax(n, edges, &row, &mut next);
        std::mem::swap(&mut row, &mut next);
    }
    worst
        .into_iter()
        .flatten()
        .fold(None, |best, r| match best {
            Some(b) if b >= r => Some(b),
            _ => Some(r),
        })
}

/// Smallest mean weight over all cycles.
pub fn karp_min_mean<W: CycleWeight + Neg<Output = W>>(
    n: usize,
    edges: &[(usize, usize, W)],
) -> Option<W> {
    let negated: Vec<_> = edges.iter().map(|(a, b, w)| (*a, *b, -w.clone())).collect();
    karp_max_mean(n, &negated).map(|m| -m)
}

/// Compressed adjacency with local node numbers.
#[derive(Debug, Clone, Default)]
pub struct LocalGraph {
    pub offsets: Vec<usize>,
    pub targets: Vec<u32>,
    pub weights: Vec<f64>,
}

impl LocalGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut sorted = edges.to_vec();
        sorted.sort_by_key(|e| (e.0, e.1));
        let mut offsets = vec![0; n + 1];
        for e in &sorted {
            offsets[e.0 + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Self {
            offsets,
            targets: sorted.iter().map(|e| e.1 as u32).collect(),
            weights: sorted.iter().map(|e| e.2).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn edge_list(&self) -> Vec<(usize, usize, f64)> {
        (0..self.node_count())
            .flat_map(|v| (self.offsets[v]..self.offsets[v + 1]).map(move |i| (v, i)))
            .map(|(v, i)| (v, self.targets[i] as usize, self.weights[i]))
            .collect()
    }

    pub fn negated(&self) -> Self {
        Self {
            weights: self.weights.iter().map(|w| -w).collect(),
            ..self.clone()
        }
    }
}

const HOWARD_MAX_ITERATIONS: usize = 100_000;

/// Howard policy iteration for the largest cycle mean. Every node must have
/// an outgoing edge; returns `None` otherwise.
pub fn howard_max_mean(g: &LocalGraph) -> Option<f64> {
    let n = g.node_count();
    if n == 0 || (0..n).any(|v| g.offsets[v] == g.offsets[v + 1]) {
        return None;
    }
    let scale = 1.0 + g.weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let tol = 1e-12 * scale;

    let mut policy: Vec<usize> = (0..n)
        .map(|v| {
            (g.offsets[v]..g.offsets[v + 1])
                .max_by(|&a, &b| g.weights[a].total_cmp(&g.weights[b]).then(b.cmp(&a)))
                .expect("out-edge")
        })
        .collect();
    let mut eta = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut state = vec![0usize; n];
    let mut path = Vec::new();

    for _ in 0..HOWARD_MAX_ITERATIONS {
        // value determination on the policy graph
        state.iter_mut().for_each(|s| *s = 0);
        for s in 0..n {
            if state[s] != 0 {
                continue;
            }
            path.clear();
            let mut v = s;
            while state[v] == 0 {
                state[v] = s + 1;
                path.push(v);
                v = g.targets[policy[v]] as usize;
            }
            if state[v] == s + 1 {
                let mut cycle = vec![v];
                let mut sum = g.weights[policy[v]];
                let mut u = g.targets[policy[v]] as usize;
                while u != v {
                    cycle.push(u);
                    sum += g.weights[policy[u]];
                    u = g.targets[policy[u]] as usize;
                }
                let mean = sum / cycle.len() as f64;
                eta[v] = mean;
                x[v] = 0.0;
                state[v] = usize::MAX;
                for &u in cycle.iter().skip(1).rev() {
                    let e = policy[u];
                    eta[u] = mean;
                    x[u] = g.weights[e] - mean + x[g.targets[e] as usize];
                    state[u] = usize::MAX;
                }
            }
            for &u in path.iter().rev() {
                if state[u] == usize::MAX {
                    continue;
                }
                let e = policy[u];
                let t = g.targets[e] as usize;
                eta[u] = eta[t];
                x[u] = g.weights[e] - eta[u] + x[t];
                state[u] = usize::MAX;
            }
        }

        // improve the cycle means first, then the bias
        let mut changed = false;
        for v in 0..n {
            let mut best = eta[v];
            let mut choice = None;
            for e in g.offsets[v]..g.offsets[v + 1] {
                if eta[g.targets[e] as usize] > best + tol {
                    best = eta[g.targets[e] as usize];
                    choice = Some(e);
                }
            }
            if let Some(e) = choice {
                policy[v] = e;
                changed = true;
            }
        }
        if changed {
            continue;
        }
        for v in 0..n {
            let mut best = x[v];
            let mut choice = None;
            for e in g.offsets[v]..g.offsets[v + 1] {
                let t = g.targets[e] as usize;
                if (eta[t] - eta[v]).abs() <= tol {
                    let val = g.weights[e] - eta[v] + x[t];
                    if val > best + tol {
                        best = val;
                        choice = Some(e);
                    }
                }
            }
            if let Some(e) = choice {
                policy[v] = e;
                changed = true;
            }
        }
        if !changed {
            return eta.into_iter().reduce(f64::max);
        }
    }
    eta.into_iter().reduce(f64::max)
}

pub fn howard_min_mean(g: &LocalGraph) -> Option<f64> {
    howard_max_mean(&g.negated()).map(|m| -m)
}
