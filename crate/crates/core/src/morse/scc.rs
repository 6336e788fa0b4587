//! Strongly connected components of chain graphs.

use crate::graph::ChainGraph;
use crate::grid::CellId;

/// Component label of every node. Labels follow Tarjan's completion order,
/// so every edge between distinct components goes from a higher label to a
/// lower one.
#[derive(Debug, Clone)]
pub struct Condensation {
    pub labels: Vec<u32>,
    pub count: usize,
}

/// Iterative Tarjan over nodes `0..n` with successor lists from `succ`.
pub fn tarjan<'a>(n: usize, succ: impl Fn(usize) -> &'a [u32]) -> Condensation {
    const UNSEEN: u32 = u32::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut labels = vec![UNSEEN; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut count = 0u32;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root as u32, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root as u32);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let v = v as usize;
            let out = succ(v);
            if *pos < out.len() {
                let w = out[*pos] as usize;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack") as usize;
                    on_stack[w] = false;
                    labels[w] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    Condensation {
        labels,
        count: count as usize,
    }
}

/// Recurrent components: SCCs containing an edge. Each list is sorted; the
/// lists are ordered by their smallest cell.
pub fn strongly_connected_components(g: &ChainGraph) -> Vec<Vec<CellId>> {
    let cond = tarjan(g.node_count(), |v| g.successors(CellId(v as u32)));
    recurrent_classes(&cond, |v| g.successors(CellId(v as u32)))
        .into_iter()
        .map(|c| c.into_iter().map(CellId).collect())
        .collect()
}

pub(crate) fn recurrent_classes<'a>(
    cond: &Condensation,
    succ: impl Fn(usize) -> &'a [u32],
) -> Vec<Vec<u32>> {
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); cond.count];
    for (v, &l) in cond.labels.iter().enumerate() {
        members[l as usize].push(v as u32);
    }
    let mut out: Vec<Vec<u32>> = members
        .into_iter()
        .filter(|m| m.len() > 1 || succ(m[0] as usize).contains(&m[0]))
        .collect();
    out.sort_by_key(|m| m[0]);
    out
}
