//! Joint-graph analysis: the male-edge motif graph, cycle detection and the
//! tiler's placement order.
//!
//! Every tile with a male joint points at the neighbor its tab slides under.
//! Read as a dependency graph the edge `child -> parent` means the child's tab
//! must be laid before the parent covers it, so a valid build sequence is a
//! topological order that starts from dendrite endpoints (in-degree 0).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use thiserror::Error;

use crate::hexgrid::AxialCell;
use crate::solver::Patch;

/// The male-edge graph of a patch. Nodes are the assigned cells in
/// lexicographic order; each has at most one outgoing edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotifGraph {
    nodes: Vec<AxialCell>,
    succ: Vec<Option<usize>>,
    dangling: Vec<AxialCell>,
    no_male_joints: bool,
}

impl MotifGraph {
    pub fn nodes(&self) -> &[AxialCell] {
        &self.nodes
    }

    /// Internal edges `(child, parent)` in node order.
    pub fn edges(&self) -> impl Iterator<Item = (AxialCell, AxialCell)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|t| (self.nodes[i], self.nodes[t])))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().flatten().count()
    }

    /// Cells whose male joint points outside the patch.
    pub fn dangling(&self) -> &[AxialCell] {
        &self.dangling
    }

    /// Set when the rule set declares no male joints at all; the graph is
    /// then empty.
    pub fn no_male_joints(&self) -> bool {
        self.no_male_joints
    }

    pub fn index(&self, c: AxialCell) -> Option<usize> {
        self.nodes.binary_search(&c).ok()
    }

    pub fn parent(&self, c: AxialCell) -> Option<AxialCell> {
        self.succ[self.index(c)?].map(|t| self.nodes[t])
    }

    /// Number of internal edges pointing at each node.
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for t in self.succ.iter().flatten() {
            deg[*t] += 1;
        }
        deg
    }

    pub fn in_degree(&self, c: AxialCell) -> Option<usize> {
        let i = self.index(c)?;
        Some(self.succ.iter().filter(|t| **t == Some(i)).count())
    }

    /// Cells no tab points at, i.e. the dendrite endpoints.
    pub fn endpoints(&self) -> Vec<AxialCell> {
        self.in_degrees()
            .iter()
            .zip(&self.nodes)
            .filter(|(d, _)| **d == 0)
            .map(|(_, c)| *c)
            .collect()
    }

    /// Number of weakly connected components.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut count = self.nodes.len();
        for (i, t) in self.succ.iter().enumerate() {
            if let Some(t) = *t {
                let (a, b) = (find(&mut parent, i), find(&mut parent, t));
                if a != b {
                    parent[a] = b;
                    count -= 1;
                }
            }
        }
        count
    }
}

pub fn motif_graph(p: &Patch) -> MotifGraph {
    let nodes: Vec<AxialCell> = p.tiles().map(|(c, _)| c).collect();
    let mut succ = vec![None; nodes.len()];
    let mut dangling = Vec::new();
    for (i, &c) in nodes.iter().enumerate() {
        let Some(t) = p.male_target(c) else { continue };
        match nodes.binary_search(&t) {
            Ok(j) => succ[i] = Some(j),
            Err(_) => dangling.push(c),
        }
    }
    MotifGraph {
        nodes,
        succ,
        dangling,
        no_male_joints: !p.ruleset().has_male_edges(),
    }
}

/// Finds a directed cycle in a graph with out-degree at most one.
///
/// Returns node indices starting from the smallest index on the cycle, in
/// edge order; among several cycles the one through the smallest index wins.
pub fn functional_cycle(succ: &[Option<usize>]) -> Option<Vec<usize>> {
    // 0 = unseen, 1 = on the current walk, 2 = finished
    let mut state = vec![0u8; succ.len()];
    let mut best: Option<Vec<usize>> = None;
    for start in 0..succ.len() {
        let mut walk = Vec::new();
        let mut x = Some(start);
        while let Some(i) = x {
            match state[i] {
                0 => {
                    state[i] = 1;
                    walk.push(i);
                    x = succ[i];
                }
                1 => {
                    let at = walk.iter().position(|&w| w == i).expect("on walk");
                    let mut cycle = walk[at..].to_vec();
                    let m = (0..cycle.len()).min_by_key(|&k| cycle[k]).unwrap_or(0);
                    cycle.rotate_left(m);
                    if best.as_ref().is_none_or(|b| cycle[0] < b[0]) {
                        best = Some(cycle);
                    }
                    break;
                }
                _ => break,
            }
        }
        for w in walk {
            state[w] = 2;
        }
    }
    best
}

/// A directed cycle of the motif graph, if any, as cells starting from the
/// smallest one.
pub fn find_cycle(g: &MotifGraph) -> Option<Vec<AxialCell>> {
    functional_cycle(&g.succ).map(|c| c.into_iter().map(|i| g.nodes[i]).collect())
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OrderError {
    #[error("joint cycle through {}", fmt_cells(.0))]
    Cycle(Vec<AxialCell>),
    #[error("sequence is not a permutation of the placed tiles: {0}")]
    NotPermutation(String),
    #[error("tile {child} must be placed before {parent}")]
    Violation { child: AxialCell, parent: AxialCell },
}

fn fmt_cells(cells: &[AxialCell]) -> String {
    cells
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

/// Child-before-parent topological order with a lexicographic tie-break
/// among ready cells.
pub fn placement_order(p: &Patch) -> Result<Vec<AxialCell>, OrderError> {
    let g = motif_graph(p);
    if let Some(cycle) = find_cycle(&g) {
        return Err(OrderError::Cycle(cycle));
    }
    let mut deg = g.in_degrees();
    let mut ready: BinaryHeap<Reverse<usize>> = deg
        .iter()
        .enumerate()
        .filter(|(_, d)| **d == 0)
        .map(|(i, _)| Reverse(i))
        .collect();
    let mut out = Vec::with_capacity(g.nodes.len());
    while let Some(Reverse(i)) = ready.pop() {
        out.push(g.nodes[i]);
        if let Some(t) = g.succ[i] {
            deg[t] -= 1;
            if deg[t] == 0 {
                ready.push(Reverse(t));
            }
        }
    }
    Ok(out)
}

/// Checks that `seq` places every child before its parent. Reports the first
/// parent placed while one of its children is still missing.
pub fn verify_order(p: &Patch, seq: &[AxialCell]) -> Result<(), OrderError> {
    let g = motif_graph(p);
    if seq.len() != g.nodes.len() {
        return Err(OrderError::NotPermutation(format!(
            "{} cells for {} tiles",
            seq.len(),
            g.nodes.len()
        )));
    }
    let mut step = vec![usize::MAX; g.nodes.len()];
    for (k, &c) in seq.iter().enumerate() {
        let i = g
            .index(c)
            .ok_or_else(|| OrderError::NotPermutation(format!("{c} is not a placed tile")))?;
        if step[i] != usize::MAX {
            return Err(OrderError::NotPermutation(format!("{c} appears twice")));
        }
        step[i] = k;
    }
    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, t) in g.succ.iter().enumerate() {
        if let Some(t) = *t {
            children.entry(t).or_default().push(i);
        }
    }
    for &c in seq {
        let i = g.index(c).expect("checked");
        for &ch in children.get(&i).into_iter().flatten() {
            if step[ch] > step[i] {
                return Err(OrderError::Violation {
                    child: g.nodes[ch],
                    parent: c,
                });
            }
        }
    }
    Ok(())
}

/// Cells that may be placed first in the current patch: in-degree 0 in the
/// dependency graph.
pub fn order_hint(p: &Patch) -> Vec<AxialCell> {
    motif_graph(p).endpoints()
}

/// The tiler's instruction listing, one line per step.
pub fn order_listing(p: &Patch, seq: &[AxialCell]) -> String {
    let mut out = String::new();
    for (k, c) in seq.iter().enumerate() {
        let o = p.get(*c).map(|s| s.orientation).unwrap_or_default();
        out.push_str(&format!(
            "step {}: place tile at {c} orientation {o}\n",
            k + 1
        ));
    }
    out
}
