//! Patches, verification, propagation and search.

mod document;
pub(crate) mod engine;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hexgrid::{AxialCell, EdgeIndex, GridError, Region, TorusBasis};
use crate::tilemodel::{RuleSet, TileState};
use engine::{Board, Model, Search, SearchEnd};

pub use document::{PatchDoc, PatchTile, RegionDoc};

/// Largest region `count_solutions` accepts.
pub const COUNT_GUARD: usize = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatchError {
    #[error("cell {0} is outside the region")]
    OutsideRegion(AxialCell),
    #[error("cell {0} is already assigned")]
    AlreadyAssigned(AxialCell),
    #[error("state {state} is not declared by rule set `{ruleset}`")]
    UnknownState { state: TileState, ruleset: String },
    #[error("patch names rule set `{expected}` ({expected_hash}) but `{found}` ({found_hash}) was supplied")]
    RuleSetMismatch {
        expected: String,
        expected_hash: String,
        found: String,
        found_hash: String,
    },
    #[error("cell {0} is assigned twice")]
    DuplicateCell(AxialCell),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("region has {0} cells; exact counting is limited to {COUNT_GUARD}")]
    RegionTooLarge(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// A region with a partial assignment of tile states under one rule set.
#[derive(Clone, Debug)]
pub struct Patch {
    region: Region,
    ruleset: Arc<RuleSet>,
    assignment: BTreeMap<AxialCell, usize>,
}

impl PartialEq for Patch {
    fn eq(&self, other: &Patch) -> bool {
        self.region == other.region
            && self.assignment == other.assignment
            && *self.ruleset == *other.ruleset
    }
}

impl Patch {
    pub fn new(region: Region, ruleset: Arc<RuleSet>) -> Patch {
        Patch {
            region,
            ruleset,
            assignment: BTreeMap::new(),
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn ruleset(&self) -> &Arc<RuleSet> {
        &self.ruleset
    }

    /// Sets (or replaces) the state of `c`.
    pub fn assign(&mut self, c: AxialCell, s: &TileState) -> Result<(), PatchError> {
        if !self.region.contains(c) {
            return Err(PatchError::OutsideRegion(c));
        }
        let id = self
            .ruleset
            .state_id(s)
            .ok_or_else(|| PatchError::UnknownState {
                state: s.clone(),
                ruleset: self.ruleset.name().to_string(),
            })?;
        self.assignment.insert(c, id);
        Ok(())
    }

    pub fn unassign(&mut self, c: AxialCell) -> Option<TileState> {
        self.assignment
            .remove(&c)
            .map(|id| self.ruleset.state(id).clone())
    }

    pub fn get(&self, c: AxialCell) -> Option<&TileState> {
        self.assignment.get(&c).map(|&id| self.ruleset.state(id))
    }

    pub(crate) fn state_id(&self, c: AxialCell) -> Option<usize> {
        self.assignment.get(&c).copied()
    }

    /// Assigned cells with their states, ordered by `(q, r)`.
    pub fn tiles(&self) -> impl Iterator<Item = (AxialCell, &TileState)> {
        self.assignment
            .iter()
            .map(|(&c, &id)| (c, self.ruleset.state(id)))
    }

    pub(crate) fn tile_ids(&self) -> impl Iterator<Item = (AxialCell, usize)> + '_ {
        self.assignment.iter().map(|(&c, &id)| (c, id))
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.assignment.len() == self.region.len()
    }

    /// The cell across the male edge of `c`, whether or not it is assigned.
    pub fn male_target(&self, c: AxialCell) -> Option<AxialCell> {
        let id = self.state_id(c)?;
        self.ruleset.state_info(id).male.map(|e| c.neighbor(e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    K1,
    K3,
    Acyclic,
}

impl std::fmt::Display for Clause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Clause::K1 => "k1",
            Clause::K3 => "k3",
            Clause::Acyclic => "acyclic",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub clause: Clause,
    pub cells: Vec<AxialCell>,
    pub detail: String,
}

fn k1_ok(rs: &RuleSet, a: usize, b: usize, e: EdgeIndex) -> bool {
    rs.k1(
        rs.state_info(a).edge[e.index()],
        rs.state_info(b).edge[e.opposite().index()],
    )
}

fn k3_ok(rs: &RuleSet, plus: usize, minus: usize, e: EdgeIndex) -> bool {
    rs.k3(
        rs.state_info(plus).corner[e.rotate(4).index()],
        rs.state_info(minus).corner[e.rotate(1).index()],
    )
}

/// The four cells of the K3 clause on directed edge `(a, e)`:
/// `[a, b, c_plus, c_minus]`.
fn k3_cells(a: AxialCell, e: EdgeIndex) -> [AxialCell; 4] {
    [
        a,
        a.neighbor(e),
        a.neighbor(e.rotate(1)),
        a.neighbor(e.rotate(5)),
    ]
}

/// Lists every violated clause among assigned cells: K1 on shared edges, K3
/// when all four cells of a clause are assigned, and directed cycles of the
/// male-edge graph.
pub fn verify_patch(p: &Patch) -> Vec<Violation> {
    let rs = p.ruleset();
    let mut out = Vec::new();
    for (a, sa) in p.tile_ids() {
        for e in EdgeIndex::ALL.into_iter().take(3) {
            let b = a.neighbor(e);
            if let Some(sb) = p.state_id(b) {
                if !k1_ok(rs, sa, sb, e) {
                    out.push(Violation {
                        clause: Clause::K1,
                        cells: vec![a, b],
                        detail: format!(
                            "edge {e} of {a} shows `{}`, edge {} of {b} shows `{}`",
                            rs.label(rs.state_info(sa).edge[e.index()]),
                            e.opposite(),
                            rs.label(rs.state_info(sb).edge[e.opposite().index()]),
                        ),
                    });
                }
            }
        }
    }
    for (a, _) in p.tile_ids() {
        for e in EdgeIndex::ALL {
            let [_, b, plus, minus] = k3_cells(a, e);
            let (Some(_), Some(sp), Some(sm)) =
                (p.state_id(b), p.state_id(plus), p.state_id(minus))
            else {
                continue;
            };
            if !k3_ok(rs, sp, sm, e) {
                out.push(Violation {
                    clause: Clause::K3,
                    cells: vec![plus, minus],
                    detail: format!(
                        "ends of edge {a}-{b}: corner {} of {plus} shows `{}`, corner {} of {minus} shows `{}`",
                        e.rotate(4),
                        rs.label(rs.state_info(sp).corner[e.rotate(4).index()]),
                        e.rotate(1),
                        rs.label(rs.state_info(sm).corner[e.rotate(1).index()]),
                    ),
                });
            }
        }
    }
    for cycle in male_cycles(p) {
        out.push(Violation {
            clause: Clause::Acyclic,
            detail: format!(
                "male joints form a cycle: {}",
                cycle
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(" -> ")
            ),
            cells: cycle,
        });
    }
    out
}

/// All directed cycles of the internal male-edge graph, each starting at its
/// smallest cell.
pub(crate) fn male_cycles(p: &Patch) -> Vec<Vec<AxialCell>> {
    let next = |c: AxialCell| p.male_target(c).filter(|t| p.state_id(*t).is_some());
    let mut done: BTreeSet<AxialCell> = BTreeSet::new();
    let mut cycles = Vec::new();
    for (start, _) in p.tile_ids() {
        if done.contains(&start) {
            continue;
        }
        let mut path = Vec::new();
        let mut on_path = BTreeMap::new();
        let mut cur = Some(start);
        while let Some(c) = cur {
            if done.contains(&c) {
                break;
            }
            if let Some(&pos) = on_path.get(&c) {
                let mut cycle: Vec<AxialCell> = path[pos..].to_vec();
                let min = cycle.iter().enumerate().min_by_key(|(_, c)| **c).unwrap().0;
                cycle.rotate_left(min);
                cycles.push(cycle);
                break;
            }
            on_path.insert(c, path.len());
            path.push(c);
            cur = next(c);
        }
        done.extend(path);
    }
    cycles.sort();
    cycles
}

/// States that can be placed at the unassigned cell `c` without creating a
/// violation. Empty if the patch is already invalid.
pub fn legal_states(p: &Patch, c: AxialCell) -> Result<Vec<TileState>, PatchError> {
    Ok(legal_state_ids(p, c)?
        .into_iter()
        .map(|id| p.ruleset().state(id).clone())
        .collect())
}

pub(crate) fn legal_state_ids(p: &Patch, c: AxialCell) -> Result<Vec<usize>, PatchError> {
    if !p.region().contains(c) {
        return Err(PatchError::OutsideRegion(c));
    }
    if p.state_id(c).is_some() {
        return Err(PatchError::AlreadyAssigned(c));
    }
    if !verify_patch(p).is_empty() {
        return Ok(Vec::new());
    }
    let rs = p.ruleset();
    Ok((0..rs.state_count())
        .filter(|&s| placement_violations(p, c, s).is_empty())
        .collect())
}

/// Violations that placing `s` at the empty cell `c` would add; empty when
/// the placement is legal.
pub fn check_placement(
    p: &Patch,
    c: AxialCell,
    s: &TileState,
) -> Result<Vec<Violation>, PatchError> {
    if !p.region().contains(c) {
        return Err(PatchError::OutsideRegion(c));
    }
    if p.state_id(c).is_some() {
        return Err(PatchError::AlreadyAssigned(c));
    }
    let id = p
        .ruleset()
        .state_id(s)
        .ok_or_else(|| PatchError::UnknownState {
            state: s.clone(),
            ruleset: p.ruleset().name().to_string(),
        })?;
    Ok(placement_violations(p, c, id))
}

/// Violations that placing state `s` at the empty cell `c` would add.
pub(crate) fn placement_violations(p: &Patch, c: AxialCell, s: usize) -> Vec<Violation> {
    let rs = p.ruleset();
    let state_at = |x: AxialCell| if x == c { Some(s) } else { p.state_id(x) };
    let mut out = Vec::new();
    for e in EdgeIndex::ALL {
        let b = c.neighbor(e);
        if let Some(sb) = p.state_id(b) {
            if !k1_ok(rs, s, sb, e) {
                out.push(Violation {
                    clause: Clause::K1,
                    cells: vec![c, b],
                    detail: format!("edge {e} of {c} does not match {b}"),
                });
            }
        }
    }
    // Any K3 clause containing c is anchored at c or one of its neighbors.
    let anchors = std::iter::once(c).chain(c.neighbors());
    for a in anchors {
        for e in EdgeIndex::ALL {
            let cells = k3_cells(a, e);
            if !cells.contains(&c) {
                continue;
            }
            let [a, b, plus, minus] = cells;
            let (Some(_), Some(_), Some(sp), Some(sm)) =
                (state_at(a), state_at(b), state_at(plus), state_at(minus))
            else {
                continue;
            };
            if !k3_ok(rs, sp, sm, e) {
                out.push(Violation {
                    clause: Clause::K3,
                    cells: vec![plus, minus],
                    detail: format!("ends of edge {a}-{b} do not match"),
                });
            }
        }
    }
    if let Some(e) = rs.state_info(s).male {
        let mut cycle = vec![c];
        let mut cur = c.neighbor(e);
        while p.state_id(cur).is_some() {
            if cur == c {
                break;
            }
            cycle.push(cur);
            match p.male_target(cur) {
                Some(t) => cur = t,
                None => break,
            }
        }
        if cur == c {
            let min = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap_or(0);
            cycle.rotate_left(min);
            out.push(Violation {
                clause: Clause::Acyclic,
                detail: "placement would close a cycle of male joints".into(),
                cells: cycle,
            });
        }
    }
    out
}

/// Per-cell candidate sets after propagation.
pub type Domains = BTreeMap<AxialCell, Vec<TileState>>;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("propagation emptied a domain")]
pub struct Contradiction;

/// Arc consistency over K1/K3 plus male-cycle pruning, starting from the
/// assigned cells of `p`.
pub fn propagate(p: &Patch) -> Result<Domains, Contradiction> {
    let rs = p.ruleset();
    let model = Model::new(rs, Board::region(p.region()));
    let mut search = Search::new(&model);
    for (c, s) in p.tile_ids() {
        let i = model
            .board
            .index(c)
            .expect("assigned cells lie in the region");
        search.assign(i, s).map_err(|_| Contradiction)?;
    }
    search.propagate().map_err(|_| Contradiction)?;
    Ok(model
        .board
        .cells
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            (
                c,
                search.domains[i]
                    .iter()
                    .map(|s| rs.state(s).clone())
                    .collect(),
            )
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub seed: u64,
    pub node_limit: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            node_limit: 2_000_000,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        SolverConfig {
            seed,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "assignment", rename_all = "UPPERCASE")]
pub enum Outcome {
    Sat(Vec<(AxialCell, TileState)>),
    Unsat,
    Limit,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Sat(_) => "SAT",
            Outcome::Unsat => "UNSAT",
            Outcome::Limit => "LIMIT",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub propagations: u64,
    /// Not serialized, so documents stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    #[serde(flatten)]
    pub outcome: Outcome,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self.outcome, Outcome::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self.outcome, Outcome::Unsat)
    }

    /// The solution as a patch over `region`, when SAT.
    pub fn to_patch(&self, region: &Region, rs: &Arc<RuleSet>) -> Option<Patch> {
        let Outcome::Sat(tiles) = &self.outcome else {
            return None;
        };
        let mut p = Patch::new(region.clone(), rs.clone());
        for (c, s) in tiles {
            p.assign(*c, s).ok()?;
        }
        Some(p)
    }
}

fn run(model: &Model, cfg: &SolverConfig) -> SolveResult {
    let started = Instant::now();
    let mut search = Search::new(model);
    let end = search.solve(cfg.seed, cfg.node_limit);
    let outcome = match end {
        SearchEnd::Found(states) => Outcome::Sat(
            model
                .board
                .cells
                .iter()
                .zip(states)
                .map(|(&c, s)| (c, model.rs.state(s).clone()))
                .collect(),
        ),
        SearchEnd::Exhausted => Outcome::Unsat,
        SearchEnd::Limit => Outcome::Limit,
    };
    SolveResult {
        outcome,
        stats: SolveStats {
            nodes: search.counters.nodes,
            propagations: search.counters.propagations,
            elapsed: started.elapsed(),
        },
    }
}

/// Searches for a complete valid assignment of `region`.
pub fn solve_region(region: &Region, rs: &RuleSet, cfg: &SolverConfig) -> SolveResult {
    run(&Model::new(rs, Board::region(region)), cfg)
}

/// Searches for a valid assignment of the torus `basis`, i.e. a periodic
/// tiling with that period lattice. UNSAT is only returned after the search
/// space is exhausted.
pub fn solve_torus(
    basis: &TorusBasis,
    rs: &RuleSet,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    let basis = TorusBasis::new(basis.u, basis.v)?;
    Ok(run(&Model::new(rs, Board::torus(&basis)), cfg))
}

/// Exact number of complete valid assignments of a small region.
pub fn count_solutions(region: &Region, rs: &RuleSet) -> Result<u64, SolverError> {
    if region.len() > COUNT_GUARD {
        return Err(SolverError::RegionTooLarge(region.len()));
    }
    let model = Model::new(rs, Board::region(region));
    Ok(Search::new(&model).count())
}

/// Checks a torus assignment directly against every clause, including
/// self-identified edges and cycles of the quotient male graph.
pub fn verify_torus(
    basis: &TorusBasis,
    rs: &RuleSet,
    tiles: &[(AxialCell, TileState)],
) -> Result<Vec<Violation>, SolverError> {
    let basis = TorusBasis::new(basis.u, basis.v)?;
    let state: BTreeMap<AxialCell, usize> = tiles
        .iter()
        .filter_map(|(c, s)| Some((basis.reduce(*c), rs.state_id(s)?)))
        .collect();
    let at = |c: AxialCell| state.get(&basis.reduce(c)).copied();
    let mut out = Vec::new();
    for &a in state.keys() {
        let sa = state[&a];
        for e in EdgeIndex::ALL {
            let b = a.neighbor(e);
            if let Some(sb) = at(b) {
                if !k1_ok(rs, sa, sb, e) {
                    out.push(Violation {
                        clause: Clause::K1,
                        cells: vec![a, basis.reduce(b)],
                        detail: format!("edge {e}"),
                    });
                }
            }
            let [_, _, plus, minus] = k3_cells(a, e);
            if let (Some(sp), Some(sm)) = (at(plus), at(minus)) {
                if !k3_ok(rs, sp, sm, e) {
                    out.push(Violation {
                        clause: Clause::K3,
                        cells: vec![basis.reduce(plus), basis.reduce(minus)],
                        detail: format!("edge {a} {e}"),
                    });
                }
            }
        }
    }
    // Cycles in the quotient graph.
    for &start in state.keys() {
        let mut seen = BTreeSet::new();
        let mut cur = start;
        loop {
            if !seen.insert(cur) {
                if cur == start && seen.first() == Some(&start) {
                    out.push(Violation {
                        clause: Clause::Acyclic,
                        cells: seen.iter().copied().collect(),
                        detail: "male joints cycle on the torus".into(),
                    });
                }
                break;
            }
            match rs.state_info(state[&cur]).male {
                Some(e) => cur = basis.reduce(cur.neighbor(e)),
                None => break,
            }
        }
    }
    Ok(out)
}
