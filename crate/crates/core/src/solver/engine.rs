//! Binary-constraint search over tile states.
//!
//! A [`Board`] is a finite cell set with a neighbor table (a region, where
//! neighbors may be missing, or a torus, where they wrap). A [`Model`]
//! compiles the K1/K3 clauses of a rule set into support tables between
//! cells, and [`Search`] runs arc consistency, male-edge cycle pruning and
//! depth-first search with undo trails.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hexgrid::{AxialCell, EdgeIndex, Region, TorusBasis};
use crate::tilemodel::RuleSet;

/// Domain of a cell: bit `s` is set when state `s` is still possible.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub(crate) struct StateSet(u128);

impl StateSet {
    pub fn full(n: usize) -> StateSet {
        if n >= 128 {
            StateSet(u128::MAX)
        } else {
            StateSet((1u128 << n) - 1)
        }
    }

    pub fn single(s: usize) -> StateSet {
        StateSet(1u128 << s)
    }

    pub fn contains(self, s: usize) -> bool {
        self.0 >> s & 1 == 1
    }

    pub fn insert(&mut self, s: usize) {
        self.0 |= 1u128 << s;
    }

    pub fn remove(&mut self, s: usize) {
        self.0 &= !(1u128 << s);
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersects(self, o: StateSet) -> bool {
        self.0 & o.0 != 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let s = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(s)
            }
        })
    }
}

/// Cells plus neighbor table; cells are sorted by `(q, r)`.
#[derive(Clone, Debug)]
pub(crate) struct Board {
    pub cells: Vec<AxialCell>,
    pub nbr: Vec<[Option<u32>; 6]>,
}

impl Board {
    pub fn region(region: &Region) -> Board {
        let cells: Vec<AxialCell> = region.cells().iter().copied().collect();
        let nbr = cells
            .iter()
            .map(|&c| {
                std::array::from_fn(|e| {
                    let n = c.neighbor(EdgeIndex::wrap(e as i64));
                    cells.binary_search(&n).ok().map(|i| i as u32)
                })
            })
            .collect();
        Board { cells, nbr }
    }

    pub fn torus(basis: &TorusBasis) -> Board {
        let cells = basis.classes();
        let nbr = cells
            .iter()
            .map(|&c| {
                std::array::from_fn(|e| {
                    let n = basis.reduce(c.neighbor(EdgeIndex::wrap(e as i64)));
                    Some(cells.binary_search(&n).expect("reduced cell is a class") as u32)
                })
            })
            .collect();
        Board { cells, nbr }
    }

    pub fn index(&self, c: AxialCell) -> Option<usize> {
        self.cells.binary_search(&c).ok()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    fn step(&self, i: usize, e: i64) -> Option<usize> {
        self.nbr[i][e.rem_euclid(6) as usize].map(|j| j as usize)
    }

    /// Every K3 clause as `(c_plus, c_minus, e)` for directed lattice edges
    /// `(a, e)` whose four cells `a`, `b`, `c_plus`, `c_minus` are present.
    pub fn k3_clauses(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for e in 0..6i64 {
                let (Some(_b), Some(p), Some(m)) =
                    (self.step(a, e), self.step(a, e + 1), self.step(a, e + 5))
                else {
                    continue;
                };
                out.push((p, m, e as usize));
            }
        }
        out
    }
}

/// Compiled constraints for one rule set on one board.
pub(crate) struct Model<'a> {
    pub rs: &'a RuleSet,
    pub board: Board,
    /// `tables[t][s]`: states of the watched cell that support state `s`.
    tables: Vec<Vec<StateSet>>,
    /// `watchers[j]`: `(i, table)` pairs whose domain at `i` must be revised
    /// when the domain of `j` shrinks.
    watchers: Vec<Vec<(u32, u16)>>,
    unary: Vec<StateSet>,
    /// Male-joint target per cell and state; `None` for dangling or absent.
    targets: Vec<Vec<Option<u32>>>,
    sinks: Vec<StateSet>,
}

impl<'a> Model<'a> {
    pub fn new(rs: &'a RuleSet, board: Board) -> Model<'a> {
        let n = rs.state_count();
        let mut tables = Vec::new();
        // K1 tables 0..6: for a cell in state s, the states allowed on its
        // neighbor across edge e.
        for e in 0..6 {
            let opp = (e + 3) % 6;
            tables.push(
                (0..n)
                    .map(|s| {
                        let mut set = StateSet::default();
                        let ls = rs.state_info(s).edge[e];
                        for t in 0..n {
                            if rs.k1(ls, rs.state_info(t).edge[opp]) {
                                set.insert(t);
                            }
                        }
                        set
                    })
                    .collect(),
            );
        }
        // K3 tables 6..12 (plus side) and 12..18 (minus side).
        let k3_pair = |e: usize, sp: usize, sm: usize| {
            rs.k3(
                rs.state_info(sp).corner[(e + 4) % 6],
                rs.state_info(sm).corner[(e + 1) % 6],
            )
        };
        for e in 0..6 {
            tables.push(
                (0..n)
                    .map(|sp| {
                        let mut set = StateSet::default();
                        for sm in 0..n {
                            if k3_pair(e, sp, sm) {
                                set.insert(sm);
                            }
                        }
                        set
                    })
                    .collect(),
            );
        }
        for e in 0..6 {
            tables.push(
                (0..n)
                    .map(|sm| {
                        let mut set = StateSet::default();
                        for sp in 0..n {
                            if k3_pair(e, sp, sm) {
                                set.insert(sp);
                            }
                        }
                        set
                    })
                    .collect(),
            );
        }

        let len = board.len();
        let mut watchers: Vec<Vec<(u32, u16)>> = vec![Vec::new(); len];
        let mut unary = vec![StateSet::full(n); len];
        let restrict_self = |unary: &mut Vec<StateSet>, i: usize, table: &Vec<StateSet>| {
            for (s, row) in table.iter().enumerate().take(n) {
                if !row.contains(s) {
                    unary[i].remove(s);
                }
            }
        };
        for i in 0..len {
            for (e, table) in tables.iter().enumerate().take(3) {
                let Some(j) = board.nbr[i][e] else { continue };
                let j = j as usize;
                if i == j {
                    restrict_self(&mut unary, i, table);
                    continue;
                }
                watchers[j].push((i as u32, e as u16));
                watchers[i].push((j as u32, (e + 3) as u16));
            }
        }
        for (p, m, e) in board.k3_clauses() {
            if p == m {
                restrict_self(&mut unary, p, &tables[6 + e]);
                continue;
            }
            watchers[m].push((p as u32, (6 + e) as u16));
            watchers[p].push((m as u32, (12 + e) as u16));
        }
        for w in &mut watchers {
            w.sort_unstable();
            w.dedup();
        }

        let mut targets = vec![vec![None; n]; len];
        let mut sinks = vec![StateSet::default(); len];
        for (i, row) in targets.iter_mut().enumerate() {
            for (s, t) in row.iter_mut().enumerate() {
                if let Some(e) = rs.state_info(s).male {
                    *t = board.nbr[i][e.index()];
                }
                if t.is_none() {
                    sinks[i].insert(s);
                }
            }
        }

        Model {
            rs,
            board,
            tables,
            watchers,
            unary,
            targets,
            sinks,
        }
    }

    pub fn len(&self) -> usize {
        self.board.len()
    }
}

/// Union-find with rollback (union by rank, no path compression).
#[derive(Clone, Debug)]
struct Components {
    parent: Vec<u32>,
    rank: Vec<u8>,
    history: Vec<(u32, u32, bool)>,
}

impl Components {
    fn new(n: usize) -> Self {
        Components {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            history: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            x = self.parent[x] as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.rank[ra] < self.rank[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        let bumped = self.rank[ra] == self.rank[rb];
        self.parent[rb] = ra as u32;
        if bumped {
            self.rank[ra] += 1;
        }
        self.history.push((rb as u32, ra as u32, bumped));
    }

    fn mark(&self) -> usize {
        self.history.len()
    }

    fn rollback(&mut self, mark: usize) {
        while self.history.len() > mark {
            let (child, root, bumped) = self.history.pop().unwrap();
            self.parent[child as usize] = child;
            if bumped {
                self.rank[root as usize] -= 1;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Counters {
    pub nodes: u64,
    pub propagations: u64,
}

pub(crate) enum SearchEnd {
    Found(Vec<usize>),
    Exhausted,
    Limit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Contradiction;

pub(crate) struct Search<'m, 'a> {
    model: &'m Model<'a>,
    pub domains: Vec<StateSet>,
    assigned: Vec<Option<u16>>,
    comps: Components,
    trail: Vec<(u32, StateSet)>,
    assign_trail: Vec<u32>,
    queue: Vec<u32>,
    queued: Vec<bool>,
    pub counters: Counters,
}

impl<'m, 'a> Search<'m, 'a> {
    pub fn new(model: &'m Model<'a>) -> Self {
        let len = model.len();
        Search {
            model,
            domains: model.unary.clone(),
            assigned: vec![None; len],
            comps: Components::new(len),
            trail: Vec::new(),
            assign_trail: Vec::new(),
            queue: (0..len as u32).rev().collect(),
            queued: vec![true; len],
            counters: Counters::default(),
        }
    }

    fn set_domain(&mut self, i: usize, d: StateSet) {
        if self.domains[i] != d {
            self.trail.push((i as u32, self.domains[i]));
            self.domains[i] = d;
            if !self.queued[i] {
                self.queued[i] = true;
                self.queue.push(i as u32);
            }
        }
    }

    /// Fixes cell `i` to state `s`, recording undo information.
    pub fn assign(&mut self, i: usize, s: usize) -> Result<(), Contradiction> {
        if !self.domains[i].contains(s) {
            return Err(Contradiction);
        }
        if let Some(t) = self.model.targets[i][s] {
            if self.comps.find(i) == self.comps.find(t as usize) {
                return Err(Contradiction);
            }
            self.comps.union(i, t as usize);
        }
        self.assigned[i] = Some(s as u16);
        self.assign_trail.push(i as u32);
        self.set_domain(i, StateSet::single(s));
        Ok(())
    }

    /// Arc consistency to fixpoint, interleaved with male-edge pruning and
    /// the sink check.
    pub fn propagate(&mut self) -> Result<(), Contradiction> {
        let result = self.propagate_inner();
        if result.is_err() {
            for &i in &self.queue {
                self.queued[i as usize] = false;
            }
            self.queue.clear();
        }
        result
    }

    fn propagate_inner(&mut self) -> Result<(), Contradiction> {
        loop {
            while let Some(j) = self.queue.pop() {
                let j = j as usize;
                self.queued[j] = false;
                let dj = self.domains[j];
                if dj.is_empty() {
                    return Err(Contradiction);
                }
                for k in 0..self.model.watchers[j].len() {
                    let (i, t) = self.model.watchers[j][k];
                    let i = i as usize;
                    let table = &self.model.tables[t as usize];
                    let di = self.domains[i];
                    let mut kept = StateSet::default();
                    for s in di.iter() {
                        if table[s].intersects(dj) {
                            kept.insert(s);
                        }
                    }
                    if kept != di {
                        self.counters.propagations += 1;
                        if kept.is_empty() {
                            return Err(Contradiction);
                        }
                        self.set_domain(i, kept);
                    }
                }
            }
            if !self.prune_cycles()? {
                return Ok(());
            }
        }
    }

    /// Removes states whose male edge would close a cycle; returns whether
    /// any domain changed.
    fn prune_cycles(&mut self) -> Result<bool, Contradiction> {
        let model = self.model;
        if !model.rs.has_male_edges() {
            return Ok(false);
        }
        let mut changed = false;
        let mut sink_possible = model.len() == 0;
        for i in 0..model.len() {
            let d = self.domains[i];
            if self.assigned[i].is_some() {
                sink_possible |= d.intersects(model.sinks[i]);
                continue;
            }
            let root = self.comps.find(i);
            let mut kept = d;
            for s in d.iter() {
                if let Some(t) = model.targets[i][s] {
                    if self.comps.find(t as usize) == root {
                        kept.remove(s);
                    }
                }
            }
            if kept.is_empty() {
                return Err(Contradiction);
            }
            if kept != d {
                self.counters.propagations += 1;
                self.set_domain(i, kept);
                changed = true;
            }
            sink_possible |= kept.intersects(model.sinks[i]);
        }
        // Every finite acyclic functional graph has a node without an
        // out-edge; with none possible, no completion exists.
        if !sink_possible {
            return Err(Contradiction);
        }
        Ok(changed)
    }

    fn mark(&self) -> (usize, usize, usize) {
        (self.trail.len(), self.assign_trail.len(), self.comps.mark())
    }

    fn undo(&mut self, mark: (usize, usize, usize)) {
        while self.trail.len() > mark.0 {
            let (i, d) = self.trail.pop().unwrap();
            self.domains[i as usize] = d;
        }
        while self.assign_trail.len() > mark.1 {
            let i = self.assign_trail.pop().unwrap();
            self.assigned[i as usize] = None;
        }
        self.comps.rollback(mark.2);
    }

    /// Most constrained unassigned cell, ties broken by board order.
    fn select(&self) -> Option<usize> {
        let mut best: Option<(u32, usize)> = None;
        for i in 0..self.model.len() {
            if self.assigned[i].is_some() {
                continue;
            }
            let size = self.domains[i].len();
            if best.is_none_or(|(b, _)| size < b) {
                best = Some((size, i));
                if size <= 1 {
                    break;
                }
            }
        }
        best.map(|(_, i)| i)
    }

    /// Depth-first search for one complete assignment.
    pub fn solve(&mut self, seed: u64, node_limit: u64) -> SearchEnd {
        if self.propagate().is_err() {
            return SearchEnd::Exhausted;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self.dfs(&mut rng, node_limit) {
            Step::Found => SearchEnd::Found(
                self.assigned
                    .iter()
                    .map(|s| s.expect("complete") as usize)
                    .collect(),
            ),
            Step::Exhausted => SearchEnd::Exhausted,
            Step::Limit => SearchEnd::Limit,
        }
    }

    fn dfs(&mut self, rng: &mut ChaCha8Rng, node_limit: u64) -> Step {
        let Some(i) = self.select() else {
            return Step::Found;
        };
        let mut values: Vec<usize> = self.domains[i].iter().collect();
        values.shuffle(rng);
        for s in values {
            if self.counters.nodes >= node_limit {
                return Step::Limit;
            }
            self.counters.nodes += 1;
            let mark = self.mark();
            if self.assign(i, s).is_ok() && self.propagate().is_ok() {
                match self.dfs(rng, node_limit) {
                    Step::Exhausted => {}
                    other => return other,
                }
            }
            self.undo(mark);
        }
        Step::Exhausted
    }

    /// Counts all complete assignments.
    pub fn count(&mut self) -> u64 {
        if self.propagate().is_err() {
            return 0;
        }
        self.count_rec()
    }

    fn count_rec(&mut self) -> u64 {
        let Some(i) = self.select() else {
            return 1;
        };
        let mut total = 0;
        for s in self.domains[i].iter().collect::<Vec<_>>() {
            self.counters.nodes += 1;
            let mark = self.mark();
            if self.assign(i, s).is_ok() && self.propagate().is_ok() {
                total += self.count_rec();
            }
            self.undo(mark);
        }
        total
    }
}

enum Step {
    Found,
    Exhausted,
    Limit,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_set_basics() {
        let mut s = StateSet::default();
        s.insert(3);
        s.insert(100);
        assert_eq!(s.len(), 2);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![3, 100]);
        s.remove(3);
        assert!(!s.contains(3) && s.contains(100));
        assert_eq!(StateSet::full(12).len(), 12);
        assert_eq!(StateSet::full(128).len(), 128);
    }

    #[test]
    fn components_rollback() {
        let mut c = Components::new(5);
        c.union(0, 1);
        let m = c.mark();
        c.union(1, 2);
        c.union(3, 4);
        assert_eq!(c.find(0), c.find(2));
        c.rollback(m);
        assert_eq!(c.find(0), c.find(1));
        assert_ne!(c.find(0), c.find(2));
        assert_ne!(c.find(3), c.find(4));
    }

    #[test]
    fn k3_clause_geometry() {
        // For edge (a, e), c_plus shares the vertex at corner e of a and
        // c_minus the vertex at corner e-1.
        let board = Board::region(&Region::hex(1));
        let center = board.index(AxialCell::ORIGIN).unwrap();
        let clauses: Vec<_> = board.k3_clauses();
        for e in 0..6i64 {
            let p = board
                .index(AxialCell::ORIGIN.neighbor(EdgeIndex::wrap(e + 1)))
                .unwrap();
            let m = board
                .index(AxialCell::ORIGIN.neighbor(EdgeIndex::wrap(e + 5)))
                .unwrap();
            assert!(clauses.contains(&(p, m, e as usize)));
        }
        // Only the twelve directed edges through the center have both
        // flanking cells inside radius 1.
        assert_eq!(clauses.len(), 12);
        assert!(clauses.iter().all(|&(p, m, _)| p != center && m != center));
    }
}
