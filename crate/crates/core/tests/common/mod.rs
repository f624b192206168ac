//! Independent reference checker used as a test oracle.
//!
//! It only uses the public label accessors and the rule-set document, and
//! carries its own direction table and vertex geometry, so it shares no code
//! with the solver's compiled tables.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use monotile::hexgrid::{AxialCell, CornerIndex, EdgeIndex};
use monotile::tilemodel::{
    corner_label, edge_label, enumerate_states, male_edge_abs, RuleSet, TileState,
};

/// Cell to state index.
pub type Assignment = BTreeMap<(i32, i32), usize>;

pub const DIRS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

pub fn step(c: (i32, i32), e: usize) -> (i32, i32) {
    (c.0 + DIRS[e % 6].0, c.1 + DIRS[e % 6].1)
}

pub struct Oracle {
    pub states: Vec<TileState>,
    edge: Vec<[usize; 6]>,
    corner: Vec<[usize; 6]>,
    male: Vec<Option<usize>>,
    k1: BTreeSet<(usize, usize)>,
    k3: BTreeSet<(usize, usize)>,
}

/// Corner of `x` at the vertex it shares with `a` and `b`.
fn corner_towards(x: (i32, i32), a: (i32, i32), b: (i32, i32)) -> usize {
    (0..6)
        .find(|&k| {
            let s: BTreeSet<_> = [step(x, k), step(x, k + 1)].into();
            s == [a, b].into()
        })
        .expect("three mutually adjacent cells share a vertex")
}

impl Oracle {
    pub fn new(rs: &RuleSet) -> Oracle {
        // Labels are interned by name here, independently of the library's
        // own label ids.
        let mut names: BTreeMap<String, usize> = BTreeMap::new();
        let mut id = |l: &str| {
            let n = names.len();
            *names.entry(l.to_string()).or_insert(n)
        };
        let states = enumerate_states(rs);
        let edge = states
            .iter()
            .map(|s| std::array::from_fn(|e| id(&edge_label(rs, s, EdgeIndex::wrap(e as i64)).0)))
            .collect();
        let corner = states
            .iter()
            .map(|s| {
                std::array::from_fn(|k| id(&corner_label(rs, s, CornerIndex::wrap(k as i64)).0))
            })
            .collect();
        let male = states
            .iter()
            .map(|s| male_edge_abs(rs, s).map(|e| e.index()))
            .collect();
        let doc = rs.to_doc();
        let k1 = doc
            .k1_compat
            .iter()
            .map(|(a, b)| (id(&a.0), id(&b.0)))
            .collect();
        let k3 = doc
            .k3_compat
            .iter()
            .map(|(a, b)| (id(&a.0), id(&b.0)))
            .collect();
        Oracle {
            states,
            edge,
            corner,
            male,
            k1,
            k3,
        }
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Every clause among the assigned cells of a planar patch, where `at`
    /// maps a cell to its state index.
    pub fn valid(&self, at: &dyn Fn((i32, i32)) -> Option<usize>, cells: &[(i32, i32)]) -> bool {
        if !self.valid_local(at, cells) {
            return false;
        }
        for &start in cells {
            let mut cur = start;
            for _ in 0..cells.len() {
                let Some(s) = at(cur) else { break };
                let Some(e) = self.male[s] else { break };
                cur = step(cur, e);
                if cur == start {
                    return false;
                }
            }
        }
        true
    }

    /// Counts complete valid assignments of `cells` by brute force, pruning
    /// partial assignments that already violate a clause.
    pub fn count(&self, cells: &[(i32, i32)]) -> u64 {
        let mut n = 0;
        self.completions(cells, &BTreeMap::new(), &mut |_| n += 1);
        n
    }

    /// Calls `f` on every valid completion of `fixed` over `cells`.
    pub fn completions(
        &self,
        cells: &[(i32, i32)],
        fixed: &Assignment,
        f: &mut dyn FnMut(&Assignment),
    ) {
        let mut assign = fixed.clone();
        if !self.valid(&|c| assign.get(&c).copied(), cells) {
            return;
        }
        let free: Vec<(i32, i32)> = cells
            .iter()
            .copied()
            .filter(|c| !fixed.contains_key(c))
            .collect();
        self.completions_rec(cells, &free, &mut assign, f);
    }

    fn completions_rec(
        &self,
        cells: &[(i32, i32)],
        free: &[(i32, i32)],
        assign: &mut Assignment,
        f: &mut dyn FnMut(&Assignment),
    ) {
        let Some((&c, rest)) = free.split_first() else {
            f(assign);
            return;
        };
        for s in 0..self.states.len() {
            assign.insert(c, s);
            if self.valid(&|x| assign.get(&x).copied(), cells) {
                self.completions_rec(cells, rest, assign, f);
            }
            assign.remove(&c);
        }
    }
}

/// Torus model with its own lattice arithmetic: `x ~ y` iff `x - y` is an
/// integer combination of `u` and `v`.
pub struct Torus {
    u: (i64, i64),
    v: (i64, i64),
    pub reps: Vec<(i32, i32)>,
}

impl Torus {
    pub fn new(u: AxialCell, v: AxialCell) -> Torus {
        let mut t = Torus {
            u: (u.q as i64, u.r as i64),
            v: (v.q as i64, v.r as i64),
            reps: Vec::new(),
        };
        let det = (t.u.0 * t.v.1 - t.u.1 * t.v.0).unsigned_abs() as usize;
        let mut frontier = vec![(0, 0)];
        while let Some(c) = frontier.pop() {
            if t.reps.iter().any(|&r| t.same(r, c)) {
                continue;
            }
            t.reps.push(c);
            for e in 0..6 {
                frontier.push(step(c, e));
            }
            assert!(t.reps.len() <= det);
        }
        assert_eq!(t.reps.len(), det);
        t
    }

    pub fn same(&self, x: (i32, i32), y: (i32, i32)) -> bool {
        let (dq, dr) = ((x.0 - y.0) as i64, (x.1 - y.1) as i64);
        let det = self.u.0 * self.v.1 - self.u.1 * self.v.0;
        let a = dq * self.v.1 - dr * self.v.0;
        let b = self.u.0 * dr - self.u.1 * dq;
        a % det == 0 && b % det == 0
    }

    pub fn class(&self, c: (i32, i32)) -> usize {
        self.reps
            .iter()
            .position(|&r| self.same(r, c))
            .expect("every cell has a class")
    }

    /// Whether some assignment of the classes satisfies every clause,
    /// checked on the periodic plane.
    pub fn satisfiable(&self, o: &Oracle) -> bool {
        let n = self.reps.len();
        let mut assign = vec![0usize; n];
        loop {
            if self.valid(o, &assign) {
                return true;
            }
            let mut i = 0;
            loop {
                if i == n {
                    return false;
                }
                assign[i] += 1;
                if assign[i] < o.state_count() {
                    break;
                }
                assign[i] = 0;
                i += 1;
            }
        }
    }

    pub fn valid(&self, o: &Oracle, assign: &[usize]) -> bool {
        // Every clause is anchored at some cell, so checking the clauses
        // anchored at one representative per class covers the torus.
        let at = |c: (i32, i32)| Some(assign[self.class(c)]);
        if !o.valid_local(&at, &self.reps) {
            return false;
        }
        let n = self.reps.len();
        for s in 0..n {
            let mut cur = s;
            for _ in 0..n {
                let Some(e) = o.male_of(assign[cur]) else {
                    break;
                };
                cur = self.class(step(self.reps[cur], e));
                if cur == s {
                    return false;
                }
            }
        }
        true
    }
}

impl Oracle {
    pub fn male_of(&self, s: usize) -> Option<usize> {
        self.male[s]
    }

    /// K1 and K3 clauses anchored at the listed cells only.
    pub fn valid_local(
        &self,
        at: &dyn Fn((i32, i32)) -> Option<usize>,
        anchors: &[(i32, i32)],
    ) -> bool {
        for &a in anchors {
            let Some(sa) = at(a) else { continue };
            for e in 0..6 {
                let b = step(a, e);
                let Some(sb) = at(b) else { continue };
                let pair = (self.edge[sa][e], self.edge[sb][(e + 3) % 6]);
                if !self.k1.contains(&pair) {
                    return false;
                }
                let (c1, c2) = (step(a, e + 1), step(a, e + 5));
                if let (Some(s1), Some(s2)) = (at(c1), at(c2)) {
                    let k1 = corner_towards(c1, a, b);
                    let k2 = corner_towards(c2, a, b);
                    let pair = (self.corner[s1][k1], self.corner[s2][k2]);
                    if !self.k3.contains(&pair) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Cells of the hexagon of `radius` around the origin, in `(q, r)` order.
pub fn hex_cells(radius: i32) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for q in -radius..=radius {
        for r in -radius..=radius {
            if (q + r).abs() <= radius {
                out.push((q, r));
            }
        }
    }
    out
}

/// A small random rule set: edge labels from {a, b, c}, corner labels from
/// {x, y}, random relations over the labels actually used, random male
/// offsets, and one or two chiralities (`chiral` forces two).
pub fn random_ruleset(seed: u64, chiral: bool) -> RuleSet {
    use rand::{Rng, SeedableRng};
    use serde_json::json;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let chiralities: Vec<&str> = if chiral { vec!["R", "F"] } else { vec!["R"] };
    let mut edges = Vec::new();
    let mut corners = Vec::new();
    let mut males = Vec::new();
    let mut used_e = BTreeSet::new();
    let mut used_c = BTreeSet::new();
    for ch in &chiralities {
        let e: Vec<String> = (0..6)
            .map(|_| ["a", "b", "c"][rng.gen_range(0..3)].to_string())
            .collect();
        let c: Vec<String> = (0..6)
            .map(|_| ["x", "y"][rng.gen_range(0..2)].to_string())
            .collect();
        used_e.extend(e.iter().cloned());
        used_c.extend(c.iter().cloned());
        edges.push(json!({"variant": "hex", "chirality": ch, "labels": e}));
        corners.push(json!({"variant": "hex", "chirality": ch, "labels": c}));
        if rng.gen_bool(0.6) {
            males.push(json!({"variant": "hex", "chirality": ch, "edge": rng.gen_range(0..6)}));
        }
    }
    let used_e: Vec<String> = used_e.into_iter().collect();
    let used_c: Vec<String> = used_c.into_iter().collect();
    let mut k1 = BTreeSet::new();
    for (i, a) in used_e.iter().enumerate() {
        for b in &used_e[i..] {
            if rng.gen_bool(0.6) {
                k1.insert((a.clone(), b.clone()));
                k1.insert((b.clone(), a.clone()));
            }
        }
    }
    let mut k3 = Vec::new();
    for a in &used_c {
        for b in &used_c {
            if rng.gen_bool(0.7) {
                k3.push((a.clone(), b.clone()));
            }
        }
    }
    let doc = json!({
        "name": format!("random-{seed}"),
        "variants": [{"id": "hex", "chiralities": chiralities}],
        "base_edge_labels": edges,
        "base_corner_labels": corners,
        "k1_compat": k1.into_iter().collect::<Vec<_>>(),
        "k3_compat": k3,
        "male_edge_offset": males,
        "motif_strokes": [],
    });
    RuleSet::from_json(&doc.to_string()).expect("random rule set is well formed")
}

/// Builds a patch from `(q, r, state index)` triples.
pub fn patch_of(
    rs: &std::sync::Arc<RuleSet>,
    region: monotile::Region,
    tiles: &[((i32, i32), usize)],
) -> monotile::Patch {
    let states = enumerate_states(rs);
    let mut p = monotile::Patch::new(region, rs.clone());
    for &((q, r), s) in tiles {
        p.assign(AxialCell::new(q, r), &states[s]).unwrap();
    }
    p
}
