mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use monotile::dendrite::{
    find_cycle, motif_graph, order_listing, placement_order, verify_order, OrderError,
};
use monotile::hexgrid::{AxialCell, Region};
use monotile::solver::{solve_region, verify_patch, Clause, Patch, SolverConfig};
use monotile::tilemodel::{shipped, RuleSet};

use common::{step, Oracle};

fn hx() -> Arc<RuleSet> {
    Arc::new(shipped("hextoo6").unwrap())
}

fn grown(radius: u32, seed: u64) -> Patch {
    let rs = hx();
    let region = Region::hex(radius);
    solve_region(&region, &rs, &SolverConfig::with_seed(seed))
        .to_patch(&region, &rs)
        .unwrap()
}

/// Joint edges child -> parent between assigned cells, from the oracle's
/// own male-direction table.
fn joint_edges(p: &Patch) -> BTreeMap<(i32, i32), (i32, i32)> {
    let o = Oracle::new(p.ruleset());
    let cells: BTreeMap<(i32, i32), usize> = p
        .tiles()
        .map(|(c, s)| ((c.q, c.r), p.ruleset().state_id(s).unwrap()))
        .collect();
    cells
        .iter()
        .filter_map(|(&c, &s)| {
            let t = step(c, o.male_of(s)?);
            cells.contains_key(&t).then_some((c, t))
        })
        .collect()
}

/// Undirected cycle test over the joint edges by union-find; a pair of
/// opposite edges counts as a cycle.
fn undirected_cycle(edges: &BTreeMap<(i32, i32), (i32, i32)>) -> bool {
    let mut parent: BTreeMap<(i32, i32), (i32, i32)> = BTreeMap::new();
    fn root(parent: &mut BTreeMap<(i32, i32), (i32, i32)>, x: (i32, i32)) -> (i32, i32) {
        let mut x = x;
        while let Some(&p) = parent.get(&x) {
            if p == x {
                break;
            }
            x = p;
        }
        x
    }
    for (&a, &b) in edges {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        if ra == rb {
            return true;
        }
        parent.insert(ra, rb);
    }
    false
}

/// Independent order check: every child strictly before its parent.
fn order_ok(p: &Patch, seq: &[AxialCell]) -> bool {
    let pos: BTreeMap<(i32, i32), usize> = seq
        .iter()
        .enumerate()
        .map(|(i, c)| ((c.q, c.r), i))
        .collect();
    joint_edges(p).iter().all(|(c, t)| pos[c] < pos[t])
}

#[test]
fn radius_two_graph_counts() {
    let p = grown(2, 7);
    let g = motif_graph(&p);
    assert_eq!(g.nodes().len(), 19);
    assert_eq!(g.edge_count(), 19 - g.dangling().len());
    assert_eq!(g.edge_count(), joint_edges(&p).len());
    let seq = placement_order(&p).unwrap();
    assert_eq!(seq.len(), 19);
    assert!(verify_order(&p, &seq).is_ok());
    assert_eq!(order_listing(&p, &seq).lines().count(), 19);
}

#[test]
fn order_is_independent_of_insertion_order() {
    let p = grown(3, 11);
    let tiles: Vec<_> = p.tiles().map(|(c, s)| (c, s.clone())).collect();
    let want = placement_order(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let mut shuffled = tiles.clone();
        shuffled.shuffle(&mut rng);
        let mut q = Patch::new(p.region().clone(), p.ruleset().clone());
        for (c, s) in &shuffled {
            q.assign(*c, s).unwrap();
        }
        assert_eq!(placement_order(&q).unwrap(), want);
    }
}

#[test]
fn order_takes_the_smallest_ready_cell() {
    let p = grown(4, 2);
    let seq = placement_order(&p).unwrap();
    let edges = joint_edges(&p);
    let mut placed = BTreeSet::new();
    for c in &seq {
        let ready: BTreeSet<(i32, i32)> = p
            .tiles()
            .map(|(c, _)| (c.q, c.r))
            .filter(|c| !placed.contains(c))
            .filter(|t| {
                edges
                    .iter()
                    .all(|(ch, par)| par != t || placed.contains(ch))
            })
            .collect();
        assert_eq!(ready.first(), Some(&(c.q, c.r)));
        placed.insert((c.q, c.r));
    }
}

#[test]
fn reversed_chain_is_rejected() {
    let p = grown(2, 7);
    let (&c, &t) = joint_edges(&p).iter().next().unwrap();
    let mut seq = placement_order(&p).unwrap();
    let i = seq.iter().position(|x| (x.q, x.r) == c).unwrap();
    let j = seq.iter().position(|x| (x.q, x.r) == t).unwrap();
    seq.swap(i, j);
    assert!(matches!(
        verify_order(&p, &seq),
        Err(OrderError::Violation { .. })
    ));
    seq.pop();
    assert!(matches!(
        verify_order(&p, &seq),
        Err(OrderError::NotPermutation(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Arbitrary (often invalid) patches: the directed cycle finder, the
    /// verifier's acyclicity clause and an undirected union-find agree.
    #[test]
    fn cycle_detection_agrees(seed in any::<u64>(), fill in 0.2f64..1.0) {
        let rs = hx();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let region = Region::hex(3);
        let mut p = Patch::new(region.clone(), rs.clone());
        let states: Vec<_> = rs.states().cloned().collect();
        for &c in region.cells() {
            if rng.gen_bool(fill) {
                p.assign(c, &states[rng.gen_range(0..states.len())]).unwrap();
            }
        }
        let directed = find_cycle(&motif_graph(&p)).is_some();
        prop_assert_eq!(directed, undirected_cycle(&joint_edges(&p)));
        let flagged = verify_patch(&p).iter().any(|v| v.clause == Clause::Acyclic);
        prop_assert_eq!(directed, flagged);
        prop_assert_eq!(placement_order(&p).is_err(), directed);
        if !directed {
            let seq = placement_order(&p).unwrap();
            prop_assert!(order_ok(&p, &seq));
        }
    }

    #[test]
    fn verify_order_matches_brute_force(seed in any::<u64>()) {
        let p = grown(2, seed % 8);
        let mut seq: Vec<AxialCell> = p.tiles().map(|(c, _)| c).collect();
        seq.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(verify_order(&p, &seq).is_ok(), order_ok(&p, &seq));
    }

    #[test]
    fn solver_patches_are_dendrites(seed in any::<u64>(), radius in 0u32..7) {
        let p = grown(radius, seed);
        let g = motif_graph(&p);
        prop_assert!(find_cycle(&g).is_none());
        prop_assert!(!undirected_cycle(&joint_edges(&p)));
        let seq = placement_order(&p).unwrap();
        prop_assert!(order_ok(&p, &seq));
        prop_assert_eq!(g.in_degree(seq[0]), Some(0));
    }
}
