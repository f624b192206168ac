//! Desk-scale aperiodicity evidence: translation scans of finite patches,
//! exhaustive torus scans and the census of closed motif loops.
//!
//! None of this is a proof. A torus scan that is UNSAT up to some determinant
//! only rules out periodic tilings whose period lattice has that index, and a
//! translation scan only looks at one finite patch.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::exec::Execution;
use crate::hexgrid::{AxialCell, TorusBasis};
use crate::solver::{solve_torus, Patch, SolveStats, SolverConfig};
use crate::tilemodel::RuleSet;

pub const DEFAULT_MIN_OVERLAP: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationEntry {
    pub t: AxialCell,
    pub overlap: usize,
    pub full_match: bool,
    pub low_confidence: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationReport {
    pub patch_id: String,
    pub cells: usize,
    pub min_overlap_fraction: f64,
    pub entries: Vec<TranslationEntry>,
}

impl TranslationReport {
    /// Nonzero vectors that match on an overlap large enough to count.
    pub fn periods(&self) -> Vec<AxialCell> {
        self.entries
            .iter()
            .filter(|e| e.full_match && !e.low_confidence && e.t != AxialCell::ORIGIN)
            .map(|e| e.t)
            .collect()
    }

    pub fn entry(&self, t: AxialCell) -> Option<&TranslationEntry> {
        self.entries.iter().find(|e| e.t == t)
    }
}

/// Short digest of the patch document.
pub fn patch_id(p: &Patch) -> String {
    hex::encode(&Sha256::digest(p.to_json().as_bytes())[..8])
}

/// Compares `state(c)` with `state(c + t)` for every `t` with
/// `|t.q|, |t.r| <= max_len`, over cells where both are assigned.
pub fn scan_translations(p: &Patch, max_len: i32, min_overlap_fraction: f64) -> TranslationReport {
    let tiles: BTreeMap<AxialCell, usize> = p.tile_ids().collect();
    let threshold = min_overlap_fraction * p.region().len() as f64;
    let mut entries = Vec::new();
    for q in -max_len..=max_len {
        for r in -max_len..=max_len {
            let t = AxialCell::new(q, r);
            let mut overlap = 0;
            let mut full_match = true;
            for (&c, &s) in &tiles {
                if let Some(&s2) = tiles.get(&(c + t)) {
                    overlap += 1;
                    full_match &= s == s2;
                }
            }
            entries.push(TranslationEntry {
                t,
                overlap,
                full_match,
                low_confidence: (overlap as f64) < threshold,
            });
        }
    }
    TranslationReport {
        patch_id: patch_id(p),
        cells: tiles.len(),
        min_overlap_fraction,
        entries,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusEntry {
    pub u: AxialCell,
    pub v: AxialCell,
    pub det: i64,
    pub outcome: String,
    pub stats: SolveStats,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusSummary {
    pub bases: usize,
    pub sat: usize,
    pub unsat: usize,
    pub limit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusScanReport {
    pub ruleset: String,
    pub ruleset_hash: String,
    pub max_det: u32,
    pub node_limit: u64,
    pub entries: Vec<TorusEntry>,
    pub summary: TorusSummary,
    pub note: String,
}

impl TorusScanReport {
    /// True when no entry hit the node limit.
    pub fn exhaustive(&self) -> bool {
        self.summary.limit == 0
    }

    pub fn all_unsat(&self) -> bool {
        self.summary.unsat == self.summary.bases
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable summary block.
    pub fn summary_text(&self) -> String {
        let s = &self.summary;
        let mut out = format!(
            "torus scan: {} ({}), |det| <= {}\n  bases: {}\n  SAT: {}\n  UNSAT: {}\n  LIMIT: {}\n",
            self.ruleset, self.ruleset_hash, self.max_det, s.bases, s.sat, s.unsat, s.limit
        );
        for e in self.entries.iter().filter(|e| e.outcome != "UNSAT") {
            out.push_str(&format!(
                "  {} u={} v={} det={}\n",
                e.outcome, e.u, e.v, e.det
            ));
        }
        out.push_str(&format!("  note: {}\n", self.note));
        out
    }
}

/// Solves every canonical torus with `1 <= det <= max_det`.
pub fn torus_scan(
    max_det: u32,
    rs: &RuleSet,
    cfg: &SolverConfig,
    exec: Execution,
) -> TorusScanReport {
    let bases = TorusBasis::canonical_bases(max_det);
    let entries: Vec<TorusEntry> = exec.map(&bases, |b| {
        let r = solve_torus(b, rs, cfg).expect("canonical bases are nondegenerate");
        TorusEntry {
            u: b.u,
            v: b.v,
            det: b.det(),
            outcome: r.outcome.label().to_string(),
            stats: r.stats,
        }
    });
    let count = |o: &str| entries.iter().filter(|e| e.outcome == o).count();
    let summary = TorusSummary {
        bases: entries.len(),
        sat: count("SAT"),
        unsat: count("UNSAT"),
        limit: count("LIMIT"),
    };
    let note = format!(
        "UNSAT rules out periodic tilings whose period lattice has index at most {max_det}; \
         it is finite evidence, not a proof of aperiodicity"
    );
    TorusScanReport {
        ruleset: rs.name().to_string(),
        ruleset_hash: rs.hash(),
        max_det,
        node_limit: cfg.node_limit,
        entries,
        summary,
        note,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Loop {
    /// Anchor points in doubled axial coordinates, counterclockwise; the
    /// walk closes back on the first node.
    pub nodes: Vec<[i32; 2]>,
    /// Owning cell of each segment `nodes[i] -> nodes[i + 1]`.
    pub cells: Vec<AxialCell>,
    pub segments: usize,
    pub diameter: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopCensus {
    pub layer: String,
    pub loops: Vec<Loop>,
}

impl LoopCensus {
    /// Number of loops per diameter.
    pub fn diameters(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for l in &self.loops {
            *out.entry(l.diameter).or_default() += 1;
        }
        out
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CensusError {
    #[error("rule set `{ruleset}` has no motif strokes on layer `{layer}`")]
    NoSuchLayer { ruleset: String, layer: String },
}

fn planar(p: [i32; 2]) -> (f64, f64) {
    let (a, b) = (p[0] as f64, p[1] as f64);
    (a + b / 2.0, b * 3f64.sqrt() / 2.0)
}

/// Twice the signed area in the skew axial frame; same sign as the planar
/// area.
fn signed_area(nodes: &[[i32; 2]]) -> i64 {
    let n = nodes.len();
    (0..n)
        .map(|i| {
            let (a, b) = (nodes[i], nodes[(i + 1) % n]);
            a[0] as i64 * b[1] as i64 - b[0] as i64 * a[1] as i64
        })
        .sum()
}

/// Bounded faces of the planar stroke graph on `layer`.
///
/// Faces are traced by always taking the next edge clockwise from the one
/// just arrived on, which keeps the face on the left; bounded faces then
/// come out counterclockwise. Only faces whose boundary is a simple cycle
/// are reported.
pub fn loop_census(p: &Patch, layer: &str) -> Result<LoopCensus, CensusError> {
    let rs = p.ruleset();
    if !rs.has_layer(layer) {
        return Err(CensusError::NoSuchLayer {
            ruleset: rs.name().to_string(),
            layer: layer.to_string(),
        });
    }
    let mut owner: BTreeMap<([i32; 2], [i32; 2]), AxialCell> = BTreeMap::new();
    let mut adj: BTreeMap<[i32; 2], Vec<[i32; 2]>> = BTreeMap::new();
    for (c, id) in p.tile_ids() {
        for s in rs.strokes(id).filter(|s| s.layer == layer) {
            let (a, b) = (s.from.lattice_point(c), s.to.lattice_point(c));
            if owner.insert((a, b), c).is_none() {
                owner.insert((b, a), c);
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
        }
    }
    let angle = |from: [i32; 2], to: [i32; 2]| {
        let (x0, y0) = planar(from);
        let (x1, y1) = planar(to);
        (y1 - y0).atan2(x1 - x0)
    };
    for (v, out) in adj.iter_mut() {
        out.sort_by(|a, b| angle(*v, *a).total_cmp(&angle(*v, *b)));
        out.dedup();
    }
    // next(u -> v) = v -> w where w is the neighbor of v just clockwise of u
    let next = |u: [i32; 2], v: [i32; 2]| -> [i32; 2] {
        let out = &adj[&v];
        let i = out.iter().position(|&w| w == u).expect("reverse edge");
        out[(i + out.len() - 1) % out.len()]
    };
    let mut seen: BTreeSet<([i32; 2], [i32; 2])> = BTreeSet::new();
    let mut loops = Vec::new();
    for &(a, b) in owner.keys() {
        if seen.contains(&(a, b)) {
            continue;
        }
        let mut nodes = Vec::new();
        let (mut u, mut v) = (a, b);
        loop {
            seen.insert((u, v));
            nodes.push(u);
            let w = next(u, v);
            (u, v) = (v, w);
            if (u, v) == (a, b) {
                break;
            }
        }
        let distinct: BTreeSet<_> = nodes.iter().collect();
        if distinct.len() != nodes.len() || signed_area(&nodes) <= 0 {
            continue;
        }
        let n = nodes.len();
        let cells: Vec<AxialCell> = (0..n)
            .map(|i| owner[&(nodes[i], nodes[(i + 1) % n])])
            .collect();
        let diameter = cells
            .iter()
            .flat_map(|x| cells.iter().map(move |y| x.distance(*y)))
            .max()
            .unwrap_or(0);
        let start = (0..n).min_by_key(|&i| nodes[i]).unwrap_or(0);
        let mut cells = cells;
        nodes.rotate_left(start);
        cells.rotate_left(start);
        loops.push(Loop {
            nodes,
            cells,
            segments: n,
            diameter,
        });
    }
    loops.sort_by(|x, y| (x.diameter, &x.nodes).cmp(&(y.diameter, &y.nodes)));
    Ok(LoopCensus {
        layer: layer.to_string(),
        loops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexgrid::Region;
    use crate::tilemodel::shipped;
    use std::sync::Arc;

    fn st12_with(tiles: &[(AxialCell, u8)]) -> Patch {
        let rs = Arc::new(shipped("st12").unwrap());
        let mut p = Patch::new(Region::from_cells(tiles.iter().map(|t| t.0)), rs.clone());
        for &(c, o) in tiles {
            p.assign(c, &rs.state(0).rotated(o as i64)).unwrap();
        }
        p
    }

    #[test]
    fn three_corner_strokes_close_a_triangle() {
        // Corner strokes sit at corners 0 and 3 in orientation 0. Around the
        // vertex at corner 0 of the origin the three cells see it as their
        // corners 0, 2 and 4.
        let p = st12_with(&[
            (AxialCell::new(0, 0), 0),
            (AxialCell::new(1, 0), 2),
            (AxialCell::new(0, 1), 4),
        ]);
        let census = loop_census(&p, "stripe").unwrap();
        assert_eq!(census.loops.len(), 1);
        let l = &census.loops[0];
        assert_eq!(l.segments, 3);
        assert_eq!(l.diameter, 1);
        assert!(signed_area(&l.nodes) > 0);
    }

    #[test]
    fn empty_patch_has_no_loops() {
        let rs = Arc::new(shipped("st12").unwrap());
        let p = Patch::new(Region::hex(2), rs);
        assert!(loop_census(&p, "stripe").unwrap().loops.is_empty());
    }

    #[test]
    fn missing_layer_is_rejected() {
        let rs = Arc::new(shipped("unmarked").unwrap());
        let p = Patch::new(Region::hex(1), rs);
        assert!(matches!(
            loop_census(&p, "stripe"),
            Err(CensusError::NoSuchLayer { .. })
        ));
    }

    #[test]
    fn constant_patch_matches_everywhere() {
        let rs = Arc::new(shipped("unmarked").unwrap());
        let mut p = Patch::new(Region::hex(3), rs.clone());
        for c in Region::hex(3).cells().clone() {
            p.assign(c, rs.state(2)).unwrap();
        }
        let report = scan_translations(&p, 3, DEFAULT_MIN_OVERLAP);
        assert!(report.entries.iter().all(|e| e.full_match));
        assert!(report.entry(AxialCell::ORIGIN).unwrap().overlap == 37);
        assert!(!report.periods().is_empty());
    }

    #[test]
    fn signed_area_orientation() {
        assert!(signed_area(&[[0, 0], [2, 0], [0, 2]]) > 0);
        assert!(signed_area(&[[0, 0], [0, 2], [2, 0]]) < 0);
    }
}
