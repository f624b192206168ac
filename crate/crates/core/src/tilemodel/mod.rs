//! Data-driven decorated hexagonal monotiles.
//!
//! A [`RuleSet`] names the ways one tile can be laid ([`TileState`]s), the
//! labels each state shows on its edges and corners, the relations those
//! labels must satisfy between neighbors, the single male joint edge, and
//! the motif strokes drawn on the tile. Everything is loaded from a JSON
//! document; see [`RuleSetDoc`].

mod document;
pub mod search;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::hexgrid::{AxialCell, CornerIndex, EdgeIndex};

pub use document::{
    AnchorDoc, ChiralityTable, EdgeEntry, LabelTable, RuleSetDoc, StrokeDoc, StrokeTable,
    VariantDoc,
};

/// Largest state count the solver's bitset domains can hold.
pub const MAX_STATES: usize = 128;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub String);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Which face of the physical tile is up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Chirality {
    /// Recto.
    R,
    /// Verso (flipped).
    F,
}

impl fmt::Display for Chirality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chirality::R => "R",
            Chirality::F => "F",
        })
    }
}

impl FromStr for Chirality {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "R" => Ok(Chirality::R),
            "F" => Ok(Chirality::F),
            _ => Err(format!("unknown chirality `{s}` (expected R or F)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileState {
    pub variant: String,
    pub orientation: u8,
    pub chirality: Chirality,
}

impl TileState {
    pub fn new(variant: impl Into<String>, orientation: u8, chirality: Chirality) -> Self {
        TileState {
            variant: variant.into(),
            orientation: orientation % 6,
            chirality,
        }
    }

    pub fn rotated(&self, k: i64) -> TileState {
        TileState {
            variant: self.variant.clone(),
            orientation: (self.orientation as i64 + k).rem_euclid(6) as u8,
            chirality: self.chirality,
        }
    }
}

impl fmt::Display for TileState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}{}", self.variant, self.chirality, self.orientation)
    }
}

pub fn rotate_state(s: &TileState, k: i64) -> TileState {
    s.rotated(k)
}

/// Stroke endpoint in tile coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anchor {
    Center,
    Midpoint(EdgeIndex),
}

impl Anchor {
    pub fn rotated(self, k: i64) -> Anchor {
        match self {
            Anchor::Center => Anchor::Center,
            Anchor::Midpoint(e) => Anchor::Midpoint(e.rotate(k)),
        }
    }

    /// Position in doubled axial coordinates, so that neighboring cells
    /// agree exactly on shared midpoints.
    pub fn lattice_point(self, cell: AxialCell) -> [i32; 2] {
        let base = [2 * cell.q, 2 * cell.r];
        match self {
            Anchor::Center => base,
            Anchor::Midpoint(e) => {
                let d = e.direction();
                [base[0] + d.q, base[1] + d.r]
            }
        }
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anchor::Center => f.write_str("c"),
            Anchor::Midpoint(e) => write!(f, "m{e}"),
        }
    }
}

impl FromStr for Anchor {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "c" {
            return Ok(Anchor::Center);
        }
        s.strip_prefix('m')
            .and_then(|d| d.parse::<usize>().ok())
            .and_then(|d| EdgeIndex::new(d).ok())
            .map(Anchor::Midpoint)
            .ok_or_else(|| format!("bad anchor `{s}` (expected c or m0..m5)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stroke {
    pub layer: String,
    pub from: Anchor,
    pub to: Anchor,
}

impl Stroke {
    pub fn rotated(&self, k: i64) -> Stroke {
        Stroke {
            layer: self.layer.clone(),
            from: self.from.rotated(k),
            to: self.to.rotated(k),
        }
    }
}

/// Index into [`RuleSet::labels`].
pub type LabelId = u16;

/// Decorations of one `(variant, chirality)` face in orientation 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub variant: String,
    pub chirality: Chirality,
    pub edge_labels: [LabelId; 6],
    pub corner_labels: [LabelId; 6],
    pub male_edge_offset: Option<EdgeIndex>,
    pub strokes: Vec<Stroke>,
}

/// Precomputed decorations of one state in absolute edge/corner indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateInfo {
    pub state: TileState,
    pub face: usize,
    pub edge: [LabelId; 6],
    pub corner: [LabelId; 6],
    pub male: Option<EdgeIndex>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleSetError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("k1_compat is not symmetric: ({0}, {1}) is listed without ({1}, {0})")]
    AsymmetricK1(String, String),
    #[error("{path}: label `{label}` does not appear in any base {table} table")]
    DanglingLabel {
        path: String,
        label: String,
        table: &'static str,
    },
    #[error("{path}: missing entry for variant `{variant}` chirality {chirality}")]
    MissingEntry {
        path: String,
        variant: String,
        chirality: Chirality,
    },
    #[error("rule set declares {0} states; at most {MAX_STATES} are supported")]
    TooManyStates(usize),
}

impl RuleSetError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        RuleSetError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// A validated, immutable rule set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    name: String,
    variants: Vec<(String, Vec<Chirality>)>,
    labels: Vec<Label>,
    faces: Vec<Face>,
    k1: Vec<Vec<bool>>,
    k3: Vec<Vec<bool>>,
    states: Vec<StateInfo>,
    index: BTreeMap<TileState, usize>,
}

impl RuleSet {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variants(&self) -> &[(String, Vec<Chirality>)] {
        &self.variants
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, id: LabelId) -> &Label {
        &self.labels[id as usize]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn k1(&self, a: LabelId, b: LabelId) -> bool {
        self.k1[a as usize][b as usize]
    }

    pub fn k3(&self, a: LabelId, b: LabelId) -> bool {
        self.k3[a as usize][b as usize]
    }

    /// Number of states; state ids are `0..state_count()`.
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_info(&self, id: usize) -> &StateInfo {
        &self.states[id]
    }

    pub fn state(&self, id: usize) -> &TileState {
        &self.states[id].state
    }

    pub fn state_id(&self, s: &TileState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn states(&self) -> impl Iterator<Item = &TileState> {
        self.states.iter().map(|i| &i.state)
    }

    /// True when every face declares a male joint.
    pub fn is_male_total(&self) -> bool {
        self.faces.iter().all(|f| f.male_edge_offset.is_some())
    }

    pub fn has_male_edges(&self) -> bool {
        self.faces.iter().any(|f| f.male_edge_offset.is_some())
    }

    pub fn has_layer(&self, layer: &str) -> bool {
        self.faces
            .iter()
            .any(|f| f.strokes.iter().any(|s| s.layer == layer))
    }

    /// Strokes of a state, rotated into absolute anchors.
    pub fn strokes(&self, id: usize) -> impl Iterator<Item = Stroke> + '_ {
        let info = &self.states[id];
        let k = info.state.orientation as i64;
        self.faces[info.face]
            .strokes
            .iter()
            .map(move |s| s.rotated(k))
    }

    /// Hex digest of the canonical document.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn from_json(text: &str) -> Result<RuleSet, RuleSetError> {
        load_ruleset(text)
    }

    /// Canonical serialization; `load_ruleset(rs.to_json()) == rs`.
    pub fn to_json(&self) -> String {
        document::emit(self)
    }

    pub fn to_doc(&self) -> RuleSetDoc {
        document::to_doc(self)
    }

    pub(crate) fn build(
        name: String,
        variants: Vec<(String, Vec<Chirality>)>,
        labels: Vec<Label>,
        faces: Vec<Face>,
        k1: Vec<Vec<bool>>,
        k3: Vec<Vec<bool>>,
    ) -> Result<RuleSet, RuleSetError> {
        let mut states = Vec::new();
        let mut index = BTreeMap::new();
        for (fi, face) in faces.iter().enumerate() {
            for o in 0..6u8 {
                let state = TileState::new(face.variant.clone(), o, face.chirality);
                let rot = |base: &[LabelId; 6]| {
                    std::array::from_fn(|i| base[(i as i64 - o as i64).rem_euclid(6) as usize])
                };
                index.insert(state.clone(), states.len());
                states.push(StateInfo {
                    state,
                    face: fi,
                    edge: rot(&face.edge_labels),
                    corner: rot(&face.corner_labels),
                    male: face.male_edge_offset.map(|e| e.rotate(o as i64)),
                });
            }
        }
        if states.len() > MAX_STATES {
            return Err(RuleSetError::TooManyStates(states.len()));
        }
        Ok(RuleSet {
            name,
            variants,
            labels,
            faces,
            k1,
            k3,
            states,
            index,
        })
    }
}

pub fn load_ruleset(text: &str) -> Result<RuleSet, RuleSetError> {
    document::load(text)
}

pub fn enumerate_states(rs: &RuleSet) -> Vec<TileState> {
    rs.states().cloned().collect()
}

fn info<'a>(rs: &'a RuleSet, s: &TileState) -> &'a StateInfo {
    let id = rs
        .state_id(s)
        .unwrap_or_else(|| panic!("state {s} is not declared by rule set `{}`", rs.name()));
    rs.state_info(id)
}

/// Label on absolute edge `e` of a tile laid in state `s`.
///
/// Panics if `s` is not a state of `rs`.
pub fn edge_label<'a>(rs: &'a RuleSet, s: &TileState, e: EdgeIndex) -> &'a Label {
    rs.label(info(rs, s).edge[e.index()])
}

pub fn corner_label<'a>(rs: &'a RuleSet, s: &TileState, k: CornerIndex) -> &'a Label {
    rs.label(info(rs, s).corner[k.index()])
}

pub fn male_edge_abs(rs: &RuleSet, s: &TileState) -> Option<EdgeIndex> {
    info(rs, s).male
}

/// Labels used on edges and corners respectively.
pub(crate) fn used_labels(faces: &[Face]) -> (BTreeSet<LabelId>, BTreeSet<LabelId>) {
    let mut edges = BTreeSet::new();
    let mut corners = BTreeSet::new();
    for f in faces {
        edges.extend(f.edge_labels);
        corners.extend(f.corner_labels);
    }
    (edges, corners)
}

/// The rule sets shipped with the crate, as `(name, document)`.
pub const SHIPPED: [(&str, &str); 3] = [
    ("unmarked", include_str!("../../rulesets/unmarked.json")),
    ("st12", include_str!("../../rulesets/st12.json")),
    ("hextoo6", include_str!("../../rulesets/hextoo6.json")),
];

/// Template that `search_rulesets` expands into the shipped `hextoo6`.
pub const HEXTOO6_TEMPLATE: &str = include_str!("../../rulesets/hextoo6.template.json");

pub fn shipped(name: &str) -> Option<RuleSet> {
    SHIPPED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, doc)| load_ruleset(doc).expect("shipped rule set is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_shipped() -> Vec<RuleSet> {
        SHIPPED.iter().map(|(n, _)| shipped(n).unwrap()).collect()
    }

    #[test]
    fn state_counts() {
        assert_eq!(enumerate_states(&shipped("st12").unwrap()).len(), 12);
        assert_eq!(enumerate_states(&shipped("hextoo6").unwrap()).len(), 6);
        assert_eq!(enumerate_states(&shipped("unmarked").unwrap()).len(), 6);
    }

    #[test]
    fn states_are_distinct() {
        for rs in all_shipped() {
            let set: BTreeSet<_> = rs.states().collect();
            assert_eq!(set.len(), rs.state_count());
        }
    }

    #[test]
    fn edge_label_rotation_examples() {
        let rs = shipped("st12").unwrap();
        let face = &rs.faces()[0];
        let s0 = TileState::new(face.variant.clone(), 0, face.chirality);
        let s1 = s0.rotated(1);
        let s3 = s0.rotated(3);
        let l = |id: LabelId| rs.label(id).clone();
        assert_eq!(
            *edge_label(&rs, &s0, EdgeIndex::wrap(2)),
            l(face.edge_labels[2])
        );
        assert_eq!(
            *edge_label(&rs, &s1, EdgeIndex::wrap(0)),
            l(face.edge_labels[5])
        );
        assert_eq!(
            *corner_label(&rs, &s0, CornerIndex::wrap(4)),
            l(face.corner_labels[4])
        );
        assert_eq!(
            *corner_label(&rs, &s3, CornerIndex::wrap(0)),
            l(face.corner_labels[3])
        );
    }

    #[test]
    fn label_equivariance_exhaustive() {
        for rs in all_shipped() {
            for s in rs.states() {
                for k in 0..6i64 {
                    let t = rotate_state(s, k);
                    for i in 0..6i64 {
                        assert_eq!(
                            edge_label(&rs, &t, EdgeIndex::wrap(i + k)),
                            edge_label(&rs, s, EdgeIndex::wrap(i))
                        );
                        assert_eq!(
                            corner_label(&rs, &t, CornerIndex::wrap(i + k)),
                            corner_label(&rs, s, CornerIndex::wrap(i))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn male_edges() {
        let hx = shipped("hextoo6").unwrap();
        let off = hx.faces()[0].male_edge_offset.unwrap();
        for o in 0..6u8 {
            let s = TileState::new(hx.faces()[0].variant.clone(), o, Chirality::R);
            assert_eq!(male_edge_abs(&hx, &s), Some(off.rotate(o as i64)));
        }
        let st = shipped("st12").unwrap();
        for s in st.states() {
            assert_eq!(male_edge_abs(&st, s), None);
        }
        assert!(hx.is_male_total());
        assert!(!st.is_male_total());
    }

    #[test]
    fn male_edge_is_bijective_per_face_when_total() {
        for rs in all_shipped().into_iter().filter(|r| r.is_male_total()) {
            for face in rs.faces() {
                let edges: BTreeSet<_> = rs
                    .states()
                    .filter(|s| s.variant == face.variant && s.chirality == face.chirality)
                    .map(|s| male_edge_abs(&rs, s).unwrap())
                    .collect();
                assert_eq!(edges.len(), 6);
            }
        }
    }

    #[test]
    fn anchors_parse() {
        assert_eq!("c".parse::<Anchor>().unwrap(), Anchor::Center);
        assert_eq!(
            "m4".parse::<Anchor>().unwrap(),
            Anchor::Midpoint(EdgeIndex::wrap(4))
        );
        assert!("m6".parse::<Anchor>().is_err());
        assert!("x".parse::<Anchor>().is_err());
    }

    #[test]
    fn shared_midpoints_coincide() {
        let a = AxialCell::new(2, -1);
        for e in EdgeIndex::ALL {
            let b = a.neighbor(e);
            assert_eq!(
                Anchor::Midpoint(e).lattice_point(a),
                Anchor::Midpoint(e.opposite()).lattice_point(b)
            );
        }
    }
}
