//! Patch documents: rule-set name and hash, region, and tiles sorted by
//! `(q, r)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Patch, PatchError};
use crate::hexgrid::{AxialCell, Region, RegionKind};
use crate::tilemodel::{Chirality, RuleSet, TileState};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchDoc {
    pub ruleset: String,
    pub ruleset_hash: String,
    pub region: RegionDoc,
    pub tiles: Vec<PatchTile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionDoc {
    Hex { radius: u32 },
    Cells { cells: Vec<[i32; 2]> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchTile {
    pub q: i32,
    pub r: i32,
    pub variant: String,
    pub orientation: u8,
    pub chirality: Chirality,
}

impl RegionDoc {
    pub fn from_region(region: &Region) -> RegionDoc {
        match region.kind() {
            RegionKind::Hex { radius } => RegionDoc::Hex { radius: *radius },
            RegionKind::Cells => RegionDoc::Cells {
                cells: region.cells().iter().map(|c| [c.q, c.r]).collect(),
            },
        }
    }

    pub fn to_region(&self) -> Region {
        match self {
            RegionDoc::Hex { radius } => Region::hex(*radius),
            RegionDoc::Cells { cells } => {
                Region::from_cells(cells.iter().map(|&[q, r]| AxialCell::new(q, r)))
            }
        }
    }
}

impl PatchDoc {
    pub fn from_patch(p: &Patch) -> PatchDoc {
        PatchDoc {
            ruleset: p.ruleset().name().to_string(),
            ruleset_hash: p.ruleset().hash(),
            region: RegionDoc::from_region(p.region()),
            tiles: p
                .tiles()
                .map(|(c, s)| PatchTile {
                    q: c.q,
                    r: c.r,
                    variant: s.variant.clone(),
                    orientation: s.orientation,
                    chirality: s.chirality,
                })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<PatchDoc, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("patch serializes");
        s.push('\n');
        s
    }

    /// Builds the patch against `rs`, which must match the recorded name and
    /// hash.
    pub fn to_patch(&self, rs: Arc<RuleSet>) -> Result<Patch, PatchError> {
        if rs.name() != self.ruleset || rs.hash() != self.ruleset_hash {
            return Err(PatchError::RuleSetMismatch {
                expected: self.ruleset.clone(),
                expected_hash: self.ruleset_hash.clone(),
                found: rs.name().to_string(),
                found_hash: rs.hash(),
            });
        }
        let mut p = Patch::new(self.region.to_region(), rs);
        for t in &self.tiles {
            let c = AxialCell::new(t.q, t.r);
            if p.get(c).is_some() {
                return Err(PatchError::DuplicateCell(c));
            }
            if t.orientation > 5 {
                return Err(PatchError::UnknownState {
                    state: TileState {
                        variant: t.variant.clone(),
                        orientation: t.orientation,
                        chirality: t.chirality,
                    },
                    ruleset: self.ruleset.clone(),
                });
            }
            p.assign(
                c,
                &TileState::new(t.variant.clone(), t.orientation, t.chirality),
            )?;
        }
        Ok(p)
    }
}

impl Patch {
    pub fn to_json(&self) -> String {
        PatchDoc::from_patch(self).to_json()
    }
}
