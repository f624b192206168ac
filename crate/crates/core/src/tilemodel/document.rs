//! The rule-set document format.
//!
//! One JSON object with the keys, in this order: `name`, `variants`,
//! `base_edge_labels`, `base_corner_labels`, `k1_compat`, `k3_compat`,
//! `male_edge_offset`, `motif_strokes`. Per-face tables are lists of
//! entries keyed by `(variant, chirality)`; label vectors have length 6.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{used_labels, Anchor, Chirality, Face, Label, LabelId, RuleSet, RuleSetError, Stroke};
use crate::hexgrid::EdgeIndex;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSetDoc {
    pub name: String,
    pub variants: Vec<VariantDoc>,
    pub base_edge_labels: Vec<LabelTable>,
    pub base_corner_labels: Vec<LabelTable>,
    pub k1_compat: Vec<(Label, Label)>,
    pub k3_compat: Vec<(Label, Label)>,
    #[serde(default)]
    pub male_edge_offset: Vec<EdgeEntry>,
    #[serde(default)]
    pub motif_strokes: Vec<StrokeTable>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantDoc {
    pub id: String,
    pub chiralities: Vec<Chirality>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChiralityTable<T> {
    pub variant: String,
    pub chirality: Chirality,
    #[serde(flatten)]
    pub value: T,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub labels: Vec<Label>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub edge: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strokes {
    pub strokes: Vec<StrokeDoc>,
}

pub type LabelTable = ChiralityTable<Labels>;
pub type EdgeEntry = ChiralityTable<Edge>;
pub type StrokeTable = ChiralityTable<Strokes>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrokeDoc {
    pub layer: String,
    pub from: AnchorDoc,
    pub to: AnchorDoc,
}

/// Anchor token: `c` or `m0`..`m5`.
pub type AnchorDoc = String;

pub(super) fn load(text: &str) -> Result<RuleSet, RuleSetError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: RuleSetDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        RuleSetError::schema(
            if path == "." { "$".to_string() } else { path },
            e.into_inner().to_string(),
        )
    })?;
    from_doc(&doc)
}

pub fn from_doc(doc: &RuleSetDoc) -> Result<RuleSet, RuleSetError> {
    if doc.name.is_empty() {
        return Err(RuleSetError::schema("name", "must not be empty"));
    }
    if doc.variants.is_empty() {
        return Err(RuleSetError::schema(
            "variants",
            "at least one variant required",
        ));
    }
    let mut variants = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, v) in doc.variants.iter().enumerate() {
        if v.id.is_empty() || !seen.insert(v.id.clone()) {
            return Err(RuleSetError::schema(
                format!("variants[{i}].id"),
                format!("variant id `{}` is empty or duplicated", v.id),
            ));
        }
        let mut ch = v.chiralities.clone();
        ch.sort();
        ch.dedup();
        if ch.len() != v.chiralities.len() || ch.is_empty() {
            return Err(RuleSetError::schema(
                format!("variants[{i}].chiralities"),
                "must list R and/or F once each",
            ));
        }
        variants.push((v.id.clone(), ch));
    }
    let keys: Vec<(String, Chirality)> = variants
        .iter()
        .flat_map(|(id, ch)| ch.iter().map(move |c| (id.clone(), *c)))
        .collect();

    // Labels are interned in sorted order so ids do not depend on layout.
    let mut all_labels: BTreeSet<Label> = BTreeSet::new();
    for t in doc.base_edge_labels.iter().chain(&doc.base_corner_labels) {
        all_labels.extend(t.value.labels.iter().cloned());
    }
    let labels: Vec<Label> = all_labels.into_iter().collect();
    let id_of: BTreeMap<&Label, LabelId> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l, i as LabelId))
        .collect();

    let edge_tables = label_tables("base_edge_labels", &doc.base_edge_labels, &keys, &id_of)?;
    let corner_tables = label_tables("base_corner_labels", &doc.base_corner_labels, &keys, &id_of)?;

    let mut male: BTreeMap<(String, Chirality), EdgeIndex> = BTreeMap::new();
    for (i, m) in doc.male_edge_offset.iter().enumerate() {
        let path = format!("male_edge_offset[{i}]");
        let key = check_key(&path, &m.variant, m.chirality, &keys)?;
        let e = EdgeIndex::new(m.value.edge as usize)
            .map_err(|_| RuleSetError::schema(format!("{path}.edge"), "must be in 0..5"))?;
        if male.insert(key, e).is_some() {
            return Err(RuleSetError::schema(path, "duplicate entry"));
        }
    }

    let mut strokes: BTreeMap<(String, Chirality), Vec<Stroke>> = BTreeMap::new();
    for (i, t) in doc.motif_strokes.iter().enumerate() {
        let path = format!("motif_strokes[{i}]");
        let key = check_key(&path, &t.variant, t.chirality, &keys)?;
        let mut list = Vec::new();
        for (j, s) in t.value.strokes.iter().enumerate() {
            let sp = format!("{path}.strokes[{j}]");
            let from: Anchor = s
                .from
                .parse()
                .map_err(|m| RuleSetError::schema(format!("{sp}.from"), m))?;
            let to: Anchor =
                s.to.parse()
                    .map_err(|m| RuleSetError::schema(format!("{sp}.to"), m))?;
            if from == to {
                return Err(RuleSetError::schema(sp, "stroke endpoints coincide"));
            }
            if s.layer.is_empty() {
                return Err(RuleSetError::schema(
                    format!("{sp}.layer"),
                    "must not be empty",
                ));
            }
            list.push(Stroke {
                layer: s.layer.clone(),
                from,
                to,
            });
        }
        if strokes.insert(key, list).is_some() {
            return Err(RuleSetError::schema(path, "duplicate entry"));
        }
    }

    let mut faces = Vec::new();
    for key in &keys {
        faces.push(Face {
            variant: key.0.clone(),
            chirality: key.1,
            edge_labels: edge_tables[key],
            corner_labels: corner_tables[key],
            male_edge_offset: male.get(key).copied(),
            strokes: strokes.get(key).cloned().unwrap_or_default(),
        });
    }

    let (edge_used, corner_used) = used_labels(&faces);
    let k1 = relation(
        "k1_compat",
        &doc.k1_compat,
        &id_of,
        &edge_used,
        "edge",
        labels.len(),
    )?;
    let k3 = relation(
        "k3_compat",
        &doc.k3_compat,
        &id_of,
        &corner_used,
        "corner",
        labels.len(),
    )?;
    for a in 0..labels.len() {
        for b in 0..labels.len() {
            if k1[a][b] && !k1[b][a] {
                return Err(RuleSetError::AsymmetricK1(
                    labels[a].0.clone(),
                    labels[b].0.clone(),
                ));
            }
        }
    }

    RuleSet::build(doc.name.clone(), variants, labels, faces, k1, k3)
}

fn check_key(
    path: &str,
    variant: &str,
    chirality: Chirality,
    keys: &[(String, Chirality)],
) -> Result<(String, Chirality), RuleSetError> {
    let key = (variant.to_string(), chirality);
    if keys.contains(&key) {
        Ok(key)
    } else {
        Err(RuleSetError::schema(
            path,
            format!("variant `{variant}` chirality {chirality} is not declared"),
        ))
    }
}

fn label_tables(
    field: &str,
    tables: &[LabelTable],
    keys: &[(String, Chirality)],
    id_of: &BTreeMap<&Label, LabelId>,
) -> Result<BTreeMap<(String, Chirality), [LabelId; 6]>, RuleSetError> {
    let mut out = BTreeMap::new();
    for (i, t) in tables.iter().enumerate() {
        let path = format!("{field}[{i}]");
        let key = check_key(&path, &t.variant, t.chirality, keys)?;
        let ls = &t.value.labels;
        if ls.len() != 6 {
            return Err(RuleSetError::schema(
                format!("{path}.labels"),
                format!(
                    "variant `{}` chirality {}: expected 6 labels, found {} (index {} missing)",
                    t.variant,
                    t.chirality,
                    ls.len(),
                    ls.len().min(6)
                ),
            ));
        }
        let ids: [LabelId; 6] = std::array::from_fn(|k| id_of[&ls[k]]);
        if out.insert(key, ids).is_some() {
            return Err(RuleSetError::schema(path, "duplicate entry"));
        }
    }
    for key in keys {
        if !out.contains_key(key) {
            return Err(RuleSetError::MissingEntry {
                path: field.to_string(),
                variant: key.0.clone(),
                chirality: key.1,
            });
        }
    }
    Ok(out)
}

fn relation(
    field: &str,
    pairs: &[(Label, Label)],
    id_of: &BTreeMap<&Label, LabelId>,
    used: &BTreeSet<LabelId>,
    table: &'static str,
    n: usize,
) -> Result<Vec<Vec<bool>>, RuleSetError> {
    let mut m = vec![vec![false; n]; n];
    for (i, (a, b)) in pairs.iter().enumerate() {
        let mut ids = [0 as LabelId; 2];
        for (j, l) in [a, b].into_iter().enumerate() {
            match id_of.get(l) {
                Some(&id) if used.contains(&id) => ids[j] = id,
                _ => {
                    return Err(RuleSetError::DanglingLabel {
                        path: format!("{field}[{i}][{j}]"),
                        label: l.0.clone(),
                        table,
                    })
                }
            }
        }
        m[ids[0] as usize][ids[1] as usize] = true;
    }
    Ok(m)
}

pub(super) fn to_doc(rs: &RuleSet) -> RuleSetDoc {
    let label = |id: LabelId| rs.label(id).clone();
    let pairs = |m: &Vec<Vec<bool>>| {
        let mut out = Vec::new();
        for (a, row) in m.iter().enumerate() {
            for (b, &ok) in row.iter().enumerate() {
                if ok {
                    out.push((label(a as LabelId), label(b as LabelId)));
                }
            }
        }
        out
    };
    let table = |f: &Face, ids: &[LabelId; 6]| LabelTable {
        variant: f.variant.clone(),
        chirality: f.chirality,
        value: Labels {
            labels: ids.iter().map(|&i| label(i)).collect(),
        },
    };
    RuleSetDoc {
        name: rs.name.clone(),
        variants: rs
            .variants
            .iter()
            .map(|(id, ch)| VariantDoc {
                id: id.clone(),
                chiralities: ch.clone(),
            })
            .collect(),
        base_edge_labels: rs.faces.iter().map(|f| table(f, &f.edge_labels)).collect(),
        base_corner_labels: rs
            .faces
            .iter()
            .map(|f| table(f, &f.corner_labels))
            .collect(),
        k1_compat: pairs(&rs.k1),
        k3_compat: pairs(&rs.k3),
        male_edge_offset: rs
            .faces
            .iter()
            .filter_map(|f| {
                f.male_edge_offset.map(|e| EdgeEntry {
                    variant: f.variant.clone(),
                    chirality: f.chirality,
                    value: Edge {
                        edge: e.index() as u8,
                    },
                })
            })
            .collect(),
        motif_strokes: rs
            .faces
            .iter()
            .filter(|f| !f.strokes.is_empty())
            .map(|f| StrokeTable {
                variant: f.variant.clone(),
                chirality: f.chirality,
                value: Strokes {
                    strokes: f
                        .strokes
                        .iter()
                        .map(|s| StrokeDoc {
                            layer: s.layer.clone(),
                            from: s.from.to_string(),
                            to: s.to.to_string(),
                        })
                        .collect(),
                },
            })
            .collect(),
    }
}

pub(super) fn emit(rs: &RuleSet) -> String {
    let mut s = serde_json::to_string_pretty(&to_doc(rs)).expect("document serializes");
    s.push('\n');
    s
}
