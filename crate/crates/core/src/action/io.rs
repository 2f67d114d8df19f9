//! JSON action files.
//!
//! ```json
//! {"name": "AS over F_4", "tower": {"p": 2, "degrees": [1, 2]},
//!  "base_level": 0, "field_level": 1,
//!  "group": {"wild_orders": [2], "tame_orders": []}, "dimension": 1,
//!  "generators": [{"order": 2, "twist": 1, "matrix": [[1]], "translation": [[0, 1]]}]}
//! ```
//!
//! Entries of K are either an integer (its image in F_p) or the coordinate
//! list in the basis 1, t, t^2, ... of the level's absolute form.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AbelianGroupSpec, ActionError, AffineDatum, SemiLinearAffineAction, SemiLinearAffineGenerator};
use crate::gfq::{FieldElement, FieldTower, Fq, TowerDescription, TowerLimits};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementRepr {
    Int(i64),
    Coords(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDoc {
    pub order: u64,
    #[serde(default)]
    pub twist: u32,
    pub matrix: Vec<Vec<ElementRepr>>,
    pub translation: Vec<ElementRepr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub tower: TowerDescription,
    pub base_level: usize,
    pub field_level: usize,
    pub group: AbelianGroupSpec,
    pub dimension: usize,
    pub generators: Vec<GeneratorDoc>,
}

fn element(f: Fq<'_>, r: &ElementRepr) -> Result<FieldElement, ActionError> {
    match r {
        ElementRepr::Int(v) => Ok(f.from_int(*v)),
        ElementRepr::Coords(c) => {
            if c.len() > f.degree() || c.iter().any(|&x| x >= f.p()) {
                return Err(ActionError::Parse(format!("{c:?} is not an element of F_{}^{}", f.p(), f.degree())));
            }
            let mut c = c.clone();
            c.resize(f.degree(), 0);
            Ok(f.from_coords(&c))
        }
    }
}

fn repr(e: &FieldElement) -> ElementRepr {
    let c = e.coords();
    if c.iter().skip(1).all(|&x| x == 0) {
        ElementRepr::Int(c[0] as i64)
    } else {
        ElementRepr::Coords(c.to_vec())
    }
}

impl ActionDoc {
    pub fn from_json(s: &str) -> Result<Self, ActionError> {
        serde_json::from_str(s).map_err(|e| ActionError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("action documents serialize")
    }

    pub fn to_action(&self, limits: TowerLimits) -> Result<SemiLinearAffineAction, ActionError> {
        let tower = Arc::new(FieldTower::from_description(&self.tower, limits)?);
        let f = tower.checked_level(self.field_level)?;
        let mut gens = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let matrix = g
                .matrix
                .iter()
                .map(|row| row.iter().map(|e| element(f, e)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            let translation = g.translation.iter().map(|e| element(f, e)).collect::<Result<Vec<_>, _>>()?;
            gens.push(SemiLinearAffineGenerator {
                datum: AffineDatum { twist: g.twist, matrix, translation },
                declared_order: g.order,
            });
        }
        SemiLinearAffineAction::new(tower.clone(), self.base_level, self.field_level, self.group.clone(), self.dimension, gens)
    }

    pub fn from_action(action: &SemiLinearAffineAction) -> Self {
        ActionDoc {
            name: None,
            note: None,
            tower: action.tower().description(),
            base_level: action.base_level(),
            field_level: action.field_level(),
            group: action.group().clone(),
            dimension: action.dimension(),
            generators: action
                .generators()
                .iter()
                .map(|g| GeneratorDoc {
                    order: g.declared_order,
                    twist: g.datum.twist,
                    matrix: g.datum.matrix.iter().map(|r| r.iter().map(repr).collect()).collect(),
                    translation: g.datum.translation.iter().map(repr).collect(),
                })
                .collect(),
        }
    }
}

impl SemiLinearAffineAction {
    pub fn from_json(s: &str) -> Result<Self, ActionError> {
        let doc: ActionDoc = serde_json::from_str(s).map_err(|e| ActionError::Parse(e.to_string()))?;
        doc.to_action(TowerLimits::default())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ActionDoc::from_action(self)).expect("action documents serialize")
    }
}
