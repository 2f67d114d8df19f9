//! JSON form of SNC models.
//!
//! ```json
//! {"name": "x*y^2",
//!  "components": [{"name": "E1", "N": 1}, {"name": "E2", "N": 2}],
//!  "acted_symbols": [{"name": "G~", "order": 2, "quotient": "L - 1"}],
//!  "strata": [{"subset": ["E1"], "class_E": "L - 1", "class_E_cover": "L - 1", "m": 1}, ...],
//!  "total_class": "2*L - 1"}
//! ```
//!
//! Classes use the expression grammar of [`crate::mclass::parse_class`].
//! Every nonempty subset of components needs a stratum entry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentDoc {
    pub name: String,
    #[serde(rename = "N")]
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActedSymbolDoc {
    pub name: String,
    pub order: u32,
    pub quotient: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumDoc {
    pub subset: Vec<String>,
    #[serde(rename = "class_E")]
    pub class_e: String,
    #[serde(rename = "class_E_cover")]
    pub class_e_cover: String,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    pub components: Vec<ComponentDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub acted_symbols: Vec<ActedSymbolDoc>,
    pub strata: Vec<StratumDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generic_fiber: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub symbol_values: BTreeMap<String, String>,
}

impl ModelDoc {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents serialize")
    }

    pub fn stratum_mut(&mut self, subset: &[&str]) -> Option<&mut StratumDoc> {
        let mut want: Vec<&str> = subset.to_vec();
        want.sort_unstable();
        self.strata.iter_mut().find(|s| {
            let mut have: Vec<&str> = s.subset.iter().map(|x| x.as_str()).collect();
            have.sort_unstable();
            have == want
        })
    }
}
