use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CausalBayesianNetwork, Variable};
use crate::error::{Error, Result};

/// The JSON model file: `{"variables": [...]}`.
///
/// A document is an unvalidated candidate model; [`super::validate`] reports
/// every problem with it and [`CausalBayesianNetwork::from_document`] turns a
/// clean one into a network. A document whose `cpt` lists are empty is a
/// skeleton for [`super::fit_cpts`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelDocument {
    pub variables: Vec<VariableEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableEntry {
    #[serde(flatten)]
    pub variable: Variable,
    #[serde(default)]
    pub cpt: Vec<CptRowEntry>,
}

/// One CPT row: the parent configuration and the distribution over the
/// owner's states. States missing from `dist` have probability 0.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CptRowEntry {
    #[serde(default)]
    pub given: BTreeMap<String, String>,
    pub dist: BTreeMap<String, f64>,
}

impl ModelDocument {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents always serialize") + "\n"
    }

    /// Skeleton view: same variables, no CPT rows.
    pub fn skeleton(&self) -> ModelDocument {
        ModelDocument {
            variables: self
                .variables
                .iter()
                .map(|e| VariableEntry {
                    variable: e.variable.clone(),
                    cpt: Vec::new(),
                })
                .collect(),
        }
    }

    pub(crate) fn from_network(model: &CausalBayesianNetwork) -> Self {
        let parts: Vec<(Variable, Vec<Vec<f64>>)> = model
            .variables()
            .iter()
            .zip(model.cpts())
            .map(|(v, c)| (v.clone(), c.rows().to_vec()))
            .collect();
        Self::from_dense(&parts).expect("network parts are consistent")
    }

    /// Converts dense rows (mixed-radix parent order, first parent most
    /// significant) into keyed CPT rows.
    pub(crate) fn from_dense(parts: &[(Variable, Vec<Vec<f64>>)]) -> Result<Self> {
        let lookup: BTreeMap<&str, &Variable> =
            parts.iter().map(|(v, _)| (v.name.as_str(), v)).collect();
        let mut variables = Vec::with_capacity(parts.len());
        for (var, rows) in parts {
            let parent_vars = var
                .parents
                .iter()
                .map(|p| {
                    lookup
                        .get(p.as_str())
                        .copied()
                        .ok_or_else(|| Error::UnknownVariable(p.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            let cards: Vec<usize> = parent_vars.iter().map(|v| v.cardinality()).collect();
            let mut cpt = Vec::with_capacity(rows.len());
            for (r, row) in rows.iter().enumerate() {
                let mut rem = r;
                let mut states = vec![0; cards.len()];
                for (slot, &card) in states.iter_mut().zip(&cards).rev() {
                    *slot = rem % card.max(1);
                    rem /= card.max(1);
                }
                let given = parent_vars
                    .iter()
                    .zip(&states)
                    .map(|(pv, &s)| {
                        let label = pv.states.get(s).cloned().unwrap_or_default();
                        (pv.name.clone(), label)
                    })
                    .collect();
                let dist = var
                    .states
                    .iter()
                    .zip(row)
                    .map(|(s, &p)| (s.clone(), p))
                    .collect();
                cpt.push(CptRowEntry { given, dist });
            }
            variables.push(VariableEntry {
                variable: var.clone(),
                cpt,
            });
        }
        Ok(ModelDocument { variables })
    }
}

/// Dense rows of a validated entry.
pub(crate) fn dense_rows(entry: &VariableEntry, variables: &[Variable]) -> Vec<Vec<f64>> {
    let var = &entry.variable;
    let parent_vars: Vec<&Variable> = var
        .parents
        .iter()
        .map(|p| variables.iter().find(|v| &v.name == p).expect("validated parent"))
        .collect();
    let row_count: usize = parent_vars.iter().map(|v| v.cardinality()).product();
    let mut rows = vec![vec![0.0; var.cardinality()]; row_count];
    for row in &entry.cpt {
        let idx = parent_vars.iter().fold(0, |acc, pv| {
            let s = pv
                .state_index(&row.given[&pv.name])
                .expect("validated parent state");
            acc * pv.cardinality() + s
        });
        for (state, &p) in &row.dist {
            rows[idx][var.state_index(state).expect("validated state")] = p;
        }
    }
    rows
}
