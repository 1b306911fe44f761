//! Discrete causal Bayesian networks.
//!
//! A [`CausalBayesianNetwork`] is a DAG of discrete [`Variable`]s, each with a
//! conditional probability table. Models are immutable once built; every
//! operation in this module and the modules built on top of it is a pure
//! function of its inputs.

mod dataset;
mod document;
pub mod factor;
pub mod graph;
mod inference;
mod learn;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dataset::Dataset;
pub use document::{CptRowEntry, ModelDocument, VariableEntry};
pub use inference::{joint_probability, query_enumerate, query_ve, Backend, Distribution};
pub use learn::{fit_cpts, sample, DEFAULT_ALPHA};
pub use validate::{validate, validate_structure, Finding, ValidationReport};

/// Tolerance for a CPT row to count as normalized.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A discrete random variable with an ordered list of states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
    /// Numeric coding of each state, used for expectations. Defaults to the
    /// state index when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub parents: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: impl Into<String>, states: impl IntoIterator<Item = S>) -> Self {
        Variable {
            name: name.into(),
            states: states.into_iter().map(Into::into).collect(),
            values: None,
            parents: Vec::new(),
        }
    }

    /// A `{false, true}` variable.
    pub fn binary(name: impl Into<String>) -> Self {
        Variable::new(name, ["false", "true"])
    }

    pub fn with_parents<S: Into<String>>(mut self, parents: impl IntoIterator<Item = S>) -> Self {
        self.parents = parents.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Self {
        self.values = Some(values);
        self
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn is_exogenous(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    /// Numeric value of the state at `index`.
    pub fn value(&self, index: usize) -> f64 {
        match &self.values {
            Some(values) => values[index],
            None => index as f64,
        }
    }

    pub fn state_values(&self) -> Vec<f64> {
        (0..self.cardinality()).map(|i| self.value(i)).collect()
    }
}

/// Conditional probability table of one variable.
///
/// Rows are indexed by the mixed-radix encoding of the parent states in the
/// owner's parent order, first parent most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    owner: String,
    parent_cards: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn owner(&self) -> &str {
        &self.owner
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row_index(&self, parent_states: &[usize]) -> usize {
        debug_assert_eq!(parent_states.len(), self.parent_cards.len());
        parent_states
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (&s, &card)| acc * card + s)
    }

    pub fn row(&self, parent_states: &[usize]) -> &[f64] {
        &self.rows[self.row_index(parent_states)]
    }

    /// Inverse of [`Cpt::row_index`].
    pub fn parent_states(&self, mut row: usize) -> Vec<usize> {
        let mut out = vec![0; self.parent_cards.len()];
        for (slot, &card) in out.iter_mut().zip(&self.parent_cards).rev() {
            *slot = row % card;
            row /= card;
        }
        out
    }
}

/// A validated discrete causal Bayesian network.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalBayesianNetwork {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
    index: HashMap<String, usize>,
}

impl CausalBayesianNetwork {
    /// Validates a model document and builds the network from it.
    pub fn from_document(doc: &ModelDocument) -> Result<Self> {
        let report = validate(doc);
        if !report.is_empty() {
            return Err(Error::InvalidModel(report));
        }
        let variables: Vec<Variable> = doc.variables.iter().map(|e| e.variable.clone()).collect();
        let cpts = doc
            .variables
            .iter()
            .map(|entry| document::dense_rows(entry, &variables))
            .collect::<Vec<_>>();
        Ok(Self::assemble(variables, cpts))
    }

    /// Builds a network from variables and dense CPT rows (see [`Cpt`] for the
    /// row order).
    pub fn from_parts(parts: Vec<(Variable, Vec<Vec<f64>>)>) -> Result<Self> {
        let variables: Vec<Variable> = parts.iter().map(|(v, _)| v.clone()).collect();
        let doc = ModelDocument::from_dense(&parts)?;
        let report = validate(&doc);
        if !report.is_empty() {
            return Err(Error::InvalidModel(report));
        }
        let rows = parts.into_iter().map(|(_, rows)| rows).collect();
        Ok(Self::assemble(variables, rows))
    }

    pub(crate) fn assemble(variables: Vec<Variable>, rows: Vec<Vec<Vec<f64>>>) -> Self {
        let index: HashMap<String, usize> = variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();
        let parents: Vec<Vec<usize>> = variables
            .iter()
            .map(|v| v.parents.iter().map(|p| index[p]).collect())
            .collect();
        let mut children = vec![Vec::new(); variables.len()];
        for (child, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(child);
            }
        }
        let cpts = variables
            .iter()
            .zip(rows)
            .zip(&parents)
            .map(|((v, rows), ps)| Cpt {
                owner: v.name.clone(),
                parent_cards: ps.iter().map(|&p| variables[p].cardinality()).collect(),
                rows,
            })
            .collect();
        let topo = graph::topological_order(&parents).expect("validated model is acyclic");
        CausalBayesianNetwork {
            variables,
            cpts,
            parents,
            children,
            topo,
            index,
        }
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument::from_network(self)
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, index: usize) -> &Variable {
        &self.variables[index]
    }

    pub fn cpt(&self, index: usize) -> &Cpt {
        &self.cpts[index]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn variable_by_name(&self, name: &str) -> Result<&Variable> {
        Ok(&self.variables[self.index_of(name)?])
    }

    pub fn parents_of(&self, index: usize) -> &[usize] {
        &self.parents[index]
    }

    pub fn children_of(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    pub(crate) fn parent_lists(&self) -> &[Vec<usize>] {
        &self.parents
    }

    /// Variables in a topological order (parents before children, ties broken
    /// by declaration order).
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Directed edges `(parent, child)` in declaration order of the child.
    pub fn edges(&self) -> Vec<(&str, &str)> {
        self.variables
            .iter()
            .flat_map(|v| v.parents.iter().map(move |p| (p.as_str(), v.name.as_str())))
            .collect()
    }

    pub fn state_index(&self, variable: usize, state: &str) -> Result<usize> {
        let var = &self.variables[variable];
        var.state_index(state).ok_or_else(|| Error::UnknownState {
            variable: var.name.clone(),
            state: state.to_string(),
        })
    }

    /// Resolves an assignment to `(variable index, state index)` pairs.
    pub fn resolve(&self, assignment: &Assignment) -> Result<Vec<(usize, usize)>> {
        assignment
            .iter()
            .map(|(var, state)| {
                let v = self.index_of(var)?;
                Ok((v, self.state_index(v, state)?))
            })
            .collect()
    }

    /// Probability of `state` given fully resolved parent states, for variable
    /// `v`, reading parent states out of a full assignment vector.
    pub(crate) fn local_probability(&self, v: usize, full: &[usize]) -> f64 {
        let cpt = &self.cpts[v];
        let row = self.parents[v]
            .iter()
            .zip(&cpt.parent_cards)
            .fold(0, |acc, (&p, &card)| acc * card + full[p]);
        cpt.rows[row][full[v]]
    }

    /// Replaces the variable at `v` with a parentless one whose CPT is the
    /// given single row.
    pub(crate) fn with_root_override(&self, overrides: &[(usize, Vec<f64>)]) -> Self {
        let mut variables = self.variables.clone();
        let mut rows: Vec<Vec<Vec<f64>>> = self.cpts.iter().map(|c| c.rows.clone()).collect();
        for (v, row) in overrides {
            variables[*v].parents.clear();
            rows[*v] = vec![row.clone()];
        }
        Self::assemble(variables, rows)
    }
}

/// A partial or full binding of variables to state labels.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeMap<String, String>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, variable: impl Into<String>, state: impl Into<String>) -> Self {
        self.insert(variable, state);
        self
    }

    pub fn insert(&mut self, variable: impl Into<String>, state: impl Into<String>) -> Option<String> {
        self.0.insert(variable.into(), state.into())
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.0.get(variable).map(String::as_str)
    }

    pub fn contains(&self, variable: &str) -> bool {
        self.0.contains_key(variable)
    }

    pub fn remove(&mut self, variable: &str) -> Option<String> {
        self.0.remove(variable)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    /// Union of two assignments; `other` wins on conflicts.
    pub fn merged(&self, other: &Assignment) -> Assignment {
        let mut out = self.clone();
        out.0.extend(other.0.iter().map(|(k, v)| (k.clone(), v.clone())));
        out
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Assignment(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
