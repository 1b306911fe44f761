use std::collections::BTreeSet;

use serde::Serialize;

use super::factor::Factor;
use super::{Assignment, CausalBayesianNetwork};
use crate::error::{Error, Result};

const ENUMERATION_LIMIT: u128 = 1 << 26;

/// Exact inference route. Both routes satisfy the same contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Brute-force summation over every full assignment.
    Enumerate,
    /// Variable elimination with a min-degree order.
    #[default]
    VariableElimination,
}

impl Backend {
    pub fn query<S: AsRef<str>>(
        self,
        model: &CausalBayesianNetwork,
        targets: &[S],
        evidence: &Assignment,
    ) -> Result<Distribution> {
        match self {
            Backend::Enumerate => query_enumerate(model, targets, evidence),
            Backend::VariableElimination => query_ve(model, targets, evidence),
        }
    }
}

/// A normalized distribution over the joint states of an ordered list of
/// variables. Entries are row-major, the last variable varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    variables: Vec<String>,
    states: Vec<Vec<String>>,
    probabilities: Vec<f64>,
}

impl Distribution {
    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn states(&self) -> &[Vec<String>] {
        &self.states
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Probability of the joint state given as one label per variable, in
    /// variable order.
    pub fn probability_of<S: AsRef<str>>(&self, labels: &[S]) -> Option<f64> {
        if labels.len() != self.variables.len() {
            return None;
        }
        let mut idx = 0;
        for (label, states) in labels.iter().zip(&self.states) {
            let s = states.iter().position(|x| x == label.as_ref())?;
            idx = idx * states.len() + s;
        }
        Some(self.probabilities[idx])
    }

    /// Probability of a (possibly partial) assignment over this
    /// distribution's variables; unbound variables are summed out.
    pub fn probability(&self, event: &Assignment) -> Option<f64> {
        let mut fixed = vec![None; self.variables.len()];
        for (var, state) in event.iter() {
            let k = self.variables.iter().position(|v| v == var)?;
            fixed[k] = Some(self.states[k].iter().position(|s| s == state)?);
        }
        Some(
            self.entries()
                .filter(|(labels, _)| {
                    labels
                        .iter()
                        .zip(&fixed)
                        .all(|(&l, f)| f.is_none_or(|f| f == l))
                })
                .map(|(_, p)| p)
                .sum(),
        )
    }

    /// Iterates `(state indices, probability)` in table order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let cards: Vec<usize> = self.states.iter().map(Vec::len).collect();
        self.probabilities.iter().enumerate().map(move |(i, &p)| {
            let mut rem = i;
            let mut digits = vec![0; cards.len()];
            for (d, &c) in digits.iter_mut().zip(&cards).rev() {
                *d = rem % c;
                rem /= c;
            }
            (digits, p)
        })
    }

    /// Iterates `(state labels, probability)` in table order.
    pub fn labeled(&self) -> impl Iterator<Item = (Vec<&str>, f64)> + '_ {
        self.entries().map(|(digits, p)| {
            let labels = digits
                .iter()
                .zip(&self.states)
                .map(|(&d, s)| s[d].as_str())
                .collect();
            (labels, p)
        })
    }

    /// Largest elementwise difference; infinite if the layouts differ.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        if self.variables != other.variables || self.states != other.states {
            return f64::INFINITY;
        }
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Product of every CPT entry selected by a full assignment.
pub fn joint_probability(model: &CausalBayesianNetwork, assignment: &Assignment) -> Result<f64> {
    let mut full = vec![usize::MAX; model.len()];
    for (v, s) in model.resolve(assignment)? {
        full[v] = s;
    }
    if let Some(v) = full.iter().position(|&s| s == usize::MAX) {
        return Err(Error::IncompleteAssignment(model.variable(v).name.clone()));
    }
    Ok(joint_of_indices(model, &full))
}

pub(crate) fn joint_of_indices(model: &CausalBayesianNetwork, full: &[usize]) -> f64 {
    (0..model.len()).map(|v| model.local_probability(v, full)).product()
}

/// Resolved query: target indices plus evidence pairs, validated.
struct Resolved {
    targets: Vec<usize>,
    evidence: Vec<(usize, usize)>,
}

fn resolve_query<S: AsRef<str>>(
    model: &CausalBayesianNetwork,
    targets: &[S],
    evidence: &Assignment,
) -> Result<Resolved> {
    let mut seen = BTreeSet::new();
    let mut target_idx = Vec::with_capacity(targets.len());
    for t in targets {
        let v = model.index_of(t.as_ref())?;
        if !seen.insert(v) {
            return Err(Error::DuplicateTarget(t.as_ref().to_string()));
        }
        target_idx.push(v);
    }
    let evidence = model.resolve(evidence)?;
    if let Some(&(v, _)) = evidence.iter().find(|(v, _)| seen.contains(v)) {
        return Err(Error::OverlappingQuery(model.variable(v).name.clone()));
    }
    Ok(Resolved {
        targets: target_idx,
        evidence,
    })
}

fn distribution_for(model: &CausalBayesianNetwork, targets: &[usize], table: Vec<f64>) -> Result<Distribution> {
    let total: f64 = table.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroProbabilityEvidence);
    }
    Ok(Distribution {
        variables: targets.iter().map(|&v| model.variable(v).name.clone()).collect(),
        states: targets.iter().map(|&v| model.variable(v).states.clone()).collect(),
        probabilities: table.into_iter().map(|p| p / total).collect(),
    })
}

/// Exact posterior by summing the joint over every completion of the evidence.
pub fn query_enumerate<S: AsRef<str>>(
    model: &CausalBayesianNetwork,
    targets: &[S],
    evidence: &Assignment,
) -> Result<Distribution> {
    let q = resolve_query(model, targets, evidence)?;
    let n = model.len();
    let cards: Vec<usize> = model.variables().iter().map(|v| v.cardinality()).collect();
    let mut fixed = vec![None; n];
    for &(v, s) in &q.evidence {
        fixed[v] = Some(s);
    }
    let free: Vec<usize> = (0..n).filter(|&v| fixed[v].is_none()).collect();
    let combos = free.iter().map(|&v| cards[v] as u128).product::<u128>();
    if combos > ENUMERATION_LIMIT {
        return Err(Error::ModelTooLarge(combos));
    }

    let target_cards: Vec<usize> = q.targets.iter().map(|&v| cards[v]).collect();
    let mut table = vec![0.0; target_cards.iter().product()];
    let mut full: Vec<usize> = fixed.iter().map(|s| s.unwrap_or(0)).collect();
    loop {
        let p = joint_of_indices(model, &full);
        let idx = q
            .targets
            .iter()
            .zip(&target_cards)
            .fold(0, |acc, (&v, &c)| acc * c + full[v]);
        table[idx] += p;

        // Odometer over the free variables, last one fastest.
        let mut k = free.len();
        loop {
            if k == 0 {
                return distribution_for(model, &q.targets, table);
            }
            k -= 1;
            let v = free[k];
            full[v] += 1;
            if full[v] < cards[v] {
                break;
            }
            full[v] = 0;
        }
    }
}

/// Exact posterior by variable elimination.
pub fn query_ve<S: AsRef<str>>(
    model: &CausalBayesianNetwork,
    targets: &[S],
    evidence: &Assignment,
) -> Result<Distribution> {
    let q = resolve_query(model, targets, evidence)?;
    let mut factors: Vec<Factor> = (0..model.len())
        .map(|v| {
            let mut scope = model.parents_of(v).to_vec();
            scope.push(v);
            let cards = scope.iter().map(|&u| model.variable(u).cardinality()).collect();
            let table = model.cpt(v).rows().iter().flatten().copied().collect();
            let mut f = Factor::new(scope, cards, table);
            for &(ev, s) in &q.evidence {
                f = f.reduce(ev, s);
            }
            f
        })
        .collect();

    let keep: BTreeSet<usize> = q.targets.iter().copied().collect();
    let observed: BTreeSet<usize> = q.evidence.iter().map(|&(v, _)| v).collect();
    let mut pending: BTreeSet<usize> = (0..model.len())
        .filter(|v| !keep.contains(v) && !observed.contains(v))
        .collect();

    while let Some(var) = next_min_degree(&factors, &pending) {
        pending.remove(&var);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.contains(var));
        factors = rest;
        let merged = touching
            .iter()
            .fold(Factor::unit(), |acc, f| acc.product(f))
            .sum_out(var);
        factors.push(merged);
    }

    let joint = factors.iter().fold(Factor::unit(), |acc, f| acc.product(f));
    let joint = joint.reorder(&q.targets);
    distribution_for(model, &q.targets, joint.table().to_vec())
}

/// Variable with the fewest neighbours in the interaction graph of the
/// current factors; ties go to the smallest index.
fn next_min_degree(factors: &[Factor], pending: &BTreeSet<usize>) -> Option<usize> {
    pending
        .iter()
        .map(|&var| {
            let mut neighbours = BTreeSet::new();
            for f in factors.iter().filter(|f| f.contains(var)) {
                neighbours.extend(f.scope().iter().copied().filter(|&u| u != var));
            }
            (neighbours.len(), var)
        })
        .min()
        .map(|(_, var)| var)
}
