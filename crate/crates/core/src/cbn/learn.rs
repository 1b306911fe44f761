use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{validate_structure, CausalBayesianNetwork, Dataset, ModelDocument, Variable};
use crate::error::{Error, Result};

/// Laplace smoothing used when no alpha is given.
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Draws `n` records by ancestral sampling. The generator is ChaCha8 seeded
/// from `seed`, so output is identical for identical inputs on every platform.
pub fn sample(model: &CausalBayesianNetwork, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let columns = model.variables().iter().map(|v| v.name.clone()).collect();
    let mut data = Dataset::new(columns);
    data.rows.reserve(n);
    let mut full = vec![0usize; model.len()];
    for _ in 0..n {
        for &v in model.topological_order() {
            let ps: Vec<usize> = model.parents_of(v).iter().map(|&p| full[p]).collect();
            let row = model.cpt(v).row(&ps);
            full[v] = draw(row, rng.gen::<f64>());
        }
        data.rows.push(
            full.iter()
                .enumerate()
                .map(|(v, &s)| model.variable(v).states[s].clone())
                .collect(),
        );
    }
    data
}

fn draw(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding slack above the cumulative sum.
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}

/// Estimates every CPT from data with additive smoothing:
/// `(count + alpha) / (row_total + alpha * cardinality)`.
///
/// CPT rows present in `skeleton` are ignored.
pub fn fit_cpts(skeleton: &ModelDocument, data: &Dataset, alpha: f64) -> Result<CausalBayesianNetwork> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    let report = validate_structure(skeleton);
    if !report.is_empty() {
        return Err(Error::InvalidModel(report));
    }
    let variables: Vec<Variable> = skeleton.variables.iter().map(|e| e.variable.clone()).collect();
    let index: HashMap<&str, usize> = variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();

    let column_of: Vec<usize> = variables
        .iter()
        .map(|v| data.column_index(&v.name).ok_or_else(|| Error::MissingColumn(v.name.clone())))
        .collect::<Result<_>>()?;
    let state_lookup: Vec<HashMap<&str, usize>> = variables
        .iter()
        .map(|v| v.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect())
        .collect();

    let parents: Vec<Vec<usize>> = variables
        .iter()
        .map(|v| v.parents.iter().map(|p| index[p.as_str()]).collect())
        .collect();
    let mut counts: Vec<Vec<Vec<f64>>> = variables
        .iter()
        .zip(&parents)
        .map(|(v, ps)| {
            let rows: usize = ps.iter().map(|&p| variables[p].cardinality()).product();
            vec![vec![0.0; v.cardinality()]; rows]
        })
        .collect();

    let mut states = vec![0usize; variables.len()];
    for (r, row) in data.rows.iter().enumerate() {
        for (v, &col) in column_of.iter().enumerate() {
            let cell = row.get(col).map(String::as_str).unwrap_or("");
            states[v] = *state_lookup[v].get(cell).ok_or_else(|| Error::InvalidCell {
                row: r + 1,
                column: variables[v].name.clone(),
                value: cell.to_string(),
            })?;
        }
        for v in 0..variables.len() {
            let idx = parents[v]
                .iter()
                .fold(0, |acc, &p| acc * variables[p].cardinality() + states[p]);
            counts[v][idx][states[v]] += 1.0;
        }
    }

    let mut rows_out = Vec::with_capacity(variables.len());
    for (v, table) in counts.into_iter().enumerate() {
        let card = variables[v].cardinality() as f64;
        let mut fitted = Vec::with_capacity(table.len());
        for (r, row) in table.into_iter().enumerate() {
            let total: f64 = row.iter().sum();
            let denom = total + alpha * card;
            if denom == 0.0 {
                return Err(Error::UnestimableRow {
                    variable: variables[v].name.clone(),
                    given: describe_row(&variables, &parents[v], r),
                });
            }
            fitted.push(row.into_iter().map(|c| (c + alpha) / denom).collect());
        }
        rows_out.push(fitted);
    }
    CausalBayesianNetwork::from_parts(variables.into_iter().zip(rows_out).collect())
}

fn describe_row(variables: &[Variable], parents: &[usize], mut row: usize) -> String {
    let mut labels = BTreeMap::new();
    for &p in parents.iter().rev() {
        let card = variables[p].cardinality();
        labels.insert(p, variables[p].states[row % card].clone());
        row /= card;
    }
    let parts: Vec<String> = parents
        .iter()
        .map(|p| format!("{}={}", variables[*p].name, labels[p]))
        .collect();
    format!("{{{}}}", parts.join(", "))
}
