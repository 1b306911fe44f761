//! The do-operator: graph surgery and truncated factorization.

use crate::cbn::{Assignment, Backend, CausalBayesianNetwork, Distribution};
use crate::error::{Error, Result};

/// A network after `do(interventions)`: every intervened variable has lost
/// its parents and carries a point-mass CPT on the forced state.
#[derive(Debug, Clone)]
pub struct InterventionalModel<'a> {
    base: &'a CausalBayesianNetwork,
    interventions: Assignment,
    model: CausalBayesianNetwork,
}

impl<'a> InterventionalModel<'a> {
    pub fn base(&self) -> &'a CausalBayesianNetwork {
        self.base
    }

    pub fn interventions(&self) -> &Assignment {
        &self.interventions
    }

    /// The surgically modified network.
    pub fn model(&self) -> &CausalBayesianNetwork {
        &self.model
    }

    pub fn into_model(self) -> CausalBayesianNetwork {
        self.model
    }
}

/// Applies graph surgery for `do(do_set)`. The base model is not modified.
pub fn do_transform<'a>(
    model: &'a CausalBayesianNetwork,
    do_set: &Assignment,
) -> Result<InterventionalModel<'a>> {
    let resolved = model.resolve(do_set)?;
    let overrides: Vec<(usize, Vec<f64>)> = resolved
        .into_iter()
        .map(|(v, s)| {
            let mut row = vec![0.0; model.variable(v).cardinality()];
            row[s] = 1.0;
            (v, row)
        })
        .collect();
    let surgically = if overrides.is_empty() {
        model.clone()
    } else {
        model.with_root_override(&overrides)
    };
    Ok(InterventionalModel {
        base: model,
        interventions: do_set.clone(),
        model: surgically,
    })
}

/// `P(targets | do(do_set), evidence)`: conditions the post-surgery model on
/// `evidence`.
pub fn interventional_query<S: AsRef<str>>(
    model: &CausalBayesianNetwork,
    targets: &[S],
    do_set: &Assignment,
    evidence: &Assignment,
    backend: Backend,
) -> Result<Distribution> {
    for var in do_set.variables() {
        if targets.iter().any(|t| t.as_ref() == var) || evidence.contains(var) {
            return Err(Error::OverlappingQuery(var.to_string()));
        }
    }
    if do_set.is_empty() {
        return backend.query(model, targets, evidence);
    }
    let surgical = do_transform(model, do_set)?;
    backend.query(surgical.model(), targets, evidence)
}
