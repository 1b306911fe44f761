//! Total, natural direct and natural indirect effects of a treatment on an
//! outcome, computed exactly from a fully specified network.
//!
//! Effects are differences of expectations over the outcome's numeric state
//! values. With a mediator `M` the natural effects come from the mediation
//! formula for Markovian models, adjusting for the treatment's
//! non-descendants `W` that are ancestors of `M` or `Y`:
//!
//! ```text
//! θ(t, t') = Σ_w Σ_m P(m, w | do(t')) · E[Y | do(t, m), w]
//! NDE      = θ(t1, t0) − θ(t0, t0)
//! NIE      = θ(t0, t1) − θ(t0, t0)
//! ```
//!
//! When `W` is empty this reduces to the unadjusted form
//! `Σ_m P(m | do(t0)) (E[Y | do(t1, m)] − E[Y | do(t0, m)])`.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::cbn::graph::{ancestors, d_separated, descendants, has_directed_path};
use crate::cbn::{Assignment, Backend, CausalBayesianNetwork};
use crate::error::{Error, Result};
use crate::intervention::interventional_query;

/// Absolute tolerance of the `tce = nde − nie_reversed` check, per unit of
/// outcome scale.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-9;

/// Which treatment contrast is measured on which outcome, and through which
/// mediator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EffectSpec {
    pub treatment: String,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mediator: Option<String>,
    /// Baseline treatment state.
    pub t0: String,
    /// Active treatment state.
    pub t1: String,
}

impl EffectSpec {
    /// Spec with default transition: for a binary treatment `t0` is the first
    /// state and `t1` the second.
    pub fn new(
        model: &CausalBayesianNetwork,
        treatment: &str,
        outcome: &str,
        mediator: Option<&str>,
    ) -> Result<Self> {
        Self::with_states(model, treatment, outcome, mediator, None, None)
    }

    pub fn with_states(
        model: &CausalBayesianNetwork,
        treatment: &str,
        outcome: &str,
        mediator: Option<&str>,
        t0: Option<&str>,
        t1: Option<&str>,
    ) -> Result<Self> {
        let tv = model.variable_by_name(treatment)?;
        let (t0, t1) = match (t0, t1) {
            (Some(a), Some(b)) => (a.to_string(), b.to_string()),
            (None, None) if tv.cardinality() == 2 => (tv.states[0].clone(), tv.states[1].clone()),
            (None, None) => {
                return Err(Error::InvalidEffectSpec(format!(
                    "treatment `{treatment}` has {} states; t0 and t1 must be given",
                    tv.cardinality()
                )))
            }
            _ => {
                return Err(Error::InvalidEffectSpec(
                    "t0 and t1 must be given together".to_string(),
                ))
            }
        };
        let spec = EffectSpec {
            treatment: treatment.to_string(),
            outcome: outcome.to_string(),
            mediator: mediator.map(str::to_string),
            t0,
            t1,
        };
        spec.resolve(model)?;
        Ok(spec)
    }

    /// Same spec with the treatment transition reversed.
    pub fn reversed(&self) -> Self {
        EffectSpec {
            t0: self.t1.clone(),
            t1: self.t0.clone(),
            ..self.clone()
        }
    }

    fn resolve(&self, model: &CausalBayesianNetwork) -> Result<Resolved> {
        let treatment = model.index_of(&self.treatment)?;
        let outcome = model.index_of(&self.outcome)?;
        let mediator = self.mediator.as_deref().map(|m| model.index_of(m)).transpose()?;
        model.state_index(treatment, &self.t0)?;
        model.state_index(treatment, &self.t1)?;
        if self.t0 == self.t1 {
            return Err(Error::InvalidEffectSpec(format!("t0 and t1 are both `{}`", self.t0)));
        }
        if treatment == outcome {
            return Err(Error::InvalidEffectSpec(
                "treatment and outcome must differ".to_string(),
            ));
        }
        if mediator.is_some_and(|m| m == treatment || m == outcome) {
            return Err(Error::InvalidEffectSpec(
                "mediator must differ from treatment and outcome".to_string(),
            ));
        }
        Ok(Resolved {
            treatment,
            outcome,
            mediator,
        })
    }
}

struct Resolved {
    treatment: usize,
    outcome: usize,
    mediator: Option<usize>,
}

/// Structural conditions under which some effects are zero by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectWarning {
    /// No directed path from treatment to outcome: every effect is exactly 0.
    TreatmentNotAncestor,
    /// The mediator is not on a directed treatment→mediator→outcome path:
    /// the indirect effects are 0 and the direct effect equals the total.
    MediatorNotOnPath,
}

impl fmt::Display for EffectWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffectWarning::TreatmentNotAncestor => {
                f.write_str("treatment is not an ancestor of outcome; all effects are 0")
            }
            EffectWarning::MediatorNotOnPath => f.write_str("mediator not on path; NIE = 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeCode {
    pub state: String,
    pub value: f64,
}

/// Effects of one [`EffectSpec`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectReport {
    pub spec: EffectSpec,
    pub tce: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nie: Option<f64>,
    /// NIE with `t0` and `t1` swapped; `tce = nde − nie_reversed`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nie_reversed: Option<f64>,
    pub outcome_encoding: Vec<OutcomeCode>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<EffectWarning>,
}

/// `E[outcome | do(do_set)]` over the outcome's state values.
pub fn expected_outcome(
    model: &CausalBayesianNetwork,
    outcome: &str,
    do_set: &Assignment,
    backend: Backend,
) -> Result<f64> {
    if do_set.contains(outcome) {
        return Err(Error::OutcomeIntervened(outcome.to_string()));
    }
    let var = model.variable_by_name(outcome)?;
    let dist = interventional_query(model, &[outcome], do_set, &Assignment::new(), backend)?;
    Ok(dist
        .probabilities()
        .iter()
        .enumerate()
        .map(|(s, p)| var.value(s) * p)
        .sum())
}

/// `E[Y | do(T = t1)] − E[Y | do(T = t0)]`; exactly 0 when `T` is not an
/// ancestor of `Y`.
pub fn total_causal_effect(model: &CausalBayesianNetwork, spec: &EffectSpec, backend: Backend) -> Result<f64> {
    let r = spec.resolve(model)?;
    if !has_directed_path(model.parent_lists(), r.treatment, r.outcome) {
        return Ok(0.0);
    }
    let active = expected_outcome(model, &spec.outcome, &do_treatment(spec, &spec.t1), backend)?;
    let baseline = expected_outcome(model, &spec.outcome, &do_treatment(spec, &spec.t0), backend)?;
    Ok(active - baseline)
}

pub fn natural_direct_effect(model: &CausalBayesianNetwork, spec: &EffectSpec, backend: Backend) -> Result<f64> {
    let r = spec.resolve(model)?;
    let m = require_mediator(&r, "NDE")?;
    match pathway(model, &r, m) {
        Pathway::NoEffect => Ok(0.0),
        Pathway::Bypassed => total_causal_effect(model, spec, backend),
        Pathway::Mediated => {
            let theta = CrossWorld::new(model, spec, &r, m, backend)?;
            Ok(theta.mean(&spec.t1, &spec.t0)? - theta.mean(&spec.t0, &spec.t0)?)
        }
    }
}

pub fn natural_indirect_effect(model: &CausalBayesianNetwork, spec: &EffectSpec, backend: Backend) -> Result<f64> {
    let r = spec.resolve(model)?;
    let m = require_mediator(&r, "NIE")?;
    match pathway(model, &r, m) {
        Pathway::NoEffect | Pathway::Bypassed => Ok(0.0),
        Pathway::Mediated => {
            let theta = CrossWorld::new(model, spec, &r, m, backend)?;
            Ok(theta.mean(&spec.t0, &spec.t1)? - theta.mean(&spec.t0, &spec.t0)?)
        }
    }
}

/// TCE, and with a mediator also NDE, NIE and the reversed NIE, with the
/// decomposition `tce = nde − nie_reversed` verified.
pub fn decompose(model: &CausalBayesianNetwork, spec: &EffectSpec, backend: Backend) -> Result<EffectReport> {
    let r = spec.resolve(model)?;
    let outcome_var = model.variable(r.outcome);
    let outcome_encoding = outcome_var
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| OutcomeCode {
            state: s.clone(),
            value: outcome_var.value(i),
        })
        .collect();
    let mut warnings = Vec::new();
    if !has_directed_path(model.parent_lists(), r.treatment, r.outcome) {
        warnings.push(EffectWarning::TreatmentNotAncestor);
    }
    let tce = total_causal_effect(model, spec, backend)?;

    let (nde, nie, nie_reversed) = match r.mediator {
        None => (None, None, None),
        Some(m) => {
            let path = pathway(model, &r, m);
            if path != Pathway::Mediated && !warnings.contains(&EffectWarning::TreatmentNotAncestor) {
                warnings.push(EffectWarning::MediatorNotOnPath);
            }
            match path {
                Pathway::NoEffect => (Some(0.0), Some(0.0), Some(0.0)),
                Pathway::Bypassed => (Some(tce), Some(0.0), Some(0.0)),
                Pathway::Mediated => {
                    let theta = CrossWorld::new(model, spec, &r, m, backend)?;
                    let (t0, t1) = (spec.t0.as_str(), spec.t1.as_str());
                    let base = theta.mean(t0, t0)?;
                    let direct = theta.mean(t1, t0)?;
                    let indirect = theta.mean(t0, t1)?;
                    let active = theta.mean(t1, t1)?;
                    (Some(direct - base), Some(indirect - base), Some(direct - active))
                }
            }
        }
    };

    if let (Some(nde), Some(nie_reversed)) = (nde, nie_reversed) {
        let scale = outcome_var
            .state_values()
            .iter()
            .fold(1.0_f64, |acc, v| acc.max(v.abs()));
        if (tce - (nde - nie_reversed)).abs() >= DECOMPOSITION_TOLERANCE * scale {
            return Err(Error::DecompositionViolation {
                tce,
                nde,
                nie_reversed,
            });
        }
    }

    Ok(EffectReport {
        spec: spec.clone(),
        tce,
        nde,
        nie,
        nie_reversed,
        outcome_encoding,
        warnings,
    })
}

fn do_treatment(spec: &EffectSpec, state: &str) -> Assignment {
    Assignment::new().with(spec.treatment.clone(), state)
}

fn require_mediator(r: &Resolved, what: &str) -> Result<usize> {
    r.mediator.ok_or_else(|| Error::MissingMediator(what.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pathway {
    /// No directed treatment→outcome path.
    NoEffect,
    /// Treatment affects outcome, but not through the mediator.
    Bypassed,
    /// Mediator lies on a directed treatment→…→mediator→…→outcome path.
    Mediated,
}

fn pathway(model: &CausalBayesianNetwork, r: &Resolved, m: usize) -> Pathway {
    let g = model.parent_lists();
    if !has_directed_path(g, r.treatment, r.outcome) {
        Pathway::NoEffect
    } else if has_directed_path(g, r.treatment, m) && has_directed_path(g, m, r.outcome) {
        Pathway::Mediated
    } else {
        Pathway::Bypassed
    }
}

/// Evaluates `θ(t, t')` for one (treatment, mediator, outcome) triple.
struct CrossWorld<'a> {
    model: &'a CausalBayesianNetwork,
    spec: &'a EffectSpec,
    adjustment: Vec<String>,
    backend: Backend,
}

impl<'a> CrossWorld<'a> {
    fn new(
        model: &'a CausalBayesianNetwork,
        spec: &'a EffectSpec,
        r: &Resolved,
        m: usize,
        backend: Backend,
    ) -> Result<Self> {
        let g = model.parent_lists();
        let affected = descendants(g, r.treatment);
        let unaffected: BTreeSet<usize> = (0..model.len())
            .filter(|&v| v != r.treatment && !affected.contains(&v))
            .collect();

        // Mediator-outcome confounding that runs through a descendant of the
        // treatment cannot be adjusted away.
        let mut cut: Vec<Vec<usize>> = g.to_vec();
        cut[r.treatment].clear();
        for ps in cut.iter_mut() {
            ps.retain(|&p| p != m);
        }
        let mut given = unaffected.clone();
        given.insert(r.treatment);
        if !d_separated(&cut, m, r.outcome, &given) {
            let upstream_m = ancestors(&cut, m);
            let upstream_y = ancestors(&cut, r.outcome);
            let witnesses: Vec<&str> = affected
                .iter()
                .filter(|&&z| z != m && z != r.outcome)
                .filter(|z| upstream_m.contains(z) && upstream_y.contains(z))
                .map(|&z| model.variable(z).name.as_str())
                .collect();
            return Err(Error::NotIdentified {
                treatment: spec.treatment.clone(),
                mediator: model.variable(m).name.clone(),
                outcome: spec.outcome.clone(),
                reason: format!(
                    "{} confound(s) mediator and outcome and {} affected by the treatment",
                    witnesses
                        .iter()
                        .map(|w| format!("`{w}`"))
                        .collect::<Vec<_>>()
                        .join(", "),
                    if witnesses.len() == 1 { "is" } else { "are" }
                ),
            });
        }

        let mut relevant = ancestors(g, m);
        relevant.extend(ancestors(g, r.outcome));
        let adjustment = unaffected
            .intersection(&relevant)
            .map(|&v| model.variable(v).name.clone())
            .collect();
        Ok(CrossWorld {
            model,
            spec,
            adjustment,
            backend,
        })
    }

    /// `θ(direct, through)`: treatment held at `direct` on the outcome side,
    /// mediator distributed as under `do(treatment = through)`.
    fn mean(&self, direct: &str, through: &str) -> Result<f64> {
        let mediator = self.spec.mediator.as_deref().expect("mediated spec");
        let outcome_var = self.model.variable_by_name(&self.spec.outcome)?;
        let mediator_var = self.model.variable_by_name(mediator)?;

        let mut upstream_targets = vec![mediator.to_string()];
        upstream_targets.extend(self.adjustment.iter().cloned());
        let upstream = interventional_query(
            self.model,
            &upstream_targets,
            &Assignment::new().with(self.spec.treatment.clone(), through),
            &Assignment::new(),
            self.backend,
        )?;
        let w_size: usize = upstream.states()[1..].iter().map(Vec::len).product();

        let mut downstream_targets = self.adjustment.clone();
        downstream_targets.push(self.spec.outcome.clone());
        let y_card = outcome_var.cardinality();
        let values = outcome_var.state_values();

        let mut total = 0.0;
        for (m_idx, m_state) in mediator_var.states.iter().enumerate() {
            let weights = &upstream.probabilities()[m_idx * w_size..(m_idx + 1) * w_size];
            if weights.iter().all(|&p| p == 0.0) {
                continue;
            }
            let do_set = Assignment::new()
                .with(self.spec.treatment.clone(), direct)
                .with(mediator, m_state.clone());
            let downstream = interventional_query(
                self.model,
                &downstream_targets,
                &do_set,
                &Assignment::new(),
                self.backend,
            )?;
            for (w, &weight) in weights.iter().enumerate() {
                if weight == 0.0 {
                    continue;
                }
                let slice = &downstream.probabilities()[w * y_card..(w + 1) * y_card];
                let mass: f64 = slice.iter().sum();
                if mass == 0.0 {
                    continue;
                }
                let mean: f64 = slice.iter().zip(&values).map(|(p, v)| p * v).sum::<f64>() / mass;
                total += weight * mean;
            }
        }
        Ok(total)
    }
}
