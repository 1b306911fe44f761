//! Query language over a causal network.
//!
//! ```text
//! P(Collision=true | SlipperyRoad=true)                    associational
//! P(Collision=true | do(DriverDistraction=true))           interventional
//! TCE(DriverDistraction -> Collision)                      interventional
//! NDE(DriverDistraction -> Collision | via SuddenLaneChange)
//! NIE(DriverDistraction -> Collision | via SuddenLaneChange, t0=false, t1=true)
//! PN(DriverDistraction=true -> Collision=true)             counterfactual
//! ```

mod explain;
mod parse;
mod pn;

pub use explain::{explain, format_value};
pub use parse::{parse_query, SyntaxError};
pub use pn::{pn_bounds, Interval};

use std::fmt;

use serde::Serialize;

use crate::cbn::{Assignment, Backend, CausalBayesianNetwork, Distribution};
use crate::error::{Error, Result};
use crate::intervention::interventional_query;
use crate::mediation::{decompose, EffectReport, EffectSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    pub variable: String,
    pub state: String,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.variable, self.state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EffectKind {
    #[serde(rename = "TCE")]
    Total,
    #[serde(rename = "NDE")]
    NaturalDirect,
    #[serde(rename = "NIE")]
    NaturalIndirect,
}

impl EffectKind {
    pub fn code(self) -> &'static str {
        match self {
            EffectKind::Total => "TCE",
            EffectKind::NaturalDirect => "NDE",
            EffectKind::NaturalIndirect => "NIE",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EffectKind::Total => "total causal effect",
            EffectKind::NaturalDirect => "natural direct effect",
            EffectKind::NaturalIndirect => "natural indirect effect",
        }
    }

    pub fn rung(self) -> Rung {
        match self {
            EffectKind::Total => Rung::Interventional,
            _ => Rung::Counterfactual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EffectQuery {
    pub kind: EffectKind,
    pub treatment: String,
    pub outcome: String,
    pub mediator: Option<String>,
    /// Explicit `(t0, t1)`; binary defaults otherwise.
    pub states: Option<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum QueryAst {
    Associational {
        targets: Vec<Event>,
        evidence: Vec<Event>,
    },
    Interventional {
        targets: Vec<Event>,
        do_set: Vec<Event>,
        evidence: Vec<Event>,
    },
    Effect(EffectQuery),
    Necessity {
        cause: Event,
        outcome: Event,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rung {
    Associational,
    Interventional,
    Counterfactual,
}

impl Rung {
    pub fn label(self) -> &'static str {
        match self {
            Rung::Associational => "statistical (associational)",
            Rung::Interventional => "context (interventional)",
            Rung::Counterfactual => "domain (counterfactual)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum QueryResult {
    Probability {
        rung: Rung,
        value: f64,
        distribution: Distribution,
    },
    Effect {
        rung: Rung,
        kind: EffectKind,
        value: f64,
        report: EffectReport,
    },
    Necessity {
        rung: Rung,
        interval: Interval,
    },
}

impl QueryResult {
    pub fn rung(&self) -> Rung {
        match self {
            QueryResult::Probability { rung, .. }
            | QueryResult::Effect { rung, .. }
            | QueryResult::Necessity { rung, .. } => *rung,
        }
    }
}

/// Evaluates with variable elimination.
pub fn evaluate(ast: &QueryAst, model: &CausalBayesianNetwork) -> Result<QueryResult> {
    evaluate_with(ast, model, Backend::default())
}

pub fn evaluate_with(ast: &QueryAst, model: &CausalBayesianNetwork, backend: Backend) -> Result<QueryResult> {
    match ast {
        QueryAst::Associational { targets, evidence } => {
            let (names, event, evidence) = bind_probability(model, targets, evidence)?;
            let distribution = backend.query(model, &names, &evidence)?;
            probability_result(Rung::Associational, distribution, &event)
        }
        QueryAst::Interventional {
            targets,
            do_set,
            evidence,
        } => {
            let (names, event, evidence) = bind_probability(model, targets, evidence)?;
            let do_set = bind(model, do_set)?;
            let distribution = interventional_query(model, &names, &do_set, &evidence, backend)?;
            probability_result(Rung::Interventional, distribution, &event)
        }
        QueryAst::Effect(q) => {
            let spec = match &q.states {
                Some((t0, t1)) => EffectSpec::with_states(
                    model,
                    &q.treatment,
                    &q.outcome,
                    q.mediator.as_deref(),
                    Some(t0),
                    Some(t1),
                )?,
                None => EffectSpec::new(model, &q.treatment, &q.outcome, q.mediator.as_deref())?,
            };
            if q.kind != EffectKind::Total && spec.mediator.is_none() {
                return Err(Error::MissingMediator(q.kind.code().to_string()));
            }
            let report = decompose(model, &spec, backend)?;
            let value = match q.kind {
                EffectKind::Total => Some(report.tce),
                EffectKind::NaturalDirect => report.nde,
                EffectKind::NaturalIndirect => report.nie,
            }
            .expect("mediator present");
            Ok(QueryResult::Effect {
                rung: q.kind.rung(),
                kind: q.kind,
                value,
                report,
            })
        }
        QueryAst::Necessity { cause, outcome } => Ok(QueryResult::Necessity {
            rung: Rung::Counterfactual,
            interval: pn_bounds(model, cause, outcome)?,
        }),
    }
}

/// Checks names and states; repeated variables are rejected.
fn bind(model: &CausalBayesianNetwork, events: &[Event]) -> Result<Assignment> {
    let mut out = Assignment::new();
    for e in events {
        let v = model.index_of(&e.variable)?;
        model.state_index(v, &e.state)?;
        if out.insert(e.variable.clone(), e.state.clone()).is_some() {
            return Err(Error::OverlappingQuery(e.variable.clone()));
        }
    }
    Ok(out)
}

fn bind_probability(
    model: &CausalBayesianNetwork,
    targets: &[Event],
    evidence: &[Event],
) -> Result<(Vec<String>, Assignment, Assignment)> {
    let event = bind(model, targets).map_err(|e| match e {
        Error::OverlappingQuery(v) => Error::DuplicateTarget(v),
        other => other,
    })?;
    let names = targets.iter().map(|e| e.variable.clone()).collect();
    Ok((names, event, bind(model, evidence)?))
}

fn probability_result(rung: Rung, distribution: Distribution, event: &Assignment) -> Result<QueryResult> {
    let value = distribution.probability(event).expect("targets bound to the distribution");
    Ok(QueryResult::Probability {
        rung,
        value,
        distribution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbn::Variable;
    use crate::mediation::total_causal_effect;

    // X -> M -> Y, X -> Y
    fn model() -> CausalBayesianNetwork {
        CausalBayesianNetwork::from_parts(vec![
            (Variable::binary("X"), vec![vec![0.6, 0.4]]),
            (
                Variable::binary("M").with_parents(["X"]),
                vec![vec![0.7, 0.3], vec![0.2, 0.8]],
            ),
            (
                Variable::binary("Y").with_parents(["X", "M"]),
                vec![vec![0.9, 0.1], vec![0.6, 0.4], vec![0.5, 0.5], vec![0.1, 0.9]],
            ),
        ])
        .unwrap()
    }

    fn run(text: &str) -> Result<QueryResult> {
        evaluate(&parse_query(text).unwrap(), &model())
    }

    #[test]
    fn rungs_follow_syntax() {
        assert_eq!(run("P(Y=true)").unwrap().rung(), Rung::Associational);
        assert_eq!(run("P(Y=true | do(X=true))").unwrap().rung(), Rung::Interventional);
        assert_eq!(run("TCE(X -> Y)").unwrap().rung(), Rung::Interventional);
        assert_eq!(run("NIE(X -> Y | via M)").unwrap().rung(), Rung::Counterfactual);
        assert_eq!(run("PN(X=true -> Y=true)").unwrap().rung(), Rung::Counterfactual);
    }

    #[test]
    fn probability_values() {
        let QueryResult::Probability { value, .. } = run("P(Y=true | do(X=true))").unwrap() else {
            panic!()
        };
        assert!((value - (0.2 * 0.5 + 0.8 * 0.9)).abs() < 1e-15);
        let QueryResult::Probability { value, .. } = run("P(X=true | M=true)").unwrap() else {
            panic!()
        };
        let expected = 0.4 * 0.8 / (0.4 * 0.8 + 0.6 * 0.3);
        assert!((value - expected).abs() < 1e-15);
    }

    #[test]
    fn tce_matches_mediation() {
        let m = model();
        let QueryResult::Effect { value, .. } = run("TCE(X -> Y)").unwrap() else {
            panic!()
        };
        let spec = EffectSpec::new(&m, "X", "Y", None).unwrap();
        assert_eq!(value.to_bits(), total_causal_effect(&m, &spec, Backend::default()).unwrap().to_bits());
    }

    #[test]
    fn binding_errors() {
        assert_eq!(run("NIE(X -> Y)"), Err(Error::MissingMediator("NIE".into())));
        assert_eq!(run("P(Z=true)"), Err(Error::UnknownVariable("Z".into())));
        assert!(matches!(run("P(Y=maybe)"), Err(Error::UnknownState { .. })));
        assert_eq!(run("P(Y=true, Y=false)"), Err(Error::DuplicateTarget("Y".into())));
        assert_eq!(
            run("P(Y=true | do(X=true), X=false)"),
            Err(Error::OverlappingQuery("X".into()))
        );
    }
}
