use thiserror::Error;

use crate::cbn::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by model construction, inference, effect computation and
/// knowledge-graph assembly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model:\n{0}")]
    InvalidModel(ValidationReport),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown state `{state}` for variable `{variable}`")]
    UnknownState { variable: String, state: String },

    #[error("assignment does not bind variable `{0}`")]
    IncompleteAssignment(String),

    #[error("evidence has probability zero")]
    ZeroProbabilityEvidence,

    #[error("variable `{0}` appears in more than one role of the query (targets, interventions, evidence)")]
    OverlappingQuery(String),

    #[error("variable `{0}` listed twice as a query target")]
    DuplicateTarget(String),

    #[error("model has {0} joint assignments, too many for exhaustive enumeration")]
    ModelTooLarge(u128),

    #[error("dataset has no column for variable `{0}`")]
    MissingColumn(String),

    #[error("dataset row {row}: `{value}` is not a state of column `{column}`")]
    InvalidCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("cannot estimate CPT row {given} of `{variable}`: parent configuration never observed and alpha = 0")]
    UnestimableRow { variable: String, given: String },

    #[error("smoothing parameter must be finite and >= 0, got {0}")]
    InvalidAlpha(f64),

    #[error("outcome `{0}` cannot also be intervened on")]
    OutcomeIntervened(String),

    #[error("invalid effect request: {0}")]
    InvalidEffectSpec(String),

    #[error("natural effects of `{treatment}` on `{outcome}` via `{mediator}` are not identified: {reason}")]
    NotIdentified {
        treatment: String,
        mediator: String,
        outcome: String,
        reason: String,
    },

    #[error("effect decomposition violated: tce = {tce}, nde - nie_reversed = {}", .nde - .nie_reversed)]
    DecompositionViolation {
        tce: f64,
        nde: f64,
        nie_reversed: f64,
    },

    #[error("P(cause, outcome) = 0, probability of necessity is undefined")]
    ZeroJointProbability,

    #[error("necessity bounds are inconsistent: lo {lo} > hi {hi}")]
    InconsistentBounds { lo: f64, hi: f64 },

    #[error("{0} requires a mediator (`| via <Mediator>`)")]
    MissingMediator(String),

    #[error("effect report references `{0}`, which is not a model variable")]
    UnmappedVariableInReport(String),

    #[error("more than one effect report for ({treatment}, {outcome})")]
    DuplicateReport { treatment: String, outcome: String },

    #[error("base IRI `{0}` is not an absolute IRI")]
    InvalidBaseIri(String),

    #[error("`{0}` is not a valid absolute IRI")]
    InvalidIri(String),

    #[error("invalid statement: {0}")]
    InvalidStatement(String),
}
