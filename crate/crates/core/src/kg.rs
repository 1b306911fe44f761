//! The causal knowledge graph: RDF-star statements plus a prefix table.
//!
//! Causal relations between variables are plain `ckg:causes` triples. Effect
//! sizes and mediators annotate the quoted triple:
//!
//! ```text
//! ad:DriverDistraction ckg:causes ad:Collision .
//! << ad:DriverDistraction ckg:causes ad:Collision >> ckg:totalCausalEffect "0.25"^^xsd:double ;
//!     ckg:causesWith ad:SuddenLaneChange .
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cbn::{query_ve, Assignment, CausalBayesianNetwork};
use crate::error::{Error, Result};
use crate::mediation::EffectReport;
use crate::ontology::{self, is_absolute_iri, vocab, CausalRole, RoleMapping};

pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";

/// An RDF literal. Doubles are kept in canonical lexical form so that equal
/// values compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: String,
}

impl Literal {
    /// Typed literal; `xsd:double` lexical forms are parsed and
    /// canonicalized, and must denote a finite value.
    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Result<Self> {
        let lexical = lexical.into();
        let datatype = datatype.into();
        if datatype == XSD_DOUBLE {
            let value: f64 = lexical
                .trim()
                .parse()
                .map_err(|_| Error::InvalidStatement(format!("`{lexical}` is not an xsd:double")))?;
            return Literal::double(value);
        }
        if !is_absolute_iri(&datatype) {
            return Err(Error::InvalidIri(datatype));
        }
        Ok(Literal { lexical, datatype })
    }

    pub fn double(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidStatement(format!(
                "effect literal must be finite, got {value}"
            )));
        }
        Ok(Literal {
            lexical: canonical_double(value),
            datatype: XSD_DOUBLE.to_string(),
        })
    }

    pub fn string(value: impl Into<String>) -> Self {
        Literal {
            lexical: value.into(),
            datatype: XSD_STRING.to_string(),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &str {
        &self.datatype
    }

    pub fn as_double(&self) -> Option<f64> {
        (self.datatype == XSD_DOUBLE).then(|| self.lexical.parse().ok()).flatten()
    }
}

/// Shortest decimal that reads back as the same `f64`, always with a
/// fractional part.
pub fn canonical_double(value: f64) -> String {
    let s = format!("{value}");
    if s.contains('.') {
        s
    } else {
        s + ".0"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    Literal(Literal),
    Triple(Box<Statement>),
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Term {
        Term::Iri(iri.into())
    }

    pub fn triple(subject: Term, predicate: impl Into<String>, object: Term) -> Term {
        Term::Triple(Box::new(Statement::new(subject, predicate, object)))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_triple(&self) -> Option<&Statement> {
        match self {
            Term::Triple(t) => Some(t),
            _ => None,
        }
    }

    /// Nesting depth of quoted triples: 0 for IRIs and literals.
    pub fn depth(&self) -> usize {
        match self {
            Term::Triple(t) => 1 + t.subject.depth().max(t.object.depth()),
            _ => 0,
        }
    }

    fn check(&self, position: &str) -> Result<()> {
        match self {
            Term::Iri(iri) if !is_absolute_iri(iri) => Err(Error::InvalidIri(iri.clone())),
            Term::Iri(_) => Ok(()),
            Term::Literal(_) if position == "subject" => Err(Error::InvalidStatement(
                "a literal cannot be the subject of a triple".to_string(),
            )),
            Term::Literal(lit) => {
                if lit.datatype == XSD_DOUBLE && lit.as_double().is_none_or(|v| !v.is_finite()) {
                    return Err(Error::InvalidStatement(format!(
                        "`{}` is not a finite xsd:double",
                        lit.lexical
                    )));
                }
                Ok(())
            }
            Term::Triple(t) => t.check(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Literal(lit) => write!(f, "{:?}^^<{}>", lit.lexical, lit.datatype),
            Term::Triple(t) => write!(f, "<< {} <{}> {} >>", t.subject, t.predicate, t.object),
        }
    }
}

/// An RDF-star triple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Statement {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

impl Statement {
    pub fn new(subject: Term, predicate: impl Into<String>, object: Term) -> Self {
        Statement {
            subject,
            predicate: predicate.into(),
            object,
        }
    }

    pub fn check(&self) -> Result<()> {
        if !is_absolute_iri(&self.predicate) {
            return Err(Error::InvalidIri(self.predicate.clone()));
        }
        self.subject.check("subject")?;
        self.object.check("object")
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} .", self.subject, self.predicate, self.object)
    }
}

/// A set of statements with a prefix table used for serialization.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CausalKnowledgeGraph {
    statements: BTreeSet<Statement>,
    prefixes: BTreeMap<String, String>,
}

impl CausalKnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a statement; returns whether it was new.
    pub fn insert(&mut self, statement: Statement) -> Result<bool> {
        statement.check()?;
        Ok(self.statements.insert(statement))
    }

    pub fn add_prefix(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.prefixes.insert(prefix.into(), namespace.into());
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.statements.iter()
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn contains(&self, statement: &Statement) -> bool {
        self.statements.contains(statement)
    }

    /// Statements with the given predicate.
    pub fn with_predicate<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = &'a Statement> + 'a {
        self.statements.iter().filter(move |s| s.predicate == predicate)
    }

    /// `s ckg:causes o` edges between IRIs.
    pub fn causal_edges(&self) -> Vec<(&str, &str)> {
        self.with_predicate(vocab::CAUSES)
            .filter_map(|s| Some((s.subject.as_iri()?, s.object.as_iri()?)))
            .collect()
    }

    /// Quoted triples used as subjects that are not themselves asserted.
    pub fn unasserted_annotations(&self) -> Vec<&Statement> {
        self.statements
            .iter()
            .filter_map(|s| s.subject.as_triple())
            .filter(|t| !self.statements.contains(*t))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

/// Statement-level symmetric difference of two graphs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KgDiff {
    pub only_left: Vec<Statement>,
    pub only_right: Vec<Statement>,
}

impl KgDiff {
    pub fn is_empty(&self) -> bool {
        self.only_left.is_empty() && self.only_right.is_empty()
    }
}

/// Statements live fully expanded, so prefix tables never affect the result.
pub fn kg_diff(left: &CausalKnowledgeGraph, right: &CausalKnowledgeGraph) -> KgDiff {
    KgDiff {
        only_left: left.statements.difference(&right.statements).cloned().collect(),
        only_right: right.statements.difference(&left.statements).cloned().collect(),
    }
}

/// Assembles the graph: schema, one `ckg:causes` per DAG edge, role typing,
/// effect annotations per report, and the marginal probability of each
/// variable's last-listed state.
pub fn build_kg(
    model: &CausalBayesianNetwork,
    mapping: &RoleMapping,
    reports: &[EffectReport],
) -> Result<CausalKnowledgeGraph> {
    let mut kg = CausalKnowledgeGraph::new();
    for (prefix, ns) in ontology::standard_prefixes() {
        kg.add_prefix(prefix, ns);
    }
    kg.add_prefix(mapping.prefix_name(), mapping.base_iri.clone());

    for statement in ontology::emit_schema() {
        kg.insert(statement)?;
    }

    let iri = |name: &str| mapping.iri_of(name).map(Term::Iri);
    for (parent, child) in model.edges() {
        kg.insert(Statement::new(iri(parent)?, vocab::CAUSES, iri(child)?))?;
    }

    for var in model.variables() {
        let class = match mapping.role_of(&var.name) {
            CausalRole::Treatment => vocab::TREATMENT,
            CausalRole::Mediator => vocab::MEDIATOR,
            CausalRole::Outcome => vocab::OUTCOME,
            CausalRole::Context => continue,
        };
        kg.insert(Statement::new(iri(&var.name)?, vocab::RDF_TYPE, Term::iri(class)))?;
    }

    let mut seen_pairs = BTreeSet::new();
    for report in reports {
        let spec = &report.spec;
        for name in [Some(&spec.treatment), Some(&spec.outcome), spec.mediator.as_ref()]
            .into_iter()
            .flatten()
        {
            if model.index_of(name).is_err() {
                return Err(Error::UnmappedVariableInReport(name.clone()));
            }
        }
        if !seen_pairs.insert((spec.treatment.clone(), spec.outcome.clone())) {
            return Err(Error::DuplicateReport {
                treatment: spec.treatment.clone(),
                outcome: spec.outcome.clone(),
            });
        }
        let relation = Statement::new(iri(&spec.treatment)?, vocab::CAUSES, iri(&spec.outcome)?);
        kg.insert(relation.clone())?;
        let quoted = Term::Triple(Box::new(relation));
        let annotate = |kg: &mut CausalKnowledgeGraph, predicate: &str, value: f64| {
            kg.insert(Statement::new(quoted.clone(), predicate, Term::Literal(Literal::double(value)?)))
        };
        annotate(&mut kg, vocab::TOTAL_CAUSAL_EFFECT, report.tce)?;
        if let Some(mediator) = &spec.mediator {
            kg.insert(Statement::new(quoted.clone(), vocab::CAUSES_WITH, iri(mediator)?))?;
            if let Some(nde) = report.nde {
                annotate(&mut kg, vocab::NATURAL_DIRECT_EFFECT, nde)?;
            }
            if let Some(nie) = report.nie {
                annotate(&mut kg, vocab::NATURAL_INDIRECT_EFFECT, nie)?;
            }
        }
    }

    for var in model.variables() {
        let marginal = query_ve(model, &[var.name.as_str()], &Assignment::new())?;
        let active = marginal.probabilities()[var.cardinality() - 1];
        kg.insert(Statement::new(
            iri(&var.name)?,
            vocab::PROBABILITY,
            Term::Literal(Literal::double(active)?),
        ))?;
    }
    Ok(kg)
}
