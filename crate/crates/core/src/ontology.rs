//! Causal ontology vocabulary and the binding of model variables to IRIs and
//! causal roles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};

use crate::cbn::{graph, CausalBayesianNetwork};
use crate::error::{Error, Result};
use crate::kg::{Statement, Term};

/// Fixed vocabulary. The namespace carries the schema version.
pub mod vocab {
    pub const NAMESPACE: &str = "https://w3id.org/causalkg/v1#";
    pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
    pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
    pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";

    pub const TREATMENT: &str = "https://w3id.org/causalkg/v1#Treatment";
    pub const MEDIATOR: &str = "https://w3id.org/causalkg/v1#Mediator";
    pub const OUTCOME: &str = "https://w3id.org/causalkg/v1#Outcome";
    pub const CAUSES: &str = "https://w3id.org/causalkg/v1#causes";
    pub const CAUSES_WITH: &str = "https://w3id.org/causalkg/v1#causesWith";
    pub const TOTAL_CAUSAL_EFFECT: &str = "https://w3id.org/causalkg/v1#totalCausalEffect";
    pub const NATURAL_DIRECT_EFFECT: &str = "https://w3id.org/causalkg/v1#naturalDirectEffect";
    pub const NATURAL_INDIRECT_EFFECT: &str = "https://w3id.org/causalkg/v1#naturalIndirectEffect";
    pub const PROBABILITY: &str = "https://w3id.org/causalkg/v1#probability";

    pub const CLASSES: [&str; 3] = [TREATMENT, MEDIATOR, OUTCOME];
    pub const OBJECT_PROPERTIES: [&str; 2] = [CAUSES, CAUSES_WITH];
    pub const DATA_PROPERTIES: [&str; 4] = [
        TOTAL_CAUSAL_EFFECT,
        NATURAL_DIRECT_EFFECT,
        NATURAL_INDIRECT_EFFECT,
        PROBABILITY,
    ];
}

/// Prefixes every generated graph declares.
pub fn standard_prefixes() -> [(&'static str, &'static str); 4] {
    [
        ("ckg", vocab::NAMESPACE),
        ("owl", vocab::OWL),
        ("rdf", vocab::RDF),
        ("xsd", vocab::XSD),
    ]
}

/// One declaration triple per vocabulary term.
pub fn emit_schema() -> Vec<Statement> {
    let declare = |term: &str, kind: &str| Statement::new(Term::iri(term), vocab::RDF_TYPE, Term::iri(kind));
    let mut out: Vec<Statement> = vocab::CLASSES.iter().map(|c| declare(c, vocab::OWL_CLASS)).collect();
    out.extend(vocab::OBJECT_PROPERTIES.iter().map(|p| declare(p, vocab::OWL_OBJECT_PROPERTY)));
    out.extend(vocab::DATA_PROPERTIES.iter().map(|p| declare(p, vocab::OWL_DATATYPE_PROPERTY)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub enum CausalRole {
    #[serde(alias = "treatment")]
    Treatment,
    #[serde(alias = "mediator")]
    Mediator,
    #[serde(alias = "outcome")]
    Outcome,
    #[default]
    #[serde(alias = "context")]
    Context,
}

impl fmt::Display for CausalRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CausalRole::Treatment => "Treatment",
            CausalRole::Mediator => "Mediator",
            CausalRole::Outcome => "Outcome",
            CausalRole::Context => "Context",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectPattern {
    pub treatment: String,
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleEntry {
    pub role: CausalRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iri: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<EffectPattern>,
}

/// A (treatment, outcome) pair, optionally through a mediator, whose effects
/// belong in the graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DeclaredPattern {
    pub treatment: String,
    pub mediator: Option<String>,
    pub outcome: String,
}

pub const DEFAULT_PREFIX: &str = "ex";

/// Variable-to-IRI and variable-to-role binding. Variables without an entry
/// are Context nodes named under `base_iri`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleMapping {
    pub base_iri: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
    #[serde(default)]
    pub roles: BTreeMap<String, RoleEntry>,
}

impl RoleMapping {
    pub fn new(base_iri: impl Into<String>) -> Self {
        RoleMapping {
            base_iri: base_iri.into(),
            prefix: None,
            roles: BTreeMap::new(),
        }
    }

    pub fn with_role(mut self, variable: &str, role: CausalRole) -> Self {
        self.roles.insert(
            variable.to_string(),
            RoleEntry {
                role,
                iri: None,
                pattern: None,
            },
        );
        self
    }

    pub fn with_mediator(mut self, variable: &str, treatment: &str, outcome: &str) -> Self {
        self.roles.insert(
            variable.to_string(),
            RoleEntry {
                role: CausalRole::Mediator,
                iri: None,
                pattern: Some(EffectPattern {
                    treatment: treatment.to_string(),
                    outcome: outcome.to_string(),
                }),
            },
        );
        self
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("role mapping serializes") + "\n"
    }

    pub fn prefix_name(&self) -> &str {
        self.prefix.as_deref().unwrap_or(DEFAULT_PREFIX)
    }

    pub fn role_of(&self, variable: &str) -> CausalRole {
        self.roles.get(variable).map(|e| e.role).unwrap_or_default()
    }

    pub fn iri_of(&self, variable: &str) -> Result<String> {
        match self.roles.get(variable).and_then(|e| e.iri.as_ref()) {
            Some(iri) if is_absolute_iri(iri) => Ok(iri.clone()),
            Some(iri) => Err(Error::InvalidIri(iri.clone())),
            None => default_iri(variable, &self.base_iri),
        }
    }

    /// Inverse of [`RoleMapping::iri_of`] over the model's variables.
    pub fn variable_for_iri<'m>(&self, model: &'m CausalBayesianNetwork, iri: &str) -> Option<&'m str> {
        model
            .variables()
            .iter()
            .find(|v| self.iri_of(&v.name).is_ok_and(|i| i == iri))
            .map(|v| v.name.as_str())
    }

    /// Each Mediator entry contributes its pattern. Every Treatment/Outcome
    /// pair not covered by a mediator pattern is a total-effect-only pattern.
    pub fn declared_patterns(&self) -> Vec<DeclaredPattern> {
        let mut out: Vec<DeclaredPattern> = self
            .roles
            .iter()
            .filter(|(_, e)| e.role == CausalRole::Mediator)
            .filter_map(|(m, e)| {
                let p = e.pattern.as_ref()?;
                Some(DeclaredPattern {
                    treatment: p.treatment.clone(),
                    mediator: Some(m.clone()),
                    outcome: p.outcome.clone(),
                })
            })
            .collect();
        let covered: BTreeSet<(String, String)> =
            out.iter().map(|p| (p.treatment.clone(), p.outcome.clone())).collect();
        let with_role = |role| self.roles.iter().filter(move |(_, e)| e.role == role).map(|(v, _)| v);
        for t in with_role(CausalRole::Treatment) {
            for o in with_role(CausalRole::Outcome) {
                if !covered.contains(&(t.clone(), o.clone())) {
                    out.push(DeclaredPattern {
                        treatment: t.clone(),
                        mediator: None,
                        outcome: o.clone(),
                    });
                }
            }
        }
        out.sort();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoleFinding {
    UnknownVariable { variable: String },
    InvalidBaseIri { iri: String },
    InvalidIri { variable: String, iri: String },
    DuplicateIri { iri: String, variables: Vec<String> },
    MediatorWithoutPattern { mediator: String },
    PatternOnNonMediator { variable: String },
    PatternRoleMismatch { variable: String, expected: CausalRole, found: CausalRole },
    MultipleMediators { treatment: String, outcome: String, mediators: Vec<String> },
    TreatmentNotAncestor { treatment: String, outcome: String },
    MediatorNotOnPath { mediator: String, treatment: String, outcome: String },
}

impl fmt::Display for RoleFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use RoleFinding::*;
        match self {
            UnknownVariable { variable } => write!(f, "`{variable}` is not a model variable"),
            InvalidBaseIri { iri } => write!(f, "base IRI `{iri}` is not absolute"),
            InvalidIri { variable, iri } => write!(f, "IRI `{iri}` for `{variable}` is not absolute"),
            DuplicateIri { iri, variables } => {
                write!(f, "IRI `{iri}` is shared by {}", variables.join(", "))
            }
            MediatorWithoutPattern { mediator } => {
                write!(f, "mediator `{mediator}` does not name its treatment and outcome")
            }
            PatternOnNonMediator { variable } => {
                write!(f, "`{variable}` carries a pattern but is not a Mediator")
            }
            PatternRoleMismatch { variable, expected, found } => {
                write!(f, "pattern names `{variable}` as {expected} but its role is {found}")
            }
            MultipleMediators { treatment, outcome, mediators } => write!(
                f,
                "more than one mediator for ({treatment}, {outcome}): {}",
                mediators.join(", ")
            ),
            TreatmentNotAncestor { treatment, outcome } => {
                write!(f, "treatment `{treatment}` is not an ancestor of outcome `{outcome}`")
            }
            MediatorNotOnPath { mediator, treatment, outcome } => write!(
                f,
                "mediator not on a directed path: no {treatment} → … → {mediator} → … → {outcome}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct RoleReport {
    pub findings: Vec<RoleFinding>,
}

impl RoleReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.findings.len()
    }
}

impl fmt::Display for RoleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            writeln!(f, "{finding}")?;
        }
        Ok(())
    }
}

/// Checks a role mapping against the model's graph. Structural checks run
/// only on patterns whose variables all exist.
pub fn validate_roles(model: &CausalBayesianNetwork, mapping: &RoleMapping) -> RoleReport {
    let mut findings = Vec::new();
    if !is_absolute_iri(&mapping.base_iri) {
        findings.push(RoleFinding::InvalidBaseIri {
            iri: mapping.base_iri.clone(),
        });
    }
    for (var, entry) in &mapping.roles {
        if model.index_of(var).is_err() {
            findings.push(RoleFinding::UnknownVariable { variable: var.clone() });
        }
        if let Some(iri) = &entry.iri {
            if !is_absolute_iri(iri) {
                findings.push(RoleFinding::InvalidIri {
                    variable: var.clone(),
                    iri: iri.clone(),
                });
            }
        }
        match (entry.role, &entry.pattern) {
            (CausalRole::Mediator, None) => {
                findings.push(RoleFinding::MediatorWithoutPattern { mediator: var.clone() })
            }
            (CausalRole::Mediator, Some(_)) | (_, None) => {}
            (_, Some(_)) => findings.push(RoleFinding::PatternOnNonMediator { variable: var.clone() }),
        }
    }

    let mut by_iri: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for var in model.variables() {
        if let Ok(iri) = mapping.iri_of(&var.name) {
            by_iri.entry(iri).or_default().push(var.name.clone());
        }
    }
    for (iri, variables) in by_iri {
        if variables.len() > 1 {
            findings.push(RoleFinding::DuplicateIri { iri, variables });
        }
    }

    let patterns = mapping.declared_patterns();
    let mut mediators: BTreeMap<(&str, &str), Vec<String>> = BTreeMap::new();
    for p in &patterns {
        if let Some(m) = &p.mediator {
            mediators
                .entry((p.treatment.as_str(), p.outcome.as_str()))
                .or_default()
                .push(m.clone());
        }
    }
    for ((t, o), ms) in mediators {
        if ms.len() > 1 {
            findings.push(RoleFinding::MultipleMediators {
                treatment: t.to_string(),
                outcome: o.to_string(),
                mediators: ms,
            });
        }
    }

    let parents = model.parent_lists();
    for p in &patterns {
        let mut resolvable = true;
        for (var, expected) in [(&p.treatment, CausalRole::Treatment), (&p.outcome, CausalRole::Outcome)] {
            if model.index_of(var).is_err() {
                resolvable = false;
                if !mapping.roles.contains_key(var) {
                    findings.push(RoleFinding::UnknownVariable { variable: var.clone() });
                }
                continue;
            }
            let found = mapping.role_of(var);
            if found != expected {
                findings.push(RoleFinding::PatternRoleMismatch {
                    variable: var.clone(),
                    expected,
                    found,
                });
            }
        }
        if !resolvable {
            continue;
        }
        let t = model.index_of(&p.treatment).expect("checked");
        let o = model.index_of(&p.outcome).expect("checked");
        if !graph::has_directed_path(parents, t, o) {
            findings.push(RoleFinding::TreatmentNotAncestor {
                treatment: p.treatment.clone(),
                outcome: p.outcome.clone(),
            });
            continue;
        }
        if let Some(m) = p.mediator.as_ref().and_then(|m| model.index_of(m).ok()) {
            let on_path = m != t
                && m != o
                && graph::has_directed_path(parents, t, m)
                && graph::has_directed_path(parents, m, o);
            if !on_path {
                findings.push(RoleFinding::MediatorNotOnPath {
                    mediator: p.mediator.clone().expect("some"),
                    treatment: p.treatment.clone(),
                    outcome: p.outcome.clone(),
                });
            }
        }
    }
    RoleReport { findings }
}

// RFC 3986 unreserved characters stay as they are.
const ENCODE: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

/// `base_iri` followed by the percent-encoded variable name.
pub fn default_iri(name: &str, base_iri: &str) -> Result<String> {
    if !is_absolute_iri(base_iri) {
        return Err(Error::InvalidBaseIri(base_iri.to_string()));
    }
    Ok(format!("{base_iri}{}", utf8_percent_encode(name, ENCODE)))
}

/// `scheme ":" rest` with a non-empty rest free of whitespace and of the
/// characters IRIs forbid.
pub fn is_absolute_iri(iri: &str) -> bool {
    let Some((scheme, rest)) = iri.split_once(':') else {
        return false;
    };
    let mut sc = scheme.chars();
    let scheme_ok = sc.next().is_some_and(|c| c.is_ascii_alphabetic())
        && sc.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    scheme_ok
        && !rest.is_empty()
        && !rest
            .chars()
            .any(|c| c.is_control() || c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbn::Variable;

    // A -> B -> C, D isolated
    fn chain() -> CausalBayesianNetwork {
        let half = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        CausalBayesianNetwork::from_parts(vec![
            (Variable::binary("A"), vec![vec![0.5, 0.5]]),
            (Variable::binary("B").with_parents(["A"]), half.clone()),
            (Variable::binary("C").with_parents(["B"]), half),
            (Variable::binary("D"), vec![vec![0.5, 0.5]]),
        ])
        .unwrap()
    }

    #[test]
    fn schema_is_closed() {
        let schema = emit_schema();
        assert_eq!(schema.len(), 9);
        assert!(schema
            .iter()
            .any(|s| s.subject == Term::iri(vocab::CAUSES_WITH) && s.object == Term::iri(vocab::OWL_OBJECT_PROPERTY)));
        assert_eq!(schema, emit_schema());
        assert!(schema.iter().all(|s| s.subject.as_iri().unwrap().starts_with(vocab::NAMESPACE)));
    }

    #[test]
    fn default_iris() {
        assert_eq!(
            default_iri("Collision", "http://ex.org/ad#").unwrap(),
            "http://ex.org/ad#Collision"
        );
        assert_eq!(
            default_iri("lane change", "http://ex.org/ad#").unwrap(),
            "http://ex.org/ad#lane%20change"
        );
        assert_eq!(default_iri("x", "ad#"), Err(Error::InvalidBaseIri("ad#".into())));
    }

    #[test]
    fn absolute_iri_check() {
        assert!(is_absolute_iri("urn:x"));
        assert!(is_absolute_iri("https://w3id.org/causalkg/v1#causes"));
        assert!(!is_absolute_iri("ad#x"));
        assert!(!is_absolute_iri("1http://x"));
        assert!(!is_absolute_iri("http://a b"));
        assert!(!is_absolute_iri("http:"));
    }

    #[test]
    fn realizable_mapping_is_clean() {
        let mapping = RoleMapping::new("http://ex.org/")
            .with_role("A", CausalRole::Treatment)
            .with_mediator("B", "A", "C")
            .with_role("C", CausalRole::Outcome);
        assert_eq!(validate_roles(&chain(), &mapping), RoleReport::default());
        let empty = RoleMapping::new("http://ex.org/");
        assert!(validate_roles(&chain(), &empty).is_empty());
        assert_eq!(empty.role_of("A"), CausalRole::Context);
    }

    #[test]
    fn structural_findings() {
        let mapping = RoleMapping::new("http://ex.org/")
            .with_role("A", CausalRole::Treatment)
            .with_mediator("D", "A", "C")
            .with_role("C", CausalRole::Outcome);
        let report = validate_roles(&chain(), &mapping);
        assert_eq!(report.len(), 1);
        assert!(report.to_string().contains("mediator not on a directed path"));

        let backwards = RoleMapping::new("http://ex.org/")
            .with_role("C", CausalRole::Treatment)
            .with_role("A", CausalRole::Outcome);
        assert_eq!(
            validate_roles(&chain(), &backwards).findings,
            vec![RoleFinding::TreatmentNotAncestor {
                treatment: "C".into(),
                outcome: "A".into()
            }]
        );
    }

    #[test]
    fn duplicate_and_unknown() {
        let mut mapping = RoleMapping::new("http://ex.org/").with_role("Z", CausalRole::Context);
        mapping.roles.insert(
            "A".into(),
            RoleEntry {
                role: CausalRole::Context,
                iri: Some("http://ex.org/B".into()),
                pattern: None,
            },
        );
        let report = validate_roles(&chain(), &mapping);
        assert!(report.findings.contains(&RoleFinding::UnknownVariable { variable: "Z".into() }));
        assert!(report.findings.contains(&RoleFinding::DuplicateIri {
            iri: "http://ex.org/B".into(),
            variables: vec!["A".into(), "B".into()]
        }));
    }

    #[test]
    fn patterns_from_roles() {
        let mapping = RoleMapping::new("http://ex.org/")
            .with_role("A", CausalRole::Treatment)
            .with_role("B", CausalRole::Treatment)
            .with_mediator("M", "A", "C")
            .with_role("C", CausalRole::Outcome);
        let names: Vec<_> = mapping
            .declared_patterns()
            .into_iter()
            .map(|p| (p.treatment, p.mediator, p.outcome))
            .collect();
        assert_eq!(
            names,
            vec![
                ("A".into(), Some("M".into()), "C".into()),
                ("B".into(), None, "C".into())
            ]
        );
    }

    #[test]
    fn mapping_json() {
        let text = r#"{"base_iri": "http://ex.org/ad#", "prefix": "ad",
            "roles": {"M": {"role": "Mediator", "pattern": {"treatment": "T", "outcome": "Y"}},
                      "T": {"role": "Treatment", "iri": "http://other.org/T"}}}"#;
        let mapping = RoleMapping::from_json(text).unwrap();
        assert_eq!(mapping.prefix_name(), "ad");
        assert_eq!(mapping.iri_of("T").unwrap(), "http://other.org/T");
        assert_eq!(mapping.iri_of("Y").unwrap(), "http://ex.org/ad#Y");
        assert_eq!(RoleMapping::from_json(&mapping.to_json_pretty()).unwrap(), mapping);
    }
}
