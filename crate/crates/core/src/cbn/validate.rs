use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use super::{ModelDocument, Variable, ROW_SUM_TOLERANCE};

/// One problem found in a candidate model.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    DuplicateVariable { variable: String },
    TooFewStates { variable: String },
    DuplicateState { variable: String, state: String },
    ValueCountMismatch { variable: String, states: usize, values: usize },
    NonFiniteValue { variable: String },
    UnknownParent { variable: String, parent: String },
    DuplicateParent { variable: String, parent: String },
    Cycle { path: Vec<String> },
    CptMalformedRow { variable: String, row: String, reason: String },
    CptDuplicateRow { variable: String, row: String },
    CptMissingRow { variable: String, row: String },
    CptEntryOutOfRange { variable: String, row: String, state: String, probability: f64 },
    CptRowSum { variable: String, row: String, sum: f64 },
}

impl Finding {
    pub fn is_cpt_finding(&self) -> bool {
        matches!(
            self,
            Finding::CptMalformedRow { .. }
                | Finding::CptDuplicateRow { .. }
                | Finding::CptMissingRow { .. }
                | Finding::CptEntryOutOfRange { .. }
                | Finding::CptRowSum { .. }
        )
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::DuplicateVariable { variable } => {
                write!(f, "variable `{variable}` declared more than once")
            }
            Finding::TooFewStates { variable } => {
                write!(f, "variable `{variable}` needs at least two states")
            }
            Finding::DuplicateState { variable, state } => {
                write!(f, "variable `{variable}` repeats state `{state}`")
            }
            Finding::ValueCountMismatch { variable, states, values } => write!(
                f,
                "variable `{variable}` has {states} states but {values} state values"
            ),
            Finding::NonFiniteValue { variable } => {
                write!(f, "variable `{variable}` has a non-finite state value")
            }
            Finding::UnknownParent { variable, parent } => {
                write!(f, "variable `{variable}` names undeclared parent `{parent}`")
            }
            Finding::DuplicateParent { variable, parent } => {
                write!(f, "variable `{variable}` lists parent `{parent}` twice")
            }
            Finding::Cycle { path } => write!(f, "cycle: {}", path.join("→")),
            Finding::CptMalformedRow { variable, row, reason } => {
                write!(f, "CPT of `{variable}`, row {row}: {reason}")
            }
            Finding::CptDuplicateRow { variable, row } => {
                write!(f, "CPT of `{variable}`, row {row}: duplicate row")
            }
            Finding::CptMissingRow { variable, row } => {
                write!(f, "CPT of `{variable}`, row {row}: missing row")
            }
            Finding::CptEntryOutOfRange { variable, row, state, probability } => write!(
                f,
                "CPT of `{variable}`, row {row}: P({state}) = {probability} outside [0, 1]"
            ),
            Finding::CptRowSum { variable, row, sum } => {
                write!(f, "CPT of `{variable}`, row {row}: probabilities sum to {sum}, not 1")
            }
        }
    }
}

/// Outcome of [`validate`]: empty iff the model satisfies every invariant.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.findings.len()
    }

    pub fn cycles(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| matches!(f, Finding::Cycle { .. }))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            writeln!(f, "{finding}")?;
        }
        Ok(())
    }
}

/// Checks every model invariant and reports each violation. Never fails.
pub fn validate(doc: &ModelDocument) -> ValidationReport {
    let mut findings = structure_findings(doc);
    let structurally_sound = findings.is_empty();
    if structurally_sound {
        let vars: HashMap<&str, &Variable> = doc
            .variables
            .iter()
            .map(|e| (e.variable.name.as_str(), &e.variable))
            .collect();
        for entry in &doc.variables {
            cpt_findings(&entry.variable, &entry.cpt, &vars, &mut findings);
        }
    }
    ValidationReport { findings }
}

/// Like [`validate`], but ignores CPTs. Used for skeletons.
pub fn validate_structure(doc: &ModelDocument) -> ValidationReport {
    ValidationReport {
        findings: structure_findings(doc),
    }
}

fn structure_findings(doc: &ModelDocument) -> Vec<Finding> {
    let mut findings = Vec::new();
    // First declaration wins for duplicates.
    let mut first: HashMap<&str, usize> = HashMap::new();
    for (i, entry) in doc.variables.iter().enumerate() {
        let name = entry.variable.name.as_str();
        if first.contains_key(name) {
            findings.push(Finding::DuplicateVariable { variable: name.to_string() });
        } else {
            first.insert(name, i);
        }
    }

    for entry in &doc.variables {
        let v = &entry.variable;
        if v.states.len() < 2 {
            findings.push(Finding::TooFewStates { variable: v.name.clone() });
        }
        let mut seen = BTreeSet::new();
        for s in &v.states {
            if !seen.insert(s) {
                findings.push(Finding::DuplicateState {
                    variable: v.name.clone(),
                    state: s.clone(),
                });
            }
        }
        if let Some(values) = &v.values {
            if values.len() != v.states.len() {
                findings.push(Finding::ValueCountMismatch {
                    variable: v.name.clone(),
                    states: v.states.len(),
                    values: values.len(),
                });
            }
            if values.iter().any(|x| !x.is_finite()) {
                findings.push(Finding::NonFiniteValue { variable: v.name.clone() });
            }
        }
        let mut seen_parents = BTreeSet::new();
        for p in &v.parents {
            if !first.contains_key(p.as_str()) {
                findings.push(Finding::UnknownParent {
                    variable: v.name.clone(),
                    parent: p.clone(),
                });
            }
            if !seen_parents.insert(p) {
                findings.push(Finding::DuplicateParent {
                    variable: v.name.clone(),
                    parent: p.clone(),
                });
            }
        }
    }

    let names: Vec<&str> = first
        .iter()
        .map(|(&n, &i)| (i, n))
        .collect::<BTreeMap<_, _>>()
        .into_values()
        .collect();
    let node_of: HashMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut children = vec![BTreeSet::new(); names.len()];
    for entry in &doc.variables {
        let Some(&child) = node_of.get(entry.variable.name.as_str()) else { continue };
        for p in &entry.variable.parents {
            if let Some(&parent) = node_of.get(p.as_str()) {
                children[parent].insert(child);
            }
        }
    }
    for cycle in find_cycles(&children) {
        findings.push(Finding::Cycle {
            path: cycle.into_iter().map(|i| names[i].to_string()).collect(),
        });
    }
    findings
}

/// One cycle per back edge met by a depth-first search in declaration order.
/// Each cycle is reported as a closed path `a → … → a`.
fn find_cycles(children: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn dfs(
        v: usize,
        children: &[BTreeSet<usize>],
        marks: &mut [Mark],
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        marks[v] = Mark::Active;
        stack.push(v);
        for &c in &children[v] {
            match marks[c] {
                Mark::New => dfs(c, children, marks, stack, out),
                Mark::Active => {
                    let start = stack.iter().position(|&x| x == c).expect("active node on stack");
                    let mut cycle = stack[start..].to_vec();
                    cycle.push(c);
                    out.push(cycle);
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        marks[v] = Mark::Done;
    }
    let mut marks = vec![Mark::New; children.len()];
    let mut out = Vec::new();
    for v in 0..children.len() {
        if marks[v] == Mark::New {
            dfs(v, children, &mut marks, &mut Vec::new(), &mut out);
        }
    }
    out
}

fn render_given(given: &BTreeMap<String, String>, parents: &[String]) -> String {
    if parents.is_empty() && given.is_empty() {
        return "{}".to_string();
    }
    let parts: Vec<String> = parents
        .iter()
        .filter_map(|p| given.get(p).map(|s| format!("{p}={s}")))
        .chain(
            given
                .iter()
                .filter(|(k, _)| !parents.contains(k))
                .map(|(k, s)| format!("{k}={s}")),
        )
        .collect();
    format!("{{{}}}", parts.join(", "))
}

fn cpt_findings(
    var: &Variable,
    rows: &[super::CptRowEntry],
    vars: &HashMap<&str, &Variable>,
    findings: &mut Vec<Finding>,
) {
    let parent_vars: Vec<&Variable> = var.parents.iter().map(|p| vars[p.as_str()]).collect();
    let mut covered: BTreeSet<Vec<usize>> = BTreeSet::new();
    for row in rows {
        let label = render_given(&row.given, &var.parents);
        let malformed = |reason: String| Finding::CptMalformedRow {
            variable: var.name.clone(),
            row: label.clone(),
            reason,
        };
        if let Some(extra) = row.given.keys().find(|k| !var.parents.contains(k)) {
            findings.push(malformed(format!("`{extra}` is not a parent")));
            continue;
        }
        let mut key = Vec::with_capacity(parent_vars.len());
        let mut problem = None;
        for pv in &parent_vars {
            match row.given.get(&pv.name) {
                None => {
                    problem = Some(format!("parent `{}` unbound", pv.name));
                    break;
                }
                Some(s) => match pv.state_index(s) {
                    Some(i) => key.push(i),
                    None => {
                        problem = Some(format!("`{s}` is not a state of `{}`", pv.name));
                        break;
                    }
                },
            }
        }
        if let Some(reason) = problem {
            findings.push(malformed(reason));
            continue;
        }
        if let Some(bad) = row.dist.keys().find(|s| var.state_index(s).is_none()) {
            findings.push(malformed(format!("`{bad}` is not a state of `{}`", var.name)));
            continue;
        }
        if !covered.insert(key) {
            findings.push(Finding::CptDuplicateRow {
                variable: var.name.clone(),
                row: label,
            });
            continue;
        }
        if let Some((state, &p)) = row
            .dist
            .iter()
            .find(|(_, &p)| !(0.0..=1.0).contains(&p) || p.is_nan())
        {
            findings.push(Finding::CptEntryOutOfRange {
                variable: var.name.clone(),
                row: label,
                state: state.clone(),
                probability: p,
            });
            continue;
        }
        let sum: f64 = row.dist.values().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            findings.push(Finding::CptRowSum {
                variable: var.name.clone(),
                row: label,
                sum,
            });
        }
    }

    let cards: Vec<usize> = parent_vars.iter().map(|v| v.cardinality()).collect();
    let total: usize = cards.iter().product();
    if covered.len() < total {
        for r in 0..total {
            let mut rem = r;
            let mut key = vec![0; cards.len()];
            for (slot, &card) in key.iter_mut().zip(&cards).rev() {
                *slot = rem % card;
                rem /= card;
            }
            if !covered.contains(&key) {
                let given = parent_vars
                    .iter()
                    .zip(&key)
                    .map(|(pv, &s)| (pv.name.clone(), pv.states[s].clone()))
                    .collect();
                findings.push(Finding::CptMissingRow {
                    variable: var.name.clone(),
                    row: render_given(&given, &var.parents),
                });
            }
        }
    }
}
