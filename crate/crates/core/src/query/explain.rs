use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use percent_encoding::percent_decode_str;

use super::{EffectKind, Event, QueryAst, QueryResult};
use crate::kg::{CausalKnowledgeGraph, Term};
use crate::ontology::vocab;

/// Paths listed per explanation at most.
const MAX_PATHS: usize = 16;

/// Four decimals, `.` separator, no negative zero.
pub fn format_value(value: f64) -> String {
    let s = format!("{value:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

/// Template explanation of `result`: the rung, the query in words, the value,
/// and the `ckg:causes` chains in `kg` that connect the variables involved.
pub fn explain(result: &QueryResult, kg: &CausalKnowledgeGraph, ast: &QueryAst) -> String {
    let graph = CausalIndex::new(kg);
    let mut out = String::new();
    let _ = writeln!(out, "rung: {}", result.rung().label());
    let _ = writeln!(out, "query: {}", describe(ast, result));
    match result {
        QueryResult::Probability { value, .. } => {
            let _ = writeln!(out, "result: {}", format_value(*value));
        }
        QueryResult::Effect { value, .. } => {
            let _ = writeln!(out, "result: {}", format_value(*value));
        }
        QueryResult::Necessity { interval, .. } => {
            let _ = writeln!(
                out,
                "result: [{}, {}]",
                format_value(interval.lo),
                format_value(interval.hi)
            );
        }
    }

    let pairs: Vec<(&str, &str)> = match ast {
        QueryAst::Associational { .. } => {
            out.push_str("causal paths: not consulted for associational queries\n");
            return out;
        }
        QueryAst::Interventional { targets, do_set, .. } => do_set
            .iter()
            .flat_map(|d| targets.iter().map(move |t| (d.variable.as_str(), t.variable.as_str())))
            .collect(),
        QueryAst::Effect(q) => vec![(q.treatment.as_str(), q.outcome.as_str())],
        QueryAst::Necessity { cause, outcome } => vec![(cause.variable.as_str(), outcome.variable.as_str())],
    };

    if let QueryAst::Effect(q) = ast {
        let recorded = graph.mediators(&q.treatment, &q.outcome);
        match (&q.mediator, recorded.is_empty()) {
            (_, false) => {
                let _ = writeln!(out, "mediator: {} (ckg:causesWith)", recorded.join(", "));
            }
            (Some(m), true) => {
                let _ = writeln!(out, "mediator: {m} (not recorded in graph)");
            }
            (None, true) => {}
        }
    }

    let mut paths = Vec::new();
    for (from, to) in pairs {
        paths.extend(graph.paths(from, to));
    }
    if paths.is_empty() {
        out.push_str("causal paths: none in graph\n");
    } else {
        out.push_str("causal paths:\n");
        for path in paths.iter().take(MAX_PATHS) {
            let _ = writeln!(out, "  {}", path.join(" → "));
        }
        if paths.len() > MAX_PATHS {
            let _ = writeln!(out, "  ({} more)", paths.len() - MAX_PATHS);
        }
    }

    if let QueryAst::Effect(q) = ast {
        for (predicate, value) in graph.annotations(&q.treatment, &q.outcome) {
            let _ = writeln!(out, "recorded in graph: ckg:{predicate} {}", format_value(value));
        }
    }
    out
}

fn events(list: &[Event]) -> String {
    list.iter().map(Event::to_string).collect::<Vec<_>>().join(", ")
}

fn describe(ast: &QueryAst, result: &QueryResult) -> String {
    match ast {
        QueryAst::Associational { targets, evidence } => {
            let mut s = format!("probability of {}", events(targets));
            if !evidence.is_empty() {
                let _ = write!(s, " given {}", events(evidence));
            }
            s
        }
        QueryAst::Interventional {
            targets,
            do_set,
            evidence,
        } => {
            let mut s = format!("probability of {} under do({})", events(targets), events(do_set));
            if !evidence.is_empty() {
                let _ = write!(s, " given {}", events(evidence));
            }
            s
        }
        QueryAst::Effect(q) => {
            let (t0, t1) = match result {
                QueryResult::Effect { report, .. } => (report.spec.t0.as_str(), report.spec.t1.as_str()),
                _ => q
                    .states
                    .as_ref()
                    .map(|(a, b)| (a.as_str(), b.as_str()))
                    .unwrap_or(("t0", "t1")),
            };
            let mut s = format!("{} of {} ({t0} → {t1}) on {}", q.kind.name(), q.treatment, q.outcome);
            if let (Some(m), true) = (&q.mediator, q.kind != EffectKind::Total) {
                let _ = write!(s, " via {m}");
            }
            s
        }
        QueryAst::Necessity { cause, outcome } => format!(
            "probability that {outcome} would not have occurred without {cause}, given both occurred"
        ),
    }
}

/// `ckg:causes` adjacency keyed by IRI, with variables found by local name.
struct CausalIndex<'a> {
    kg: &'a CausalKnowledgeGraph,
    children: BTreeMap<&'a str, BTreeSet<&'a str>>,
    by_name: BTreeMap<String, &'a str>,
}

impl<'a> CausalIndex<'a> {
    fn new(kg: &'a CausalKnowledgeGraph) -> Self {
        let mut children: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        let mut by_name = BTreeMap::new();
        for (s, o) in kg.causal_edges() {
            children.entry(s).or_default().insert(o);
            for iri in [s, o] {
                by_name.entry(local_name(iri)).or_insert(iri);
            }
        }
        CausalIndex { kg, children, by_name }
    }

    fn iri(&self, name: &str) -> Option<&'a str> {
        self.by_name.get(name).copied()
    }

    /// Simple directed paths, as local names, in lexicographic order.
    fn paths(&self, from: &str, to: &str) -> Vec<Vec<String>> {
        let (Some(from), Some(to)) = (self.iri(from), self.iri(to)) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut stack = vec![from];
        self.walk(&mut stack, to, &mut out);
        out.sort();
        out
    }

    fn walk(&self, stack: &mut Vec<&'a str>, to: &str, out: &mut Vec<Vec<String>>) {
        let last = *stack.last().expect("non-empty");
        if last == to {
            out.push(stack.iter().map(|i| local_name(i)).collect());
            return;
        }
        // Bound the enumeration on dense graphs.
        if out.len() > MAX_PATHS * 4 {
            return;
        }
        for &next in self.children.get(last).into_iter().flatten() {
            if !stack.contains(&next) {
                stack.push(next);
                self.walk(stack, to, out);
                stack.pop();
            }
        }
    }

    fn quoted(&self, treatment: &str, outcome: &str) -> Option<Term> {
        let (t, o) = (self.iri(treatment)?, self.iri(outcome)?);
        Some(Term::triple(Term::iri(t), vocab::CAUSES, Term::iri(o)))
    }

    fn mediators(&self, treatment: &str, outcome: &str) -> Vec<String> {
        let Some(quoted) = self.quoted(treatment, outcome) else {
            return Vec::new();
        };
        self.kg
            .with_predicate(vocab::CAUSES_WITH)
            .filter(|s| s.subject == quoted)
            .filter_map(|s| s.object.as_iri().map(local_name))
            .collect()
    }

    fn annotations(&self, treatment: &str, outcome: &str) -> Vec<(&'static str, f64)> {
        let Some(quoted) = self.quoted(treatment, outcome) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (name, predicate) in [
            ("totalCausalEffect", vocab::TOTAL_CAUSAL_EFFECT),
            ("naturalDirectEffect", vocab::NATURAL_DIRECT_EFFECT),
            ("naturalIndirectEffect", vocab::NATURAL_INDIRECT_EFFECT),
        ] {
            for s in self.kg.with_predicate(predicate).filter(|s| s.subject == quoted) {
                if let Term::Literal(lit) = &s.object {
                    if let Some(v) = lit.as_double() {
                        out.push((name, v));
                    }
                }
            }
        }
        out
    }
}

/// Text after the last `#` or `/`, percent-decoded.
fn local_name(iri: &str) -> String {
    let tail = iri.rsplit(['#', '/']).next().unwrap_or(iri);
    percent_decode_str(tail).decode_utf8_lossy().into_owned()
}
