use std::collections::BTreeMap;
use std::fmt::Write;

use crate::kg::{CausalKnowledgeGraph, Literal, Statement, Term, XSD_STRING};

/// Canonical Turtle-star text for `kg`.
///
/// Prefix lines come first, sorted by prefix, then a blank line. Subjects are
/// grouped: IRI subjects ordered by expanded IRI, then quoted-triple subjects
/// ordered by their serialized text. Predicates sort by IRI and objects by
/// their serialized text.
pub fn serialize(kg: &CausalKnowledgeGraph) -> String {
    let names = Compactor::new(kg.prefixes());
    let mut out = String::new();
    for (prefix, ns) in kg.prefixes() {
        let _ = writeln!(out, "@prefix {prefix}: <{ns}> .");
    }
    if !kg.prefixes().is_empty() && !kg.is_empty() {
        out.push('\n');
    }

    let mut iri_subjects: BTreeMap<&str, Vec<&Statement>> = BTreeMap::new();
    let mut triple_subjects: BTreeMap<String, Vec<&Statement>> = BTreeMap::new();
    for s in kg.statements() {
        match &s.subject {
            Term::Iri(iri) => iri_subjects.entry(iri).or_default().push(s),
            other => triple_subjects.entry(names.term(other)).or_default().push(s),
        }
    }
    let blocks = iri_subjects
        .into_iter()
        .map(|(iri, group)| (names.iri(iri), group))
        .chain(triple_subjects);
    for (subject, group) in blocks {
        let mut by_predicate: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for s in group {
            by_predicate.entry(&s.predicate).or_default().push(names.term(&s.object));
        }
        out.push_str(&subject);
        for (i, (predicate, mut objects)) in by_predicate.into_iter().enumerate() {
            objects.sort();
            out.push_str(if i == 0 { " " } else { " ;\n    " });
            out.push_str(&names.iri(predicate));
            out.push(' ');
            out.push_str(&objects.join(", "));
        }
        out.push_str(" .\n");
    }
    out
}

struct Compactor<'a> {
    prefixes: &'a BTreeMap<String, String>,
}

impl<'a> Compactor<'a> {
    fn new(prefixes: &'a BTreeMap<String, String>) -> Self {
        Compactor { prefixes }
    }

    /// The longest matching namespace whose remainder is a valid local name.
    fn iri(&self, iri: &str) -> String {
        let mut best: Option<(&str, &str)> = None;
        for (prefix, ns) in self.prefixes {
            if let Some(local) = iri.strip_prefix(ns.as_str()) {
                if is_local_name(local) && best.is_none_or(|(_, b)| ns.len() > b.len()) {
                    best = Some((prefix, ns));
                }
            }
        }
        match best {
            Some((prefix, ns)) => format!("{prefix}:{}", &iri[ns.len()..]),
            None => format!("<{iri}>"),
        }
    }

    fn term(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => self.iri(iri),
            Term::Literal(lit) => self.literal(lit),
            Term::Triple(t) => format!(
                "<< {} {} {} >>",
                self.term(&t.subject),
                self.iri(&t.predicate),
                self.term(&t.object)
            ),
        }
    }

    fn literal(&self, lit: &Literal) -> String {
        let quoted = quote(lit.lexical());
        if lit.datatype() == XSD_STRING {
            quoted
        } else {
            format!("{quoted}^^{}", self.iri(lit.datatype()))
        }
    }
}

pub(crate) fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// ASCII letters, digits, `_`, `-`, `.` and `%XX` escapes; no leading `-` or
/// `.`, no trailing `.`. The empty local name is allowed.
pub(crate) fn is_local_name(local: &str) -> bool {
    let bytes = local.as_bytes();
    if let Some(&first) = bytes.first() {
        if first == b'-' || first == b'.' || bytes.last() == Some(&b'.') {
            return false;
        }
    }
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' => {
                let hex = |j: usize| bytes.get(j).is_some_and(u8::is_ascii_hexdigit);
                if !(hex(i + 1) && hex(i + 2)) {
                    return false;
                }
                i += 3;
            }
            b if b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.') => i += 1,
            _ => return false,
        }
    }
    true
}
