use std::collections::BTreeMap;

use crate::kg::{CausalKnowledgeGraph, Literal, Statement, Term, XSD_DOUBLE, XSD_STRING};
use crate::ontology::is_absolute_iri;

/// Deepest `<< ... >>` nesting the parser accepts.
pub const MAX_NESTING: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        line: usize,
        column: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("{line}:{column}: unknown prefix in `{name}`")]
    UnknownPrefix { line: usize, column: usize, name: String },
    #[error("{line}:{column}: invalid literal {lexical:?}: {reason}")]
    InvalidLiteral {
        line: usize,
        column: usize,
        lexical: String,
        reason: String,
    },
    #[error("{line}:{column}: `{iri}` is not an absolute IRI")]
    InvalidIri { line: usize, column: usize, iri: String },
    #[error("{line}:{column}: quoted triples nested deeper than {MAX_NESTING}")]
    TooDeep { line: usize, column: usize },
    #[error("{line}:{column}: input is not valid UTF-8")]
    InvalidUtf8 { line: usize, column: usize },
}

/// Parses a document; see the module docs for the accepted language.
pub fn parse(text: &str) -> Result<CausalKnowledgeGraph, ParseError> {
    Parser::new(text).document()
}

/// Like [`parse`], for raw bytes.
pub fn parse_bytes(bytes: &[u8]) -> Result<CausalKnowledgeGraph, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).expect("valid prefix");
            let (line, column) = position_after(valid);
            Err(ParseError::InvalidUtf8 { line, column })
        }
    }
}

fn position_after(text: &str) -> (usize, usize) {
    let mut pos = Pos { line: 1, column: 1 };
    for c in text.chars() {
        pos.step(c);
    }
    (pos.line, pos.column)
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

impl Pos {
    fn step(&mut self, c: char) {
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
    }
}

#[derive(Clone)]
enum RawIri {
    Full(String),
    Prefixed { prefix: String, local: String, at: Pos },
}

#[derive(Clone)]
enum Raw {
    Iri(RawIri),
    Literal {
        lexical: String,
        datatype: Option<RawIri>,
        at: Pos,
    },
    Triple(Box<(Raw, RawIri, Raw)>),
}

struct Parser {
    chars: Vec<char>,
    index: usize,
    pos: Pos,
    prefixes: BTreeMap<String, String>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str) -> Self {
        Parser {
            chars: text.chars().collect(),
            index: 0,
            pos: Pos { line: 1, column: 1 },
            prefixes: BTreeMap::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.index).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.index + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.index += 1;
        self.pos.step(c);
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            match c {
                ' ' | '\t' | '\r' | '\n' => {
                    self.bump();
                }
                '#' => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let found = match self.peek() {
            None => "end of input".to_string(),
            Some(c) if c.is_control() => format!("{:?}", c),
            Some(c) => format!("`{c}`"),
        };
        ParseError::Syntax {
            line: self.pos.line,
            column: self.pos.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    fn expect(&mut self, c: char, label: &str) -> PResult<()> {
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn document(mut self) -> PResult<CausalKnowledgeGraph> {
        let mut kg = CausalKnowledgeGraph::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => break,
                Some('@') => self.directive()?,
                Some(_) => {
                    let mut raw = Vec::new();
                    self.statement(&mut raw)?;
                    let at = self.pos;
                    for (s, p, o) in raw {
                        let statement = Statement::new(self.resolve(s)?, self.resolve_iri(p)?, self.resolve(o)?);
                        kg.insert(statement).map_err(|e| ParseError::Syntax {
                            line: at.line,
                            column: at.column,
                            expected: vec!["a valid statement".to_string()],
                            found: e.to_string(),
                        })?;
                    }
                }
            }
        }
        for (prefix, ns) in self.prefixes {
            kg.add_prefix(prefix, ns);
        }
        Ok(kg)
    }

    fn directive(&mut self) -> PResult<()> {
        let keyword: String = self.chars[self.index..].iter().take(7).collect();
        if keyword != "@prefix" || self.peek_at(7).is_some_and(|c| !c.is_whitespace() && c != '#') {
            return Err(self.error(&["`@prefix`"]));
        }
        for _ in 0..7 {
            self.bump();
        }
        self.skip_ws();
        let prefix = self.prefix_name()?;
        self.expect(':', "`:`")?;
        self.skip_ws();
        let at = self.pos;
        let ns = self.iriref()?;
        if !is_absolute_iri(&ns) {
            return Err(ParseError::InvalidIri {
                line: at.line,
                column: at.column,
                iri: ns,
            });
        }
        self.skip_ws();
        self.expect('.', "`.`")?;
        self.prefixes.insert(prefix, ns);
        Ok(())
    }

    fn statement(&mut self, out: &mut Vec<(Raw, RawIri, Raw)>) -> PResult<()> {
        let subject = self.subject(0, &["IRI", "`<<`", "`@prefix`"])?;
        loop {
            self.skip_ws();
            let predicate = self.iri(&["predicate IRI"])?;
            loop {
                self.skip_ws();
                let object = self.object(0)?;
                out.push((subject.clone(), predicate.clone(), object));
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.bump();
                    }
                    Some(';') => {
                        self.bump();
                        break;
                    }
                    Some('.') => {
                        self.bump();
                        return Ok(());
                    }
                    _ => return Err(self.error(&["`,`", "`;`", "`.`"])),
                }
            }
        }
    }

    fn subject(&mut self, depth: usize, expected: &[&str]) -> PResult<Raw> {
        match (self.peek(), self.peek_at(1)) {
            (Some('<'), Some('<')) => self.embedded(depth + 1),
            (Some(c), _) if c == '<' || c == ':' || c.is_alphabetic() => Ok(Raw::Iri(self.iri(expected)?)),
            _ => Err(self.error(expected)),
        }
    }

    fn object(&mut self, depth: usize) -> PResult<Raw> {
        match (self.peek(), self.peek_at(1)) {
            (Some('<'), Some('<')) => self.embedded(depth + 1),
            (Some('"'), _) => self.string_literal(),
            (Some(c), _) if c.is_ascii_digit() || matches!(c, '+' | '-' | '.') => self.number(),
            (Some(c), _) if c == '<' || c == ':' || c.is_alphabetic() => Ok(Raw::Iri(self.iri(&["object"])?)),
            _ => Err(self.error(&["IRI", "literal", "`<<`"])),
        }
    }

    fn embedded(&mut self, depth: usize) -> PResult<Raw> {
        if depth > MAX_NESTING {
            return Err(ParseError::TooDeep {
                line: self.pos.line,
                column: self.pos.column,
            });
        }
        self.bump();
        self.bump();
        self.skip_ws();
        let subject = self.subject(depth, &["IRI", "`<<`"])?;
        self.skip_ws();
        let predicate = self.iri(&["predicate IRI"])?;
        self.skip_ws();
        let object = self.object(depth)?;
        self.skip_ws();
        if self.peek() == Some('>') && self.peek_at(1) == Some('>') {
            self.bump();
            self.bump();
            Ok(Raw::Triple(Box::new((subject, predicate, object))))
        } else {
            Err(self.error(&["`>>`"]))
        }
    }

    fn iri(&mut self, expected: &[&str]) -> PResult<RawIri> {
        match self.peek() {
            Some('<') if self.peek_at(1) != Some('<') => {
                let at = self.pos;
                let iri = self.iriref()?;
                if !is_absolute_iri(&iri) {
                    return Err(ParseError::InvalidIri {
                        line: at.line,
                        column: at.column,
                        iri,
                    });
                }
                Ok(RawIri::Full(iri))
            }
            Some(c) if c == ':' || c.is_alphabetic() => self.prefixed_name(),
            _ => Err(self.error(expected)),
        }
    }

    fn iriref(&mut self) -> PResult<String> {
        self.expect('<', "IRI")?;
        let mut iri = String::new();
        loop {
            match self.peek() {
                Some('>') => {
                    self.bump();
                    return Ok(iri);
                }
                Some(c)
                    if !(c.is_control()
                        || c.is_whitespace()
                        || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')) =>
                {
                    iri.push(c);
                    self.bump();
                }
                _ => return Err(self.error(&["`>`"])),
            }
        }
    }

    fn prefix_name(&mut self) -> PResult<String> {
        let mut end = self.index;
        if self.chars.get(end).is_some_and(|c| c.is_alphabetic()) {
            end += 1;
            while self
                .chars
                .get(end)
                .is_some_and(|&c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
            {
                end += 1;
            }
            while end > self.index + 1 && self.chars[end - 1] == '.' {
                end -= 1;
            }
        }
        if self.chars.get(end) != Some(&':') {
            let fail = end.max(self.index);
            while self.index < fail {
                self.bump();
            }
            return Err(self.error(&["prefix name followed by `:`"]));
        }
        Ok(self.take_until(end))
    }

    fn take_until(&mut self, end: usize) -> String {
        let mut out = String::new();
        while self.index < end {
            out.push(self.bump().expect("in bounds"));
        }
        out
    }

    fn prefixed_name(&mut self) -> PResult<RawIri> {
        let at = self.pos;
        let prefix = self.prefix_name()?;
        self.bump();
        let start = self.index;
        let mut end = start;
        loop {
            match self.chars.get(end) {
                Some('%') => {
                    let hex = |j: usize| self.chars.get(j).is_some_and(char::is_ascii_hexdigit);
                    if !(hex(end + 1) && hex(end + 2)) {
                        while self.index < end + 1 {
                            self.bump();
                        }
                        return Err(self.error(&["two hex digits"]));
                    }
                    end += 3;
                }
                Some(&c) if c.is_alphanumeric() || c == '_' => end += 1,
                Some('-' | '.') if end > start => end += 1,
                _ => break,
            }
        }
        while end > start && self.chars[end - 1] == '.' {
            end -= 1;
        }
        let local = self.take_until(end);
        Ok(RawIri::Prefixed { prefix, local, at })
    }

    fn string_literal(&mut self) -> PResult<Raw> {
        let at = self.pos;
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.peek() {
                Some('"') => {
                    self.bump();
                    break;
                }
                Some('\\') => {
                    self.bump();
                    let c = match self.peek() {
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some(u @ ('u' | 'U')) => {
                            self.bump();
                            let width = if u == 'u' { 4 } else { 8 };
                            let digits: String = self.chars[self.index..].iter().take(width).collect();
                            if digits.len() != width || !digits.chars().all(|c| c.is_ascii_hexdigit()) {
                                return Err(self.error(&["hex escape"]));
                            }
                            let code = u32::from_str_radix(&digits, 16).expect("hex");
                            let Some(c) = char::from_u32(code) else {
                                return Err(ParseError::InvalidLiteral {
                                    line: at.line,
                                    column: at.column,
                                    lexical: format!("\\{u}{digits}"),
                                    reason: "escape is not a Unicode scalar value".to_string(),
                                });
                            };
                            for _ in 0..width {
                                self.bump();
                            }
                            lexical.push(c);
                            continue;
                        }
                        _ => return Err(self.error(&["escape sequence"])),
                    };
                    self.bump();
                    lexical.push(c);
                }
                Some(c) if c != '\n' && c != '\r' => {
                    self.bump();
                    lexical.push(c);
                }
                _ => return Err(self.error(&["`\"`"])),
            }
        }
        let datatype = if self.peek() == Some('^') {
            self.bump();
            self.expect('^', "`^^`")?;
            Some(self.iri(&["datatype IRI"])?)
        } else {
            None
        };
        Ok(Raw::Literal { lexical, datatype, at })
    }

    fn number(&mut self) -> PResult<Raw> {
        let at = self.pos;
        let digit = |p: &Parser, off: usize| p.peek_at(off).is_some_and(|c| c.is_ascii_digit());
        let mut lexical = String::new();
        if matches!(self.peek(), Some('+' | '-')) {
            lexical.push(self.bump().expect("sign"));
        }
        let mut digits = 0;
        while digit(self, 0) {
            lexical.push(self.bump().expect("digit"));
            digits += 1;
        }
        if self.peek() == Some('.') && digit(self, 1) {
            lexical.push(self.bump().expect("dot"));
            while digit(self, 0) {
                lexical.push(self.bump().expect("digit"));
                digits += 1;
            }
        }
        if digits == 0 {
            return Err(self.error(&["digit"]));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let signed = matches!(self.peek_at(1), Some('+' | '-'));
            if digit(self, if signed { 2 } else { 1 }) {
                lexical.push(self.bump().expect("e"));
                if signed {
                    lexical.push(self.bump().expect("sign"));
                }
                while digit(self, 0) {
                    lexical.push(self.bump().expect("digit"));
                }
            }
        }
        Ok(Raw::Literal {
            lexical,
            datatype: Some(RawIri::Full(XSD_DOUBLE.to_string())),
            at,
        })
    }

    fn resolve_iri(&self, raw: RawIri) -> PResult<String> {
        match raw {
            RawIri::Full(iri) => Ok(iri),
            RawIri::Prefixed { prefix, local, at } => match self.prefixes.get(&prefix) {
                Some(ns) => Ok(format!("{ns}{local}")),
                None => Err(ParseError::UnknownPrefix {
                    line: at.line,
                    column: at.column,
                    name: format!("{prefix}:{local}"),
                }),
            },
        }
    }

    fn resolve(&self, raw: Raw) -> PResult<Term> {
        match raw {
            Raw::Iri(iri) => Ok(Term::Iri(self.resolve_iri(iri)?)),
            Raw::Literal { lexical, datatype, at } => {
                let datatype = match datatype {
                    Some(d) => self.resolve_iri(d)?,
                    None => XSD_STRING.to_string(),
                };
                Literal::typed(lexical.clone(), datatype)
                    .map(Term::Literal)
                    .map_err(|e| ParseError::InvalidLiteral {
                        line: at.line,
                        column: at.column,
                        lexical,
                        reason: e.to_string(),
                    })
            }
            Raw::Triple(t) => {
                let (s, p, o) = *t;
                Ok(Term::Triple(Box::new(Statement::new(
                    self.resolve(s)?,
                    self.resolve_iri(p)?,
                    self.resolve(o)?,
                ))))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::vocab;
    use crate::rdfstar::serialize;

    const HEADER: &str = "@prefix ad: <http://ex.org/ad#> .\n@prefix ckg: <https://w3id.org/causalkg/v1#> .\n";

    #[test]
    fn missing_final_dot() {
        let text = format!("{HEADER}ad:A ckg:causes ad:B");
        match parse(&text) {
            Err(ParseError::Syntax { line, column, expected, found }) => {
                assert_eq!((line, column), (3, 21));
                assert_eq!(found, "end of input");
                assert!(expected.contains(&"`.`".to_string()));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("ad:A ckg:causes ad:B"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn unknown_prefix() {
        assert_eq!(
            parse("x:A <http://ex.org/p> x:B ."),
            Err(ParseError::UnknownPrefix {
                line: 1,
                column: 1,
                name: "x:A".into()
            })
        );
    }

    #[test]
    fn bare_and_typed_numbers_agree() {
        let bare = parse(&format!("{HEADER}<< ad:A ckg:causes ad:B >> ckg:totalCausalEffect 12.510 .")).unwrap();
        let typed = parse(&format!(
            "{HEADER}@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\
             << ad:A ckg:causes ad:B >> ckg:totalCausalEffect \"12.51\"^^xsd:double ."
        ))
        .unwrap();
        let lits = |kg: &CausalKnowledgeGraph| kg.statements().map(|s| s.object.clone()).collect::<Vec<_>>();
        assert_eq!(lits(&bare), lits(&typed));
        assert_eq!(lits(&bare), vec![Term::Literal(Literal::double(12.51).unwrap())]);
    }

    #[test]
    fn lists_comments_and_nesting() {
        let text = format!(
            "{HEADER}# comment\nad:A ckg:causes ad:B, ad:C ; # trailing\n  ckg:probability -1e-3 .\n\
             << << ad:A ckg:causes ad:B >> ckg:causesWith ad:M >> ckg:probability \"x\\ty\\u00e9\" ."
        );
        let kg = parse(&text).unwrap();
        assert_eq!(kg.len(), 4);
        let deep = kg.statements().find(|s| s.subject.depth() == 2).unwrap();
        assert_eq!(deep.object, Term::Literal(Literal::string("x\tyé")));
        assert!(kg
            .statements()
            .any(|s| s.predicate == vocab::PROBABILITY && s.object == Term::Literal(Literal::double(-0.001).unwrap())));
        assert_eq!(parse(&serialize(&kg)).unwrap(), kg);
    }

    #[test]
    fn rejects_unsupported_forms() {
        for bad in [
            "_:b <http://ex.org/p> <http://ex.org/o> .",
            "<http://ex.org/s> a <http://ex.org/o> .",
            "<rel> <http://ex.org/p> <http://ex.org/o> .",
            "<http://ex.org/s> <http://ex.org/p> \"x\"@en .",
            "\"lit\" <http://ex.org/p> <http://ex.org/o> .",
            "@base <http://ex.org/> .",
            "<http://ex.org/s> <http://ex.org/p> 1e999 .",
            "<http://ex.org/s> <http://ex.org/p> \"open .",
            "<< <http://ex.org/s> <http://ex.org/p> <http://ex.org/o> <http://ex.org/p> <http://ex.org/o> .",
        ] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn nesting_limit() {
        let mut term = "<http://ex.org/a>".to_string();
        for _ in 0..(MAX_NESTING + 1) {
            term = format!("<< {term} <http://ex.org/p> <http://ex.org/o> >>");
        }
        assert!(matches!(
            parse(&format!("{term} <http://ex.org/p> <http://ex.org/o> .")),
            Err(ParseError::TooDeep { .. })
        ));
    }

    #[test]
    fn invalid_utf8_position() {
        assert_eq!(parse_bytes(b"ab\n\xff"), Err(ParseError::InvalidUtf8 { line: 2, column: 1 }));
    }
}
