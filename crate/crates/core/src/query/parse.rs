use std::fmt;

use super::{EffectKind, EffectQuery, Event, QueryAst};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at {}:{}: expected {}, found {}",
            self.line,
            self.column,
            self.expected.join(" or "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Quoted(String),
    LParen,
    RParen,
    Pipe,
    Comma,
    Equals,
    Arrow,
    End,
    Bad(char),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Quoted(q) => format!("{q:?}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::End => "end of input".into(),
            Tok::Bad(c) => format!("{c:?}"),
        }
    }
}

struct Lexer {
    chars: Vec<char>,
    index: usize,
    line: usize,
    column: usize,
}

/// A token plus the position of its first character.
type Spanned = (Tok, usize, usize);

impl Lexer {
    fn bump(&mut self) -> Option<char> {
        let c = *self.chars.get(self.index)?;
        self.index += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&self, offset: usize) -> Option<char> {
        self.chars.get(self.index + offset).copied()
    }

    /// First non-whitespace character at or after the cursor.
    fn peek_nonspace(&self) -> Option<char> {
        self.chars[self.index..].iter().copied().find(|c| !c.is_whitespace())
    }

    fn is_word_char(&self, offset: usize) -> bool {
        match self.peek(offset) {
            Some(c) if c.is_alphanumeric() || c == '_' || c == '.' => true,
            Some('-') => self.peek(offset + 1) != Some('>'),
            _ => false,
        }
    }

    fn next(&mut self) -> Spanned {
        while self.peek(0).is_some_and(char::is_whitespace) {
            self.bump();
        }
        let (line, column) = (self.line, self.column);
        let Some(c) = self.peek(0) else {
            return (Tok::End, line, column);
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '|' => Tok::Pipe,
            ',' => Tok::Comma,
            '=' => Tok::Equals,
            '-' if self.peek(1) == Some('>') => {
                self.bump();
                Tok::Arrow
            }
            '"' => {
                let mut text = String::new();
                let mut j = 1;
                loop {
                    match self.peek(j) {
                        Some('"') => break,
                        Some(c) if c != '\n' => text.push(c),
                        _ => return (Tok::Bad('"'), line, column),
                    }
                    j += 1;
                }
                for _ in 0..=j {
                    self.bump();
                }
                return (Tok::Quoted(text), line, column);
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut word = String::new();
                while self.is_word_char(0) {
                    word.push(self.bump().expect("word char"));
                }
                return (Tok::Word(word), line, column);
            }
            c => return (Tok::Bad(c), line, column),
        };
        self.bump();
        (tok, line, column)
    }
}

struct Parser {
    lexer: Lexer,
    current: Spanned,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn advance(&mut self) -> Tok {
        let next = self.lexer.next();
        std::mem::replace(&mut self.current, next).0
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError {
            line: self.current.1,
            column: self.current.2,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.current.0.describe(),
        }
    }

    fn expect(&mut self, tok: Tok, label: &str) -> PResult<()> {
        if self.current.0 == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn keyword(&mut self, word: &str) -> PResult<()> {
        if matches!(&self.current.0, Tok::Word(w) if w == word) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{word}`")]))
        }
    }

    fn ident(&mut self, label: &str) -> PResult<String> {
        match &self.current.0 {
            Tok::Word(w) | Tok::Quoted(w) => {
                let w = w.clone();
                self.advance();
                Ok(w)
            }
            _ => Err(self.error(&[label])),
        }
    }

    fn event(&mut self, label: &str) -> PResult<Event> {
        let variable = self.ident(label)?;
        self.expect(Tok::Equals, "`=`")?;
        let state = self.ident("state name")?;
        Ok(Event { variable, state })
    }

    fn events(&mut self) -> PResult<Vec<Event>> {
        let mut out = vec![self.event("event")?];
        while self.current.0 == Tok::Comma {
            self.advance();
            out.push(self.event("event")?);
        }
        Ok(out)
    }

    fn query(&mut self) -> PResult<QueryAst> {
        let head = match &self.current.0 {
            Tok::Word(w) => w.clone(),
            _ => return Err(self.error(&["`P`", "`TCE`", "`NDE`", "`NIE`", "`PN`"])),
        };
        let ast = match head.as_str() {
            "P" => self.probability()?,
            "PN" => {
                self.advance();
                self.expect(Tok::LParen, "`(`")?;
                let cause = self.event("cause event")?;
                self.expect(Tok::Arrow, "`->`")?;
                let outcome = self.event("outcome event")?;
                self.expect(Tok::RParen, "`)`")?;
                QueryAst::Necessity { cause, outcome }
            }
            "TCE" | "NDE" | "NIE" => self.effect(&head)?,
            _ => return Err(self.error(&["`P`", "`TCE`", "`NDE`", "`NIE`", "`PN`"])),
        };
        if self.current.0 != Tok::End {
            return Err(self.error(&["end of input"]));
        }
        Ok(ast)
    }

    fn probability(&mut self) -> PResult<QueryAst> {
        self.advance();
        self.expect(Tok::LParen, "`(`")?;
        let targets = self.events()?;
        let mut evidence = Vec::new();
        let mut do_set = Vec::new();
        let mut has_do = false;
        if self.current.0 == Tok::Pipe {
            self.advance();
            loop {
                match &self.current.0 {
                    Tok::Word(w) if w == "do" && self.lexer.peek_nonspace() == Some('(') => {
                        self.advance();
                        self.advance();
                        has_do = true;
                        do_set.extend(self.events()?);
                        self.expect(Tok::RParen, "`)`")?;
                    }
                    Tok::Word(_) | Tok::Quoted(_) => evidence.push(self.event("condition")?),
                    _ => return Err(self.error(&["condition"])),
                }
                if self.current.0 != Tok::Comma {
                    break;
                }
                self.advance();
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(if has_do {
            QueryAst::Interventional {
                targets,
                do_set,
                evidence,
            }
        } else {
            QueryAst::Associational { targets, evidence }
        })
    }

    fn effect(&mut self, head: &str) -> PResult<QueryAst> {
        let kind = match head {
            "TCE" => EffectKind::Total,
            "NDE" => EffectKind::NaturalDirect,
            _ => EffectKind::NaturalIndirect,
        };
        self.advance();
        self.expect(Tok::LParen, "`(`")?;
        let treatment = self.ident("treatment variable")?;
        self.expect(Tok::Arrow, "`->`")?;
        let outcome = self.ident("outcome variable")?;
        let mut mediator = None;
        if self.current.0 == Tok::Pipe {
            self.advance();
            self.keyword("via")?;
            mediator = Some(self.ident("mediator variable")?);
        }
        let mut states = None;
        if self.current.0 == Tok::Comma {
            self.advance();
            self.keyword("t0")?;
            self.expect(Tok::Equals, "`=`")?;
            let t0 = self.ident("state name")?;
            self.expect(Tok::Comma, "`,`")?;
            self.keyword("t1")?;
            self.expect(Tok::Equals, "`=`")?;
            let t1 = self.ident("state name")?;
            states = Some((t0, t1));
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(QueryAst::Effect(EffectQuery {
            kind,
            treatment,
            outcome,
            mediator,
            states,
        }))
    }
}

/// Parses one query. Names are not checked against any model here.
pub fn parse_query(text: &str) -> Result<QueryAst, SyntaxError> {
    let mut lexer = Lexer {
        chars: text.chars().collect(),
        index: 0,
        line: 1,
        column: 1,
    };
    let current = lexer.next();
    Parser { lexer, current }.query()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(v: &str, s: &str) -> Event {
        Event {
            variable: v.into(),
            state: s.into(),
        }
    }

    #[test]
    fn interventional() {
        assert_eq!(
            parse_query("P(Collision=true | do(DriverDistraction=true))").unwrap(),
            QueryAst::Interventional {
                targets: vec![ev("Collision", "true")],
                do_set: vec![ev("DriverDistraction", "true")],
                evidence: vec![],
            }
        );
        assert_eq!(
            parse_query(" P ( A = 1 , B=x | C=y, do( D=z ,E=w ) ) ").unwrap(),
            QueryAst::Interventional {
                targets: vec![ev("A", "1"), ev("B", "x")],
                do_set: vec![ev("D", "z"), ev("E", "w")],
                evidence: vec![ev("C", "y")],
            }
        );
    }

    #[test]
    fn associational() {
        assert_eq!(
            parse_query("P(Collision=true)").unwrap(),
            QueryAst::Associational {
                targets: vec![ev("Collision", "true")],
                evidence: vec![],
            }
        );
        // a variable literally named `do` is an ordinary condition
        assert_eq!(
            parse_query("P(a=b | do=x)").unwrap(),
            QueryAst::Associational {
                targets: vec![ev("a", "b")],
                evidence: vec![ev("do", "x")],
            }
        );
    }

    #[test]
    fn effects() {
        assert_eq!(
            parse_query("NDE(DriverDistraction -> Collision | via SuddenLaneChange)").unwrap(),
            QueryAst::Effect(EffectQuery {
                kind: EffectKind::NaturalDirect,
                treatment: "DriverDistraction".into(),
                outcome: "Collision".into(),
                mediator: Some("SuddenLaneChange".into()),
                states: None,
            })
        );
        assert_eq!(
            parse_query("TCE(X->Y, t0=low, t1=high)").unwrap(),
            QueryAst::Effect(EffectQuery {
                kind: EffectKind::Total,
                treatment: "X".into(),
                outcome: "Y".into(),
                mediator: None,
                states: Some(("low".into(), "high".into())),
            })
        );
        assert_eq!(
            parse_query("PN(\"lane change\"=true -> Y=true)").unwrap(),
            QueryAst::Necessity {
                cause: ev("lane change", "true"),
                outcome: ev("Y", "true"),
            }
        );
    }

    #[test]
    fn missing_condition() {
        let err = parse_query("P(Collision=true |)").unwrap_err();
        assert_eq!(err.expected, vec!["condition"]);
        assert_eq!((err.line, err.column), (1, 19));
        assert!(err.to_string().contains("expected condition"));
    }

    #[test]
    fn malformed() {
        for bad in ["", "Q(A=b)", "P(A)", "P(A=b", "P(A=b))", "TCE(A)", "NIE(A -> B | by M)", "P(A=b | do())", "P(A=$)", "PN(A=b)", "P(A=\"open)"] {
            assert!(parse_query(bad).is_err(), "{bad}");
        }
    }
}
