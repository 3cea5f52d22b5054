//! Concrete syntax for bounded temporal formulas.
//!
//! ```text
//! formula  := implies
//! implies  := or ( "->" implies )?
//! or       := and ( "|" and )*
//! and      := until ( "&" until )*
//! until    := unary ( "U" interval until )?
//! unary    := "!" unary | "X" unary | "G" interval unary | "F" interval unary | primary
//! primary  := atom | "(" formula ")"
//! atom     := ident ( "{" key "=" value ( "," key "=" value )* "}" )?
//! interval := "[" nat "," nat "]"
//! ```
//!
//! Annotation keys are `eps`, `delta` and `level` (`instance` or `model`);
//! `eps` and `delta` appear together or not at all.

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use super::ast::{Annotation, Atom, Formula, Interval, Level};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Syntax { expected: String, found: String },
    #[error("empty interval [{lo},{hi}]: upper bound is below lower bound")]
    EmptyInterval { lo: usize, hi: usize },
    #[error("invalid annotation: {0}")]
    Annotation(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Not,
    And,
    Or,
    Arrow,
    Next,
    Globally,
    Finally,
    Until,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::Not => f.write_str("`!`"),
            Tok::And => f.write_str("`&`"),
            Tok::Or => f.write_str("`|`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Next => f.write_str("`X`"),
            Tok::Globally => f.write_str("`G`"),
            Tok::Finally => f.write_str("`F`"),
            Tok::Until => f.write_str("`U`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        let push = |out: &mut Vec<Spanned>, tok| {
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            })
        };
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            column += i - start;
            let tok = match word.as_str() {
                "X" => Tok::Next,
                "G" => Tok::Globally,
                "F" => Tok::Finally,
                "U" => Tok::Until,
                _ => Tok::Ident(word),
            };
            push(&mut out, tok);
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            column += i - start;
            push(&mut out, Tok::Number(chars[start..i].iter().collect()));
            continue;
        }
        let (tok, width) = match c {
            '!' => (Tok::Not, 1),
            '&' => (Tok::And, 1),
            '|' => (Tok::Or, 1),
            '-' if chars.get(i + 1) == Some(&'>') => (Tok::Arrow, 2),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            ',' => (Tok::Comma, 1),
            '=' => (Tok::Eq, 1),
            other => {
                return Err(ParseError {
                    line,
                    column,
                    kind: ParseErrorKind::Syntax {
                        expected: "a formula token".into(),
                        found: format!("character `{other}`"),
                    },
                })
            }
        };
        i += width;
        column += width;
        push(&mut out, tok);
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_at(t: &Spanned, expected: &str) -> ParseError {
        ParseError {
            line: t.line,
            column: t.column,
            kind: ParseErrorKind::Syntax {
                expected: expected.to_owned(),
                found: t.tok.to_string(),
            },
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Spanned, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(Self::error_at(self.peek(), &tok.to_string()))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek().tok == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.peek().tok == Tok::Or {
            self.bump();
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while self.peek().tok == Tok::And {
            self.bump();
            lhs = Formula::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.peek().tok == Tok::Until {
            self.bump();
            let iv = self.interval()?;
            let rhs = self.until()?;
            return Ok(Formula::Until(iv, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().tok {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Next => {
                self.bump();
                Ok(Formula::next(self.unary()?))
            }
            Tok::Globally => {
                self.bump();
                let iv = self.interval()?;
                Ok(Formula::Always(iv, Box::new(self.unary()?)))
            }
            Tok::Finally => {
                self.bump();
                let iv = self.interval()?;
                Ok(Formula::Eventually(iv, Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) => {
                self.bump();
                self.atom(name)
            }
            _ => Err(Self::error_at(&t, "an atom, `(`, `!`, `X`, `G` or `F`")),
        }
    }

    fn natural(&mut self) -> Result<usize, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Number(s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                s.parse().map_err(|_| Self::error_at(&t, "a bound that fits in a machine word"))
            }
            _ => Err(Self::error_at(&t, "a non-negative integer bound")),
        }
    }

    fn interval(&mut self) -> Result<Interval, ParseError> {
        let open = self.expect(Tok::LBracket)?;
        let lo = self.natural()?;
        self.expect(Tok::Comma)?;
        let hi = self.natural()?;
        self.expect(Tok::RBracket)?;
        Interval::new(lo, hi).map_err(|_| ParseError {
            line: open.line,
            column: open.column,
            kind: ParseErrorKind::EmptyInterval { lo, hi },
        })
    }

    fn atom(&mut self, name: String) -> Result<Formula, ParseError> {
        if self.peek().tok != Tok::LBrace {
            return Ok(Formula::Atom(Atom::plain(name)));
        }
        let open = self.bump();
        let annotation_error = |msg: String| ParseError {
            line: open.line,
            column: open.column,
            kind: ParseErrorKind::Annotation(msg),
        };
        let (mut eps, mut delta, mut level) = (None, None, None);
        loop {
            let key_tok = self.bump();
            let key = match &key_tok.tok {
                Tok::Ident(k) => k.clone(),
                _ => return Err(Self::error_at(&key_tok, "`eps`, `delta` or `level`")),
            };
            self.expect(Tok::Eq)?;
            let val = self.bump();
            match (key.as_str(), &val.tok) {
                ("eps", Tok::Number(n)) | ("delta", Tok::Number(n)) => {
                    let v: f64 = n.parse().map_err(|_| Self::error_at(&val, "a decimal number"))?;
                    if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                        return Err(annotation_error(format!("{key} = {n} is outside [0, 1]")));
                    }
                    let slot = if key == "eps" { &mut eps } else { &mut delta };
                    if slot.replace(v).is_some() {
                        return Err(annotation_error(format!("`{key}` given twice")));
                    }
                }
                ("level", Tok::Ident(l)) => {
                    let lv = match l.as_str() {
                        "instance" => Level::Instance,
                        "model" => Level::Model,
                        _ => return Err(Self::error_at(&val, "`instance` or `model`")),
                    };
                    if level.replace(lv).is_some() {
                        return Err(annotation_error("`level` given twice".into()));
                    }
                }
                ("eps", _) | ("delta", _) => return Err(Self::error_at(&val, "a decimal number")),
                ("level", _) => return Err(Self::error_at(&val, "`instance` or `model`")),
                _ => return Err(Self::error_at(&key_tok, "`eps`, `delta` or `level`")),
            }
            match self.bump() {
                Spanned { tok: Tok::Comma, .. } => continue,
                Spanned { tok: Tok::RBrace, .. } => break,
                other => return Err(Self::error_at(&other, "`,` or `}`")),
            }
        }
        let annotation = match (eps, delta) {
            (Some(epsilon), Some(delta)) => Some(Annotation { epsilon, delta }),
            (None, None) => None,
            _ => return Err(annotation_error("`eps` and `delta` must be given together".into())),
        };
        Ok(Formula::Atom(Atom {
            name,
            level: level.unwrap_or_default(),
            annotation,
        }))
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let f = p.formula()?;
    let end = p.peek();
    if end.tok != Tok::Eof {
        return Err(Parser::error_at(end, "an operator or end of input"));
    }
    Ok(f)
}

// Binding strength, loosest first.
const P_IMPLIES: u8 = 1;
const P_OR: u8 = 2;
const P_AND: u8 = 3;
const P_UNTIL: u8 = 4;
const P_UNARY: u8 = 5;
const P_ATOM: u8 = 6;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Atom(_) => P_ATOM,
        Formula::Not(_) | Formula::Next(_) | Formula::Always(..) | Formula::Eventually(..) => P_UNARY,
        Formula::Until(..) => P_UNTIL,
        Formula::And(..) => P_AND,
        Formula::Or(..) => P_OR,
        Formula::Implies(..) => P_IMPLIES,
    }
}

/// Canonical text with the fewest parentheses that still parse back to `f`.
pub fn pretty(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f);
    out
}

fn write_child(out: &mut String, f: &Formula, min_prec: u8) {
    if prec(f) < min_prec {
        out.push('(');
        write_formula(out, f);
        out.push(')');
    } else {
        write_formula(out, f);
    }
}

fn write_interval(out: &mut String, iv: &Interval) {
    let _ = write!(out, "[{},{}]", iv.lo(), iv.hi());
}

fn write_formula(out: &mut String, f: &Formula) {
    match f {
        Formula::Atom(a) => write_atom(out, a),
        Formula::Not(g) => {
            out.push('!');
            write_child(out, g, P_UNARY);
        }
        Formula::Next(g) => {
            out.push_str("X ");
            write_child(out, g, P_UNARY);
        }
        Formula::Always(iv, g) => {
            out.push('G');
            write_interval(out, iv);
            out.push(' ');
            write_child(out, g, P_UNARY);
        }
        Formula::Eventually(iv, g) => {
            out.push('F');
            write_interval(out, iv);
            out.push(' ');
            write_child(out, g, P_UNARY);
        }
        Formula::Until(iv, a, b) => {
            write_child(out, a, P_UNTIL + 1);
            out.push_str(" U");
            write_interval(out, iv);
            out.push(' ');
            write_child(out, b, P_UNTIL);
        }
        Formula::And(a, b) => {
            write_child(out, a, P_AND);
            out.push_str(" & ");
            write_child(out, b, P_AND + 1);
        }
        Formula::Or(a, b) => {
            write_child(out, a, P_OR);
            out.push_str(" | ");
            write_child(out, b, P_OR + 1);
        }
        Formula::Implies(a, b) => {
            write_child(out, a, P_IMPLIES + 1);
            out.push_str(" -> ");
            write_child(out, b, P_IMPLIES);
        }
    }
}

fn write_atom(out: &mut String, a: &Atom) {
    out.push_str(&a.name);
    match (&a.annotation, a.level) {
        (None, Level::Instance) => {}
        (None, Level::Model) => out.push_str("{level=model}"),
        (Some(ann), level) => {
            // `{}` on f64 is the shortest decimal that reads back to the same value.
            let _ = write!(
                out,
                "{{eps={}, delta={}, level={}}}",
                ann.epsilon,
                ann.delta,
                level.as_str()
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom_ann(name: &str, eps: f64, delta: f64, level: Level) -> Formula {
        Formula::Atom(Atom {
            name: name.into(),
            level,
            annotation: Some(Annotation { epsilon: eps, delta }),
        })
    }

    #[test]
    fn parses_annotated_always() {
        let f = parse("G[0,2] pedestrian{eps=0.01, delta=0.001, level=instance}").unwrap();
        let expected = Formula::always(0, 2, atom_ann("pedestrian", 0.01, 0.001, Level::Instance)).unwrap();
        assert_eq!(f, expected);
    }

    #[test]
    fn parses_negated_conjunct() {
        assert_eq!(
            parse("p & !q").unwrap(),
            Formula::and(Formula::atom("p"), Formula::not(Formula::atom("q")))
        );
    }

    #[test]
    fn empty_interval_is_a_semantic_error() {
        let err = parse("F[2,1] p").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::EmptyInterval { lo: 2, hi: 1 });
        assert_eq!((err.line, err.column), (1, 2));
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse("p &\n  & q").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        assert!(matches!(err.kind, ParseErrorKind::Syntax { .. }));
        assert!(err.to_string().starts_with("line 2, column 3: expected"));

        let err = parse("(p | q").unwrap_err();
        assert_eq!((err.line, err.column), (1, 7));

        assert!(parse("p q").is_err());
        assert!(parse("G p").is_err());
        assert!(parse("p{eps=0.1}").is_err());
        assert!(parse("p{eps=0.1, delta=0.1, level=global}").is_err());
        assert!(parse("p{eps=2, delta=0.1}").is_err());
        assert!(parse("p{colour=0.1}").is_err());
        assert!(parse("p $ q").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn precedence() {
        let f = parse("a | b & c -> d").unwrap();
        let expected = Formula::implies(
            Formula::or(Formula::atom("a"), Formula::and(Formula::atom("b"), Formula::atom("c"))),
            Formula::atom("d"),
        );
        assert_eq!(f, expected);
        let f = parse("!G[0,1] p U[0,2] q & r").unwrap();
        let expected = Formula::and(
            Formula::until(
                0,
                2,
                Formula::not(Formula::always(0, 1, Formula::atom("p")).unwrap()),
                Formula::atom("q"),
            )
            .unwrap(),
            Formula::atom("r"),
        );
        assert_eq!(f, expected);
        // implication and until associate to the right
        assert_eq!(
            parse("a -> b -> c").unwrap(),
            Formula::implies(Formula::atom("a"), Formula::implies(Formula::atom("b"), Formula::atom("c")))
        );
        // keywords only stand alone
        assert_eq!(parse("Xs").unwrap(), Formula::atom("Xs"));
        assert_eq!(parse("X Xs").unwrap(), Formula::next(Formula::atom("Xs")));
    }

    #[test]
    fn pretty_round_trips_examples() {
        for text in [
            "G[0,2] pedestrian{eps=0.01, delta=0.001, level=instance}",
            "p & !q",
            "G[0,3] (p -> X q)",
            "perception{level=model} U[1,4] (a | b)",
        ] {
            let f = parse(text).unwrap();
            assert_eq!(parse(&pretty(&f)).unwrap(), f, "{text}");
        }
    }

    #[test]
    fn pretty_minimizes_parentheses() {
        let f = Formula::and(Formula::or(Formula::atom("p"), Formula::atom("q")), Formula::atom("r"));
        assert_eq!(pretty(&f), "(p | q) & r");
        let f = Formula::or(Formula::and(Formula::atom("p"), Formula::atom("q")), Formula::atom("r"));
        assert_eq!(pretty(&f), "p & q | r");
        let f = Formula::and(Formula::atom("p"), Formula::and(Formula::atom("q"), Formula::atom("r")));
        assert_eq!(pretty(&f), "p & (q & r)");
        assert_eq!(pretty(&parse("G[0,3](p -> X q)").unwrap()), "G[0,3] (p -> X q)");
    }

    #[test]
    fn pretty_keeps_annotation_values() {
        let f = parse("p{delta=0.001, eps=0.25}").unwrap();
        assert_eq!(pretty(&f), "p{eps=0.25, delta=0.001, level=instance}");
        assert_eq!(pretty(&parse("p{level=model}").unwrap()), "p{level=model}");
    }
}
