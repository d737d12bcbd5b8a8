use std::f64::consts::PI;

use super::lexer::{tokenize_line, Token, TokenKind};
use super::{AmpExpr, Circuit, Element, Input, ParseError, PhaseExpr, Port};
use crate::numerics::BasisSign;
use crate::phase_basis::{BasisCase, BasisRelation, Combination};

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    line_no: usize,
    line: &'a str,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_column(&self) -> usize {
        self.line.trim_end().chars().count() + 1
    }

    fn error_at(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line_no,
            column,
            message: message.into(),
            snippet: self.line.to_string(),
        }
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let column = self.peek().map_or_else(|| self.end_column(), |t| t.column);
        self.error_at(column, message)
    }

    fn peek_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { kind: TokenKind::Sym(s), .. }) if *s == c)
    }

    fn peek_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Some(Token { kind: TokenKind::Ident(s), .. }) if s == name)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_here(format!("expected '{c}'")))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<&'a Token, ParseError> {
        match self.peek() {
            Some(
                t @ Token {
                    kind: TokenKind::Ident(_),
                    ..
                },
            ) => {
                self.pos += 1;
                Ok(t)
            }
            _ => Err(self.error_here(format!("expected {what}"))),
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.error_at(t.column, format!("unexpected token '{}'", t.text()))),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Some(
                t @ Token {
                    kind: TokenKind::Number(text),
                    ..
                },
            ) => {
                self.pos += 1;
                text.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.error_at(t.column, format!("malformed number '{text}'")))
            }
            _ => Err(self.error_here("expected a number")),
        }
    }

    fn port(&mut self) -> Result<Port, ParseError> {
        let Some(t) = self.next() else {
            return Err(self.error_here("expected a port"));
        };
        let text = t.text();
        let mut chars = text.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_lowercase() => Ok(Port::from_letter(c).expect("a..z")),
            _ => Err(self.error_at(t.column, format!("undeclared port '{text}'"))),
        }
    }

    /// `[-] ( IDENT | NUMBER [['*'] pi] [/ NUMBER] | pi [/ NUMBER] )`
    fn phase_expr(&mut self) -> Result<PhaseExpr, ParseError> {
        let negated = if self.peek_sym('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let sign = if negated { -1.0 } else { 1.0 };
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Ident(name)) if name != "pi" => {
                self.pos += 1;
                Ok(PhaseExpr::Param {
                    name: name.clone(),
                    negated,
                })
            }
            Some(TokenKind::Ident(_)) => {
                self.pos += 1;
                let d = self.denominator()?;
                Ok(PhaseExpr::Literal(pi_multiple(sign, d)))
            }
            Some(TokenKind::Number(_)) => {
                let n = self.number()?;
                let times_pi =
                    if self.peek_sym('*') && self.tokens.get(self.pos + 1).is_some_and(is_pi) {
                        self.pos += 2;
                        true
                    } else if self.peek().is_some_and(is_pi) {
                        self.pos += 1;
                        true
                    } else {
                        false
                    };
                let d = self.denominator()?;
                if times_pi {
                    Ok(PhaseExpr::Literal(pi_multiple(sign * n, d)))
                } else {
                    Ok(PhaseExpr::Literal(sign * n / d))
                }
            }
            _ => Err(self.error_here("expected a phase (number, pi form, theta or zeta)")),
        }
    }

    fn denominator(&mut self) -> Result<f64, ParseError> {
        if !self.peek_sym('/') {
            return Ok(1.0);
        }
        self.pos += 1;
        let column = self.peek().map_or_else(|| self.end_column(), |t| t.column);
        let d = self.number()?;
        if d == 0.0 {
            return Err(self.error_at(column, "division by zero"));
        }
        Ok(d)
    }

    /// `[-] [NUMBER '*'] exp '(' i '*' PHASE ')'` or `[-] NUMBER`.
    fn amp_expr(&mut self) -> Result<AmpExpr, ParseError> {
        let sign = if self.peek_sym('-') {
            self.pos += 1;
            -1.0
        } else {
            1.0
        };
        if self.peek_ident("exp") {
            return Ok(AmpExpr {
                magnitude: sign,
                phase: self.exp_term()?,
            });
        }
        if !matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Number(_))) {
            return Err(self.error_here("expected an amplitude (number or exp(i*phase))"));
        }
        let magnitude = sign * self.number()?;
        if self.peek_sym('*') {
            self.pos += 1;
            if !self.peek_ident("exp") {
                return Err(self.error_here("expected 'exp'"));
            }
            return Ok(AmpExpr {
                magnitude,
                phase: self.exp_term()?,
            });
        }
        Ok(AmpExpr {
            magnitude,
            phase: PhaseExpr::Literal(0.0),
        })
    }

    fn exp_term(&mut self) -> Result<PhaseExpr, ParseError> {
        self.expect_ident("'exp'")?;
        self.expect_sym('(')?;
        if !self.peek_ident("i") {
            return Err(self.error_here("expected 'i' inside exp(...)"));
        }
        self.pos += 1;
        self.expect_sym('*')?;
        let phase = self.phase_expr()?;
        self.expect_sym(')')?;
        Ok(phase)
    }
}

fn is_pi(t: &Token) -> bool {
    matches!(&t.kind, TokenKind::Ident(s) if s == "pi")
}

/// `k·π/d`; shared with the renderer so that pi forms round-trip bit-exactly.
pub(crate) fn pi_multiple(k: f64, d: f64) -> f64 {
    k * PI / d
}

enum Stmt {
    Header(String),
    Input(Input),
    Element(Element),
    Detect(Port, Port, usize),
}

fn parse_sign(cur: &mut Cursor<'_>) -> Result<BasisSign, ParseError> {
    match cur.peek() {
        Some(Token {
            kind: TokenKind::Sym('+'),
            ..
        }) => {
            cur.pos += 1;
            Ok(BasisSign::Plus)
        }
        Some(Token {
            kind: TokenKind::Sym('-'),
            ..
        }) => {
            cur.pos += 1;
            Ok(BasisSign::Minus)
        }
        Some(t) => Err(cur.error_at(
            t.column,
            format!("unknown sign '{}' (expected + or -)", t.text()),
        )),
        None => Err(cur.error_here("missing sign (expected + or -)")),
    }
}

fn parse_case(cur: &mut Cursor<'_>) -> Result<BasisCase, ParseError> {
    let t = cur.expect_ident("relation (same or opposite)")?;
    let relation = match t.text().as_str() {
        "same" => BasisRelation::Same,
        "opposite" => BasisRelation::Opposite,
        other => return Err(cur.error_at(t.column, format!("unknown relation '{other}'"))),
    };
    let t = cur.expect_ident("combination (symmetric or antisymmetric)")?;
    let combination = match t.text().as_str() {
        "symmetric" => Combination::Symmetric,
        "antisymmetric" => Combination::Antisymmetric,
        other => return Err(cur.error_at(t.column, format!("unknown combination '{other}'"))),
    };
    let sign = parse_sign(cur)?;
    Ok(BasisCase::new(relation, combination, sign))
}

fn parse_statement(cur: &mut Cursor<'_>) -> Result<Stmt, ParseError> {
    let head = cur.next().expect("caller skips empty lines");
    let keyword = match &head.kind {
        TokenKind::Ident(s) => s.as_str(),
        _ => return Err(cur.error_at(head.column, format!("unknown keyword '{}'", head.text()))),
    };
    let stmt = match keyword {
        "circuit" => Stmt::Header(cur.expect_ident("circuit name")?.text()),
        "in" => {
            let port = cur.port()?;
            let amp = cur.amp_expr()?;
            Stmt::Input(Input { port, amp })
        }
        "bs" => {
            if cur.peek_ident("superposed") {
                cur.pos += 1;
                Stmt::Element(Element::BsSuperposed(parse_case(cur)?))
            } else {
                Stmt::Element(Element::Bs(parse_sign(cur)?))
            }
        }
        "phase" => {
            let port = cur.port()?;
            let phase = cur.phase_expr()?;
            Stmt::Element(Element::Phase { port, phase })
        }
        "detect" => {
            let first = cur.port()?;
            let column = cur.peek().map_or_else(|| cur.end_column(), |t| t.column);
            let second = cur.port()?;
            Stmt::Detect(first, second, column)
        }
        other => return Err(cur.error_at(head.column, format!("unknown keyword '{other}'"))),
    };
    cur.expect_end()?;
    Ok(stmt)
}

pub fn parse(source: &str) -> Result<Circuit, ParseError> {
    let mut name: Option<String> = None;
    let mut inputs: Vec<Input> = Vec::new();
    let mut elements = Vec::new();
    let mut detectors = None;
    let mut last_line = (1, "");

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize_line(line);
        if tokens.is_empty() {
            continue;
        }
        last_line = (line_no, line);
        let mut cur = Cursor {
            tokens: &tokens,
            pos: 0,
            line_no,
            line,
        };
        let stmt = parse_statement(&mut cur)?;
        let first_col = tokens[0].column;
        if name.is_none() && !matches!(stmt, Stmt::Header(_)) {
            return Err(cur.error_at(first_col, "statement before 'circuit' header"));
        }
        match stmt {
            Stmt::Header(n) => {
                if name.is_some() {
                    return Err(cur.error_at(first_col, "duplicate 'circuit' header"));
                }
                name = Some(n);
            }
            Stmt::Input(input) => {
                if inputs.iter().any(|i| i.port == input.port) {
                    return Err(cur.error_at(
                        tokens[1].column,
                        format!("duplicate input port '{}'", input.port),
                    ));
                }
                inputs.push(input);
            }
            Stmt::Element(e) => elements.push(e),
            Stmt::Detect(a, b, second_col) => {
                if detectors.is_some() {
                    return Err(cur.error_at(first_col, "duplicate detector statement"));
                }
                if a == b {
                    return Err(cur.error_at(second_col, format!("duplicate detector port '{b}'")));
                }
                detectors = Some((a, b));
            }
        }
    }

    let at_end = |message: &str| ParseError {
        line: last_line.0,
        column: 1,
        message: message.to_string(),
        snippet: last_line.1.to_string(),
    };
    let name = name.ok_or_else(|| at_end("missing 'circuit' header"))?;
    if elements.is_empty() {
        return Err(at_end("circuit has no elements"));
    }
    let detectors = detectors.ok_or_else(|| at_end("missing 'detect' statement"))?;
    Ok(Circuit {
        name,
        inputs,
        elements,
        detectors,
    })
}

/// Parses a standalone angle such as `0.3`, `pi`, `-pi/2`, `2pi` or `3*pi/4`.
pub fn parse_angle(text: &str) -> Result<f64, ParseError> {
    let tokens = tokenize_line(text);
    let mut cur = Cursor {
        tokens: &tokens,
        pos: 0,
        line_no: 1,
        line: text,
    };
    let phase = cur.phase_expr()?;
    cur.expect_end()?;
    match phase {
        PhaseExpr::Literal(v) => Ok(v),
        PhaseExpr::Param { name, .. } => {
            Err(cur.error_at(1, format!("expected a numeric angle, found '{name}'")))
        }
    }
}
