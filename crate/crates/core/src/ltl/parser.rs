//! Formula parser.
//!
//! Precedence (loosest first): `->`, `||`, `&&`, `U`, then the unaries
//! `!`, `[]`, `<>`, `X`, which bind tightest. `U` and `->` associate to
//! the right; parentheses are honored.

use super::Formula;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("formula syntax error at column {col}: {message}")]
    Syntax { col: usize, message: String },
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Always,
    Eventually,
    Until,
    Next,
    LParen,
    RParen,
    True,
    False,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                out.push((col, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((col, Tok::RParen));
                i += 1;
            }
            '!' => {
                out.push((col, Tok::Not));
                i += 1;
            }
            '&' if bytes.get(i + 1) == Some(&'&') => {
                out.push((col, Tok::And));
                i += 2;
            }
            '|' if bytes.get(i + 1) == Some(&'|') => {
                out.push((col, Tok::Or));
                i += 2;
            }
            '-' if bytes.get(i + 1) == Some(&'>') => {
                out.push((col, Tok::Implies));
                i += 2;
            }
            '[' if bytes.get(i + 1) == Some(&']') => {
                out.push((col, Tok::Always));
                i += 2;
            }
            '<' if bytes.get(i + 1) == Some(&'>') => {
                out.push((col, Tok::Eventually));
                i += 2;
            }
            'U' if !bytes
                .get(i + 1)
                .map(|c| c.is_alphanumeric() || *c == '_')
                .unwrap_or(false) =>
            {
                out.push((col, Tok::Until));
                i += 1;
            }
            'X' if !bytes
                .get(i + 1)
                .map(|c| c.is_alphanumeric() || *c == '_')
                .unwrap_or(false) =>
            {
                out.push((col, Tok::Next));
                i += 1;
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                let word: String = bytes[start..i].iter().collect();
                match word.as_str() {
                    "true" => out.push((col, Tok::True)),
                    "false" => out.push((col, Tok::False)),
                    _ => out.push((col, Tok::Ident(word))),
                }
            }
            other => {
                return Err(ParseError::Syntax {
                    col,
                    message: format!("unexpected character `{}`", other),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    props: &'a [String],
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(c, _)| *c)
            .unwrap_or(self.end_col)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            col: self.col(),
            message: message.into(),
        }
    }

    // implies := or ('->' implies)?
    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Tok::Until) {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Always) => {
                self.bump();
                Ok(Formula::always(self.unary()?))
            }
            Some(Tok::Eventually) => {
                self.bump();
                Ok(Formula::eventually(self.unary()?))
            }
            Some(Tok::Next) => {
                self.bump();
                Ok(Formula::next(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.bump() {
            Some(Tok::True) => Ok(Formula::True),
            Some(Tok::False) => Ok(Formula::False),
            Some(Tok::Ident(name)) => {
                if !self.props.contains(&name) {
                    return Err(ParseError::UnknownProposition(name));
                }
                Ok(Formula::Prop(name))
            }
            Some(Tok::LParen) => {
                let inner = self.implies()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(ParseError::Syntax {
                        col: self.end_col,
                        message: "expected `)`".to_string(),
                    }),
                }
            }
            _ => Err(self.err("expected a proposition, `true`, `false`, `(`, or a unary operator")),
        }
    }
}

/// Parses `text` against the table of declared proposition names.
pub fn parse_formula(text: &str, props: &[String]) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let end_col = text.chars().count() + 1;
    let mut p = Parser {
        toks,
        pos: 0,
        props,
        end_col,
    };
    let f = p.implies()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input after formula"));
    }
    Ok(f)
}
