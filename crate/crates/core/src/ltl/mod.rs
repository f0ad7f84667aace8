//! LTL formulas over named propositions, negation normal form, and the
//! tableau translation to Büchi automata.

pub mod buchi;
pub mod parser;

pub use buchi::{ltl_to_buchi, BuchiAutomaton, BuchiEdge, Guard, Literal};
pub use parser::{parse_formula, ParseError};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Formula tree. `Release` is internal: it never appears in user syntax and
/// only arises from pushing negations through `Until`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Prop(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Always(Box<Formula>),
    Eventually(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
}

impl Formula {
    pub fn prop(name: impl Into<String>) -> Formula {
        Formula::Prop(name.into())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn always(f: Formula) -> Formula {
        Formula::Always(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Formula, b: Formula) -> Formula {
        Formula::Release(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    /// Collects the distinct proposition names, in first-occurrence order.
    pub fn props(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk_props(&mut out);
        out
    }

    fn walk_props(&self, out: &mut Vec<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Prop(p) => {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            Formula::Not(f) | Formula::Always(f) | Formula::Eventually(f) | Formula::Next(f) => {
                f.walk_props(out)
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => {
                a.walk_props(out);
                b.walk_props(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Prop(p) => write!(f, "{}", p),
            Formula::Not(x) => write!(f, "!{}", paren(x)),
            Formula::And(a, b) => write!(f, "({} && {})", a, b),
            Formula::Or(a, b) => write!(f, "({} || {})", a, b),
            Formula::Implies(a, b) => write!(f, "({} -> {})", a, b),
            Formula::Always(x) => write!(f, "[] {}", paren(x)),
            Formula::Eventually(x) => write!(f, "<> {}", paren(x)),
            Formula::Until(a, b) => write!(f, "({} U {})", a, b),
            Formula::Release(a, b) => write!(f, "({} R {})", a, b),
            Formula::Next(x) => write!(f, "X {}", paren(x)),
        }
    }
}

fn paren(f: &Formula) -> String {
    match f {
        Formula::Prop(_) | Formula::True | Formula::False | Formula::Not(_) => format!("{}", f),
        _ => format!("({})", f),
    }
}

/// Pushes negations down to propositions using the dualities
/// `![]f = <>!f`, `!<>f = []!f`, `!(f U g) = !f R !g`, `!Xf = X!f`,
/// eliminating implications and double negations. Idempotent.
pub fn normalize_negation(f: &Formula) -> Formula {
    norm(f, false)
}

fn norm(f: &Formula, negated: bool) -> Formula {
    match (f, negated) {
        (Formula::True, false) | (Formula::False, true) => Formula::True,
        (Formula::True, true) | (Formula::False, false) => Formula::False,
        (Formula::Prop(p), false) => Formula::Prop(p.clone()),
        (Formula::Prop(p), true) => Formula::not(Formula::Prop(p.clone())),
        (Formula::Not(x), _) => norm(x, !negated),
        (Formula::And(a, b), false) => Formula::and(norm(a, false), norm(b, false)),
        (Formula::And(a, b), true) => Formula::or(norm(a, true), norm(b, true)),
        (Formula::Or(a, b), false) => Formula::or(norm(a, false), norm(b, false)),
        (Formula::Or(a, b), true) => Formula::and(norm(a, true), norm(b, true)),
        (Formula::Implies(a, b), false) => Formula::or(norm(a, true), norm(b, false)),
        (Formula::Implies(a, b), true) => Formula::and(norm(a, false), norm(b, true)),
        (Formula::Always(x), false) => Formula::always(norm(x, false)),
        (Formula::Always(x), true) => Formula::eventually(norm(x, true)),
        (Formula::Eventually(x), false) => Formula::eventually(norm(x, false)),
        (Formula::Eventually(x), true) => Formula::always(norm(x, true)),
        (Formula::Until(a, b), false) => Formula::until(norm(a, false), norm(b, false)),
        (Formula::Until(a, b), true) => Formula::release(norm(a, true), norm(b, true)),
        (Formula::Release(a, b), false) => Formula::release(norm(a, false), norm(b, false)),
        (Formula::Release(a, b), true) => Formula::until(norm(a, true), norm(b, true)),
        (Formula::Next(x), _) => Formula::next(norm(x, negated)),
    }
}
