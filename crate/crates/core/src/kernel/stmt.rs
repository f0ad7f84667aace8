//! Statement AST for process template bodies.

use super::expr::{ChanRef, Expr};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Assignment target: a scalar variable or an array element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    Var(String),
    Elem(String, Box<Expr>),
}

impl Target {
    pub fn var(name: impl Into<String>) -> Target {
        Target::Var(name.into())
    }

    pub fn elem(name: impl Into<String>, ix: Expr) -> Target {
        Target::Elem(name.into(), Box::new(ix))
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Var(n) => write!(f, "{}", n),
            Target::Elem(n, ix) => write!(f, "{}[{}]", n, ix),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Int,
    Chan,
}

/// Local variable declaration, hoisted to the template scope when the
/// control-flow graph is built. An initializer executes as a step at the
/// declaration point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Decl {
    pub name: String,
    pub kind: VarKind,
    pub size: usize,
    pub init: Option<Expr>,
}

impl Decl {
    pub fn int(name: impl Into<String>) -> Decl {
        Decl {
            name: name.into(),
            kind: VarKind::Int,
            size: 1,
            init: None,
        }
    }

    pub fn int_array(name: impl Into<String>, size: usize) -> Decl {
        Decl {
            name: name.into(),
            kind: VarKind::Int,
            size,
            init: None,
        }
    }

    pub fn chan_array(name: impl Into<String>, size: usize) -> Decl {
        Decl {
            name: name.into(),
            kind: VarKind::Chan,
            size,
            init: None,
        }
    }
}

/// One guarded option of an `if` or `do`.
pub type Option_ = Vec<Stmt>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stmt {
    Skip,
    Decl(Decl),
    Assign(Target, Expr),
    /// `q!msg` — blocks while the buffer is full.
    Send(ChanRef, Expr),
    /// `q?x` — blocks while the buffer is empty.
    Recv(ChanRef, Target),
    /// Expression statement: blocks until the expression is nonzero.
    Guard(Expr),
    If {
        options: Vec<Option_>,
        else_branch: Option<Vec<Stmt>>,
    },
    Do {
        options: Vec<Option_>,
        else_branch: Option<Vec<Stmt>>,
    },
    Break,
    Goto(String),
    /// Attaches to the following statement. Names starting with `end`
    /// mark the location as a valid end state.
    Label(String),
    Atomic(Vec<Stmt>),
    DStep(Vec<Stmt>),
    /// Main body preempted whenever the escape guard becomes true; the
    /// escape fires at most once and then runs `escape_body`.
    Unless {
        main: Vec<Stmt>,
        escape_guard: Expr,
        escape_body: Vec<Stmt>,
    },
    /// Instantiate a template. Always executable; exceeding the process
    /// bound is a model error.
    Run {
        template: String,
        args: Vec<Expr>,
    },
    /// Executable only when nothing else in the entire system is.
    Timeout,
    /// Always executable; aborts checking with a model error.
    Fail(String),
}

impl Stmt {
    pub fn assign(target: Target, value: Expr) -> Stmt {
        Stmt::Assign(target, value)
    }

    pub fn run(template: impl Into<String>, args: Vec<Expr>) -> Stmt {
        Stmt::Run {
            template: template.into(),
            args,
        }
    }
}
