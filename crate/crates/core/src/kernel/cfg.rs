//! Flattening of structured statement bodies into control-flow graphs.
//!
//! Each template body becomes a set of locations connected by edges that
//! carry primitive actions. Executability is decided per edge, which gives
//! the usual selection semantics for `if`/`do` options for free: every
//! option's first primitive becomes an edge out of the same location.
//!
//! Escape scopes (`unless`) and atomic/d_step regions are static properties
//! of locations, so a process frame is just its current location.

use super::expr::{ChanRef, Expr};
use super::stmt::{Decl, Stmt, Target, VarKind};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

pub type LocId = usize;
pub type EscapeId = usize;
pub type RegionId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Atomic,
    DStep,
}

/// Primitive action carried by one edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Skip,
    /// No-op with a distinct pretty-print (`goto L`, `break`, `else` step).
    Jump(&'static str),
    Assign(Target, Expr),
    Send(ChanRef, Expr),
    Recv(ChanRef, Target),
    Guard(Expr),
    /// Executable iff no sibling non-else edge at the same location is.
    Else,
    Run { template: String, args: Vec<Expr> },
    Timeout,
    Fail(String),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Skip => write!(f, "skip"),
            Action::Jump(k) => write!(f, "{}", k),
            Action::Assign(t, e) => write!(f, "{} = {}", t, e),
            Action::Send(c, e) => write!(f, "{}!{}", c, e),
            Action::Recv(c, t) => write!(f, "{}?{}", c, t),
            Action::Guard(e) => write!(f, "{}", e),
            Action::Else => write!(f, "else"),
            Action::Run { template, args } => {
                write!(f, "run {}(", template)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
            Action::Timeout => write!(f, "timeout"),
            Action::Fail(m) => write!(f, "fail({})", m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub action: Action,
    pub target: LocId,
}

#[derive(Debug, Clone, Default)]
pub struct Loc {
    pub edges: Vec<Edge>,
    /// Enclosing escape scopes, innermost last.
    pub escapes: Vec<EscapeId>,
    /// Innermost atomic/d_step region this location lies strictly inside.
    pub region: Option<RegionId>,
    pub labels: Vec<String>,
    /// Blocked here counts as a valid end state.
    pub valid_end: bool,
}

#[derive(Debug, Clone)]
pub struct EscapeScope {
    pub guard: Expr,
    /// Location after the guard inside the escape body.
    pub target: LocId,
}

#[derive(Debug, Clone)]
pub struct Cfg {
    pub start: LocId,
    pub end: LocId,
    pub locs: Vec<Loc>,
    pub escapes: Vec<EscapeScope>,
    pub regions: Vec<RegionKind>,
}

impl Cfg {
    pub fn loc(&self, id: LocId) -> &Loc {
        &self.locs[id]
    }

    pub fn region_kind(&self, loc: LocId) -> Option<RegionKind> {
        self.locs[loc].region.map(|r| self.regions[r])
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("goto target `{0}` is not declared as a label")]
    UnknownLabel(String),
    #[error("label `{0}` declared more than once")]
    DuplicateLabel(String),
    #[error("`break` outside of a do loop")]
    BreakOutsideLoop,
    #[error("duplicate local declaration `{0}`")]
    DuplicateLocal(String),
    #[error("empty option in if/do")]
    EmptyOption,
}

struct Builder {
    locs: Vec<Loc>,
    escapes: Vec<EscapeScope>,
    regions: Vec<RegionKind>,
    labels: HashMap<String, LocId>,
    goto_patches: Vec<(LocId, usize, String)>,
    escape_stack: Vec<EscapeId>,
    region_stack: Vec<RegionId>,
    loop_exits: Vec<LocId>,
    decls: Vec<Decl>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            locs: Vec::new(),
            escapes: Vec::new(),
            regions: Vec::new(),
            labels: HashMap::new(),
            goto_patches: Vec::new(),
            escape_stack: Vec::new(),
            region_stack: Vec::new(),
            loop_exits: Vec::new(),
            decls: Vec::new(),
        }
    }

    fn new_loc(&mut self) -> LocId {
        let id = self.locs.len();
        self.locs.push(Loc {
            edges: Vec::new(),
            escapes: self.escape_stack.clone(),
            region: self.region_stack.last().copied(),
            labels: Vec::new(),
            valid_end: false,
        });
        id
    }

    fn edge(&mut self, from: LocId, action: Action, to: LocId) {
        self.locs[from].edges.push(Edge { action, target: to });
    }

    /// Flattens `stmts` between `entry` and `exit`. The final statement's
    /// outgoing edges target `exit` directly. Labels attach to the entry
    /// of the following statement; bare declarations hoist without a step.
    fn seq_into(&mut self, stmts: &[Stmt], entry: LocId, exit: LocId) -> Result<(), BuildError> {
        let is_free = |s: &Stmt| {
            matches!(s, Stmt::Label(_)) || matches!(s, Stmt::Decl(d) if d.init.is_none())
        };
        let last_real = stmts.iter().rposition(|s| !is_free(s));
        let mut cur = entry;
        for (i, s) in stmts.iter().enumerate() {
            match s {
                Stmt::Label(name) => {
                    if self.labels.insert(name.clone(), cur).is_some() {
                        return Err(BuildError::DuplicateLabel(name.clone()));
                    }
                    self.locs[cur].labels.push(name.clone());
                    if name.starts_with("end") {
                        self.locs[cur].valid_end = true;
                    }
                }
                Stmt::Decl(d) if d.init.is_none() => {
                    if self.decls.iter().any(|x| x.name == d.name) {
                        return Err(BuildError::DuplicateLocal(d.name.clone()));
                    }
                    self.decls.push(d.clone());
                }
                _ => {
                    let next = if Some(i) == last_real {
                        exit
                    } else {
                        self.new_loc()
                    };
                    self.stmt(s, cur, next)?;
                    cur = next;
                }
            }
        }
        if last_real.is_none() && entry != exit {
            // Nothing but labels and declarations.
            self.edge(entry, Action::Skip, exit);
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt, entry: LocId, exit: LocId) -> Result<(), BuildError> {
        match s {
            Stmt::Skip => self.edge(entry, Action::Skip, exit),
            Stmt::Decl(d) => {
                // Reached only for initialized declarations (bare ones are
                // consumed by seq_into) or declarations in head position of
                // an option, where a no-op step keeps the structure sound.
                if self.decls.iter().any(|x| x.name == d.name) {
                    return Err(BuildError::DuplicateLocal(d.name.clone()));
                }
                self.decls.push(d.clone());
                match &d.init {
                    Some(e) => self.edge(
                        entry,
                        Action::Assign(Target::var(d.name.clone()), e.clone()),
                        exit,
                    ),
                    None => self.edge(entry, Action::Jump("decl"), exit),
                }
            }
            Stmt::Assign(t, e) => self.edge(entry, Action::Assign(t.clone(), e.clone()), exit),
            Stmt::Send(c, e) => self.edge(entry, Action::Send(c.clone(), e.clone()), exit),
            Stmt::Recv(c, t) => self.edge(entry, Action::Recv(c.clone(), t.clone()), exit),
            Stmt::Guard(e) => self.edge(entry, Action::Guard(e.clone()), exit),
            Stmt::Run { template, args } => self.edge(
                entry,
                Action::Run {
                    template: template.clone(),
                    args: args.clone(),
                },
                exit,
            ),
            Stmt::Timeout => self.edge(entry, Action::Timeout, exit),
            Stmt::Fail(m) => self.edge(entry, Action::Fail(m.clone()), exit),
            Stmt::Goto(name) => {
                let ix = self.locs[entry].edges.len();
                self.edge(entry, Action::Jump("goto"), usize::MAX);
                self.goto_patches.push((entry, ix, name.clone()));
            }
            Stmt::Label(name) => {
                // Reached only when a label is the final statement of a
                // body; attach to the exit continuation.
                if self.labels.insert(name.clone(), entry).is_some() {
                    return Err(BuildError::DuplicateLabel(name.clone()));
                }
                self.locs[entry].labels.push(name.clone());
                if name.starts_with("end") {
                    self.locs[entry].valid_end = true;
                }
                self.edge(entry, Action::Skip, exit);
            }
            Stmt::Break => {
                let target = *self
                    .loop_exits
                    .last()
                    .ok_or(BuildError::BreakOutsideLoop)?;
                self.edge(entry, Action::Jump("break"), target);
            }
            Stmt::If {
                options,
                else_branch,
            } => {
                for opt in options {
                    if opt.is_empty() {
                        return Err(BuildError::EmptyOption);
                    }
                    self.seq_into(opt, entry, exit)?;
                }
                if let Some(els) = else_branch {
                    let after_else = self.new_loc();
                    self.edge(entry, Action::Else, after_else);
                    self.seq_into(els, after_else, exit)?;
                }
            }
            Stmt::Do {
                options,
                else_branch,
            } => {
                self.loop_exits.push(exit);
                for opt in options {
                    if opt.is_empty() {
                        return Err(BuildError::EmptyOption);
                    }
                    self.seq_into(opt, entry, entry)?;
                }
                if let Some(els) = else_branch {
                    let after_else = self.new_loc();
                    self.edge(entry, Action::Else, after_else);
                    self.seq_into(els, after_else, entry)?;
                }
                self.loop_exits.pop();
            }
            Stmt::Atomic(body) => {
                let region = self.regions.len();
                self.regions.push(RegionKind::Atomic);
                self.region_stack.push(region);
                self.seq_into(body, entry, exit)?;
                self.region_stack.pop();
            }
            Stmt::DStep(body) => {
                let region = self.regions.len();
                self.regions.push(RegionKind::DStep);
                self.region_stack.push(region);
                self.seq_into(body, entry, exit)?;
                self.region_stack.pop();
            }
            Stmt::Unless {
                main,
                escape_guard,
                escape_body,
            } => {
                let escape_target = if escape_body.is_empty() {
                    exit
                } else {
                    self.new_loc()
                };
                let scope = self.escapes.len();
                self.escapes.push(EscapeScope {
                    guard: escape_guard.clone(),
                    target: escape_target,
                });
                if !escape_body.is_empty() {
                    self.seq_into(escape_body, escape_target, exit)?;
                }
                // The escape is active from the instant the main body is
                // reached, before its first statement executes.
                self.locs[entry].escapes.push(scope);
                self.escape_stack.push(scope);
                self.seq_into(main, entry, exit)?;
                self.escape_stack.pop();
            }
        }
        Ok(())
    }
}

pub struct BuiltBody {
    pub cfg: Cfg,
    pub decls: Vec<Decl>,
}

/// Flattens a template body. Declarations anywhere in the body are hoisted
/// into `decls`; labels beginning with `end` mark valid end states.
pub fn build_cfg(body: &[Stmt]) -> Result<BuiltBody, BuildError> {
    let mut b = Builder::new();
    let start = b.new_loc();
    let end = b.new_loc();
    if body.is_empty() {
        // A template with an empty body is done immediately: collapse the
        // start into the end location.
        let cfg = Cfg {
            start: end,
            end,
            locs: b.locs,
            escapes: b.escapes,
            regions: b.regions,
        };
        return Ok(BuiltBody {
            cfg,
            decls: b.decls,
        });
    }
    b.seq_into(body, start, end)?;
    for (loc, ix, name) in std::mem::take(&mut b.goto_patches) {
        let target = *b
            .labels
            .get(&name)
            .ok_or_else(|| BuildError::UnknownLabel(name.clone()))?;
        b.locs[loc].edges[ix].target = target;
    }
    Ok(BuiltBody {
        cfg: Cfg {
            start,
            end,
            locs: b.locs,
            escapes: b.escapes,
            regions: b.regions,
        },
        decls: b.decls,
    })
}

/// Collects declarations reachable in a statement list without building a
/// graph; used by validation and emission.
pub fn collect_decls(stmts: &[Stmt], out: &mut Vec<Decl>) {
    for s in stmts {
        match s {
            Stmt::Decl(d) => out.push(d.clone()),
            Stmt::If {
                options,
                else_branch,
            }
            | Stmt::Do {
                options,
                else_branch,
            } => {
                for o in options {
                    collect_decls(o, out);
                }
                if let Some(e) = else_branch {
                    collect_decls(e, out);
                }
            }
            Stmt::Atomic(b) | Stmt::DStep(b) => collect_decls(b, out),
            Stmt::Unless {
                main, escape_body, ..
            } => {
                collect_decls(main, out);
                collect_decls(escape_body, out);
            }
            _ => {}
        }
    }
}

/// True when a declared variable is a channel alias slot.
pub fn is_chan_decl(d: &Decl) -> bool {
    d.kind == VarKind::Chan
}
