//! Executability and transition application.

use super::cfg::{Action, EscapeId, LocId, RegionKind};
use super::expr::{BinOp, ChanRef, Expr};
use super::model::{Model, MAX_PROCESSES};
use super::state::{Pid, SystemState};
use super::stmt::Target;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound name `{0}`")]
    UnboundName(String),
    #[error("index {index} out of bounds for `{name}` (size {size})")]
    IndexOutOfBounds {
        name: String,
        index: i64,
        size: usize,
    },
    #[error("division by zero")]
    DivideByZero,
    #[error("`{name}` does not denote a bound channel (value {value})")]
    UnboundChannel { name: String, value: i64 },
}

/// A model error: the exploration aborts with a verdict naming the
/// offending template and statement.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("model error in {template} at `{statement}`: {kind}")]
pub struct ModelErrorInfo {
    pub template: String,
    pub statement: String,
    pub kind: ModelErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelErrorKind {
    #[error(transparent)]
    Eval(EvalError),
    #[error("process bound of {MAX_PROCESSES} exceeded")]
    TooManyProcesses,
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("d_step body blocked")]
    DStepBlocked,
    #[error("nondeterminism inside d_step")]
    DStepNondet,
    #[error("{0}")]
    Failed(String),
    #[error("illegal transition: {0}")]
    IllegalTransition(String),
}

pub type ExecResult<T> = Result<T, ModelErrorInfo>;

/// Pseudo-pid for evaluating expressions against the global store only,
/// e.g. observation propositions.
pub const GLOBAL_CTX: Pid = u32::MAX;

fn ctx_err(model: &Model, state: &SystemState, pid: Pid, what: &str, kind: ModelErrorKind) -> ModelErrorInfo {
    let template = state
        .procs
        .get(pid as usize)
        .map(|p| model.templates[p.template].name.clone())
        .unwrap_or_else(|| "?".to_string());
    ModelErrorInfo {
        template,
        statement: what.to_string(),
        kind,
    }
}

/// One executable move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transition {
    /// Execute one edge of the process at `loc`.
    Edge { loc: LocId, edge: usize },
    /// Fire an escape scope: control transfers to the escape body.
    Escape { loc: LocId, scope: EscapeId },
    /// Synchronous handoff on a capacity-0 channel, attributed to the sender.
    Rendezvous {
        s_loc: LocId,
        s_edge: usize,
        receiver: Pid,
        r_loc: LocId,
        r_edge: usize,
    },
}

impl Transition {
    /// Statement pretty-print for traces.
    pub fn pretty(&self, model: &Model, state: &SystemState, pid: Pid) -> String {
        let p = &state.procs[pid as usize];
        let t = &model.templates[p.template];
        match self {
            Transition::Edge { loc, edge } => t.cfg.locs[*loc].edges[*edge].action.to_string(),
            Transition::Escape { loc: _, scope } => {
                format!("{}", t.cfg.escapes[*scope].guard)
            }
            Transition::Rendezvous { s_loc, s_edge, .. } => {
                t.cfg.locs[*s_loc].edges[*s_edge].action.to_string()
            }
        }
    }

    pub fn is_timeout(&self, model: &Model, state: &SystemState, pid: Pid) -> bool {
        match self {
            Transition::Edge { loc, edge } => {
                let p = &state.procs[pid as usize];
                matches!(
                    model.templates[p.template].cfg.locs[*loc].edges[*edge].action,
                    Action::Timeout
                )
            }
            _ => false,
        }
    }
}

fn read_slot(
    model: &Model,
    state: &SystemState,
    pid: Pid,
    name: &str,
    index: Option<i64>,
) -> Result<i64, EvalError> {
    if pid != GLOBAL_CTX {
        let p = &state.procs[pid as usize];
        let t = &model.templates[p.template];
        if let Some(slot) = t.layout.slot(name) {
            let i = index.unwrap_or(0);
            if i < 0 || i as usize >= slot.size {
                return Err(EvalError::IndexOutOfBounds {
                    name: name.to_string(),
                    index: i,
                    size: slot.size,
                });
            }
            return Ok(p.locals[slot.offset + i as usize]);
        }
    }
    if let Some(slot) = model.globals.slot(name) {
        let i = index.unwrap_or(0);
        if i < 0 || i as usize >= slot.size {
            return Err(EvalError::IndexOutOfBounds {
                name: name.to_string(),
                index: i,
                size: slot.size,
            });
        }
        return Ok(state.globals[slot.offset + i as usize]);
    }
    Err(EvalError::UnboundName(name.to_string()))
}

fn resolve_chan(
    model: &Model,
    state: &SystemState,
    pid: Pid,
    c: &ChanRef,
) -> Result<usize, EvalError> {
    let index = match &c.index {
        Some(e) => Some(eval_raw(model, state, pid, e)?),
        None => None,
    };
    let v = read_slot(model, state, pid, &c.name, index)?;
    if v < 0 || v as usize >= state.buffers.len() {
        return Err(EvalError::UnboundChannel {
            name: c.to_string(),
            value: v,
        });
    }
    Ok(v as usize)
}

fn eval_raw(model: &Model, state: &SystemState, pid: Pid, e: &Expr) -> Result<i64, EvalError> {
    Ok(match e {
        Expr::Int(v) => *v,
        Expr::Var(n) => read_slot(model, state, pid, n, None)?,
        Expr::Index(n, ix) => {
            let i = eval_raw(model, state, pid, ix)?;
            read_slot(model, state, pid, n, Some(i))?
        }
        Expr::Len(c) => state.buffers[resolve_chan(model, state, pid, c)?].len() as i64,
        Expr::Binary(op, l, r) => {
            // && and || short-circuit, matching C evaluation of guards
            // such as `i<sizeq && piIds[i]==id`.
            match op {
                BinOp::And => {
                    if eval_raw(model, state, pid, l)? == 0 {
                        return Ok(0);
                    }
                    return Ok((eval_raw(model, state, pid, r)? != 0) as i64);
                }
                BinOp::Or => {
                    if eval_raw(model, state, pid, l)? != 0 {
                        return Ok(1);
                    }
                    return Ok((eval_raw(model, state, pid, r)? != 0) as i64);
                }
                _ => {}
            }
            let a = eval_raw(model, state, pid, l)?;
            let b = eval_raw(model, state, pid, r)?;
            match op {
                BinOp::Add => a.wrapping_add(b),
                BinOp::Sub => a.wrapping_sub(b),
                BinOp::Mul => a.wrapping_mul(b),
                BinOp::Div => {
                    if b == 0 {
                        return Err(EvalError::DivideByZero);
                    }
                    a.wrapping_div(b)
                }
                BinOp::Mod => {
                    if b == 0 {
                        return Err(EvalError::DivideByZero);
                    }
                    a.wrapping_rem(b)
                }
                BinOp::Eq => (a == b) as i64,
                BinOp::Ne => (a != b) as i64,
                BinOp::Lt => (a < b) as i64,
                BinOp::Le => (a <= b) as i64,
                BinOp::Gt => (a > b) as i64,
                BinOp::Ge => (a >= b) as i64,
                BinOp::And | BinOp::Or => unreachable!(),
            }
        }
        Expr::Not(x) => (eval_raw(model, state, pid, x)? == 0) as i64,
        Expr::Neg(x) => eval_raw(model, state, pid, x)?.wrapping_neg(),
    })
}

/// Evaluates an expression in the context of one process instance.
/// Booleans are 0/1; the state is not modified.
pub fn eval_expr(model: &Model, state: &SystemState, pid: Pid, e: &Expr) -> ExecResult<i64> {
    eval_raw(model, state, pid, e)
        .map_err(|err| ctx_err(model, state, pid, &e.to_string(), ModelErrorKind::Eval(err)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EdgeKind {
    Enabled,
    Disabled,
    Cap0Send(usize),
    Cap0Recv(usize),
    Timeout,
    Else,
}

struct ProcScan {
    /// Innermost escape scope whose guard is true, if any.
    escape: Option<(LocId, EscapeId)>,
    loc: LocId,
    kinds: Vec<EdgeKind>,
}

fn scan_proc(
    model: &Model,
    state: &SystemState,
    pid: Pid,
    skip_escape: bool,
) -> ExecResult<Option<ProcScan>> {
    let p = &state.procs[pid as usize];
    let t = &model.templates[p.template];
    if p.loc == t.cfg.end {
        return Ok(None);
    }
    let loc = &t.cfg.locs[p.loc];
    if !skip_escape {
        for &scope in loc.escapes.iter().rev() {
            let guard = &t.cfg.escapes[scope].guard;
            let v = eval_raw(model, state, pid, guard).map_err(|err| {
                ctx_err(model, state, pid, &guard.to_string(), ModelErrorKind::Eval(err))
            })?;
            if v != 0 {
                return Ok(Some(ProcScan {
                    escape: Some((p.loc, scope)),
                    loc: p.loc,
                    kinds: Vec::new(),
                }));
            }
        }
    }
    let mut kinds = Vec::with_capacity(loc.edges.len());
    for edge in &loc.edges {
        let kind = match &edge.action {
            Action::Skip | Action::Jump(_) | Action::Assign(..) | Action::Run { .. } | Action::Fail(_) => {
                EdgeKind::Enabled
            }
            Action::Guard(e) => {
                let v = eval_raw(model, state, pid, e).map_err(|err| {
                    ctx_err(model, state, pid, &e.to_string(), ModelErrorKind::Eval(err))
                })?;
                if v != 0 {
                    EdgeKind::Enabled
                } else {
                    EdgeKind::Disabled
                }
            }
            Action::Send(c, _) => {
                let ch = resolve_chan(model, state, pid, c).map_err(|err| {
                    ctx_err(model, state, pid, &c.to_string(), ModelErrorKind::Eval(err))
                })?;
                let cap = model.channels[ch].capacity;
                if cap == 0 {
                    EdgeKind::Cap0Send(ch)
                } else if state.buffers[ch].len() < cap {
                    EdgeKind::Enabled
                } else {
                    EdgeKind::Disabled
                }
            }
            Action::Recv(c, _) => {
                let ch = resolve_chan(model, state, pid, c).map_err(|err| {
                    ctx_err(model, state, pid, &c.to_string(), ModelErrorKind::Eval(err))
                })?;
                let cap = model.channels[ch].capacity;
                if cap == 0 {
                    EdgeKind::Cap0Recv(ch)
                } else if !state.buffers[ch].is_empty() {
                    EdgeKind::Enabled
                } else {
                    EdgeKind::Disabled
                }
            }
            Action::Else => EdgeKind::Else,
            Action::Timeout => EdgeKind::Timeout,
        };
        kinds.push(kind);
    }
    Ok(Some(ProcScan {
        escape: None,
        loc: p.loc,
        kinds,
    }))
}

/// Non-timeout moves plus, separately, the timeout moves that become
/// executable only when the first list is empty.
fn scan_all(
    model: &Model,
    state: &SystemState,
    holder: Option<Pid>,
) -> ExecResult<(Vec<(Pid, Transition)>, Vec<(Pid, Transition)>)> {
    let mut scans: Vec<(Pid, ProcScan)> = Vec::new();
    for p in &state.procs {
        let skip_escape = holder == Some(p.pid);
        if let Some(s) = scan_proc(model, state, p.pid, skip_escape)? {
            scans.push((p.pid, s));
        }
    }

    // Pair rendezvous offers across processes.
    let mut recv_offers: HashMap<usize, Vec<(Pid, LocId, usize)>> = HashMap::new();
    for (pid, s) in &scans {
        for (ix, k) in s.kinds.iter().enumerate() {
            if let EdgeKind::Cap0Recv(ch) = k {
                recv_offers.entry(*ch).or_default().push((*pid, s.loc, ix));
            }
        }
    }
    let mut send_matched: HashMap<(Pid, usize), Vec<(Pid, LocId, usize)>> = HashMap::new();
    let mut matched_recvs: Vec<(Pid, usize)> = Vec::new();
    for (pid, s) in &scans {
        for (ix, k) in s.kinds.iter().enumerate() {
            if let EdgeKind::Cap0Send(ch) = k {
                if let Some(partners) = recv_offers.get(ch) {
                    let ps: Vec<_> = partners.iter().filter(|(rp, _, _)| rp != pid).copied().collect();
                    if !ps.is_empty() {
                        for (rp, _, rix) in &ps {
                            matched_recvs.push((*rp, *rix));
                        }
                        send_matched.insert((*pid, ix), ps);
                    }
                }
            }
        }
    }

    let mut normal = Vec::new();
    let mut timeouts = Vec::new();
    for (pid, s) in &scans {
        if let Some((loc, scope)) = s.escape {
            normal.push((*pid, Transition::Escape { loc, scope }));
            continue;
        }
        // else is executable iff no sibling option is.
        let sibling_enabled = s.kinds.iter().enumerate().any(|(ix, k)| match k {
            EdgeKind::Enabled => true,
            EdgeKind::Cap0Send(_) => send_matched.contains_key(&(*pid, ix)),
            EdgeKind::Cap0Recv(_) => matched_recvs.contains(&(*pid, ix)),
            _ => false,
        });
        for (ix, k) in s.kinds.iter().enumerate() {
            match k {
                EdgeKind::Enabled => normal.push((
                    *pid,
                    Transition::Edge {
                        loc: s.loc,
                        edge: ix,
                    },
                )),
                EdgeKind::Cap0Send(_) => {
                    if let Some(partners) = send_matched.get(&(*pid, ix)) {
                        for (rp, r_loc, r_edge) in partners {
                            normal.push((
                                *pid,
                                Transition::Rendezvous {
                                    s_loc: s.loc,
                                    s_edge: ix,
                                    receiver: *rp,
                                    r_loc: *r_loc,
                                    r_edge: *r_edge,
                                },
                            ));
                        }
                    }
                }
                EdgeKind::Else => {
                    if !sibling_enabled {
                        normal.push((
                            *pid,
                            Transition::Edge {
                                loc: s.loc,
                                edge: ix,
                            },
                        ));
                    }
                }
                EdgeKind::Timeout => timeouts.push((
                    *pid,
                    Transition::Edge {
                        loc: s.loc,
                        edge: ix,
                    },
                )),
                EdgeKind::Cap0Recv(_) | EdgeKind::Disabled => {}
            }
        }
    }
    Ok((normal, timeouts))
}

/// Exactly the executable moves of `state`, deterministically ordered
/// (ascending pid, edges in syntactic order).
///
/// If the atomic holder has a move, only its moves are returned; a blocked
/// holder loses atomicity. A `timeout` move appears only when no
/// non-timeout move exists anywhere in the system. An empty result is the
/// quiescence signal.
pub fn enabled_transitions(
    model: &Model,
    state: &SystemState,
) -> ExecResult<Vec<(Pid, Transition)>> {
    if let Some(h) = state.atomic_holder {
        let (normal, _) = scan_all(model, state, Some(h))?;
        let mine: Vec<_> = normal.into_iter().filter(|(p, _)| *p == h).collect();
        if !mine.is_empty() {
            return Ok(mine);
        }
        // Holder blocked: atomicity is lost, fall through to the full scan.
    }
    let (normal, timeouts) = scan_all(model, state, None)?;
    if !normal.is_empty() {
        return Ok(normal);
    }
    Ok(timeouts)
}

/// Side effects of one applied transition, for trace rendering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Effect {
    pub assigns: Vec<(String, i64)>,
    pub sends: Vec<(String, i64)>,
    pub recvs: Vec<(String, i64)>,
    pub spawned: Vec<String>,
}

fn write_slot(
    model: &Model,
    state: &mut SystemState,
    pid: Pid,
    name: &str,
    index: Option<i64>,
    value: i64,
) -> Result<String, EvalError> {
    let p = &mut state.procs[pid as usize];
    let t = &model.templates[p.template];
    if let Some(slot) = t.layout.slot(name) {
        let i = index.unwrap_or(0);
        if i < 0 || i as usize >= slot.size {
            return Err(EvalError::IndexOutOfBounds {
                name: name.to_string(),
                index: i,
                size: slot.size,
            });
        }
        p.locals[slot.offset + i as usize] = value;
    } else if let Some(slot) = model.globals.slot(name) {
        let i = index.unwrap_or(0);
        if i < 0 || i as usize >= slot.size {
            return Err(EvalError::IndexOutOfBounds {
                name: name.to_string(),
                index: i,
                size: slot.size,
            });
        }
        state.globals[slot.offset + i as usize] = value;
    } else {
        return Err(EvalError::UnboundName(name.to_string()));
    }
    Ok(match index {
        Some(i) => format!("{}[{}]", name, i),
        None => name.to_string(),
    })
}

fn write_target(
    model: &Model,
    state: &mut SystemState,
    pid: Pid,
    target: &Target,
    value: i64,
) -> Result<String, EvalError> {
    match target {
        Target::Var(n) => write_slot(model, state, pid, n, None, value),
        Target::Elem(n, ix) => {
            let i = eval_raw(model, state, pid, ix)?;
            write_slot(model, state, pid, n, Some(i), value)
        }
    }
}

fn exec_action(
    model: &Model,
    state: &mut SystemState,
    pid: Pid,
    action: &Action,
    effect: &mut Effect,
) -> ExecResult<()> {
    let wrap = |err: EvalError, model: &Model, state: &SystemState| {
        ctx_err(model, state, pid, &action.to_string(), ModelErrorKind::Eval(err))
    };
    match action {
        Action::Skip | Action::Jump(_) | Action::Guard(_) | Action::Else | Action::Timeout => {}
        Action::Assign(t, e) => {
            let v = eval_raw(model, state, pid, e).map_err(|e| wrap(e, model, state))?;
            let name = write_target(model, state, pid, t, v).map_err(|e| wrap(e, model, state))?;
            effect.assigns.push((name, v));
        }
        Action::Send(c, e) => {
            let ch = resolve_chan(model, state, pid, c).map_err(|e| wrap(e, model, state))?;
            let v = eval_raw(model, state, pid, e).map_err(|e| wrap(e, model, state))?;
            let cap = model.channels[ch].capacity;
            if state.buffers[ch].len() >= cap {
                return Err(ctx_err(
                    model,
                    state,
                    pid,
                    &action.to_string(),
                    ModelErrorKind::IllegalTransition("send on full channel".into()),
                ));
            }
            state.buffers[ch].push_back(v);
            effect.sends.push((model.channels[ch].name.clone(), v));
        }
        Action::Recv(c, t) => {
            let ch = resolve_chan(model, state, pid, c).map_err(|e| wrap(e, model, state))?;
            let v = match state.buffers[ch].pop_front() {
                Some(v) => v,
                None => {
                    return Err(ctx_err(
                        model,
                        state,
                        pid,
                        &action.to_string(),
                        ModelErrorKind::IllegalTransition("recv on empty channel".into()),
                    ))
                }
            };
            effect.recvs.push((model.channels[ch].name.clone(), v));
            let name = write_target(model, state, pid, t, v).map_err(|e| wrap(e, model, state))?;
            effect.assigns.push((name, v));
        }
        Action::Run { template, args } => {
            let (tid, _) = model.template_named(template).ok_or_else(|| {
                ctx_err(
                    model,
                    state,
                    pid,
                    &action.to_string(),
                    ModelErrorKind::UnknownTemplate(template.clone()),
                )
            })?;
            if state.procs.len() >= MAX_PROCESSES {
                return Err(ctx_err(
                    model,
                    state,
                    pid,
                    &action.to_string(),
                    ModelErrorKind::TooManyProcesses,
                ));
            }
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_raw(model, state, pid, a).map_err(|e| wrap(e, model, state))?);
            }
            state.spawn(model, tid, &vals);
            effect.spawned.push(template.clone());
        }
        Action::Fail(m) => {
            return Err(ctx_err(
                model,
                state,
                pid,
                &action.to_string(),
                ModelErrorKind::Failed(m.clone()),
            ))
        }
    }
    Ok(())
}

/// True when the process has a locally executable non-timeout move,
/// ignoring its escape scopes. Used to decide atomic-region retention.
fn has_local_move(model: &Model, state: &SystemState, pid: Pid) -> ExecResult<bool> {
    let scan = match scan_proc(model, state, pid, true)? {
        Some(s) => s,
        None => return Ok(false),
    };
    let any_enabled = scan.kinds.iter().any(|k| *k == EdgeKind::Enabled);
    if any_enabled {
        return Ok(true);
    }
    // An `else` inside the region keeps it live when nothing else is.
    Ok(scan
        .kinds
        .iter()
        .any(|k| *k == EdgeKind::Else))
}

/// Applies one enabled transition, returning the successor state and the
/// observable effects. The input state is not mutated.
pub fn apply_transition(
    model: &Model,
    state: &SystemState,
    pid: Pid,
    t: &Transition,
) -> ExecResult<(SystemState, Effect)> {
    let mut next = state.clone();
    let mut effect = Effect::default();
    let active = pid as usize;
    if active >= next.procs.len() {
        return Err(ctx_err(
            model,
            state,
            pid,
            "?",
            ModelErrorKind::IllegalTransition("no such pid".into()),
        ));
    }
    match t {
        Transition::Edge { loc, edge } => {
            let tmpl = next.procs[active].template;
            if next.procs[active].loc != *loc {
                return Err(ctx_err(
                    model,
                    state,
                    pid,
                    "?",
                    ModelErrorKind::IllegalTransition("stale location".into()),
                ));
            }
            let e = model.templates[tmpl].cfg.locs[*loc].edges[*edge].clone();
            exec_action(model, &mut next, pid, &e.action, &mut effect)?;
            next.procs[active].loc = e.target;
        }
        Transition::Escape { loc, scope } => {
            let tmpl = next.procs[active].template;
            if next.procs[active].loc != *loc {
                return Err(ctx_err(
                    model,
                    state,
                    pid,
                    "?",
                    ModelErrorKind::IllegalTransition("stale location".into()),
                ));
            }
            next.procs[active].loc = model.templates[tmpl].cfg.escapes[*scope].target;
        }
        Transition::Rendezvous {
            s_loc,
            s_edge,
            receiver,
            r_loc,
            r_edge,
        } => {
            let s_tmpl = next.procs[active].template;
            let r = *receiver as usize;
            let r_tmpl = next.procs[r].template;
            let send_edge = model.templates[s_tmpl].cfg.locs[*s_loc].edges[*s_edge].clone();
            let recv_edge = model.templates[r_tmpl].cfg.locs[*r_loc].edges[*r_edge].clone();
            let (sc, sv) = match &send_edge.action {
                Action::Send(c, e) => {
                    let ch = resolve_chan(model, &next, pid, c).map_err(|err| {
                        ctx_err(model, state, pid, &c.to_string(), ModelErrorKind::Eval(err))
                    })?;
                    let v = eval_raw(model, &next, pid, e).map_err(|err| {
                        ctx_err(model, state, pid, &e.to_string(), ModelErrorKind::Eval(err))
                    })?;
                    (ch, v)
                }
                _ => {
                    return Err(ctx_err(
                        model,
                        state,
                        pid,
                        "?",
                        ModelErrorKind::IllegalTransition("rendezvous sender edge".into()),
                    ))
                }
            };
            match &recv_edge.action {
                Action::Recv(_, target) => {
                    effect.sends.push((model.channels[sc].name.clone(), sv));
                    effect.recvs.push((model.channels[sc].name.clone(), sv));
                    let name = write_target(model, &mut next, *receiver, target, sv)
                        .map_err(|err| {
                            ctx_err(model, state, *receiver, "?", ModelErrorKind::Eval(err))
                        })?;
                    effect.assigns.push((name, sv));
                }
                _ => {
                    return Err(ctx_err(
                        model,
                        state,
                        pid,
                        "?",
                        ModelErrorKind::IllegalTransition("rendezvous receiver edge".into()),
                    ))
                }
            }
            next.procs[active].loc = send_edge.target;
            next.procs[r].loc = recv_edge.target;
        }
    }

    // A d_step region runs to completion as part of this transition.
    loop {
        let p = &next.procs[active];
        let cfg = &model.templates[p.template].cfg;
        if cfg.region_kind(p.loc) != Some(RegionKind::DStep) {
            break;
        }
        let scan = scan_proc(model, &next, pid, true)?.ok_or_else(|| {
            ctx_err(model, state, pid, "d_step", ModelErrorKind::DStepBlocked)
        })?;
        let enabled: Vec<usize> = scan
            .kinds
            .iter()
            .enumerate()
            .filter_map(|(ix, k)| match k {
                EdgeKind::Enabled => Some(ix),
                _ => None,
            })
            .collect();
        let chosen = match enabled.len() {
            0 => {
                // A lone `else` keeps a deterministic d_step going.
                let elses: Vec<usize> = scan
                    .kinds
                    .iter()
                    .enumerate()
                    .filter_map(|(ix, k)| (*k == EdgeKind::Else).then_some(ix))
                    .collect();
                match elses.len() {
                    1 => elses[0],
                    0 => {
                        return Err(ctx_err(
                            model,
                            &next,
                            pid,
                            "d_step",
                            ModelErrorKind::DStepBlocked,
                        ))
                    }
                    _ => {
                        return Err(ctx_err(
                            model,
                            &next,
                            pid,
                            "d_step",
                            ModelErrorKind::DStepNondet,
                        ))
                    }
                }
            }
            1 => enabled[0],
            _ => {
                return Err(ctx_err(
                    model,
                    &next,
                    pid,
                    "d_step",
                    ModelErrorKind::DStepNondet,
                ))
            }
        };
        let p = &next.procs[active];
        let cfg = &model.templates[p.template].cfg;
        let edge = cfg.locs[p.loc].edges[chosen].clone();
        exec_action(model, &mut next, pid, &edge.action, &mut effect)?;
        next.procs[active].loc = edge.target;
    }

    // Atomicity: retained only while the active process sits inside a
    // region with a locally executable move; otherwise it is lost now,
    // which keeps states canonical.
    let p = &next.procs[active];
    let cfg = &model.templates[p.template].cfg;
    next.atomic_holder = if cfg.locs.get(p.loc).map(|l| l.region).flatten().is_some()
        && has_local_move(model, &next, pid)?
    {
        Some(pid)
    } else {
        None
    };

    Ok((next, effect))
}

/// Precondition: `enabled_transitions(state)` is empty. True iff every
/// live process sits at the end of its body or at a valid-end label.
pub fn is_valid_end_state(model: &Model, state: &SystemState) -> bool {
    state.procs.iter().all(|p| {
        let cfg = &model.templates[p.template].cfg;
        p.loc == cfg.end || cfg.locs[p.loc].valid_end
    })
}
