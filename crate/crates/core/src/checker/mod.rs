//! Explicit-state verification: reachability with deadlock detection, LTL
//! checking over the model–automaton product, vacuity detection, and
//! counterexample extraction.

pub mod explore;
pub mod fairness;
pub mod ndfs;
pub mod product;
pub mod simulate;
pub mod trace;
pub mod vacuity;
pub mod verdict;

pub use explore::{explore, tarjan_scc, ExploreGraph, LimitKind, Limits, ReachReport};
pub use simulate::{simulate, SimEnd, SimOutcome};
pub use trace::{format_counterexample, RawStep, Trace, TraceStep, TraceStyle};
pub use vacuity::{detect_vacuity, VacuityReport};
pub use verdict::{Outcome, Verdict};

use crate::kernel::{Model, Transition};
use crate::ltl::{ltl_to_buchi, normalize_negation, Formula};
use product::{Move, ProductCtx};
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CheckOptions {
    pub fairness: bool,
    pub limits: Limits,
}

/// Visits every reachable state up to the limits and reports counts and
/// the quiescent-state classification.
pub fn explore_statespace(model: &Model, limits: Limits) -> Result<ReachReport, Verdict> {
    match explore(model, limits) {
        Ok(g) => Ok(ReachReport::from_graph(&g)),
        Err(e) => Err(Verdict::model_error(e)),
    }
}

/// HOLDS iff every quiescent reachable state is a valid end state and no
/// reachable cycle needs `timeout` to keep going. A cycle through a
/// timeout edge means the system can only avoid quiescence by firing
/// timeouts forever — the stuck-synchronization shape — and is reported as
/// a deadlock with a lasso trace.
pub fn check_deadlock(model: &Model, limits: Limits) -> Verdict {
    let g = match explore(model, limits) {
        Ok(g) => g,
        Err(e) => return Verdict::model_error(e),
    };
    let mut v = Verdict::new(Outcome::Holds);
    v.states_explored = g.states.len();
    v.transitions_explored = g.transitions;
    v.complete = g.limit_hit.is_none();

    if let Some(&(ix, _)) = g.quiescent.iter().find(|(_, valid)| !valid) {
        let raw: Vec<RawStep> = g
            .path_to(ix)
            .into_iter()
            .map(|(p, t)| RawStep::Step(p, t))
            .collect();
        match Trace::replay(model, &raw, None) {
            Ok((trace, _)) => {
                v.outcome = Outcome::Deadlock;
                v.trace = Some(trace);
            }
            Err(e) => return Verdict::model_error(e),
        }
        return v;
    }

    if let Some((u, pid, t, succ)) = find_timeout_cycle(model, &g) {
        let mut raw: Vec<RawStep> = g
            .path_to(u)
            .into_iter()
            .map(|(p, tt)| RawStep::Step(p, tt))
            .collect();
        let lasso_start = raw.len();
        raw.push(RawStep::Step(pid, t));
        for (p, tt) in cycle_back(&g, succ, u) {
            raw.push(RawStep::Step(p, tt));
        }
        match Trace::replay(model, &raw, Some(lasso_start)) {
            Ok((trace, _)) => {
                v.outcome = Outcome::Deadlock;
                v.trace = Some(trace);
            }
            Err(e) => return Verdict::model_error(e),
        }
        return v;
    }
    v
}

/// First timeout edge lying inside a strongly connected component, in
/// state-discovery order.
fn find_timeout_cycle(
    model: &Model,
    g: &ExploreGraph,
) -> Option<(usize, crate::kernel::Pid, Transition, usize)> {
    let has_timeout_edge = g.edges.iter().enumerate().any(|(u, es)| {
        es.iter()
            .any(|(pid, t, _)| t.is_timeout(model, &g.states[u], *pid))
    });
    if !has_timeout_edge {
        return None;
    }
    let comp = tarjan_scc(g.states.len(), |v| {
        g.edges[v].iter().map(|(_, _, s)| *s).collect()
    });
    for (u, es) in g.edges.iter().enumerate() {
        for (pid, t, succ) in es {
            if comp[u] == comp[*succ] && t.is_timeout(model, &g.states[u], *pid) {
                return Some((u, *pid, t.clone(), *succ));
            }
        }
    }
    None
}

/// Shortest transition path from `from` back to `to` within the graph.
fn cycle_back(
    g: &ExploreGraph,
    from: usize,
    to: usize,
) -> Vec<(crate::kernel::Pid, Transition)> {
    if from == to {
        return Vec::new();
    }
    let mut prev: HashMap<usize, (usize, crate::kernel::Pid, Transition)> = HashMap::new();
    let mut queue = VecDeque::new();
    queue.push_back(from);
    while let Some(cur) = queue.pop_front() {
        for (pid, t, succ) in &g.edges[cur] {
            if *succ == from || prev.contains_key(succ) {
                continue;
            }
            prev.insert(*succ, (cur, *pid, t.clone()));
            if *succ == to {
                let mut rev = Vec::new();
                let mut at = to;
                while at != from {
                    let (p, pid, t) = prev[&at].clone();
                    rev.push((pid, t));
                    at = p;
                }
                rev.reverse();
                return rev;
            }
            queue.push_back(*succ);
        }
    }
    unreachable!("endpoints share a strongly connected component");
}

fn moves_to_raw(prefix: Vec<Move>, cycle: Vec<Move>) -> (Vec<RawStep>, usize) {
    let lasso_start = prefix.len();
    let mut raw = Vec::with_capacity(prefix.len() + cycle.len());
    for m in prefix.into_iter().chain(cycle) {
        raw.push(match m {
            Move::Step(p, t) => RawStep::Step(p, t),
            Move::Stutter => RawStep::Stutter,
        });
    }
    (raw, lasso_start)
}

/// Checks an LTL property by searching the product of the model and the
/// automaton of the negated formula for accepting cycles; terminating runs
/// are stutter-extended. With fairness on, only weakly fair cycles count
/// as violations.
pub fn check_ltl_property(
    model: &Model,
    f: &Formula,
    options: CheckOptions,
) -> Result<Verdict, CheckError> {
    let negated = normalize_negation(&Formula::not(f.clone()));
    let buchi = ltl_to_buchi(&negated);
    let mut ctx = match ProductCtx::new(model, &buchi) {
        Ok(c) => c,
        Err(name) => return Err(CheckError::UnknownProposition(name)),
    };

    let (violation, product_states, complete) = if options.fairness {
        match fairness::fair_check(&mut ctx, options.limits.max_states) {
            Ok((o, complete)) => (o.violation, o.product_states, complete),
            Err(e) => return Ok(Verdict::model_error(e)),
        }
    } else {
        match ndfs::nested_dfs(&mut ctx, options.limits.max_states) {
            Ok((o, complete)) => (o.violation, o.product_states, complete),
            Err(e) => return Ok(Verdict::model_error(e)),
        }
    };

    let mut v = Verdict::new(Outcome::Holds);
    v.states_explored = product_states;
    v.transitions_explored = ctx.model_transitions;
    v.complete = complete;
    if let Some((prefix, cycle)) = violation {
        let (raw, lasso_start) = moves_to_raw(prefix, cycle);
        match Trace::replay(model, &raw, Some(lasso_start)) {
            Ok((trace, _)) => {
                v.outcome = Outcome::Violated;
                v.trace = Some(trace);
            }
            Err(e) => return Ok(Verdict::model_error(e)),
        }
    }
    Ok(v)
}
