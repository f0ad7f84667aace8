//! Accepting-cycle search under weak fairness.
//!
//! The full product graph is built, strongly connected components are
//! computed, and a component admits a weakly fair accepting cycle iff it
//! contains an accepting node and, for every process, either some node of
//! the component has that process disabled or some edge of the component
//! moves it. The witness lasso is stitched through one such component.

use super::explore::tarjan_scc;
use super::product::{Move, ProductCtx, ProductNode};
use crate::kernel::{ModelErrorInfo, Pid};
use std::collections::{BTreeSet, HashMap, VecDeque};

pub struct FairOutcome {
    pub violation: Option<(Vec<Move>, Vec<Move>)>,
    pub product_states: usize,
}

struct Graph {
    nodes: Vec<ProductNode>,
    index: HashMap<ProductNode, usize>,
    edges: Vec<Vec<(Move, usize)>>,
    /// Pids with at least one enabled move in the model state.
    enabled: Vec<BTreeSet<Pid>>,
}

fn moved_pids(mv: &Move) -> Vec<Pid> {
    match mv {
        Move::Stutter => vec![],
        Move::Step(pid, t) => match t {
            crate::kernel::Transition::Rendezvous { receiver, .. } => vec![*pid, *receiver],
            _ => vec![*pid],
        },
    }
}

fn build_graph(
    ctx: &mut ProductCtx<'_>,
    max_states: usize,
) -> Result<(Graph, bool), ModelErrorInfo> {
    let mut g = Graph {
        nodes: Vec::new(),
        index: HashMap::new(),
        edges: Vec::new(),
        enabled: Vec::new(),
    };
    let mut complete = true;
    let root = ctx.initial_node();
    g.index.insert(root, 0);
    g.nodes.push(root);
    g.edges.push(Vec::new());
    g.enabled.push(BTreeSet::new());
    let mut queue = VecDeque::new();
    queue.push_back(0usize);
    while let Some(ix) = queue.pop_front() {
        let node = g.nodes[ix];
        let succs = ctx.product_succs(node)?;
        let mut enabled = BTreeSet::new();
        for (mv, _) in &succs {
            for p in moved_pids(mv) {
                enabled.insert(p);
            }
        }
        g.enabled[ix] = enabled;
        for (mv, succ) in succs {
            let six = match g.index.get(&succ) {
                Some(&s) => s,
                None => {
                    if g.nodes.len() >= max_states {
                        complete = false;
                        continue;
                    }
                    let s = g.nodes.len();
                    g.index.insert(succ, s);
                    g.nodes.push(succ);
                    g.edges.push(Vec::new());
                    g.enabled.push(BTreeSet::new());
                    queue.push_back(s);
                    s
                }
            };
            g.edges[ix].push((mv, six));
        }
    }
    Ok((g, complete))
}

/// Breadth-first path inside one component, as (move, node) pairs.
fn path_within(
    g: &Graph,
    comp: &[usize],
    comp_id: usize,
    from: usize,
    to: usize,
) -> Vec<(Move, usize)> {
    if from == to {
        return Vec::new();
    }
    let mut prev: HashMap<usize, (usize, Move)> = HashMap::new();
    let mut queue = VecDeque::new();
    queue.push_back(from);
    while let Some(cur) = queue.pop_front() {
        for (mv, succ) in &g.edges[cur] {
            if comp[*succ] != comp_id || prev.contains_key(succ) || *succ == from {
                continue;
            }
            prev.insert(*succ, (cur, mv.clone()));
            if *succ == to {
                let mut rev = Vec::new();
                let mut at = to;
                while at != from {
                    let (p, mv) = prev[&at].clone();
                    rev.push((mv, at));
                    at = p;
                }
                rev.reverse();
                return rev;
            }
            queue.push_back(*succ);
        }
    }
    unreachable!("nodes of one SCC are mutually reachable");
}

pub fn fair_check(
    ctx: &mut ProductCtx<'_>,
    max_states: usize,
) -> Result<(FairOutcome, bool), ModelErrorInfo> {
    let (g, complete) = build_graph(ctx, max_states)?;
    let n = g.nodes.len();
    let comp = tarjan_scc(n, |v| g.edges[v].iter().map(|(_, s)| *s).collect());
    let ncomp = comp.iter().copied().max().map(|m| m + 1).unwrap_or(0);

    // Group nodes per component and detect which components have cycles.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for (v, &c) in comp.iter().enumerate() {
        members[c].push(v);
    }
    let mut has_cycle = vec![false; ncomp];
    for v in 0..n {
        for (_, s) in &g.edges[v] {
            if comp[*s] == comp[v] {
                has_cycle[comp[v]] = true;
            }
        }
    }

    // Components in discovery order of their first node keeps the verdict
    // and witness deterministic.
    let mut order: Vec<usize> = Vec::new();
    for v in 0..n {
        if !order.contains(&comp[v]) {
            order.push(comp[v]);
        }
    }

    for c in order {
        if !has_cycle[c] {
            continue;
        }
        let accepting: Vec<usize> = members[c]
            .iter()
            .copied()
            .filter(|&v| ctx.buchi.accepting[g.nodes[v].1])
            .collect();
        if accepting.is_empty() {
            continue;
        }
        // Every pid live in this component must be satisfiable: movable
        // within the component or disabled somewhere in it.
        let mut pids: BTreeSet<Pid> = BTreeSet::new();
        for &v in &members[c] {
            pids.extend(g.enabled[v].iter().copied());
        }
        let mut waypoints: Vec<WayPoint> = Vec::new();
        let mut fair = true;
        for &pid in &pids {
            let edge = members[c].iter().find_map(|&v| {
                g.edges[v]
                    .iter()
                    .position(|(mv, s)| comp[*s] == c && moved_pids(mv).contains(&pid))
                    .map(|e| (v, e))
            });
            if let Some((v, e)) = edge {
                waypoints.push(WayPoint::Edge(v, e));
                continue;
            }
            match members[c].iter().find(|&&v| !g.enabled[v].contains(&pid)) {
                Some(&v) => waypoints.push(WayPoint::Node(v)),
                None => {
                    fair = false;
                    break;
                }
            }
        }
        if !fair {
            continue;
        }
        // Stitch: accepting node, then every waypoint, then close the loop.
        let start = accepting[0];
        let mut cycle_moves: Vec<Move> = Vec::new();
        let mut at = start;
        for wp in waypoints {
            match wp {
                WayPoint::Node(v) => {
                    let hop = path_within(&g, &comp, c, at, v);
                    cycle_moves.extend(hop.into_iter().map(|(mv, _)| mv));
                    at = v;
                }
                WayPoint::Edge(v, e) => {
                    let hop = path_within(&g, &comp, c, at, v);
                    cycle_moves.extend(hop.into_iter().map(|(mv, _)| mv));
                    let (mv, s) = g.edges[v][e].clone();
                    cycle_moves.push(mv);
                    at = s;
                }
            }
        }
        let hop = path_within(&g, &comp, c, at, start);
        cycle_moves.extend(hop.into_iter().map(|(mv, _)| mv));
        if cycle_moves.is_empty() {
            // No waypoints forced a detour: take any in-component edge and
            // walk back.
            let (mv, w) = g.edges[start]
                .iter()
                .find(|(_, s)| comp[*s] == c)
                .cloned()
                .expect("cyclic component");
            cycle_moves.push(mv);
            for (mv, _) in path_within(&g, &comp, c, w, start) {
                cycle_moves.push(mv);
            }
        }
        // Prefix from the initial node.
        let mut prev: HashMap<usize, (usize, Move)> = HashMap::new();
        let mut queue = VecDeque::new();
        queue.push_back(0usize);
        while let Some(cur) = queue.pop_front() {
            if cur == start {
                break;
            }
            for (mv, succ) in &g.edges[cur] {
                if *succ != 0 && !prev.contains_key(succ) {
                    prev.insert(*succ, (cur, mv.clone()));
                    queue.push_back(*succ);
                }
            }
        }
        let mut prefix_rev = Vec::new();
        let mut at = start;
        while at != 0 {
            let (p, mv) = prev[&at].clone();
            prefix_rev.push(mv);
            at = p;
        }
        prefix_rev.reverse();
        return Ok((
            FairOutcome {
                violation: Some((prefix_rev, cycle_moves)),
                product_states: n,
            },
            complete,
        ));
    }

    Ok((
        FairOutcome {
            violation: None,
            product_states: n,
        },
        complete,
    ))
}

enum WayPoint {
    Node(usize),
    Edge(usize, usize),
}
