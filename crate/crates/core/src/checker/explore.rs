//! Exhaustive breadth-first reachability over kernel models.

use crate::kernel::{
    apply_transition, enabled_transitions, is_valid_end_state, Model, ModelErrorInfo, Pid,
    StateDigest, SystemState, Transition,
};
use serde::Serialize;
use std::collections::{HashMap, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_states: usize,
    pub max_depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: 1_000_000,
            max_depth: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitKind {
    MaxStates,
    MaxDepth,
}

/// Full reachability graph: interned states, edges in deterministic order,
/// BFS parents (shortest paths), and the quiescent-state classification.
#[derive(Debug)]
pub struct ExploreGraph {
    pub states: Vec<SystemState>,
    pub edges: Vec<Vec<(Pid, Transition, usize)>>,
    pub parent: Vec<Option<(usize, Pid, Transition)>>,
    pub depth: Vec<usize>,
    /// (state index, is_valid_end) for every state with no enabled move.
    pub quiescent: Vec<(usize, bool)>,
    pub transitions: usize,
    pub limit_hit: Option<LimitKind>,
}

impl ExploreGraph {
    /// Transition sequence along BFS parents from the initial state.
    pub fn path_to(&self, target: usize) -> Vec<(Pid, Transition)> {
        let mut rev = Vec::new();
        let mut cur = target;
        while let Some((p, pid, t)) = &self.parent[cur] {
            rev.push((*pid, t.clone()));
            cur = *p;
        }
        rev.reverse();
        rev
    }

    pub fn digests(&self) -> Vec<StateDigest> {
        self.states.iter().map(|s| s.digest()).collect()
    }
}

/// Visits every reachable state up to the limits. Deterministic for a
/// fixed model: BFS order with ascending pids and syntactic edge order.
pub fn explore(model: &Model, limits: Limits) -> Result<ExploreGraph, ModelErrorInfo> {
    let initial = SystemState::initial(model);
    let mut index: HashMap<SystemState, usize> = HashMap::new();
    let mut g = ExploreGraph {
        states: vec![initial.clone()],
        edges: Vec::new(),
        parent: vec![None],
        depth: vec![0],
        quiescent: Vec::new(),
        transitions: 0,
        limit_hit: None,
    };
    index.insert(initial, 0);
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(0);
    let mut processed = 0usize;

    while let Some(cur) = queue.pop_front() {
        processed += 1;
        if g.depth[cur] >= limits.max_depth {
            g.limit_hit = Some(LimitKind::MaxDepth);
            g.edges.resize_with(g.states.len(), Vec::new);
            continue;
        }
        let state = g.states[cur].clone();
        let enabled = enabled_transitions(model, &state)?;
        if g.edges.len() <= cur {
            g.edges.resize_with(cur + 1, Vec::new);
        }
        if enabled.is_empty() {
            g.quiescent.push((cur, is_valid_end_state(model, &state)));
            continue;
        }
        for (pid, t) in enabled {
            let (succ, _) = apply_transition(model, &state, pid, &t)?;
            g.transitions += 1;
            let ix = match index.get(&succ) {
                Some(&ix) => ix,
                None => {
                    let ix = g.states.len();
                    if ix >= limits.max_states {
                        g.limit_hit = Some(LimitKind::MaxStates);
                        continue;
                    }
                    g.states.push(succ.clone());
                    g.parent.push(Some((cur, pid, t.clone())));
                    g.depth.push(g.depth[cur] + 1);
                    index.insert(succ, ix);
                    queue.push_back(ix);
                    ix
                }
            };
            g.edges[cur].push((pid, t, ix));
        }
    }
    let _ = processed;
    g.edges.resize_with(g.states.len(), Vec::new);
    Ok(g)
}

/// Reachability report exposed by the public API.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
pub struct ReachReport {
    pub states_explored: usize,
    pub transitions_explored: usize,
    pub quiescent_valid: usize,
    pub quiescent_invalid: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_hit: Option<LimitKind>,
}

impl ReachReport {
    pub fn from_graph(g: &ExploreGraph) -> ReachReport {
        ReachReport {
            states_explored: g.states.len(),
            transitions_explored: g.transitions,
            quiescent_valid: g.quiescent.iter().filter(|(_, v)| *v).count(),
            quiescent_invalid: g.quiescent.iter().filter(|(_, v)| !*v).count(),
            limit_hit: g.limit_hit,
        }
    }
}

/// Iterative Tarjan strongly-connected components; returns a component id
/// per node, ids assigned in reverse topological order.
pub fn tarjan_scc(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> Vec<usize> {
    #[derive(Clone, Copy)]
    struct Entry {
        node: usize,
        succ_ix: usize,
    }
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0usize;
    let mut next_comp = 0usize;

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<Entry> = vec![Entry {
            node: root,
            succ_ix: 0,
        }];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(top) = call.last_mut() {
            let v = top.node;
            let succs = succ(v);
            if top.succ_ix < succs.len() {
                let w = succs[top.succ_ix];
                top.succ_ix += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push(Entry {
                        node: w,
                        succ_ix: 0,
                    });
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(parent) = call.last() {
                    low[parent.node] = low[parent.node].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}
