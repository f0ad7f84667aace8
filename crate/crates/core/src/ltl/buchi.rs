//! Tableau construction from negation-normal-form formulas to Büchi
//! automata, with degeneralization and a few cheap state merges so the
//! canonical small formulas produce their textbook automata.

use super::Formula;
use std::collections::{BTreeMap, BTreeSet};

/// One conjunct of an edge guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    pub prop: usize,
    pub positive: bool,
}

/// Conjunction of literals; empty means `true`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Guard(pub Vec<Literal>);

impl Guard {
    pub fn satisfied(&self, valuation: u64) -> bool {
        self.0
            .iter()
            .all(|l| ((valuation >> l.prop) & 1 == 1) == l.positive)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BuchiEdge {
    pub guard: Guard,
    pub target: usize,
}

/// Automaton over infinite proposition-valuation sequences. A run consumes
/// one valuation per edge; the word is accepted iff some run visits an
/// accepting state infinitely often.
#[derive(Debug, Clone)]
pub struct BuchiAutomaton {
    pub prop_names: Vec<String>,
    pub initial: usize,
    pub accepting: Vec<bool>,
    pub edges: Vec<Vec<BuchiEdge>>,
}

impl BuchiAutomaton {
    pub fn state_count(&self) -> usize {
        self.edges.len()
    }

    /// Valuation bitmask from a predicate over proposition names.
    pub fn valuation_of(&self, mut holds: impl FnMut(&str) -> bool) -> u64 {
        let mut v = 0u64;
        for (i, name) in self.prop_names.iter().enumerate() {
            if holds(name) {
                v |= 1 << i;
            }
        }
        v
    }
}

/// NNF with `[]`/`<>` rewritten into `R`/`U`, which is what the tableau
/// expansion works on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Nf {
    True,
    False,
    Prop(usize),
    NegProp(usize),
    And(Box<Nf>, Box<Nf>),
    Or(Box<Nf>, Box<Nf>),
    Next(Box<Nf>),
    Until(Box<Nf>, Box<Nf>),
    Release(Box<Nf>, Box<Nf>),
}

fn to_nf(f: &Formula, props: &[String]) -> Nf {
    let ix = |name: &str| props.iter().position(|p| p == name).expect("prop in table");
    match f {
        Formula::True => Nf::True,
        Formula::False => Nf::False,
        Formula::Prop(p) => Nf::Prop(ix(p)),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Prop(p) => Nf::NegProp(ix(p)),
            _ => panic!("formula is not in negation normal form"),
        },
        Formula::And(a, b) => Nf::And(Box::new(to_nf(a, props)), Box::new(to_nf(b, props))),
        Formula::Or(a, b) => Nf::Or(Box::new(to_nf(a, props)), Box::new(to_nf(b, props))),
        Formula::Next(a) => Nf::Next(Box::new(to_nf(a, props))),
        Formula::Until(a, b) => Nf::Until(Box::new(to_nf(a, props)), Box::new(to_nf(b, props))),
        Formula::Release(a, b) => {
            Nf::Release(Box::new(to_nf(a, props)), Box::new(to_nf(b, props)))
        }
        Formula::Eventually(a) => Nf::Until(Box::new(Nf::True), Box::new(to_nf(a, props))),
        Formula::Always(a) => Nf::Release(Box::new(Nf::False), Box::new(to_nf(a, props))),
        Formula::Implies(..) => panic!("formula is not in negation normal form"),
    }
}

const INIT: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Node {
    incoming: BTreeSet<usize>,
    new: BTreeSet<Nf>,
    old: BTreeSet<Nf>,
    next: BTreeSet<Nf>,
}

struct Tableau {
    nodes: Vec<Node>,
}

impl Tableau {
    fn expand(&mut self, mut node: Node) {
        let f = match node.new.iter().next().cloned() {
            None => {
                // Fully processed: merge with an existing node or keep it
                // and expand its successor.
                if let Some(existing) = self
                    .nodes
                    .iter_mut()
                    .find(|n| n.old == node.old && n.next == node.next)
                {
                    existing.incoming.extend(node.incoming);
                    return;
                }
                let id = self.nodes.len();
                self.nodes.push(node.clone());
                let succ = Node {
                    incoming: BTreeSet::from([id]),
                    new: node.next.clone(),
                    old: BTreeSet::new(),
                    next: BTreeSet::new(),
                };
                self.expand(succ);
                return;
            }
            Some(f) => f,
        };
        node.new.remove(&f);
        match &f {
            Nf::False => {} // inconsistent: drop this node
            Nf::True => {
                node.old.insert(f);
                self.expand(node);
            }
            Nf::Prop(p) => {
                if node.old.contains(&Nf::NegProp(*p)) {
                    return;
                }
                node.old.insert(f);
                self.expand(node);
            }
            Nf::NegProp(p) => {
                if node.old.contains(&Nf::Prop(*p)) {
                    return;
                }
                node.old.insert(f);
                self.expand(node);
            }
            Nf::And(a, b) => {
                for g in [a.as_ref(), b.as_ref()] {
                    if !node.old.contains(g) {
                        node.new.insert(g.clone());
                    }
                }
                node.old.insert(f);
                self.expand(node);
            }
            Nf::Or(a, b) => {
                let mut n1 = node.clone();
                if !n1.old.contains(a.as_ref()) {
                    n1.new.insert(a.as_ref().clone());
                }
                n1.old.insert(f.clone());
                let mut n2 = node;
                if !n2.old.contains(b.as_ref()) {
                    n2.new.insert(b.as_ref().clone());
                }
                n2.old.insert(f);
                self.expand(n1);
                self.expand(n2);
            }
            Nf::Next(a) => {
                node.next.insert(a.as_ref().clone());
                node.old.insert(f);
                self.expand(node);
            }
            Nf::Until(a, b) => {
                // f1 U f2 = f2 ∨ (f1 ∧ X(f1 U f2))
                let mut n1 = node.clone();
                if !n1.old.contains(a.as_ref()) {
                    n1.new.insert(a.as_ref().clone());
                }
                n1.next.insert(f.clone());
                n1.old.insert(f.clone());
                let mut n2 = node;
                if !n2.old.contains(b.as_ref()) {
                    n2.new.insert(b.as_ref().clone());
                }
                n2.old.insert(f);
                self.expand(n1);
                self.expand(n2);
            }
            Nf::Release(a, b) => {
                // f1 R f2 = (f1 ∧ f2) ∨ (f2 ∧ X(f1 R f2))
                let mut n1 = node.clone();
                if !n1.old.contains(b.as_ref()) {
                    n1.new.insert(b.as_ref().clone());
                }
                n1.next.insert(f.clone());
                n1.old.insert(f.clone());
                let mut n2 = node;
                for g in [a.as_ref(), b.as_ref()] {
                    if !n2.old.contains(g) {
                        n2.new.insert(g.clone());
                    }
                }
                n2.old.insert(f);
                self.expand(n1);
                self.expand(n2);
            }
        }
    }
}

fn untils_of(f: &Nf, out: &mut BTreeSet<Nf>) {
    match f {
        Nf::And(a, b) | Nf::Or(a, b) | Nf::Release(a, b) => {
            untils_of(a, out);
            untils_of(b, out);
        }
        Nf::Until(a, b) => {
            out.insert(f.clone());
            untils_of(a, out);
            untils_of(b, out);
        }
        Nf::Next(a) => untils_of(a, out),
        _ => {}
    }
}

fn guard_of(old: &BTreeSet<Nf>) -> Guard {
    let mut lits: Vec<Literal> = old
        .iter()
        .filter_map(|f| match f {
            Nf::Prop(p) => Some(Literal {
                prop: *p,
                positive: true,
            }),
            Nf::NegProp(p) => Some(Literal {
                prop: *p,
                positive: false,
            }),
            _ => None,
        })
        .collect();
    lits.sort();
    lits.dedup();
    Guard(lits)
}

/// Translates an NNF formula into a Büchi automaton accepting exactly the
/// infinite valuation sequences that satisfy it.
pub fn ltl_to_buchi(f: &Formula) -> BuchiAutomaton {
    let prop_names = f.props();
    let nf = to_nf(f, &prop_names);

    let mut tableau = Tableau { nodes: Vec::new() };
    tableau.expand(Node {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([nf.clone()]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    });
    let nodes = tableau.nodes;

    // Generalized acceptance: one set per Until subformula.
    let mut untils = BTreeSet::new();
    untils_of(&nf, &mut untils);
    let untils: Vec<Nf> = untils.into_iter().collect();
    let k = untils.len().max(1);
    let in_set = |node: &Node, j: usize| -> bool {
        match untils.get(j) {
            None => true, // no untils: every state is accepting
            Some(u) => {
                let rhs = match u {
                    Nf::Until(_, b) => b.as_ref(),
                    _ => unreachable!(),
                };
                !node.old.contains(u) || node.old.contains(rhs)
            }
        }
    };

    // Degeneralize: state (node, j) waits to hit acceptance set j.
    let n = nodes.len();
    let state_of = |node: usize, j: usize| 1 + node * k + j; // 0 is the initial state
    let total = 1 + n * k;
    let mut edges: Vec<Vec<BuchiEdge>> = vec![Vec::new(); total];
    let mut accepting = vec![false; total];
    for (ni, node) in nodes.iter().enumerate() {
        for j in 0..k {
            accepting[state_of(ni, j)] = j == 0 && in_set(node, 0);
        }
    }
    for (ti, target) in nodes.iter().enumerate() {
        let guard = guard_of(&target.old);
        for &src in &target.incoming {
            if src == INIT {
                edges[0].push(BuchiEdge {
                    guard: guard.clone(),
                    target: state_of(ti, 0),
                });
            } else {
                for j in 0..k {
                    let jn = if in_set(&nodes[src], j) { (j + 1) % k } else { j };
                    edges[state_of(src, j)].push(BuchiEdge {
                        guard: guard.clone(),
                        target: state_of(ti, jn),
                    });
                }
            }
        }
    }

    let mut a = BuchiAutomaton {
        prop_names,
        initial: 0,
        accepting,
        edges,
    };
    simplify(&mut a);
    a
}

/// Drops unreachable and dead-end states and merges states with identical
/// behavior, keeping the automata for small formulas at their minimal
/// textbook size.
fn simplify(a: &mut BuchiAutomaton) {
    loop {
        let before = a.edges.len();
        prune(a);
        let merged = merge_equivalent(a);
        if !merged && a.edges.len() == before {
            break;
        }
    }
}

fn prune(a: &mut BuchiAutomaton) {
    let n = a.edges.len();
    // Reachability from the initial state.
    let mut reach = vec![false; n];
    let mut stack = vec![a.initial];
    reach[a.initial] = true;
    while let Some(s) = stack.pop() {
        for e in &a.edges[s] {
            if !reach[e.target] {
                reach[e.target] = true;
                stack.push(e.target);
            }
        }
    }
    // Iteratively drop dead-end states (never the initial one).
    let mut alive = reach;
    loop {
        let mut changed = false;
        for s in 0..n {
            if alive[s]
                && s != a.initial
                && !a.edges[s].iter().any(|e| alive[e.target])
            {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // Compact.
    let mut map = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if alive[s] {
            map[s] = next;
            next += 1;
        }
    }
    let mut edges = vec![Vec::new(); next];
    let mut accepting = vec![false; next];
    for s in 0..n {
        if !alive[s] {
            continue;
        }
        accepting[map[s]] = a.accepting[s];
        let mut es: Vec<BuchiEdge> = a.edges[s]
            .iter()
            .filter(|e| alive[e.target])
            .map(|e| BuchiEdge {
                guard: e.guard.clone(),
                target: map[e.target],
            })
            .collect();
        es.sort();
        es.dedup();
        edges[map[s]] = es;
    }
    a.initial = map[a.initial];
    a.edges = edges;
    a.accepting = accepting;
}

/// One round of merging; returns true when something merged.
fn merge_equivalent(a: &mut BuchiAutomaton) -> bool {
    let n = a.edges.len();
    let mut rep: BTreeMap<(bool, Vec<BuchiEdge>), usize> = BTreeMap::new();
    let mut map: Vec<usize> = (0..n).collect();
    let mut merged = false;
    for s in 0..n {
        let key = (a.accepting[s], a.edges[s].clone());
        match rep.get(&key) {
            Some(&r) => {
                map[s] = r;
                merged = true;
            }
            None => {
                rep.insert(key, s);
            }
        }
    }
    // The initial state may fold into a behaviorally identical state even
    // if the acceptance flags differ: it is visited exactly once.
    if map[a.initial] == a.initial {
        for s in 0..n {
            if s != a.initial && map[s] == s && a.edges[s] == a.edges[a.initial] {
                map[a.initial] = s;
                merged = true;
                break;
            }
        }
    }
    if !merged {
        return false;
    }
    for s in 0..n {
        for e in &mut a.edges[s] {
            e.target = map[e.target];
        }
        a.edges[s].sort();
        a.edges[s].dedup();
    }
    a.initial = map[a.initial];
    prune(a);
    true
}
