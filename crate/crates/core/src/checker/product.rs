//! Synchronous product of a kernel model and a Büchi automaton.
//!
//! Model states are interned lazily; terminating runs are stutter-extended
//! by giving quiescent states a self-loop. The automaton consumes the
//! valuation of the source state on every product edge.

use crate::kernel::{
    apply_transition, enabled_transitions, eval_expr, Expr, Model, ModelErrorInfo, Pid,
    SystemState, Transition, GLOBAL_CTX,
};
use crate::ltl::BuchiAutomaton;
use std::collections::HashMap;
use std::rc::Rc;

/// A model-level move: a real transition or the stutter self-loop of a
/// quiescent state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    Step(Pid, Transition),
    Stutter,
}

pub struct ProductCtx<'a> {
    pub model: &'a Model,
    pub buchi: &'a BuchiAutomaton,
    prop_exprs: Vec<Expr>,
    pub states: Vec<SystemState>,
    index: HashMap<SystemState, usize>,
    succs: Vec<Option<Rc<Vec<(Move, usize)>>>>,
    valuations: Vec<Option<u64>>,
    pub model_transitions: usize,
}

pub type ProductNode = (usize, usize); // (model state index, automaton state)

impl<'a> ProductCtx<'a> {
    /// Fails with the offending name when the automaton references a
    /// proposition the model does not declare.
    pub fn new(model: &'a Model, buchi: &'a BuchiAutomaton) -> Result<Self, String> {
        let mut prop_exprs = Vec::with_capacity(buchi.prop_names.len());
        for name in &buchi.prop_names {
            match model.prop(name) {
                Some(e) => prop_exprs.push(e.clone()),
                None => return Err(name.clone()),
            }
        }
        let initial = SystemState::initial(model);
        let mut index = HashMap::new();
        index.insert(initial.clone(), 0);
        Ok(ProductCtx {
            model,
            buchi,
            prop_exprs,
            states: vec![initial],
            index,
            succs: vec![None],
            valuations: vec![None],
            model_transitions: 0,
        })
    }

    pub fn initial_node(&self) -> ProductNode {
        (0, self.buchi.initial)
    }

    fn intern(&mut self, s: SystemState) -> usize {
        match self.index.get(&s) {
            Some(&ix) => ix,
            None => {
                let ix = self.states.len();
                self.states.push(s.clone());
                self.index.insert(s, ix);
                self.succs.push(None);
                self.valuations.push(None);
                ix
            }
        }
    }

    /// Proposition valuation of a model state as a bitmask aligned with the
    /// automaton's proposition table.
    pub fn valuation(&mut self, state_ix: usize) -> Result<u64, ModelErrorInfo> {
        if let Some(v) = self.valuations[state_ix] {
            return Ok(v);
        }
        let mut v = 0u64;
        for (i, e) in self.prop_exprs.iter().enumerate() {
            let s = &self.states[state_ix];
            if eval_expr(self.model, s, GLOBAL_CTX, e)? != 0 {
                v |= 1 << i;
            }
        }
        self.valuations[state_ix] = Some(v);
        Ok(v)
    }

    /// Model successors with stutter extension, memoized.
    pub fn model_succs(
        &mut self,
        state_ix: usize,
    ) -> Result<Rc<Vec<(Move, usize)>>, ModelErrorInfo> {
        if let Some(s) = &self.succs[state_ix] {
            return Ok(Rc::clone(s));
        }
        let state = self.states[state_ix].clone();
        let enabled = enabled_transitions(self.model, &state)?;
        let mut out = Vec::with_capacity(enabled.len().max(1));
        if enabled.is_empty() {
            out.push((Move::Stutter, state_ix));
        } else {
            for (pid, t) in enabled {
                let (succ, _) = apply_transition(self.model, &state, pid, &t)?;
                self.model_transitions += 1;
                let ix = self.intern(succ);
                out.push((Move::Step(pid, t), ix));
            }
        }
        let rc = Rc::new(out);
        self.succs[state_ix] = Some(Rc::clone(&rc));
        Ok(rc)
    }

    /// Product successors of `(m, q)` in deterministic order.
    pub fn product_succs(
        &mut self,
        node: ProductNode,
    ) -> Result<Vec<(Move, ProductNode)>, ModelErrorInfo> {
        let (m, q) = node;
        let val = self.valuation(m)?;
        let moves = self.model_succs(m)?;
        let mut out = Vec::new();
        for edge in &self.buchi.edges[q] {
            if !edge.guard.satisfied(val) {
                continue;
            }
            for (mv, succ) in moves.iter() {
                out.push((mv.clone(), (*succ, edge.target)));
            }
        }
        Ok(out)
    }
}
