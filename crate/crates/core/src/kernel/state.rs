//! System state: global store, channel buffers, process instances.

use super::cfg::LocId;
use super::model::Model;
use sha2::{Digest as _, Sha256};
use std::collections::VecDeque;
use std::fmt;

pub type Pid = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProcessInstance {
    pub pid: Pid,
    pub template: usize,
    pub loc: LocId,
    pub locals: Vec<i64>,
}

impl ProcessInstance {
    pub fn done(&self, model: &Model) -> bool {
        self.loc == model.templates[self.template].cfg.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemState {
    pub globals: Vec<i64>,
    pub buffers: Vec<VecDeque<i64>>,
    pub procs: Vec<ProcessInstance>,
    /// Pid currently inside an unbroken atomic region, if any.
    pub atomic_holder: Option<Pid>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateDigest(pub [u8; 32]);

impl fmt::Debug for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0[..8] {
            write!(f, "{:02x}", b)?;
        }
        Ok(())
    }
}

impl fmt::Display for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{:02x}", b)?;
        }
        Ok(())
    }
}

impl SystemState {
    /// Initial state: boot templates instantiated in order starting at pid 0.
    pub fn initial(model: &Model) -> SystemState {
        let mut state = SystemState {
            globals: model.global_init.clone(),
            buffers: model
                .channels
                .iter()
                .map(|_| VecDeque::new())
                .collect(),
            procs: Vec::new(),
            atomic_holder: None,
        };
        for &t in &model.boot {
            state.spawn(model, t, &[]);
        }
        state
    }

    /// Appends a new instance of `template`; pids are creation-ordered.
    pub fn spawn(&mut self, model: &Model, template: usize, args: &[i64]) -> Pid {
        let t = &model.templates[template];
        let mut locals = vec![0i64; t.layout.len];
        for d in &t.layout.decls {
            if d.kind == super::stmt::VarKind::Chan {
                let slot = t.layout.slot(&d.name).unwrap();
                for i in 0..slot.size {
                    locals[slot.offset + i] = -1; // unbound alias
                }
            }
        }
        for (i, p) in t.params.iter().enumerate() {
            let slot = t.layout.slot(p).unwrap();
            locals[slot.offset] = args.get(i).copied().unwrap_or(0);
        }
        let pid = self.procs.len() as Pid;
        self.procs.push(ProcessInstance {
            pid,
            template,
            loc: t.cfg.start,
            locals,
        });
        pid
    }

    /// Canonical byte encoding: two states encode identically iff their
    /// stores, buffers, locations, and atomic holder coincide.
    pub fn canonical_encoding(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(
            8 + self.globals.len() * 8 + self.buffers.len() * 16 + self.procs.len() * 24,
        );
        out.extend_from_slice(&(self.globals.len() as u32).to_le_bytes());
        for v in &self.globals {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(self.buffers.len() as u32).to_le_bytes());
        for b in &self.buffers {
            out.extend_from_slice(&(b.len() as u32).to_le_bytes());
            for v in b {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out.extend_from_slice(&(self.procs.len() as u32).to_le_bytes());
        for p in &self.procs {
            out.extend_from_slice(&(p.template as u32).to_le_bytes());
            out.extend_from_slice(&(p.loc as u32).to_le_bytes());
            out.extend_from_slice(&(p.locals.len() as u32).to_le_bytes());
            for v in &p.locals {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        match self.atomic_holder {
            Some(pid) => {
                out.push(1);
                out.extend_from_slice(&pid.to_le_bytes());
            }
            None => out.push(0),
        }
        out
    }

    pub fn digest(&self) -> StateDigest {
        let mut h = Sha256::new();
        h.update(self.canonical_encoding());
        StateDigest(h.finalize().into())
    }
}

/// Digest of the canonical state encoding.
pub fn canonical_state_digest(state: &SystemState) -> StateDigest {
    state.digest()
}
