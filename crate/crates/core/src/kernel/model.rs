//! Compiled model: channel table, globals, templates, boot list.

use super::cfg::{build_cfg, BuildError, Cfg};
use super::expr::Expr;
use super::stmt::{Decl, Stmt, VarKind};
use std::collections::HashMap;
use thiserror::Error;

/// SPIN's live-instance bound.
pub const MAX_PROCESSES: usize = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub offset: usize,
    pub size: usize,
    pub kind: VarKind,
}

/// Flat store layout: names resolve to offsets into a `Vec<i64>`.
#[derive(Debug, Clone, Default)]
pub struct Layout {
    pub slots: HashMap<String, Slot>,
    pub decls: Vec<Decl>,
    pub len: usize,
}

impl Layout {
    fn push(&mut self, d: Decl) -> Result<(), ModelError> {
        if self.slots.contains_key(&d.name) {
            return Err(ModelError::DuplicateName(d.name));
        }
        self.slots.insert(
            d.name.clone(),
            Slot {
                offset: self.len,
                size: d.size,
                kind: d.kind,
            },
        );
        self.len += d.size;
        self.decls.push(d);
        Ok(())
    }

    pub fn slot(&self, name: &str) -> Option<Slot> {
        self.slots.get(name).copied()
    }
}

#[derive(Debug, Clone)]
pub struct ChannelDecl {
    /// Pretty name of the cell holding this buffer id (for traces).
    pub name: String,
    pub capacity: usize,
}

/// A process template: parameters, hoisted locals, and a flattened body.
#[derive(Debug, Clone)]
pub struct Template {
    pub name: String,
    pub params: Vec<String>,
    pub layout: Layout,
    pub cfg: Cfg,
}

/// Template definition prior to flattening.
#[derive(Debug, Clone)]
pub struct TemplateDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
}

impl TemplateDef {
    pub fn new(name: impl Into<String>, params: Vec<&str>, body: Vec<Stmt>) -> Self {
        TemplateDef {
            name: name.into(),
            params: params.into_iter().map(String::from).collect(),
            body,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    pub globals: Layout,
    /// Initial values for the global store.
    pub global_init: Vec<i64>,
    pub channels: Vec<ChannelDecl>,
    pub templates: Vec<Template>,
    pub template_ids: HashMap<String, usize>,
    /// Templates instantiated at time zero, in pid order.
    pub boot: Vec<usize>,
    /// Named observation propositions over the global store.
    pub props: Vec<(String, Expr)>,
    /// Unknown `run` dispatch blocks instead of failing.
    pub strict_spin: bool,
}

impl Model {
    pub fn template(&self, id: usize) -> &Template {
        &self.templates[id]
    }

    pub fn template_named(&self, name: &str) -> Option<(usize, &Template)> {
        self.template_ids
            .get(name)
            .map(|&id| (id, &self.templates[id]))
    }

    pub fn prop(&self, name: &str) -> Option<&Expr> {
        self.props
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| e)
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("duplicate declaration `{0}`")]
    DuplicateName(String),
    #[error("unknown template `{0}` in boot list")]
    UnknownBootTemplate(String),
    #[error("template `{name}`: {source}")]
    Build {
        name: String,
        source: BuildError,
    },
}

/// Incremental model construction for compilers and tests.
pub struct ModelBuilder {
    globals: Layout,
    global_init: Vec<i64>,
    channels: Vec<ChannelDecl>,
    defs: Vec<TemplateDef>,
    boot: Vec<String>,
    props: Vec<(String, Expr)>,
    strict_spin: bool,
    err: Option<ModelError>,
}

impl Default for ModelBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl ModelBuilder {
    pub fn new() -> Self {
        ModelBuilder {
            globals: Layout::default(),
            global_init: Vec::new(),
            channels: Vec::new(),
            defs: Vec::new(),
            boot: Vec::new(),
            props: Vec::new(),
            strict_spin: false,
            err: None,
        }
    }

    fn push_global(&mut self, d: Decl, init: Vec<i64>) {
        debug_assert_eq!(d.size, init.len());
        if self.err.is_none() {
            if let Err(e) = self.globals.push(d) {
                self.err = Some(e);
                return;
            }
            self.global_init.extend(init);
        }
    }

    /// Global integer scalar, zero-initialized.
    pub fn global_int(mut self, name: &str) -> Self {
        self.push_global(Decl::int(name), vec![0]);
        self
    }

    /// Global integer array, zero-initialized.
    pub fn global_int_array(mut self, name: &str, size: usize) -> Self {
        self.push_global(Decl::int_array(name, size), vec![0; size]);
        self
    }

    /// Global buffered channel; the variable holds the buffer id.
    pub fn chan(mut self, name: &str, capacity: usize) -> Self {
        let id = self.channels.len() as i64;
        self.channels.push(ChannelDecl {
            name: name.to_string(),
            capacity,
        });
        self.push_global(
            Decl {
                name: name.to_string(),
                kind: VarKind::Chan,
                size: 1,
                init: None,
            },
            vec![id],
        );
        self
    }

    /// Global array of channels, one fresh buffer per element.
    pub fn chan_array(mut self, name: &str, size: usize, capacity: usize) -> Self {
        let mut ids = Vec::with_capacity(size);
        for i in 0..size {
            let id = self.channels.len() as i64;
            self.channels.push(ChannelDecl {
                name: format!("{}[{}]", name, i),
                capacity,
            });
            ids.push(id);
        }
        self.push_global(
            Decl {
                name: name.to_string(),
                kind: VarKind::Chan,
                size,
                init: None,
            },
            ids,
        );
        self
    }

    pub fn template(mut self, def: TemplateDef) -> Self {
        self.defs.push(def);
        self
    }

    /// Template instantiated in the initial state (in call order).
    pub fn boot(mut self, name: &str) -> Self {
        self.boot.push(name.to_string());
        self
    }

    pub fn prop(mut self, name: &str, e: Expr) -> Self {
        self.props.push((name.to_string(), e));
        self
    }

    pub fn strict_spin(mut self, on: bool) -> Self {
        self.strict_spin = on;
        self
    }

    pub fn build(self) -> Result<Model, ModelError> {
        if let Some(e) = self.err {
            return Err(e);
        }
        let mut templates = Vec::new();
        let mut template_ids = HashMap::new();
        for def in &self.defs {
            if template_ids.contains_key(&def.name) {
                return Err(ModelError::DuplicateName(def.name.clone()));
            }
            let built = build_cfg(&def.body).map_err(|source| ModelError::Build {
                name: def.name.clone(),
                source,
            })?;
            let mut layout = Layout::default();
            for p in &def.params {
                layout.push(Decl::int(p.clone()))?;
            }
            for d in built.decls {
                layout.push(d)?;
            }
            template_ids.insert(def.name.clone(), templates.len());
            templates.push(Template {
                name: def.name.clone(),
                params: def.params.clone(),
                layout,
                cfg: built.cfg,
            });
        }
        let mut boot = Vec::new();
        for name in &self.boot {
            let id = *template_ids
                .get(name)
                .ok_or_else(|| ModelError::UnknownBootTemplate(name.clone()))?;
            boot.push(id);
        }
        Ok(Model {
            globals: self.globals,
            global_init: self.global_init,
            channels: self.channels,
            templates,
            template_ids,
            boot,
            props: self.props,
            strict_spin: self.strict_spin,
        })
    }
}
