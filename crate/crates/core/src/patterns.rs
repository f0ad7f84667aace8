//! Workflow-pattern library: each pattern invocation expands into kernel
//! statements. Expansions introduce gensym'd locals so several patterns can
//! coexist in one template body.

use crate::kernel::{BinOp, ChanRef, Decl, Expr, Stmt, Target, TemplateDef};
use std::collections::BTreeMap;
use thiserror::Error;

pub const DEFAULT_MAX_ARRAY_SIZE: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpandError {
    #[error("pattern `{pattern}` expects {expected} message(s), got {got}")]
    ArityMismatch {
        pattern: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("channel array size {size} exceeds the array bound {max}")]
    SizeExceedsBound { size: usize, max: usize },
    #[error("size must be at least 1")]
    ZeroSize,
    #[error("unknown process id {0}")]
    UnknownProcessId(i64),
    #[error("process registry is empty")]
    EmptyRegistry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqSide {
    Sender,
    Receiver,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternInvocation {
    SequenceSend {
        chan: ChanRef,
        msg: Expr,
    },
    SequenceRecv {
        chan: ChanRef,
        target: Target,
    },
    ParallelSplit {
        array: String,
        size: usize,
        msgs: Vec<Expr>,
    },
    Synchronization {
        array: String,
        size: usize,
        /// Local int array receiving one message per channel.
        targets: String,
    },
    ExclusiveChoice {
        array: String,
        size: usize,
        choice: Expr,
        msg: Expr,
    },
    SimpleMerge {
        array: String,
        size: usize,
        target: Target,
    },
    CancelCase {
        array: String,
        size: usize,
        id: i64,
    },
    MyRun {
        id: i64,
        instance: i64,
    },
}

/// Workflow-id relation used by cancellation: ids are dense from 0 and
/// exactly one root has parent -1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProcessRegistry {
    pub entries: BTreeMap<i64, String>,
    pub parents: BTreeMap<i64, i64>,
}

impl ProcessRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, id: i64, template: impl Into<String>, parent: i64) {
        self.entries.insert(id, template.into());
        self.parents.insert(id, parent);
    }

    /// Registers an id that participates in the parent relation without a
    /// runnable template (the case root).
    pub fn register_root(&mut self, id: i64) {
        self.parents.insert(id, -1);
    }

    pub fn template_of(&self, id: i64) -> Option<&str> {
        self.entries.get(&id).map(String::as_str)
    }

    pub fn parent_of(&self, id: i64) -> Option<i64> {
        self.parents.get(&id).copied()
    }

    /// Number of id slots: ids are dense, so this is max id + 1.
    pub fn id_count(&self) -> usize {
        self.parents
            .keys()
            .chain(self.entries.keys())
            .max()
            .map(|m| (*m as usize) + 1)
            .unwrap_or(0)
    }

    pub fn children_of(&self, id: i64) -> Vec<i64> {
        self.parents
            .iter()
            .filter(|(_, p)| **p == id)
            .map(|(c, _)| *c)
            .collect()
    }

    /// Checks density from 0, a unique -1 root, and acyclicity.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.id_count();
        let mut roots = 0;
        for id in 0..n as i64 {
            let parent = self
                .parents
                .get(&id)
                .copied()
                .ok_or_else(|| format!("id {} missing from the parent relation", id))?;
            if parent == -1 {
                roots += 1;
            } else if parent < 0 || parent as usize >= n {
                return Err(format!("id {} has out-of-range parent {}", id, parent));
            }
        }
        if roots != 1 {
            return Err(format!("expected exactly one root, found {}", roots));
        }
        // Walk each chain to the root; a cycle never terminates within n steps.
        for id in 0..n as i64 {
            let mut cur = id;
            for _ in 0..=n {
                let p = self.parents[&cur];
                if p == -1 {
                    break;
                }
                cur = p;
            }
            if self.parents[&cur] != -1 {
                return Err(format!("parent relation has a cycle through id {}", id));
            }
        }
        Ok(())
    }
}

/// Expansion context: array bound, cancel-channel array name, and a gensym
/// counter scoped to one template body.
#[derive(Debug, Clone)]
pub struct ExpandCtx {
    pub max_array_size: usize,
    pub cancel_array: String,
    counter: usize,
}

impl Default for ExpandCtx {
    fn default() -> Self {
        ExpandCtx {
            max_array_size: DEFAULT_MAX_ARRAY_SIZE,
            cancel_array: "qsCancel".to_string(),
            counter: 0,
        }
    }
}

impl ExpandCtx {
    pub fn new(max_array_size: usize, cancel_array: impl Into<String>) -> Self {
        ExpandCtx {
            max_array_size,
            cancel_array: cancel_array.into(),
            counter: 0,
        }
    }

    fn gensym(&mut self, base: &str) -> String {
        let n = self.counter;
        self.counter += 1;
        format!("{}_{}", base, n)
    }

    fn check_size(&self, size: usize) -> Result<(), ExpandError> {
        if size == 0 {
            return Err(ExpandError::ZeroSize);
        }
        if size > self.max_array_size {
            return Err(ExpandError::SizeExceedsBound {
                size,
                max: self.max_array_size,
            });
        }
        Ok(())
    }
}

/// Sequence: the sender half is a single send, the receiver half a single
/// recv into the given target.
pub fn expand_sequence(
    chan: ChanRef,
    msg: Expr,
    side: SeqSide,
    target: Option<Target>,
) -> Vec<Stmt> {
    match side {
        SeqSide::Sender => vec![Stmt::Send(chan, msg)],
        SeqSide::Receiver => {
            let t = target.unwrap_or_else(|| Target::var("x"));
            vec![Stmt::Recv(chan, t)]
        }
    }
}

/// Parallel split: an atomic do-loop sending `msgs[n]` on `array[n]` for
/// n in 0..size, so no other process observes a partial split.
pub fn expand_parallel_split(
    ctx: &mut ExpandCtx,
    array: &str,
    size: usize,
    msgs: &[Expr],
) -> Result<Vec<Stmt>, ExpandError> {
    ctx.check_size(size)?;
    if msgs.len() != size {
        return Err(ExpandError::ArityMismatch {
            pattern: "parallel_split",
            expected: size,
            got: msgs.len(),
        });
    }
    let n = ctx.gensym("n");
    let size_e = Expr::Int(size as i64);
    let mut stmts: Vec<Stmt> = vec![Stmt::Decl(Decl::int(&n))];

    // All-equal messages go out directly; otherwise they are staged into a
    // fresh local array before the loop.
    let payload = if msgs.iter().all(|m| m == &msgs[0]) {
        msgs[0].clone()
    } else {
        let arr = ctx.gensym("msg");
        stmts.push(Stmt::Decl(Decl::int_array(&arr, size)));
        for (i, m) in msgs.iter().enumerate() {
            stmts.push(Stmt::assign(
                Target::elem(&arr, Expr::Int(i as i64)),
                m.clone(),
            ));
        }
        Expr::index(&arr, Expr::var(&n))
    };

    stmts.push(Stmt::assign(Target::var(&n), Expr::Int(0)));
    stmts.push(Stmt::Atomic(vec![Stmt::Do {
        options: vec![
            vec![
                Stmt::Guard(Expr::bin(BinOp::Lt, Expr::var(&n), size_e.clone())),
                Stmt::Send(ChanRef::indexed(array, Expr::var(&n)), payload),
                Stmt::assign(
                    Target::var(&n),
                    Expr::bin(BinOp::Add, Expr::var(&n), Expr::Int(1)),
                ),
            ],
            vec![
                Stmt::Guard(Expr::bin(BinOp::Ge, Expr::var(&n), size_e)),
                Stmt::Break,
            ],
        ],
        else_branch: None,
    }]));
    Ok(stmts)
}

/// Synchronization: polls every channel of the array, receiving exactly one
/// message per channel into `targets[n]`, with a labeled loop (S/E), goto,
/// and a timeout at the wrap-around to avoid starving other processes.
pub fn expand_synchronization(
    ctx: &mut ExpandCtx,
    array: &str,
    size: usize,
    targets: &str,
) -> Result<Vec<Stmt>, ExpandError> {
    ctx.check_size(size)?;
    let n = ctx.gensym("n");
    let count = ctx.gensym("count");
    let aux = ctx.gensym("aux");
    let label_s = ctx.gensym("S");
    let label_e = ctx.gensym("E");
    let size_e = Expr::Int(size as i64);

    let poll_guard = Expr::and(
        Expr::and(
            Expr::eq(Expr::index(&aux, Expr::var(&n)), Expr::Int(0)),
            Expr::bin(
                BinOp::Gt,
                Expr::len(ChanRef::indexed(array, Expr::var(&n))),
                Expr::Int(0),
            ),
        ),
        Expr::bin(BinOp::Lt, Expr::var(&count), size_e.clone()),
    );

    Ok(vec![
        Stmt::Decl(Decl::int(&n)),
        Stmt::Decl(Decl::int(&count)),
        Stmt::Decl(Decl::int_array(&aux, ctx.max_array_size)),
        Stmt::assign(Target::var(&n), Expr::Int(0)),
        Stmt::assign(Target::var(&count), Expr::Int(0)),
        Stmt::Do {
            options: vec![
                vec![
                    Stmt::Guard(Expr::bin(BinOp::Lt, Expr::var(&n), size_e.clone())),
                    Stmt::assign(Target::elem(&aux, Expr::var(&n)), Expr::Int(0)),
                    Stmt::assign(
                        Target::var(&n),
                        Expr::bin(BinOp::Add, Expr::var(&n), Expr::Int(1)),
                    ),
                ],
                vec![
                    Stmt::Guard(Expr::eq(Expr::var(&n), size_e.clone())),
                    Stmt::assign(Target::var(&n), Expr::Int(0)),
                    Stmt::Break,
                ],
            ],
            else_branch: None,
        },
        Stmt::Skip,
        Stmt::Label(label_s.clone()),
        Stmt::If {
            options: vec![
                vec![
                    Stmt::Guard(poll_guard),
                    Stmt::assign(Target::elem(&aux, Expr::var(&n)), Expr::Int(1)),
                    Stmt::Recv(
                        ChanRef::indexed(array, Expr::var(&n)),
                        Target::elem(targets, Expr::var(&n)),
                    ),
                    Stmt::assign(
                        Target::var(&count),
                        Expr::bin(BinOp::Add, Expr::var(&count), Expr::Int(1)),
                    ),
                ],
                vec![
                    Stmt::Guard(Expr::bin(BinOp::Ge, Expr::var(&count), size_e.clone())),
                    Stmt::Goto(label_e.clone()),
                ],
            ],
            else_branch: Some(vec![Stmt::Skip]),
        },
        Stmt::assign(
            Target::var(&n),
            Expr::bin(BinOp::Add, Expr::var(&n), Expr::Int(1)),
        ),
        Stmt::If {
            options: vec![
                vec![
                    Stmt::Guard(Expr::eq(Expr::var(&n), size_e.clone())),
                    Stmt::assign(Target::var(&n), Expr::Int(0)),
                    Stmt::Timeout,
                ],
                vec![
                    Stmt::Guard(Expr::bin(BinOp::Lt, Expr::var(&n), size_e)),
                    Stmt::Skip,
                ],
            ],
            else_branch: None,
        },
        Stmt::Goto(label_s),
        Stmt::Label(label_e),
        Stmt::Skip,
    ])
}

/// Exclusive choice: sends on `array[choice]` when the index is in range,
/// silently skips otherwise.
pub fn expand_exclusive_choice(
    array: &str,
    size: usize,
    choice: Expr,
    msg: Expr,
) -> Vec<Stmt> {
    let in_range = Expr::and(
        Expr::bin(BinOp::Ge, choice.clone(), Expr::Int(0)),
        Expr::bin(BinOp::Lt, choice.clone(), Expr::Int(size as i64)),
    );
    vec![Stmt::If {
        options: vec![vec![
            Stmt::Guard(in_range),
            Stmt::Send(ChanRef::indexed(array, choice), msg),
        ]],
        else_branch: Some(vec![Stmt::Skip]),
    }]
}

/// Simple merge: a do-loop of guarded recv options — the continuation fires
/// on the first message arriving on any one channel, without synchronizing
/// the rest.
pub fn expand_simple_merge(
    ctx: &mut ExpandCtx,
    array: &str,
    size: usize,
    target: Target,
) -> Result<Vec<Stmt>, ExpandError> {
    ctx.check_size(size)?;
    let options = (0..size)
        .map(|i| {
            vec![
                Stmt::Recv(
                    ChanRef::indexed(array, Expr::Int(i as i64)),
                    target.clone(),
                ),
                Stmt::Break,
            ]
        })
        .collect();
    Ok(vec![Stmt::Do {
        options,
        else_branch: None,
    }])
}

/// Cancel activity: wraps the body in an escape on `len(qCancel)>0` whose
/// body is a single skip, so the activity can be withdrawn before or during
/// execution.
pub fn wrap_cancel_activity(body: Vec<Stmt>, q_cancel: ChanRef) -> Vec<Stmt> {
    vec![Stmt::Unless {
        main: body,
        escape_guard: Expr::bin(BinOp::Gt, Expr::len(q_cancel), Expr::Int(0)),
        escape_body: vec![Stmt::Skip],
    }]
}

/// Cancel case: sends one cancel message to each direct child of `id`
/// (`piIds[i]==id`); combined with each child's escape wrapper this cancels
/// the subtree transitively. Cancel payloads are the constant 1.
pub fn expand_cancel_case(
    ctx: &mut ExpandCtx,
    array: &str,
    size: usize,
    registry: &ProcessRegistry,
    id: i64,
) -> Result<Vec<Stmt>, ExpandError> {
    if registry.parent_of(id).is_none() && registry.template_of(id).is_none() {
        return Err(ExpandError::UnknownProcessId(id));
    }
    ctx.check_size(size)?;
    let i = ctx.gensym("i");
    let size_e = Expr::Int(size as i64);
    Ok(vec![
        Stmt::Decl(Decl::int(&i)),
        Stmt::assign(Target::var(&i), Expr::Int(0)),
        Stmt::Do {
            options: vec![
                vec![
                    Stmt::Guard(Expr::and(
                        Expr::bin(BinOp::Lt, Expr::var(&i), size_e.clone()),
                        Expr::eq(Expr::index("piIds", Expr::var(&i)), Expr::Int(id)),
                    )),
                    Stmt::Send(ChanRef::indexed(array, Expr::var(&i)), Expr::Int(1)),
                    Stmt::assign(
                        Target::var(&i),
                        Expr::bin(BinOp::Add, Expr::var(&i), Expr::Int(1)),
                    ),
                ],
                vec![
                    Stmt::Guard(Expr::eq(Expr::var(&i), size_e)),
                    Stmt::Break,
                ],
            ],
            else_branch: Some(vec![Stmt::assign(
                Target::var(&i),
                Expr::bin(BinOp::Add, Expr::var(&i), Expr::Int(1)),
            )]),
        },
    ])
}

/// Escape wrapper for a cancellable process: on `len(qsCancel[id])>0` the
/// body is abandoned, the cancel is propagated to direct children, and the
/// optional `on_cancel` continuation runs.
pub fn wrap_cancel_case(
    ctx: &mut ExpandCtx,
    body: Vec<Stmt>,
    registry: &ProcessRegistry,
    id: i64,
    on_cancel: Vec<Stmt>,
) -> Result<Vec<Stmt>, ExpandError> {
    let size = registry.id_count();
    let array = ctx.cancel_array.clone();
    let mut escape_body = expand_cancel_case(ctx, &array, size, registry, id)?;
    escape_body.extend(on_cancel);
    Ok(vec![Stmt::Unless {
        main: body,
        escape_guard: Expr::bin(
            BinOp::Gt,
            Expr::len(ChanRef::indexed(&array, Expr::Int(id))),
            Expr::Int(0),
        ),
        escape_body,
    }])
}

/// Dispatcher template: takes a process id and an instance id (-1 when the
/// instance needs no identification) and runs the mapped template. Unknown
/// ids abort with a model error unless `strict_spin` restores the blocking
/// if-without-else.
pub fn build_my_run(registry: &ProcessRegistry, strict_spin: bool) -> Result<TemplateDef, ExpandError> {
    if registry.entries.is_empty() {
        return Err(ExpandError::EmptyRegistry);
    }
    let options = registry
        .entries
        .iter()
        .map(|(id, template)| {
            vec![
                Stmt::Guard(Expr::eq(Expr::var("id"), Expr::Int(*id))),
                Stmt::run(template.clone(), vec![]),
            ]
        })
        .collect();
    let else_branch = if strict_spin {
        None
    } else {
        Some(vec![Stmt::Fail("myRun: unknown process id".to_string())])
    };
    Ok(TemplateDef::new(
        "myRun",
        vec!["id", "i"],
        vec![Stmt::If {
            options,
            else_branch,
        }],
    ))
}

/// Dispatch on one invocation.
pub fn expand(
    ctx: &mut ExpandCtx,
    inv: &PatternInvocation,
    registry: &ProcessRegistry,
) -> Result<Vec<Stmt>, ExpandError> {
    match inv {
        PatternInvocation::SequenceSend { chan, msg } => Ok(expand_sequence(
            chan.clone(),
            msg.clone(),
            SeqSide::Sender,
            None,
        )),
        PatternInvocation::SequenceRecv { chan, target } => Ok(expand_sequence(
            chan.clone(),
            Expr::Int(0),
            SeqSide::Receiver,
            Some(target.clone()),
        )),
        PatternInvocation::ParallelSplit { array, size, msgs } => {
            expand_parallel_split(ctx, array, *size, msgs)
        }
        PatternInvocation::Synchronization {
            array,
            size,
            targets,
        } => expand_synchronization(ctx, array, *size, targets),
        PatternInvocation::ExclusiveChoice {
            array,
            size,
            choice,
            msg,
        } => Ok(expand_exclusive_choice(
            array,
            *size,
            choice.clone(),
            msg.clone(),
        )),
        PatternInvocation::SimpleMerge {
            array,
            size,
            target,
        } => expand_simple_merge(ctx, array, *size, target.clone()),
        PatternInvocation::CancelCase { array, size, id } => {
            expand_cancel_case(ctx, array, *size, registry, *id)
        }
        PatternInvocation::MyRun { id, instance } => {
            if registry.template_of(*id).is_none() {
                return Err(ExpandError::UnknownProcessId(*id));
            }
            Ok(vec![Stmt::run(
                "myRun",
                vec![Expr::Int(*id), Expr::Int(*instance)],
            )])
        }
    }
}
