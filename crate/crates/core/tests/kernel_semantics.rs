//! Kernel-level semantics: executability, channels, atomic and d_step
//! regions, escapes, timeout, and state digests.

use wfcheck::checker::{explore, Limits};
use wfcheck::kernel::*;

fn limits() -> Limits {
    Limits {
        max_states: 100_000,
        max_depth: 100_000,
    }
}

/// Single process, single skip: two states, one transition.
#[test]
fn single_skip_statespace() {
    let model = ModelBuilder::new()
        .template(TemplateDef::new("P", vec![], vec![Stmt::Skip]))
        .boot("P")
        .build()
        .unwrap();
    let g = explore(&model, limits()).unwrap();
    assert_eq!(g.states.len(), 2);
    assert_eq!(g.transitions, 1);
    assert_eq!(g.quiescent.len(), 1);
    assert!(g.quiescent[0].1, "terminal state is a valid end");
}

/// Two independent 2-step processes interleave into a 3x3 grid.
#[test]
fn independent_interleaving_grid() {
    let two_steps = vec![Stmt::Skip, Stmt::Skip];
    let model = ModelBuilder::new()
        .template(TemplateDef::new("A", vec![], two_steps.clone()))
        .template(TemplateDef::new("B", vec![], two_steps))
        .boot("A")
        .boot("B")
        .build()
        .unwrap();
    let g = explore(&model, limits()).unwrap();
    assert_eq!(g.states.len(), 9);
}

fn send_recv_model(capacity: usize) -> Model {
    ModelBuilder::new()
        .chan("q", capacity)
        .template(TemplateDef::new(
            "S",
            vec![],
            vec![Stmt::Send(ChanRef::scalar("q"), Expr::Int(7))],
        ))
        .template(TemplateDef::new(
            "R",
            vec![],
            vec![
                Stmt::Decl(Decl::int("x")),
                Stmt::Recv(ChanRef::scalar("q"), Target::var("x")),
            ],
        ))
        .boot("S")
        .boot("R")
        .build()
        .unwrap()
}

#[test]
fn buffered_send_then_recv() {
    let model = send_recv_model(1);
    let s0 = SystemState::initial(&model);
    // Receiver blocked on the empty buffer: only the send is enabled.
    let en = enabled_transitions(&model, &s0).unwrap();
    assert_eq!(en.len(), 1);
    assert_eq!(en[0].0, 0);
    let (s1, eff) = apply_transition(&model, &s0, en[0].0, &en[0].1).unwrap();
    assert_eq!(s1.buffers[0].iter().copied().collect::<Vec<_>>(), vec![7]);
    assert_eq!(eff.sends, vec![("q".to_string(), 7)]);
    // Sender done; the recv is now enabled and drains the buffer.
    let en = enabled_transitions(&model, &s1).unwrap();
    assert_eq!(en.len(), 1);
    assert_eq!(en[0].0, 1);
    let (s2, eff) = apply_transition(&model, &s1, en[0].0, &en[0].1).unwrap();
    assert!(s2.buffers[0].is_empty());
    assert_eq!(eff.recvs, vec![("q".to_string(), 7)]);
    assert_eq!(eff.assigns, vec![("x".to_string(), 7)]);
    assert!(enabled_transitions(&model, &s2).unwrap().is_empty());
    assert!(is_valid_end_state(&model, &s2));
}

/// FIFO order across a capacity-2 buffer.
#[test]
fn fifo_order() {
    let model = ModelBuilder::new()
        .chan("q", 2)
        .template(TemplateDef::new(
            "S",
            vec![],
            vec![
                Stmt::Send(ChanRef::scalar("q"), Expr::Int(1)),
                Stmt::Send(ChanRef::scalar("q"), Expr::Int(2)),
            ],
        ))
        .template(TemplateDef::new(
            "R",
            vec![],
            vec![
                Stmt::Decl(Decl::int("a")),
                Stmt::Decl(Decl::int("b")),
                Stmt::Recv(ChanRef::scalar("q"), Target::var("a")),
                Stmt::Recv(ChanRef::scalar("q"), Target::var("b")),
            ],
        ))
        .boot("S")
        .boot("R")
        .build()
        .unwrap();
    let g = explore(&model, limits()).unwrap();
    for (ix, valid) in &g.quiescent {
        assert!(*valid);
        let s = &g.states[*ix];
        let r = &s.procs[1];
        assert_eq!(r.locals, vec![1, 2], "messages received in send order");
    }
}

/// Rendezvous: a capacity-0 channel hands off synchronously in one step.
#[test]
fn rendezvous_handoff() {
    let model = send_recv_model(0);
    let s0 = SystemState::initial(&model);
    let en = enabled_transitions(&model, &s0).unwrap();
    assert_eq!(en.len(), 1);
    assert!(matches!(en[0].1, Transition::Rendezvous { .. }));
    let (s1, eff) = apply_transition(&model, &s0, en[0].0, &en[0].1).unwrap();
    assert_eq!(eff.assigns, vec![("x".to_string(), 7)]);
    assert!(s1.buffers[0].is_empty(), "nothing buffered on handoff");
    // Both processes advanced.
    assert!(enabled_transitions(&model, &s1).unwrap().is_empty());
    assert!(is_valid_end_state(&model, &s1));
}

/// A lone rendezvous send with no partner blocks forever: deadlock shape.
#[test]
fn rendezvous_without_partner_blocks() {
    let model = ModelBuilder::new()
        .chan("q", 0)
        .template(TemplateDef::new(
            "S",
            vec![],
            vec![Stmt::Send(ChanRef::scalar("q"), Expr::Int(1))],
        ))
        .boot("S")
        .build()
        .unwrap();
    let g = explore(&model, limits()).unwrap();
    assert_eq!(g.states.len(), 1);
    assert_eq!(g.quiescent.len(), 1);
    assert!(!g.quiescent[0].1, "blocked mid-body is an invalid end");
}

/// timeout fires only when nothing else in the system can move.
#[test]
fn timeout_exclusivity() {
    let model = ModelBuilder::new()
        .chan("q", 1)
        .template(TemplateDef::new(
            "T",
            vec![],
            vec![Stmt::Timeout, Stmt::Skip],
        ))
        .template(TemplateDef::new(
            "W",
            vec![],
            vec![Stmt::Send(ChanRef::scalar("q"), Expr::Int(1))],
        ))
        .boot("T")
        .boot("W")
        .build()
        .unwrap();
    let s0 = SystemState::initial(&model);
    let en = enabled_transitions(&model, &s0).unwrap();
    // The send is enabled, so the timeout is not offered.
    assert_eq!(en.len(), 1);
    assert_eq!(en[0].0, 1);
    assert!(!en[0].1.is_timeout(&model, &s0, en[0].0));
    let (s1, _) = apply_transition(&model, &s0, en[0].0, &en[0].1).unwrap();
    // Now only the timeout remains.
    let en = enabled_transitions(&model, &s1).unwrap();
    assert_eq!(en.len(), 1);
    assert_eq!(en[0].0, 0);
    assert!(en[0].1.is_timeout(&model, &s1, en[0].0));
}

/// Invariant: no state offers both a timeout and a non-timeout move.
#[test]
fn timeout_never_mixed() {
    let model = ModelBuilder::new()
        .chan("q", 1)
        .template(TemplateDef::new(
            "T",
            vec![],
            vec![Stmt::Timeout, Stmt::Send(ChanRef::scalar("q"), Expr::Int(1))],
        ))
        .template(TemplateDef::new(
            "U",
            vec![],
            vec![Stmt::Skip, Stmt::Timeout],
        ))
        .boot("T")
        .boot("U")
        .build()
        .unwrap();
    let g = explore(&model, limits()).unwrap();
    for ix in 0..g.states.len() {
        let en = enabled_transitions(&model, &g.states[ix]).unwrap();
        let timeouts = en
            .iter()
            .filter(|(p, t)| t.is_timeout(&model, &g.states[ix], *p))
            .count();
        assert!(timeouts == 0 || timeouts == en.len());
    }
}

/// Atomic regions exclude other processes while the holder can move, and
/// break when the holder blocks.
#[test]
fn atomic_exclusion_and_breaking() {
    let model = ModelBuilder::new()
        .chan("q", 1)
        .template(TemplateDef::new(
            "A",
            vec![],
            vec![Stmt::Atomic(vec![
                Stmt::Skip,
                Stmt::Recv(ChanRef::scalar("q"), Target::var("x")),
                Stmt::Skip,
            ]), Stmt::Decl(Decl::int("x"))],
        ))
        .template(TemplateDef::new(
            "B",
            vec![],
            vec![Stmt::Send(ChanRef::scalar("q"), Expr::Int(5))],
        ))
        .boot("A")
        .boot("B")
        .build()
        .unwrap();
    let s0 = SystemState::initial(&model);
    // Entering the atomic is a normal race: both processes are offered.
    let en = enabled_transitions(&model, &s0).unwrap();
    assert_eq!(en.len(), 2);
    // A enters the region.
    let a_move = en.iter().find(|(p, _)| *p == 0).unwrap().clone();
    let (s1, _) = apply_transition(&model, &s0, a_move.0, &a_move.1).unwrap();
    // A blocks on the empty channel inside the region: atomicity is lost
    // and B runs.
    assert_eq!(s1.atomic_holder, None);
    let en = enabled_transitions(&model, &s1).unwrap();
    assert_eq!(en.len(), 1);
    assert_eq!(en[0].0, 1);
    let (s2, _) = apply_transition(&model, &s1, en[0].0, &en[0].1).unwrap();
    // A's recv is enabled again; after it fires A holds the region and is
    // the only process allowed to move (B is already done here, so check
    // the holder flag instead).
    let en = enabled_transitions(&model, &s2).unwrap();
    assert_eq!(en.len(), 1);
    assert_eq!(en[0].0, 0);
    let (s3, _) = apply_transition(&model, &s2, en[0].0, &en[0].1).unwrap();
    assert_eq!(s3.atomic_holder, Some(0));
}

/// Atomic holder keeps exclusive control against a ready competitor.
#[test]
fn atomic_holder_excludes_ready_competitor() {
    let model = ModelBuilder::new()
        .template(TemplateDef::new(
            "A",
            vec![],
            vec![Stmt::Atomic(vec![Stmt::Skip, Stmt::Skip, Stmt::Skip])],
        ))
        .template(TemplateDef::new("B", vec![], vec![Stmt::Skip]))
        .boot("A")
        .boot("B")
        .build()
        .unwrap();
    let s0 = SystemState::initial(&model);
    let en = enabled_transitions(&model, &s0).unwrap();
    assert_eq!(en.len(), 2, "entry races normally");
    let a_move = en.iter().find(|(p, _)| *p == 0).unwrap().clone();
    let (s1, _) = apply_transition(&model, &s0, a_move.0, &a_move.1).unwrap();
    assert_eq!(s1.atomic_holder, Some(0));
    let en = enabled_transitions(&model, &s1).unwrap();
    assert!(en.iter().all(|(p, _)| *p == 0), "only the holder moves");
    // The whole region runs before B gets a turn.
    let (s2, _) = apply_transition(&model, &s1, en[0].0, &en[0].1).unwrap();
    assert_eq!(s2.atomic_holder, Some(0));
}

/// d_step executes as one indivisible step and rejects blocking bodies.
#[test]
fn dstep_single_transition() {
    let model = ModelBuilder::new()
        .template(TemplateDef::new(
            "D",
            vec![],
            vec![
                Stmt::Decl(Decl::int("x")),
                Stmt::DStep(vec![
                    Stmt::assign(Target::var("x"), Expr::Int(1)),
                    Stmt::assign(Target::var("x"), Expr::bin(BinOp::Add, Expr::var("x"), Expr::Int(1))),
                    Stmt::assign(Target::var("x"), Expr::bin(BinOp::Mul, Expr::var("x"), Expr::Int(3))),
                ]),
            ],
        ))
        .boot("D")
        .build()
        .unwrap();
    let g = explore(&model, limits()).unwrap();
    // One fused step for the whole d_step body.
    assert_eq!(g.transitions, 1);
    let terminal = &g.states[g.quiescent[0].0];
    assert_eq!(terminal.procs[0].locals, vec![6]);
}

#[test]
fn dstep_blocking_is_model_error() {
    let model = ModelBuilder::new()
        .chan("q", 1)
        .template(TemplateDef::new(
            "D",
            vec![],
            vec![
                Stmt::Decl(Decl::int("x")),
                Stmt::DStep(vec![
                    Stmt::Skip,
                    Stmt::Recv(ChanRef::scalar("q"), Target::var("x")),
                ]),
            ],
        ))
        .boot("D")
        .build()
        .unwrap();
    let err = explore(&model, limits()).unwrap_err();
    assert_eq!(err.kind, ModelErrorKind::DStepBlocked);
}

#[test]
fn dstep_nondeterminism_is_model_error() {
    let model = ModelBuilder::new()
        .template(TemplateDef::new(
            "D",
            vec![],
            vec![Stmt::DStep(vec![
                Stmt::Skip,
                Stmt::If {
                    options: vec![vec![Stmt::Skip], vec![Stmt::Skip]],
                    else_branch: None,
                },
            ])],
        ))
        .boot("D")
        .build()
        .unwrap();
    let err = explore(&model, limits()).unwrap_err();
    assert_eq!(err.kind, ModelErrorKind::DStepNondet);
}

/// The escape guard preempts the main body from the first statement on.
#[test]
fn escape_preempts_main_body() {
    let model = ModelBuilder::new()
        .chan("qc", 1)
        .chan("out", 1)
        .template(TemplateDef::new(
            "P",
            vec![],
            vec![Stmt::Unless {
                main: vec![
                    Stmt::Skip,
                    Stmt::Send(ChanRef::scalar("out"), Expr::Int(1)),
                ],
                escape_guard: Expr::bin(
                    BinOp::Gt,
                    Expr::len(ChanRef::scalar("qc")),
                    Expr::Int(0),
                ),
                escape_body: vec![Stmt::Skip],
            }],
        ))
        .template(TemplateDef::new(
            "C",
            vec![],
            vec![Stmt::Send(ChanRef::scalar("qc"), Expr::Int(1))],
        ))
        .boot("P")
        .boot("C")
        .build()
        .unwrap();
    let g = explore(&model, limits()).unwrap();
    // While P is inside the escape-scoped body and the cancel is pending,
    // its only offered move is the escape itself.
    let p_cfg = &model.templates[0].cfg;
    for ix in 0..g.states.len() {
        let s = &g.states[ix];
        if s.buffers[0].is_empty() || p_cfg.locs[s.procs[0].loc].escapes.is_empty() {
            continue;
        }
        for (pid, t) in enabled_transitions(&model, s).unwrap() {
            if pid == 0 {
                assert!(
                    matches!(t, Transition::Escape { .. }),
                    "escape preempts every main-body move"
                );
            }
        }
    }
    // Both terminal classes exist: escaped (out empty) and completed.
    let mut saw_escaped = false;
    let mut saw_completed = false;
    for (ix, valid) in &g.quiescent {
        assert!(*valid);
        let s = &g.states[*ix];
        if s.buffers[1].is_empty() {
            saw_escaped = true;
        } else {
            saw_completed = true;
        }
    }
    assert!(saw_escaped && saw_completed);
}

/// Escapes are not checked while the same process holds an atomic region.
#[test]
fn escape_suppressed_inside_atomic() {
    let model = ModelBuilder::new()
        .chan("qc", 1)
        .chan("out", 1)
        .template(TemplateDef::new(
            "P",
            vec![],
            vec![Stmt::Unless {
                main: vec![
                    Stmt::Atomic(vec![
                        Stmt::Skip,
                        Stmt::Send(ChanRef::scalar("out"), Expr::Int(1)),
                    ]),
                    Stmt::Skip,
                ],
                escape_guard: Expr::bin(
                    BinOp::Gt,
                    Expr::len(ChanRef::scalar("qc")),
                    Expr::Int(0),
                ),
                escape_body: vec![Stmt::Skip],
            }],
        ))
        .boot("P")
        .build()
        .unwrap();
    // Pre-load the cancel channel, then step P into the atomic: the escape
    // must not fire mid-region.
    let mut s0 = SystemState::initial(&model);
    s0.buffers[0].push_back(1);
    let en = enabled_transitions(&model, &s0).unwrap();
    // Escape fires at the region entry (P does not hold it yet).
    assert!(matches!(en[0].1, Transition::Escape { .. }));
    // Take the entry step instead by constructing the edge directly: once
    // inside, the escape is suppressed until the region ends.
    let entry = Transition::Edge {
        loc: s0.procs[0].loc,
        edge: 0,
    };
    let (s1, _) = apply_transition(&model, &s0, 0, &entry).unwrap();
    assert_eq!(s1.atomic_holder, Some(0));
    let en = enabled_transitions(&model, &s1).unwrap();
    assert_eq!(en.len(), 1);
    assert!(
        !matches!(en[0].1, Transition::Escape { .. }),
        "escape suppressed while the region is held"
    );
    let (s2, _) = apply_transition(&model, &s1, 0, &en[0].1).unwrap();
    // Region ended; escape fires now.
    let en = enabled_transitions(&model, &s2).unwrap();
    assert!(matches!(en[0].1, Transition::Escape { .. }));
}

/// goto jumps are always executable; labels starting with `end` mark valid
/// end states.
#[test]
fn goto_and_end_labels() {
    let model = ModelBuilder::new()
        .chan("q", 1)
        .template(TemplateDef::new(
            "P",
            vec![],
            vec![
                Stmt::Goto("endwait".to_string()),
                Stmt::Skip,
                Stmt::Label("endwait".to_string()),
                Stmt::Recv(ChanRef::scalar("q"), Target::var("x")),
                Stmt::Decl(Decl::int("x")),
            ],
        ))
        .boot("P")
        .build()
        .unwrap();
    let g = explore(&model, limits()).unwrap();
    assert_eq!(g.quiescent.len(), 1);
    assert!(
        g.quiescent[0].1,
        "blocked at an end-labeled statement is a valid end"
    );
}

#[test]
fn unknown_goto_target_is_build_error() {
    let err = ModelBuilder::new()
        .template(TemplateDef::new(
            "P",
            vec![],
            vec![Stmt::Goto("nowhere".to_string())],
        ))
        .boot("P")
        .build()
        .unwrap_err();
    assert!(err.to_string().contains("nowhere"));
}

/// run appends instances with pids in creation order; exceeding the bound
/// is a model error.
#[test]
fn run_spawns_and_bounds() {
    let model = ModelBuilder::new()
        .template(TemplateDef::new(
            "Child",
            vec!["v"],
            vec![Stmt::Skip],
        ))
        .template(TemplateDef::new(
            "Root",
            vec![],
            vec![
                Stmt::run("Child", vec![Expr::Int(42)]),
                Stmt::run("Child", vec![Expr::Int(43)]),
            ],
        ))
        .boot("Root")
        .build()
        .unwrap();
    let s0 = SystemState::initial(&model);
    let en = enabled_transitions(&model, &s0).unwrap();
    let (s1, eff) = apply_transition(&model, &s0, en[0].0, &en[0].1).unwrap();
    assert_eq!(eff.spawned, vec!["Child".to_string()]);
    assert_eq!(s1.procs.len(), 2);
    assert_eq!(s1.procs[1].pid, 1);
    assert_eq!(s1.procs[1].locals, vec![42], "parameter bound from args");
}

#[test]
fn process_bound_is_model_error() {
    // Root respawns itself forever.
    let model = ModelBuilder::new()
        .template(TemplateDef::new(
            "Root",
            vec![],
            vec![Stmt::run("Root", vec![])],
        ))
        .boot("Root")
        .build()
        .unwrap();
    let err = explore(
        &model,
        Limits {
            max_states: 1_000_000,
            max_depth: 1_000_000,
        },
    )
    .unwrap_err();
    assert_eq!(err.kind, ModelErrorKind::TooManyProcesses);
}

/// eval_expr covers len, short-circuit conjunction, and error cases.
#[test]
fn expression_evaluation() {
    let model = ModelBuilder::new()
        .chan("q", 1)
        .global_int("choice")
        .global_int("sizeq")
        .global_int_array("arr", 2)
        .template(TemplateDef::new("P", vec![], vec![Stmt::Skip]))
        .boot("P")
        .build()
        .unwrap();
    let mut s = SystemState::initial(&model);
    // len counts buffered messages.
    assert_eq!(
        eval_expr(&model, &s, 0, &Expr::len(ChanRef::scalar("q"))).unwrap(),
        0
    );
    s.buffers[0].push_back(9);
    assert_eq!(
        eval_expr(&model, &s, 0, &Expr::len(ChanRef::scalar("q"))).unwrap(),
        1
    );
    // choice>=0 && choice<sizeq with choice=1, sizeq=2.
    let choice_slot = model.globals.slot("choice").unwrap().offset;
    let sizeq_slot = model.globals.slot("sizeq").unwrap().offset;
    s.globals[choice_slot] = 1;
    s.globals[sizeq_slot] = 2;
    let guard = Expr::and(
        Expr::bin(BinOp::Ge, Expr::var("choice"), Expr::Int(0)),
        Expr::bin(BinOp::Lt, Expr::var("choice"), Expr::var("sizeq")),
    );
    assert_eq!(eval_expr(&model, &s, 0, &guard).unwrap(), 1);
    // Short-circuit: false left conjunct guards an out-of-bounds index.
    let short = Expr::and(
        Expr::bin(BinOp::Lt, Expr::Int(5), Expr::Int(2)),
        Expr::eq(Expr::index("arr", Expr::Int(5)), Expr::Int(0)),
    );
    assert_eq!(eval_expr(&model, &s, 0, &short).unwrap(), 0);
    // Errors surface as model errors naming the statement.
    let div = Expr::bin(BinOp::Div, Expr::Int(1), Expr::Int(0));
    let err = eval_expr(&model, &s, 0, &div).unwrap_err();
    assert!(matches!(err.kind, ModelErrorKind::Eval(EvalError::DivideByZero)));
    let oob = Expr::index("arr", Expr::Int(7));
    let err = eval_expr(&model, &s, 0, &oob).unwrap_err();
    assert!(matches!(
        err.kind,
        ModelErrorKind::Eval(EvalError::IndexOutOfBounds { .. })
    ));
    let unbound = Expr::var("nosuch");
    let err = eval_expr(&model, &s, 0, &unbound).unwrap_err();
    assert!(matches!(
        err.kind,
        ModelErrorKind::Eval(EvalError::UnboundName(_))
    ));
}

/// Channel aliasing: assigning a channel-valued cell makes two names denote
/// one buffer.
#[test]
fn channel_aliasing() {
    let model = ModelBuilder::new()
        .chan_array("qs", 2, 1)
        .template(TemplateDef::new(
            "P",
            vec![],
            vec![
                Stmt::Decl(Decl::chan_array("mine", 2)),
                Stmt::assign(
                    Target::elem("mine", Expr::Int(0)),
                    Expr::index("qs", Expr::Int(1)),
                ),
                Stmt::Send(ChanRef::indexed("mine", Expr::Int(0)), Expr::Int(3)),
            ],
        ))
        .boot("P")
        .build()
        .unwrap();
    let g = explore(&model, limits()).unwrap();
    let terminal = &g.states[g.quiescent[0].0];
    assert!(terminal.buffers[0].is_empty());
    assert_eq!(
        terminal.buffers[1].iter().copied().collect::<Vec<_>>(),
        vec![3],
        "send through the alias lands in qs[1]"
    );
}

/// Sending through an unbound alias is a model error, not a panic.
#[test]
fn unbound_channel_alias_is_model_error() {
    let model = ModelBuilder::new()
        .chan_array("qs", 2, 1)
        .template(TemplateDef::new(
            "P",
            vec![],
            vec![
                Stmt::Decl(Decl::chan_array("mine", 1)),
                Stmt::Send(ChanRef::indexed("mine", Expr::Int(0)), Expr::Int(3)),
            ],
        ))
        .boot("P")
        .build()
        .unwrap();
    let err = explore(&model, limits()).unwrap_err();
    assert!(matches!(
        err.kind,
        ModelErrorKind::Eval(EvalError::UnboundChannel { .. })
    ));
}

/// Digest determinism and sensitivity.
#[test]
fn digest_properties() {
    let model = send_recv_model(1);
    let s = SystemState::initial(&model);
    assert_eq!(s.digest(), s.digest());
    let mut s2 = s.clone();
    s2.buffers[0].push_back(1);
    assert_ne!(s.digest(), s2.digest());
    let mut s3 = s.clone();
    s3.buffers[0].push_back(2);
    assert_ne!(
        s2.digest(),
        s3.digest(),
        "states differing in one buffered value differ"
    );
}

/// Determinism: replaying a recorded sequence reproduces the digest.
#[test]
fn replay_reproduces_digest() {
    let model = send_recv_model(1);
    let mut s = SystemState::initial(&model);
    let mut seq = Vec::new();
    loop {
        let en = enabled_transitions(&model, &s).unwrap();
        if en.is_empty() {
            break;
        }
        let (pid, t) = en[0].clone();
        let (next, _) = apply_transition(&model, &s, pid, &t).unwrap();
        seq.push((pid, t));
        s = next;
    }
    let final_digest = s.digest();
    // Replay.
    let mut r = SystemState::initial(&model);
    for (pid, t) in &seq {
        let (next, _) = apply_transition(&model, &r, *pid, t).unwrap();
        r = next;
    }
    assert_eq!(r.digest(), final_digest);
}

/// else fires only when no sibling option is executable.
#[test]
fn else_branch_selection() {
    let model = ModelBuilder::new()
        .chan("q", 1)
        .global_int("took")
        .template(TemplateDef::new(
            "P",
            vec![],
            vec![Stmt::If {
                options: vec![vec![
                    Stmt::Recv(ChanRef::scalar("q"), Target::var("took")),
                ]],
                else_branch: Some(vec![Stmt::assign(Target::var("took"), Expr::Int(-1))]),
            }],
        ))
        .boot("P")
        .build()
        .unwrap();
    // Empty channel: the else branch runs.
    let g = explore(&model, limits()).unwrap();
    let terminal = &g.states[g.quiescent[0].0];
    assert_eq!(terminal.globals[model.globals.slot("took").unwrap().offset], -1);
    // Preloaded channel: the recv option wins and else is not offered.
    let mut s = SystemState::initial(&model);
    s.buffers[0].push_back(8);
    let en = enabled_transitions(&model, &s).unwrap();
    assert_eq!(en.len(), 1);
    let (s1, _) = apply_transition(&model, &s, en[0].0, &en[0].1).unwrap();
    assert_eq!(s1.globals[model.globals.slot("took").unwrap().offset], 8);
}

/// Templates with empty bodies are done immediately.
#[test]
fn empty_body_template() {
    let model = ModelBuilder::new()
        .template(TemplateDef::new("E", vec![], vec![]))
        .boot("E")
        .build()
        .unwrap();
    let g = explore(&model, limits()).unwrap();
    assert_eq!(g.states.len(), 1);
    assert!(g.quiescent[0].1);
}
