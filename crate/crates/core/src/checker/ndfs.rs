//! Nested depth-first search for accepting cycles in the product.
//!
//! Outer (blue) DFS visits product nodes in ascending pid / syntactic edge
//! order; on post-order at an accepting node the inner (red) DFS searches
//! for a cycle back to the seed or to any node on the blue stack. Both
//! searches are iterative so deep models cannot overflow the call stack.

use super::product::{Move, ProductCtx, ProductNode};
use crate::kernel::ModelErrorInfo;
use std::collections::{HashMap, HashSet};

pub struct NdfsOutcome {
    /// Lasso as raw moves: prefix then cycle.
    pub violation: Option<(Vec<Move>, Vec<Move>)>,
    pub product_states: usize,
}

struct Frame {
    node: ProductNode,
    succs: Vec<(Move, ProductNode)>,
    next: usize,
    /// Move that led here from the frame below.
    via: Option<Move>,
}

/// Runs the search; `max_states` bounds the number of distinct product
/// nodes. Returns `Ok(None)` in `violation` when no accepting cycle exists.
pub fn nested_dfs(
    ctx: &mut ProductCtx<'_>,
    max_states: usize,
) -> Result<(NdfsOutcome, bool), ModelErrorInfo> {
    let mut blue: HashSet<ProductNode> = HashSet::new();
    let mut red: HashSet<ProductNode> = HashSet::new();
    let mut cyan: HashMap<ProductNode, usize> = HashMap::new(); // node -> stack depth
    let mut complete = true;

    let root = ctx.initial_node();
    let mut stack: Vec<Frame> = vec![Frame {
        node: root,
        succs: ctx.product_succs(root)?,
        next: 0,
        via: None,
    }];
    cyan.insert(root, 0);

    while let Some(top_ix) = stack.len().checked_sub(1) {
        let (node, pick) = {
            let top = &mut stack[top_ix];
            if top.next < top.succs.len() {
                let pick = top.succs[top.next].clone();
                top.next += 1;
                (top.node, Some(pick))
            } else {
                (top.node, None)
            }
        };
        match pick {
            Some((mv, succ)) => {
                if blue.contains(&succ) || cyan.contains_key(&succ) {
                    continue;
                }
                if blue.len() + cyan.len() >= max_states {
                    complete = false;
                    continue;
                }
                let succs = ctx.product_succs(succ)?;
                cyan.insert(succ, stack.len());
                stack.push(Frame {
                    node: succ,
                    succs,
                    next: 0,
                    via: Some(mv),
                });
            }
            None => {
                // Post-order: seed the inner search at accepting nodes.
                if ctx.buchi.accepting[node.1] {
                    if let Some((cycle_moves, closing)) =
                        red_dfs(ctx, node, &mut red, &cyan)?
                    {
                        // Prefix: blue stack up to and including the seed.
                        let mut prefix: Vec<Move> = Vec::new();
                        for f in &stack[1..] {
                            prefix.push(f.via.clone().expect("non-root frame"));
                        }
                        // Cycle: red path, then (when the red search hit a
                        // blue-stack node below the seed) the stack segment
                        // from that node back to the seed.
                        let mut cycle = cycle_moves;
                        if closing != node {
                            let k = cyan[&closing];
                            for f in &stack[k + 1..] {
                                cycle.push(f.via.clone().expect("non-root frame"));
                            }
                        }
                        return Ok((
                            NdfsOutcome {
                                violation: Some((prefix, cycle)),
                                product_states: blue.len() + cyan.len() + red.len(),
                            },
                            complete,
                        ));
                    }
                }
                cyan.remove(&node);
                blue.insert(node);
                stack.pop();
            }
        }
    }

    Ok((
        NdfsOutcome {
            violation: None,
            product_states: blue.len(),
        },
        complete,
    ))
}

/// Inner search from `seed`; returns the move sequence from the seed to the
/// closing node (the seed itself or a node on the blue stack).
fn red_dfs(
    ctx: &mut ProductCtx<'_>,
    seed: ProductNode,
    red: &mut HashSet<ProductNode>,
    cyan: &HashMap<ProductNode, usize>,
) -> Result<Option<(Vec<Move>, ProductNode)>, ModelErrorInfo> {
    struct RFrame {
        node: ProductNode,
        succs: Vec<(Move, ProductNode)>,
        next: usize,
        via: Option<Move>,
    }
    let mut stack = vec![RFrame {
        node: seed,
        succs: ctx.product_succs(seed)?,
        next: 0,
        via: None,
    }];
    let mut on_stack: HashSet<ProductNode> = HashSet::new();
    on_stack.insert(seed);

    while let Some(top_ix) = stack.len().checked_sub(1) {
        let pick = {
            let top = &mut stack[top_ix];
            if top.next < top.succs.len() {
                let p = top.succs[top.next].clone();
                top.next += 1;
                Some(p)
            } else {
                None
            }
        };
        match pick {
            Some((mv, succ)) => {
                if succ == seed || cyan.contains_key(&succ) {
                    let mut moves: Vec<Move> = stack[1..]
                        .iter()
                        .map(|f| f.via.clone().expect("non-root"))
                        .collect();
                    moves.push(mv);
                    return Ok(Some((moves, succ)));
                }
                if red.contains(&succ) || on_stack.contains(&succ) {
                    continue;
                }
                let succs = ctx.product_succs(succ)?;
                on_stack.insert(succ);
                stack.push(RFrame {
                    node: succ,
                    succs,
                    next: 0,
                    via: Some(mv),
                });
            }
            None => {
                let f = stack.pop().expect("frame");
                on_stack.remove(&f.node);
                red.insert(f.node);
            }
        }
    }
    Ok(None)
}
