//! Best-response verification for the full-information game, where a node's
//! action is any set of at most `d` out-neighbors.

use std::collections::VecDeque;
use std::fmt;

use num::BigRational;

use crate::graph::{NodeId, PeerGraph};
use crate::metrics::weighted_score;
use crate::score::Score;

use super::AnalysisError;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NashMode {
    /// Enumerate every feasible out-neighbor set of size at most `d`.
    Exhaustive,
    /// Only actions that differ from the current set in one out-edge.
    SingleSwap,
}

impl fmt::Display for NashMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NashMode::Exhaustive => "exhaustive",
            NashMode::SingleSwap => "single-swap",
        })
    }
}

/// A strictly improving deviation: dropping the node's out-edges and placing
/// `action` instead lowers its score.
#[derive(Clone, PartialEq, Debug)]
pub struct NashWitness {
    pub node: NodeId,
    pub action: Vec<NodeId>,
    pub old_score: Score,
    pub new_score: Score,
}

#[derive(Clone, PartialEq, Debug)]
pub struct NashVerdict {
    pub is_nash: bool,
    pub witness: Option<NashWitness>,
    pub mode: NashMode,
    pub actions_examined: u64,
}

/// Scan every node for a strictly improving deviation. Feasibility of a
/// target: not the node itself, not already pointing at the node, and in
/// capped mode enough inbound room once the node's own current edges are
/// returned. The first improvement found (nodes and targets in id order,
/// actions in lexicographic order) is reported as the witness.
pub fn verify_nash(
    g: &PeerGraph,
    capped: bool,
    mode: NashMode,
    budget: u64,
) -> Result<NashVerdict, AnalysisError> {
    let n = g.n();
    let d = g.params().d;
    let weights = g.miner_weights();
    let cap = if capped { g.params().d_in } else { None };
    let mut examined = 0u64;
    for raw in 0..n as u32 {
        let v = NodeId(raw);
        let current: Vec<NodeId> = g.out_edges(v).iter().map(|e| e.dst).collect();
        let old_score = score_with_action(g, v, &current, &weights);
        let feasible: Vec<NodeId> = (0..n as u32)
            .map(NodeId)
            .filter(|&t| {
                if t == v || g.has_edge(t, v) {
                    return false;
                }
                match cap {
                    None => true,
                    Some(c) => {
                        let freed = usize::from(g.has_edge(v, t));
                        g.in_degree(t) - freed < c
                    }
                }
            })
            .collect();
        let witness = match mode {
            NashMode::SingleSwap => single_swaps(
                g, v, &current, &feasible, &weights, &old_score, &mut examined, budget,
            )?,
            NashMode::Exhaustive => {
                let mut action = Vec::with_capacity(d);
                subsets(
                    g, v, &feasible, d, &weights, &old_score, 0, &mut action, &mut examined,
                    budget,
                )?
            }
        };
        if let Some(witness) = witness {
            return Ok(NashVerdict {
                is_nash: false,
                witness: Some(witness),
                mode,
                actions_examined: examined,
            });
        }
    }
    Ok(NashVerdict {
        is_nash: true,
        witness: None,
        mode,
        actions_examined: examined,
    })
}

#[allow(clippy::too_many_arguments)]
fn single_swaps(
    g: &PeerGraph,
    v: NodeId,
    current: &[NodeId],
    feasible: &[NodeId],
    weights: &[BigRational],
    old_score: &Score,
    examined: &mut u64,
    budget: u64,
) -> Result<Option<NashWitness>, AnalysisError> {
    for slot in 0..current.len() {
        for &t in feasible {
            if current.contains(&t) {
                continue;
            }
            let mut action = current.to_vec();
            action[slot] = t;
            *examined += 1;
            if *examined > budget {
                return Err(AnalysisError::BudgetExceeded {
                    actions_examined: *examined - 1,
                });
            }
            let new_score = score_with_action(g, v, &action, weights);
            if new_score < *old_score {
                return Ok(Some(NashWitness {
                    node: v,
                    action,
                    old_score: old_score.clone(),
                    new_score,
                }));
            }
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn subsets(
    g: &PeerGraph,
    v: NodeId,
    feasible: &[NodeId],
    d: usize,
    weights: &[BigRational],
    old_score: &Score,
    start: usize,
    action: &mut Vec<NodeId>,
    examined: &mut u64,
    budget: u64,
) -> Result<Option<NashWitness>, AnalysisError> {
    *examined += 1;
    if *examined > budget {
        return Err(AnalysisError::BudgetExceeded {
            actions_examined: *examined - 1,
        });
    }
    let new_score = score_with_action(g, v, action, weights);
    if new_score < *old_score {
        return Ok(Some(NashWitness {
            node: v,
            action: action.clone(),
            old_score: old_score.clone(),
            new_score,
        }));
    }
    if action.len() == d {
        return Ok(None);
    }
    for i in start..feasible.len() {
        action.push(feasible[i]);
        let found = subsets(
            g, v, feasible, d, weights, old_score, i + 1, action, examined, budget,
        )?;
        action.pop();
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Score of `v` on the graph with `v`'s out-edges replaced by `action`.
/// Only `v`'s own edges move: incoming edges stay, everyone else's stay.
fn score_with_action(
    g: &PeerGraph,
    v: NodeId,
    action: &[NodeId],
    weights: &[BigRational],
) -> Score {
    let n = g.n();
    let mut in_action = vec![false; n];
    for t in action {
        in_action[t.index()] = true;
    }
    let mut dist = vec![n; n];
    let mut queue = VecDeque::with_capacity(n);
    dist[v.index()] = 0;
    queue.push_back(v.index());
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        macro_rules! relax {
            ($w:expr) => {{
                let w: usize = $w;
                if dist[w] == n {
                    dist[w] = du + 1;
                    queue.push_back(w);
                }
            }};
        }
        if u == v.index() {
            for t in action {
                relax!(t.index());
            }
            for &s in g.in_neighbors(v) {
                relax!(s as usize);
            }
        } else {
            for e in g.out_edges(NodeId(u as u32)) {
                relax!(e.dst.index());
            }
            for &s in g.in_neighbors(NodeId(u as u32)) {
                // v's old out-edges are retracted during the deviation
                if s != v.0 {
                    relax!(s as usize);
                }
            }
            if in_action[u] {
                relax!(v.index());
            }
        }
    }
    weighted_score(&dist, weights)
}
