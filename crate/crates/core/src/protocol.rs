//! The round engine: exploratory adds, frozen-snapshot scoring, and k-worst
//! drops with the four tie-breaker rules.
//!
//! A round is: (1) every node below out-degree `d` adds random edges toward
//! feasible peers, in a freshly shuffled node order; (2) all scores are
//! computed once on the post-add graph; (3) every node at out-degree exactly
//! `d` drops its `k` worst out-neighbors against that frozen snapshot.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph::{EdgeRecord, GameParams, NodeId, PeerGraph, TieRule};
use crate::metrics::{all_scores_graph_weights, round_metrics, RoundMetrics};
use crate::score::Score;

/// The generator used everywhere randomness is consumed: a seeded ChaCha
/// stream cipher RNG, whose (seed, stream) mapping is stable across
/// platforms and releases.
pub type ProtocolRng = rand_chacha::ChaCha8Rng;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("initial graph parameters do not match the requested game")]
    ConfigMismatch,
}

/// Trace of one round: what was added, what was dropped, and the score
/// snapshot the drops were decided against.
#[derive(Clone, PartialEq, Debug)]
pub struct RoundReport {
    pub round: usize,
    pub additions: Vec<EdgeRecord>,
    pub drops: Vec<EdgeRecord>,
    pub scores_snapshot: Vec<Score>,
}

/// Step 1: each node, in a fresh random order, draws peers uniformly from
/// the feasible set (unconnected in either direction, spare inbound
/// capacity) without replacement until its out-degree reaches `d`, its
/// per-round add budget is spent, or candidates run out. Exhaustion is
/// silent; a node connected to everyone adds nothing.
pub fn step_add(g: &mut PeerGraph, rng: &mut impl Rng, round: usize) -> Vec<EdgeRecord> {
    let n = g.n();
    let d = g.params().d;
    let per_round_cap = g.params().add_per_round.unwrap_or(d);
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let mut added = Vec::new();
    for &raw in &order {
        let i = NodeId(raw);
        let mut budget = per_round_cap.min(d.saturating_sub(g.out_degree(i)));
        if budget == 0 {
            continue;
        }
        let mut pool: Vec<NodeId> = (0..n as u32)
            .map(NodeId)
            .filter(|&j| j != i && !g.connected(i, j))
            .collect();
        while budget > 0 && !pool.is_empty() {
            let idx = rng.random_range(0..pool.len());
            let j = pool.swap_remove(idx);
            if g.has_in_capacity(j) {
                let rec = g.add_edge(i, j, round).expect("candidate was feasible");
                added.push(rec);
                budget -= 1;
            }
        }
    }
    added
}

/// Step 3 over nodes in id order. See [`step_drop_ordered`].
pub fn step_drop(
    g: &mut PeerGraph,
    scores: &[Score],
    tie_rule: TieRule,
    rng: &mut impl Rng,
    k: usize,
) -> Vec<EdgeRecord> {
    let order: Vec<NodeId> = (0..g.n() as u32).map(NodeId).collect();
    step_drop_ordered(g, scores, tie_rule, rng, k, &order)
}

/// Step 3: every node with out-degree exactly `d` drops its `k`
/// highest-score out-neighbors, one at a time, each selection resolving
/// ties by `tie_rule`. All decisions read the frozen `scores` snapshot, so
/// for deterministic tie rules the drop set is independent of `order`.
pub fn step_drop_ordered(
    g: &mut PeerGraph,
    scores: &[Score],
    tie_rule: TieRule,
    rng: &mut impl Rng,
    k: usize,
    order: &[NodeId],
) -> Vec<EdgeRecord> {
    let d = g.params().d;
    let mut drops = Vec::new();
    for &i in order {
        if g.out_degree(i) != d {
            continue;
        }
        for _ in 0..k {
            let victim = select_drop_victim(g, i, scores, tie_rule, rng);
            let rec = g.remove_edge(i, victim).expect("victim edge exists");
            drops.push(rec);
        }
    }
    drops
}

fn select_drop_victim(
    g: &PeerGraph,
    node: NodeId,
    scores: &[Score],
    tie_rule: TieRule,
    rng: &mut impl Rng,
) -> NodeId {
    let edges = g.out_edges(node);
    let max = edges
        .iter()
        .map(|e| &scores[e.dst.index()])
        .max()
        .expect("node has out-edges");
    let tied: Vec<&EdgeRecord> = edges
        .iter()
        .filter(|e| scores[e.dst.index()] == *max)
        .collect();
    let victim = match tie_rule {
        TieRule::Random => tied[rng.random_range(0..tied.len())],
        TieRule::Fifo => tied.iter().min_by_key(|e| e.age()).unwrap(),
        TieRule::Lifo => tied.iter().max_by_key(|e| e.age()).unwrap(),
        // best rank (lowest value) wins, so the worst-ranked peer is dropped
        TieRule::GlobalOrdering => tied.iter().max_by_key(|e| g.node(e.dst).rank).unwrap(),
    };
    victim.dst
}

/// One protocol round: add, score, drop.
pub fn run_round(g: &mut PeerGraph, rng: &mut impl Rng, round: usize) -> RoundReport {
    let additions = step_add(g, rng, round);
    let scores = all_scores_graph_weights(g);
    let tie_rule = g.params().tie_rule;
    let k = g.params().k_worst;
    let drops = step_drop(g, &scores, tie_rule, rng, k);
    RoundReport {
        round,
        additions,
        drops,
        scores_snapshot: scores,
    }
}

/// Result of a full run: the per-round traces with their metrics, and the
/// final graph.
#[derive(Clone, Debug)]
pub struct SimulationRun {
    pub per_round: Vec<(RoundReport, RoundMetrics)>,
    pub final_graph: PeerGraph,
}

/// Run `rounds` sequential rounds from `initial`. Deterministic for a given
/// RNG state; the initial graph is not modified. Rounds are numbered from 1,
/// round 0 being the initial state.
pub fn run_simulation(
    params: &GameParams,
    initial: &PeerGraph,
    rounds: usize,
    rng: &mut ProtocolRng,
) -> Result<SimulationRun, ProtocolError> {
    if initial.params() != params {
        return Err(ProtocolError::ConfigMismatch);
    }
    let mut g = initial.clone();
    let mut per_round = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        let report = run_round(&mut g, rng, round);
        debug_assert!(g.audit().is_ok(), "graph invariants violated after round");
        let metrics = round_metrics(&g, round, report.additions.len(), report.drops.len());
        per_round.push((report, metrics));
    }
    Ok(SimulationRun {
        per_round,
        final_graph: g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn params(n: usize, m: usize, d: usize, tie: TieRule, k: usize) -> GameParams {
        GameParams::new(n, m, d, None, tie, k).unwrap()
    }

    fn rng(seed: u64) -> ProtocolRng {
        ProtocolRng::seed_from_u64(seed)
    }

    #[test]
    fn fully_connected_node_adds_nothing() {
        let p = params(4, 1, 3, TieRule::Lifo, 1);
        let mut g = PeerGraph::new(p).unwrap();
        for j in 1..4 {
            g.add_edge(NodeId(0), NodeId(j), 0).unwrap();
        }
        // nodes 1..3 are connected to 0 but not each other, so they add;
        // node 0 is connected to everyone and adds nothing
        let added = step_add(&mut g, &mut rng(7), 1);
        assert!(added.iter().all(|e| e.src != NodeId(0)));
    }

    #[test]
    fn nodes_one_below_capacity_each_add_exactly_one() {
        // 8 nodes, d=2: give everyone one out-edge in a ring, then step
        let p = params(8, 2, 2, TieRule::Lifo, 1);
        let mut g = PeerGraph::new(p).unwrap();
        for i in 0..8u32 {
            g.add_edge(NodeId(i), NodeId((i + 1) % 8), 0).unwrap();
        }
        let added = step_add(&mut g, &mut rng(3), 1);
        assert_eq!(added.len(), 8);
        for i in 0..8u32 {
            assert_eq!(g.out_degree(NodeId(i)), 2);
        }
    }

    #[test]
    fn add_lands_on_the_unique_node_with_spare_capacity() {
        // five-node fixture, enumerated by hand: node 0's only unconnected
        // peers are 1 (inbound full at 3) and 4 (spare), every other node is
        // out-saturated except 1 whose sole candidate is 0, so node 0's add
        // must land on 4 whatever the draw order.
        let p = GameParams::new(5, 1, 2, Some(3), TieRule::Lifo, 1).unwrap();
        let mut base = PeerGraph::new(p).unwrap();
        base.add_edge(NodeId(2), NodeId(0), 0).unwrap();
        base.add_edge(NodeId(3), NodeId(0), 0).unwrap();
        base.add_edge(NodeId(2), NodeId(1), 0).unwrap();
        base.add_edge(NodeId(3), NodeId(1), 0).unwrap();
        base.add_edge(NodeId(4), NodeId(1), 0).unwrap();
        base.add_edge(NodeId(4), NodeId(2), 0).unwrap();
        for seed in 0..20 {
            let mut g = base.clone();
            let added = step_add(&mut g, &mut rng(seed), 1);
            let zero_edges: Vec<_> = added.iter().filter(|e| e.src == NodeId(0)).collect();
            assert_eq!(zero_edges.len(), 1);
            assert_eq!(zero_edges[0].dst, NodeId(4));
        }
    }

    #[test]
    fn drop_picks_unique_maximum() {
        let p = params(4, 1, 3, TieRule::Fifo, 1);
        let mut g = PeerGraph::new(p).unwrap();
        g.add_edge(NodeId(0), NodeId(1), 0).unwrap();
        g.add_edge(NodeId(0), NodeId(2), 0).unwrap();
        g.add_edge(NodeId(0), NodeId(3), 0).unwrap();
        let scores = vec![
            Score::zero(),
            Score::from_integer_parts(1, 1),
            Score::from_integer_parts(3, 2),
            Score::from_integer_parts(9, 10),
        ];
        let drops = step_drop(&mut g, &scores, TieRule::Fifo, &mut rng(0), 1);
        assert_eq!(drops.len(), 1);
        assert_eq!(drops[0].dst, NodeId(2));
    }

    #[test]
    fn fifo_drops_oldest_lifo_drops_newest() {
        let build = || {
            let p = params(3, 1, 2, TieRule::Fifo, 1);
            let mut g = PeerGraph::new(p).unwrap();
            g.add_edge(NodeId(0), NodeId(1), 2).unwrap(); // older
            g.add_edge(NodeId(0), NodeId(2), 5).unwrap(); // newer
            g
        };
        let tied = vec![
            Score::zero(),
            Score::from_integer_parts(1, 1),
            Score::from_integer_parts(1, 1),
        ];
        let mut g = build();
        let drops = step_drop(&mut g, &tied, TieRule::Fifo, &mut rng(0), 1);
        assert_eq!(drops[0].dst, NodeId(1), "FIFO drops the oldest tied edge");
        let mut g = build();
        let drops = step_drop(&mut g, &tied, TieRule::Lifo, &mut rng(0), 1);
        assert_eq!(drops[0].dst, NodeId(2), "LIFO drops the newest tied edge");
    }

    #[test]
    fn global_ordering_keeps_the_best_ranked_peer() {
        let p = params(3, 1, 2, TieRule::GlobalOrdering, 1);
        let mut g = PeerGraph::new(p).unwrap();
        g.add_edge(NodeId(0), NodeId(1), 0).unwrap(); // rank 1
        g.add_edge(NodeId(0), NodeId(2), 0).unwrap(); // rank 2
        let tied = vec![
            Score::zero(),
            Score::from_integer_parts(1, 1),
            Score::from_integer_parts(1, 1),
        ];
        let drops = step_drop(&mut g, &tied, TieRule::GlobalOrdering, &mut rng(0), 1);
        assert_eq!(drops[0].dst, NodeId(2), "the worse-ranked peer is dropped");
    }

    #[test]
    fn below_capacity_nodes_do_not_drop() {
        let p = params(4, 1, 3, TieRule::Lifo, 1);
        let mut g = PeerGraph::new(p).unwrap();
        g.add_edge(NodeId(0), NodeId(1), 0).unwrap();
        let scores = vec![Score::zero(); 4];
        let drops = step_drop(&mut g, &scores, TieRule::Lifo, &mut rng(0), 1);
        assert!(drops.is_empty());
    }

    #[test]
    fn two_node_network_reaches_steady_state_after_round_one() {
        // once one edge exists the other node can never add (bidirectional
        // ban), and the owner stays below out-degree d, so nothing changes
        let p = params(2, 1, 2, TieRule::Lifo, 1);
        let g = PeerGraph::new(p.clone()).unwrap();
        let mut r = rng(5);
        let run = run_simulation(&p, &g, 4, &mut r).unwrap();
        assert_eq!(run.per_round[0].0.additions.len(), 1);
        for (report, _) in &run.per_round[1..] {
            assert!(report.additions.is_empty());
            assert!(report.drops.is_empty());
        }
    }

    #[test]
    fn zero_rounds_is_an_empty_sequence() {
        let p = params(5, 2, 2, TieRule::Lifo, 1);
        let g = PeerGraph::new(p.clone()).unwrap();
        let run = run_simulation(&p, &g, 0, &mut rng(1)).unwrap();
        assert!(run.per_round.is_empty());
        assert_eq!(run.final_graph.edge_count(), g.edge_count());
    }

    #[test]
    fn same_seed_gives_identical_traces() {
        let p = params(12, 3, 3, TieRule::Random, 1);
        let g = {
            let mut r = rng(9);
            crate::constructions::gen_random(&p, &mut r).unwrap()
        };
        let run_once = |seed| {
            let mut r = rng(seed);
            run_simulation(&p, &g, 20, &mut r).unwrap()
        };
        let a = run_once(42);
        let b = run_once(42);
        assert_eq!(format!("{:?}", a.per_round), format!("{:?}", b.per_round));
    }

    #[test]
    fn config_mismatch_is_rejected() {
        let p = params(5, 2, 2, TieRule::Lifo, 1);
        let other = params(5, 2, 2, TieRule::Fifo, 1);
        let g = PeerGraph::new(p).unwrap();
        assert_eq!(
            run_simulation(&other, &g, 1, &mut rng(0)).err(),
            Some(ProtocolError::ConfigMismatch)
        );
    }
}
