//! Shared test fixtures and the independent all-pairs distance oracle.

use greedy_peering::{GameParams, NodeId, PeerGraph, TieRule};
use rand::seq::SliceRandom;
use rand::Rng;

/// Floyd-Warshall over the undirected view, clamped to the same unreachable
/// sentinel (`n`) the graph uses. Kept independent of the BFS it checks.
pub fn floyd_warshall(g: &PeerGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut dist = vec![vec![n; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0;
    }
    for i in 0..n as u32 {
        for e in g.out_edges(NodeId(i)) {
            dist[e.src.index()][e.dst.index()] = 1;
            dist[e.dst.index()][e.src.index()] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k].saturating_add(dist[k][j]);
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    for row in &mut dist {
        for v in row.iter_mut() {
            if *v > n {
                *v = n;
            }
        }
    }
    dist
}

/// Messy random graph for oracle fuzzing: n*d random placement attempts,
/// rejections ignored, so degrees are irregular and disconnection happens.
pub fn random_messy_graph(n: usize, m: usize, d: usize, rng: &mut impl Rng) -> PeerGraph {
    let params = GameParams::new(n, m, d, None, TieRule::Lifo, 1).unwrap();
    let mut g = PeerGraph::new(params).unwrap();
    for _ in 0..n * d {
        let a = rng.random_range(0..n as u32);
        let b = rng.random_range(0..n as u32);
        if a != b {
            let _ = g.add_edge(NodeId(a), NodeId(b), 0);
        }
    }
    g
}

/// Miner clique plus a random fill of every node's out-degree up to `d`.
/// Needs `m <= d` so the clique orientation fits under the cap.
pub fn clique_seeded_graph(
    n: usize,
    m: usize,
    d: usize,
    tie_rule: TieRule,
    rng: &mut impl Rng,
) -> PeerGraph {
    assert!(m <= d, "clique orientation must fit the out-degree cap");
    let params = GameParams::new(n, m, d, None, tie_rule, 1).unwrap();
    let mut g = PeerGraph::new(params).unwrap();
    for i in 0..m as u32 {
        for j in i + 1..m as u32 {
            g.add_edge(NodeId(i), NodeId(j), 0).unwrap();
        }
    }
    for i in 0..n as u32 {
        let mut pool: Vec<NodeId> = (0..n as u32)
            .map(NodeId)
            .filter(|&j| j != NodeId(i) && !g.connected(NodeId(i), j))
            .collect();
        pool.shuffle(rng);
        while g.out_degree(NodeId(i)) < d {
            match pool.pop() {
                Some(j) => {
                    g.add_edge(NodeId(i), j, 0).unwrap();
                }
                None => break,
            }
        }
    }
    g
}

/// True when the edge connects two miners.
pub fn is_miner_pair(g: &PeerGraph, a: NodeId, b: NodeId) -> bool {
    g.is_miner(a) && g.is_miner(b)
}
