//! Seeded random initial topologies: uniform random, small-world and
//! scale-free.

use std::collections::BTreeSet;

use rand::Rng;
use rand::seq::SliceRandom;

use crate::graph::{GameParams, NodeId, PeerGraph};

use super::BuildError;

const GEN_ATTEMPTS: usize = 200;

/// Every node picks `d` random peers it is not yet connected to, under the
/// bidirectional ban and the inbound cap when configured. Dead ends (a node
/// left with no feasible target) restart the whole attempt.
pub fn gen_random(params: &GameParams, rng: &mut impl Rng) -> Result<PeerGraph, BuildError> {
    if params.n <= params.d {
        return Err(BuildError::BadParams(format!(
            "n must exceed d, got n={} d={}",
            params.n, params.d
        )));
    }
    for _ in 0..GEN_ATTEMPTS {
        if let Some(g) = try_gen_random(params, rng) {
            return Ok(g);
        }
    }
    Err(BuildError::Infeasible(format!(
        "could not place n*d={} edges under the caps after {} attempts",
        params.n * params.d,
        GEN_ATTEMPTS
    )))
}

fn try_gen_random(params: &GameParams, rng: &mut impl Rng) -> Option<PeerGraph> {
    let mut g = PeerGraph::new(params.clone()).expect("params validated by caller");
    let n = params.n;
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    for &raw in &order {
        let i = NodeId(raw);
        let mut pool: Vec<NodeId> = (0..n as u32)
            .map(NodeId)
            .filter(|&j| j != i && !g.connected(i, j))
            .collect();
        while g.out_degree(i) < params.d {
            if pool.is_empty() {
                return None;
            }
            let idx = rng.random_range(0..pool.len());
            let j = pool.swap_remove(idx);
            if g.has_in_capacity(j) {
                g.add_edge(i, j, 0).expect("candidate is feasible");
            }
        }
    }
    Some(g)
}

fn pair(a: u32, b: u32) -> (u32, u32) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Watts-Strogatz small world: a ring lattice of undirected degree `2d`
/// (so each node can own `d` out-edges), each lattice edge rewired with
/// probability `rewire_p`, then oriented.
pub fn gen_small_world(
    params: &GameParams,
    rewire_p: f64,
    rng: &mut impl Rng,
) -> Result<PeerGraph, BuildError> {
    if !(0.0..=1.0).contains(&rewire_p) {
        return Err(BuildError::BadParams(format!(
            "rewire probability must lie in [0,1], got {}",
            rewire_p
        )));
    }
    let (n, d) = (params.n, params.d);
    if n <= 2 * d {
        return Err(BuildError::BadParams(format!(
            "ring lattice of degree 2d needs n > 2d, got n={} d={}",
            n, d
        )));
    }
    let mut pairs: BTreeSet<(u32, u32)> = BTreeSet::new();
    for i in 0..n as u32 {
        for o in 1..=d as u32 {
            pairs.insert(pair(i, (i + o) % n as u32));
        }
    }
    for i in 0..n as u32 {
        for o in 1..=d as u32 {
            let b = (i + o) % n as u32;
            if !pairs.contains(&pair(i, b)) || !rng.random_bool(rewire_p) {
                continue;
            }
            let candidates: Vec<u32> = (0..n as u32)
                .filter(|&c| c != i && !pairs.contains(&pair(i, c)))
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let c = candidates[rng.random_range(0..candidates.len())];
            pairs.remove(&pair(i, b));
            pairs.insert(pair(i, c));
        }
    }
    Ok(orient_pairs(params, &pairs))
}

/// Barabasi-Albert scale free: a ring seed component over the first
/// `seed_component` nodes, then each new node attaches `d` distinct edges
/// preferentially by degree. Miners (the lowest ids) sit inside the seed
/// component whenever `m <= seed_component`.
pub fn gen_scale_free(
    params: &GameParams,
    seed_component: usize,
    rng: &mut impl Rng,
) -> Result<PeerGraph, BuildError> {
    let (n, d) = (params.n, params.d);
    if seed_component < 1 || seed_component > n {
        return Err(BuildError::BadParams(format!(
            "seed component must lie in 1..=n, got {}",
            seed_component
        )));
    }
    let s = seed_component;
    let mut pairs: BTreeSet<(u32, u32)> = BTreeSet::new();
    if s >= 2 {
        for i in 0..s as u32 {
            pairs.insert(pair(i, (i + 1) % s as u32));
        }
        if s == 2 {
            // the "ring" over two nodes is a single edge
        }
    }
    // attachment pool: every existing node once, then once per incident edge
    let mut pool: Vec<u32> = (0..s as u32).collect();
    for &(a, b) in &pairs {
        pool.push(a);
        pool.push(b);
    }
    for v in s..n {
        let want = d.min(v);
        let mut targets: BTreeSet<u32> = BTreeSet::new();
        let mut misses = 0;
        while targets.len() < want && misses < 50 * (want + 1) {
            let t = pool[rng.random_range(0..pool.len())];
            if t as usize != v && !targets.contains(&t) {
                targets.insert(t);
            } else {
                misses += 1;
            }
        }
        if targets.len() < want {
            // fall back to the lowest-degree unconnected nodes
            for t in 0..v as u32 {
                if targets.len() >= want {
                    break;
                }
                targets.insert(t);
            }
        }
        for &t in &targets {
            pairs.insert(pair(v as u32, t));
            pool.push(v as u32);
            pool.push(t);
        }
    }
    Ok(orient_pairs(params, &pairs))
}

/// Orient an undirected edge set: each edge leaves the endpoint with the
/// smaller current out-degree (ties to the smaller id); if that direction
/// violates a cap the other is tried. Edges fitting neither way get a
/// repair pass that reverses a chain of owned edges toward a node with a
/// spare out-slot; anything still unplaceable is dropped with a logged
/// count.
fn orient_pairs(params: &GameParams, pairs: &BTreeSet<(u32, u32)>) -> PeerGraph {
    let mut g = PeerGraph::new(params.clone()).expect("params validated by caller");
    let mut deferred = Vec::new();
    for &(a, b) in pairs {
        let (a, b) = (NodeId(a), NodeId(b));
        let prefer_a = (g.out_degree(a), a.0) <= (g.out_degree(b), b.0);
        let ordered = if prefer_a { [(a, b), (b, a)] } else { [(b, a), (a, b)] };
        let mut placed = false;
        for (src, dst) in ordered {
            if g.out_degree(src) < params.d && g.has_in_capacity(dst) {
                g.add_edge(src, dst, 0).expect("checked capacity");
                placed = true;
                break;
            }
        }
        if !placed {
            deferred.push((a, b));
        }
    }
    let mut dropped = 0usize;
    for (a, b) in deferred {
        if free_out_slot(&mut g, a, b) {
            g.add_edge(a, b, 0).expect("slot was freed");
        } else if free_out_slot(&mut g, b, a) {
            g.add_edge(b, a, 0).expect("slot was freed");
        } else {
            dropped += 1;
        }
    }
    if dropped > 0 {
        log::debug!(
            "orientation dropped {} of {} undirected edges (degree caps)",
            dropped,
            pairs.len()
        );
    }
    g
}

/// Free an out-slot at `src` (keeping `dst`'s inbound room for the edge that
/// follows) by reversing a chain of owned edges `src -> x1 -> ... -> xk`
/// ending at a node with spare out-capacity. Reversal leaves every interior
/// node's degrees unchanged; `src` trades one out-slot for one in-slot.
fn free_out_slot(g: &mut PeerGraph, src: NodeId, dst: NodeId) -> bool {
    let d = g.params().d;
    if !g.has_in_capacity(dst) || !g.has_in_capacity(src) {
        return false;
    }
    let n = g.n();
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut queue = std::collections::VecDeque::new();
    parent[src.index()] = Some(src);
    queue.push_back(src);
    let mut tail = None;
    'search: while let Some(u) = queue.pop_front() {
        for e in g.out_edges(u) {
            let v = e.dst;
            if parent[v.index()].is_some() || v == dst {
                continue;
            }
            parent[v.index()] = Some(u);
            if g.out_degree(v) < d {
                tail = Some(v);
                break 'search;
            }
            queue.push_back(v);
        }
    }
    let Some(mut node) = tail else { return false };
    let mut path = vec![node];
    while node != src {
        node = parent[node.index()].expect("walked from src");
        path.push(node);
    }
    path.reverse();
    for pair in path.windows(2) {
        g.remove_edge(pair[0], pair[1]).expect("owned chain edge");
    }
    for pair in path.windows(2) {
        g.add_edge(pair[1], pair[0], 0).expect("reversal preserves caps");
    }
    true
}
