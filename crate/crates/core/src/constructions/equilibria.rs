//! Builders for the equilibrium families of the idealized full-information
//! game, plus the structural audit for the layered capped construction.

use std::collections::HashMap;

use crate::graph::{GameParams, NodeId, PeerGraph, TieRule};

use super::BuildError;

fn checked_pow(base: usize, exp: u32) -> Result<usize, BuildError> {
    base.checked_pow(exp)
        .filter(|&v| v <= 8_000_000)
        .ok_or_else(|| BuildError::BadParams("requested network size overflows".into()))
}

/// Uncapped equilibrium: a hub miner (node 0) receives an edge from every
/// other node, every edge points at a miner, and no pair is bidirectional.
/// Canonical member of the family: each node points at the lowest-indexed
/// miners not already pointing back at it, up to `d`; the hub sends nothing.
pub fn build_uncapped_nash(n: usize, m: usize, d: usize) -> Result<PeerGraph, BuildError> {
    let params = GameParams::new(n, m, d, None, TieRule::Lifo, 1)?;
    let mut g = PeerGraph::new(params)?;
    for v in 1..n as u32 {
        for t in 0..m as u32 {
            if g.out_degree(NodeId(v)) >= d {
                break;
            }
            if t == v || g.connected(NodeId(v), NodeId(t)) {
                continue;
            }
            g.add_edge(NodeId(v), NodeId(t), 0)?;
        }
    }
    Ok(g)
}

/// Capped equilibrium with unit out-degree: a directed triangle of miners,
/// each triangle corner fed by `d_in - 1` complete `d_in`-ary trees with all
/// edges directed to the parent. Nodes down to depth `k' - 1` in each tree
/// are miners, so `n = 3 * d_in^k` and `m = 3 * d_in^k'`. Every non-leaf
/// ends with full in-degree.
pub fn build_capped_unit_nash(
    d_in: usize,
    k: u32,
    k_prime: u32,
) -> Result<PeerGraph, BuildError> {
    if d_in < 2 {
        return Err(BuildError::BadParams("d_in must be at least 2".into()));
    }
    if k_prime > k {
        return Err(BuildError::BadParams("k' must not exceed k".into()));
    }
    let n = 3 * checked_pow(d_in, k)?;
    let m = 3 * checked_pow(d_in, k_prime)?;
    let params = GameParams::new(n, m, 1, Some(d_in), TieRule::Lifo, 1)?;
    let mut g = PeerGraph::new(params)?;
    g.add_edge(NodeId(0), NodeId(1), 0)?;
    g.add_edge(NodeId(1), NodeId(2), 0)?;
    g.add_edge(NodeId(2), NodeId(0), 0)?;
    if k == 0 {
        return Ok(g);
    }
    // miner ids come first: assign tree positions in two passes
    let mut ids: HashMap<(usize, usize, u32, usize), NodeId> = HashMap::new();
    let mut next = 3usize;
    for miners_pass in [true, false] {
        for branch in 0..3 {
            for tree in 0..(d_in - 1) {
                for depth in 0..k {
                    if (depth < k_prime) != miners_pass {
                        continue;
                    }
                    for idx in 0..d_in.pow(depth) {
                        ids.insert((branch, tree, depth, idx), NodeId(next as u32));
                        next += 1;
                    }
                }
            }
        }
    }
    debug_assert_eq!(next, n);
    for branch in 0..3 {
        for tree in 0..(d_in - 1) {
            let root = ids[&(branch, tree, 0, 0)];
            g.add_edge(root, NodeId(branch as u32), 0)?;
            for depth in 1..k {
                for idx in 0..d_in.pow(depth) {
                    let child = ids[&(branch, tree, depth, idx)];
                    let parent = ids[&(branch, tree, depth - 1, idx / d_in)];
                    g.add_edge(child, parent, 0)?;
                }
            }
        }
    }
    Ok(g)
}

/// Level map for the layered capped construction: `2^k` miners, then levels
/// of size `2^(k+i)`. Levels `0..=k` form the structured middle component
/// and must be complete; the loose tail absorbs the remaining nodes with the
/// last level possibly partial.
pub(crate) struct LayeredLayout {
    pub m: usize,
    /// `(base id, size)` per level, level index starting at 0.
    pub levels: Vec<(usize, usize)>,
}

pub(crate) fn layered_layout(k: u32, n: usize) -> Result<LayeredLayout, BuildError> {
    let m = checked_pow(2, k)?;
    let mut levels = Vec::new();
    let mut base = m;
    let mut i = 0u32;
    while base < n {
        let full = checked_pow(2, k + i)?;
        let size = full.min(n - base);
        if i <= k && size < full {
            return Err(BuildError::BadParams(format!(
                "n={} cannot complete structured level {} of size {}",
                n, i, full
            )));
        }
        levels.push((base, size));
        base += size;
        i += 1;
    }
    if (levels.len() as u32) < k + 1 {
        return Err(BuildError::BadParams(format!(
            "n={} leaves the structured component incomplete",
            n
        )));
    }
    Ok(LayeredLayout { m, levels })
}

/// Capped equilibrium with arbitrary out-degree `d >= 2` and inbound cap
/// `2d`, for `m = 2^k` miners and `n >= 2^(3k)` nodes.
///
/// Three components: a circulant miner core (`i -> i+1..i+d` mod `m`, which
/// is strongly connected and free of bidirectional pairs only when
/// `m > 2d`); a structured middle of levels `0..=k` wired so every top-level
/// node reaches every level-0 node in exactly `k` hops (butterfly pairs plus
/// fixed-offset filler edges); and a loosely wired tail below, with the
/// bottom level holding all the spare inbound capacity.
pub fn build_capped_general_nash(k: u32, d: usize, n: usize) -> Result<PeerGraph, BuildError> {
    if d < 2 {
        return Err(BuildError::BadParams("d must be at least 2".into()));
    }
    if k < 1 {
        return Err(BuildError::BadParams("k must be at least 1".into()));
    }
    let m = checked_pow(2, k)?;
    if m <= 2 * d {
        return Err(BuildError::BadParams(format!(
            "a core of m=2^k={} miners cannot give each one {} outgoing edges to \
             distinct miners without a bidirectional pair; this family needs 2^k > 2d",
            m, d
        )));
    }
    let min_n = checked_pow(2, 3 * k)?;
    if n < min_n {
        return Err(BuildError::BadParams(format!(
            "n must be at least 2^(3k) = {}, got {}",
            min_n, n
        )));
    }
    let layout = layered_layout(k, n)?;
    let params = GameParams::new(n, m, d, Some(2 * d), TieRule::Lifo, 1)?;
    let mut g = PeerGraph::new(params)?;
    // miner core
    for i in 0..m {
        for o in 1..=d {
            g.add_edge(NodeId(i as u32), NodeId(((i + o) % m) as u32), 0)?;
        }
    }
    // level 0 into the core, round robin: every miner reaches in-degree 2d
    let (l0_base, l0_size) = layout.levels[0];
    for w in 0..l0_size {
        for t in 0..d {
            let target = (w * d + t) % m;
            g.add_edge(NodeId((l0_base + w) as u32), NodeId(target as u32), 0)?;
        }
    }
    // structured middle: between level i+1 and level i, groups of 2^k nodes
    // carry butterfly edges (w -> w, w -> w xor 2^i) plus d-2 fixed-offset
    // edges chosen to never collide with the butterfly pair
    let group = m;
    for i in 0..k as usize {
        let (child_base, child_size) = layout.levels[i + 1];
        let (parent_base, _) = layout.levels[i];
        let bit = 1usize << i;
        let offsets: Vec<usize> = (1..group)
            .filter(|&s| s != bit && s != group - bit)
            .take(d - 2)
            .collect();
        debug_assert_eq!(offsets.len(), d - 2);
        for c in 0..child_size {
            let (grp, w) = (c / group, c % group);
            let parent_grp = grp / 2;
            let parent_id =
                |within: usize| NodeId((parent_base + parent_grp * group + within) as u32);
            let child = NodeId((child_base + c) as u32);
            g.add_edge(child, parent_id(w), 0)?;
            g.add_edge(child, parent_id(w ^ bit), 0)?;
            for &s in &offsets {
                g.add_edge(child, parent_id((w + s) % group), 0)?;
            }
        }
    }
    // loose tail: round-robin bipartite wiring, d out per child, 2d in per
    // parent while the child level is complete
    for i in (k as usize + 1)..layout.levels.len() {
        let (child_base, child_size) = layout.levels[i];
        let (parent_base, parent_size) = layout.levels[i - 1];
        for c in 0..child_size {
            for t in 0..d {
                let p = (c * d + t) % parent_size;
                g.add_edge(
                    NodeId((child_base + c) as u32),
                    NodeId((parent_base + p) as u32),
                    0,
                )?;
            }
        }
    }
    Ok(g)
}

/// Structural audit for the layered capped construction: every node of the
/// structured component's top level must sit at undirected distance exactly
/// `k` from every level-0 node, and every node above the bottom level must
/// have in-degree exactly `2d` (the bottom level takes none).
pub fn audit_capped_general(g: &PeerGraph, k: u32, d: usize) -> Vec<String> {
    let mut violations = Vec::new();
    let layout = match layered_layout(k, g.n()) {
        Ok(l) => l,
        Err(e) => return vec![format!("layout: {}", e)],
    };
    if g.m() != layout.m {
        violations.push(format!("expected {} miners, graph has {}", layout.m, g.m()));
    }
    let (top_base, top_size) = layout.levels[k as usize];
    let (bot_base, bot_size) = layout.levels[0];
    for w in 0..top_size {
        let dist = g.bfs_distances(NodeId((top_base + w) as u32));
        for b in 0..bot_size {
            if dist[bot_base + b] != k as usize {
                violations.push(format!(
                    "top node {} is {} hops from bottom node {}, want {}",
                    top_base + w,
                    dist[bot_base + b],
                    bot_base + b,
                    k
                ));
            }
        }
    }
    for i in 0..layout.m {
        let got = g.in_degree(NodeId(i as u32));
        if got != 2 * d {
            violations.push(format!("miner {} in-degree {}, want {}", i, got, 2 * d));
        }
    }
    let last = layout.levels.len() - 1;
    for (i, &(base, size)) in layout.levels.iter().enumerate() {
        for v in 0..size {
            let node = NodeId((base + v) as u32);
            let want = if i == last { 0 } else { 2 * d };
            if g.in_degree(node) != want {
                violations.push(format!(
                    "level {} node {} in-degree {}, want {}",
                    i,
                    node,
                    g.in_degree(node),
                    want
                ));
            }
        }
    }
    violations
}
