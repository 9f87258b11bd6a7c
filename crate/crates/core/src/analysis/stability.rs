//! Structural stability detection (sufficient conditions read off a
//! snapshot), a finite-window empirical proxy, and the consequence audit for
//! miner-stable graphs.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{GameParams, NodeId, PeerGraph, TieRule};
use crate::metrics::diameter;

use super::AnalysisError;

/// Combined stability report. The structural flags are sufficient-condition
/// checks on the snapshot; the empirical count is a finite-window proxy and
/// carries no guarantee about future rounds.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StabilityVerdict {
    pub miner_clique: bool,
    pub structural_miner_stable: bool,
    pub structural_network_stable: bool,
    pub empirically_stable_edges: usize,
    pub window: usize,
}

impl StabilityVerdict {
    pub fn report_line(&self) -> String {
        format!(
            "miner_clique={} structural_miner_stable={} structural_network_stable={} \
             empirically_stable_edges={} window={}",
            self.miner_clique,
            self.structural_miner_stable,
            self.structural_network_stable,
            self.empirically_stable_edges,
            self.window
        )
    }
}

fn is_miner_clique(g: &PeerGraph, m: usize) -> bool {
    (0..m as u32).all(|i| (i + 1..m as u32).all(|j| g.connected(NodeId(i), NodeId(j))))
}

/// Miners adjacent (either direction) to every other miner.
fn fully_adjacent_miners(g: &PeerGraph, m: usize) -> Vec<u32> {
    (0..m as u32)
        .filter(|&i| (0..m as u32).all(|j| j == i || g.connected(NodeId(i), NodeId(j))))
        .collect()
}

/// Detect the order-rule core pattern: some `d - 1` miners pairwise
/// connected, with every other miner sending an out-edge to each of them.
/// At `d = 1` the core is empty and the degenerate stable shape is a
/// snapshot with no miner-miner edges at all.
fn has_core_pattern(g: &PeerGraph, m: usize, d: usize) -> bool {
    let want = d - 1;
    if want == 0 {
        return (0..m as u32)
            .all(|i| (i + 1..m as u32).all(|j| !g.connected(NodeId(i), NodeId(j))));
    }
    if want > m {
        return false;
    }
    // core members must be adjacent to all miners; deficiency[c] lists the
    // miners that do not point at c and so must sit in the core beside it
    let candidates = fully_adjacent_miners(g, m);
    if candidates.len() < want {
        return false;
    }
    let deficiency: BTreeMap<u32, BTreeSet<u32>> = candidates
        .iter()
        .map(|&c| {
            let missing: BTreeSet<u32> = (0..m as u32)
                .filter(|&x| x != c && !g.has_edge(NodeId(x), NodeId(c)))
                .collect();
            (c, missing)
        })
        .collect();
    let viable: Vec<u32> = candidates
        .iter()
        .copied()
        .filter(|c| {
            deficiency[c].len() < want
                && deficiency[c]
                    .iter()
                    .all(|x| candidates.binary_search(x).is_ok())
        })
        .collect();
    if viable.len() < want {
        return false;
    }
    let valid = |core: &BTreeSet<u32>| {
        core.iter()
            .all(|c| deficiency[c].iter().all(|x| core.contains(x)))
    };
    if binomial_at_most(viable.len(), want, 200_000) {
        // lexicographic walk over all (d-1)-subsets of the viable candidates
        let mut combo: Vec<usize> = (0..want).collect();
        loop {
            let core: BTreeSet<u32> = combo.iter().map(|&i| viable[i]).collect();
            if valid(&core) {
                return true;
            }
            let mut i = want;
            loop {
                if i == 0 {
                    return false;
                }
                i -= 1;
                if combo[i] != i + viable.len() - want {
                    combo[i] += 1;
                    for j in i + 1..want {
                        combo[j] = combo[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
    // large candidate sets: seed with the least-deficient members and close
    // under the deficiency relation
    let mut by_need = viable.clone();
    by_need.sort_by_key(|c| (deficiency[c].len(), *c));
    let mut core: BTreeSet<u32> = by_need.iter().copied().take(want).collect();
    loop {
        let needed: BTreeSet<u32> = core
            .iter()
            .flat_map(|c| deficiency[c].iter().copied())
            .collect();
        if needed.is_subset(&core) {
            break;
        }
        core.extend(needed);
        if core.len() > want {
            return false;
        }
    }
    core.len() == want && valid(&core)
}

fn binomial_at_most(n: usize, k: usize, limit: u64) -> bool {
    let mut acc: u64 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - i) as u64) / (i as u64 + 1);
        if acc > limit {
            return false;
        }
    }
    true
}

/// Per-node flag: non-miner adjacent to every miner (a score-one node when
/// the miners form a clique).
fn score_one_nodes(g: &PeerGraph, m: usize, n: usize) -> Vec<bool> {
    (0..n as u32)
        .map(|h| h >= m as u32 && (0..m as u32).all(|mi| g.connected(NodeId(h), NodeId(mi))))
        .collect()
}

/// Structural sufficient conditions for miner- and network-stability, read
/// off the snapshot for the given parameters.
pub fn check_structural_stability(g: &PeerGraph, params: &GameParams) -> StabilityVerdict {
    let (m, d) = (params.m, params.d);
    let order_based = matches!(params.tie_rule, TieRule::Lifo | TieRule::GlobalOrdering);
    let miner_clique = is_miner_clique(g, m);
    let clique_stable = miner_clique && m < 2 * d;
    let structural_miner_stable = if order_based {
        clique_stable || has_core_pattern(g, m, d)
    } else {
        clique_stable
    };
    let structural_network_stable =
        order_based && m < 2 * d && miner_clique && network_stable_wiring(g, params);
    StabilityVerdict {
        miner_clique,
        structural_miner_stable,
        structural_network_stable,
        empirically_stable_edges: 0,
        window: 0,
    }
}

/// The exact persistent-edge wiring of the constructive stable topologies.
/// For `m < d`: everyone adjacent to all miners, and under global ordering
/// non-miner targets must be rank-prefix-closed. For `d <= m < 2d`: all
/// persistent edges aim at miners except the score-one head, which absorbs
/// the spare miner edges. One out-edge per degree-`d` node is exempt as the
/// exploratory slot.
fn network_stable_wiring(g: &PeerGraph, params: &GameParams) -> bool {
    let (n, m, d) = (params.n, params.m, params.d);
    let global = params.tie_rule == TieRule::GlobalOrdering;
    if (0..n as u32).any(|v| g.out_degree(NodeId(v)) + 1 < d) {
        return false;
    }
    let score_one = score_one_nodes(g, m, n);
    let slack = |v: NodeId| usize::from(g.out_degree(v) == d);
    if m < d {
        if !score_one.iter().skip(m).all(|&s| s) {
            return false;
        }
        if !global {
            return true;
        }
        // an out-edge to a non-miner is justified only when every
        // better-ranked non-miner is already connected
        (0..n as u32).all(|raw| {
            let v = NodeId(raw);
            let violations = g
                .out_edges(v)
                .iter()
                .filter(|e| !g.is_miner(e.dst))
                .filter(|e| (m as u32..e.dst.0).any(|h| h != v.0 && !g.connected(v, NodeId(h))))
                .count();
            violations <= slack(v)
        })
    } else {
        (0..n as u32).all(|raw| {
            let v = NodeId(raw);
            let head = score_one[v.index()];
            let bad = g
                .out_edges(v)
                .iter()
                .filter(|e| {
                    let t = e.dst;
                    if g.is_miner(v) {
                        !(g.is_miner(t) || score_one[t.index()])
                    } else if head || !global {
                        !g.is_miner(t)
                    } else {
                        // the tail must aim at the top-ranked d-1 miners
                        !(g.is_miner(t) && g.node(t).rank + 1 < d)
                    }
                })
                .count();
            bad <= slack(v)
        })
    }
}

/// Per-pair stability flags over the trailing `window` end-of-round
/// indicator snapshots, for the pairs live at the end. The count covers the
/// live stable edges.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EmpiricalStability {
    pub flags: BTreeMap<(u32, u32), bool>,
    pub stable_live_edges: usize,
    pub window: usize,
}

pub fn empirical_stability(
    history: &[BTreeSet<(u32, u32)>],
    window: usize,
) -> Result<EmpiricalStability, AnalysisError> {
    if history.len() < window {
        return Err(AnalysisError::HistoryTooShort {
            have: history.len(),
            need: window,
        });
    }
    let tail = &history[history.len() - window..];
    let last = tail.last().expect("window is at least one round");
    let mut flags = BTreeMap::new();
    let mut stable_live_edges = 0;
    for &pair in last {
        let stable = tail.iter().all(|round| round.contains(&pair));
        if stable {
            stable_live_edges += 1;
        }
        flags.insert(pair, stable);
    }
    Ok(EmpiricalStability {
        flags,
        stable_live_edges,
        window,
    })
}

/// Results of the consequence audit on a miner-stable graph: miner diameter
/// at most 2, and network diameter at most 3 whenever every non-miner
/// touches a miner. Violations are expected to be empty.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConsequenceAudit {
    pub miner_diameter: usize,
    pub miner_bound_ok: bool,
    /// False when some non-miner touches no miner; the network bound is not
    /// asserted then.
    pub network_checked: bool,
    pub network_diameter: Option<usize>,
    pub network_bound_ok: Option<bool>,
    pub violations: Vec<String>,
}

pub fn check_stability_consequences(g: &PeerGraph, verdict: &StabilityVerdict) -> ConsequenceAudit {
    debug_assert!(
        verdict.structural_miner_stable,
        "the consequence audit presumes a miner-stable snapshot"
    );
    let m = g.m();
    let miners: Vec<NodeId> = (0..m as u32).map(NodeId).collect();
    let mut violations = Vec::new();
    let (miner_diameter, _) = diameter(g, Some(&miners));
    let miner_bound_ok = miner_diameter <= 2;
    if !miner_bound_ok {
        violations.push(format!(
            "miner diameter {} exceeds the stable bound 2",
            miner_diameter
        ));
    }
    let network_checked = (m..g.n())
        .all(|h| (0..m).any(|mi| g.connected(NodeId(h as u32), NodeId(mi as u32))));
    let (network_diameter, network_bound_ok) = if network_checked {
        let (nd, _) = diameter(g, None);
        if nd > 3 {
            violations.push(format!("network diameter {} exceeds the stable bound 3", nd));
        }
        (Some(nd), Some(nd <= 3))
    } else {
        (None, None)
    };
    ConsequenceAudit {
        miner_diameter,
        miner_bound_ok,
        network_checked,
        network_diameter,
        network_bound_ok,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_stable_topology, build_uncapped_nash, gen_random};
    use crate::protocol::ProtocolRng;
    use rand::SeedableRng;

    fn clique_graph(n: usize, m: usize, d: usize, rule: TieRule) -> PeerGraph {
        let params = GameParams::new(n, m, d, None, rule, 1).unwrap();
        let mut g = PeerGraph::new(params).unwrap();
        for i in 0..m as u32 {
            for j in i + 1..m as u32 {
                g.add_edge(NodeId(i), NodeId(j), 0).unwrap();
            }
        }
        g
    }

    #[test]
    fn small_clique_is_structurally_miner_stable_for_all_rules() {
        for rule in TieRule::ALL {
            let g = clique_graph(12, 5, 10, rule);
            let v = check_structural_stability(&g, g.params());
            assert!(v.miner_clique);
            assert!(v.structural_miner_stable, "rule {}", rule);
        }
    }

    #[test]
    fn oversized_clique_is_not_claimed_stable() {
        // m = 2d: the clique still fits edge-wise (balanced orientation) but
        // full-degree miners would drop miner edges, so no rule accepts it
        for rule in TieRule::ALL {
            let params = GameParams::new(10, 8, 4, None, rule, 1).unwrap();
            let mut g = PeerGraph::new(params).unwrap();
            // balanced orientation: offsets 1..=3 plus half-offset for i < 4
            for o in 1..=3u32 {
                for i in 0..8u32 {
                    g.add_edge(NodeId(i), NodeId((i + o) % 8), 0).unwrap();
                }
            }
            for i in 0..4u32 {
                g.add_edge(NodeId(i), NodeId(i + 4), 0).unwrap();
            }
            let v = check_structural_stability(&g, g.params());
            assert!(v.miner_clique);
            assert!(!v.structural_miner_stable, "rule {}", rule);
        }
    }

    #[test]
    fn core_pattern_is_detected_on_the_large_m_construction() {
        let g = build_stable_topology(60, 20, 8, TieRule::Lifo).unwrap();
        let v = check_structural_stability(&g, g.params());
        assert!(!v.miner_clique);
        assert!(v.structural_miner_stable);
        assert!(!v.structural_network_stable);
    }

    #[test]
    fn fresh_random_graphs_raise_no_flags() {
        let params = GameParams::new(50, 8, 4, None, TieRule::Lifo, 1).unwrap();
        let mut rng = ProtocolRng::seed_from_u64(77);
        let g = gen_random(&params, &mut rng).unwrap();
        let v = check_structural_stability(&g, g.params());
        assert!(!v.miner_clique);
        assert!(!v.structural_miner_stable);
        assert!(!v.structural_network_stable);
    }

    #[test]
    fn full_stable_construction_is_network_stable_structurally() {
        for rule in [TieRule::Lifo, TieRule::GlobalOrdering] {
            let g = build_stable_topology(24, 3, 6, rule).unwrap();
            let v = check_structural_stability(&g, g.params());
            assert!(v.structural_miner_stable, "rule {}", rule);
            assert!(v.structural_network_stable, "rule {}", rule);
        }
        // the mid-regime construction is also covered by the detector
        let g = build_stable_topology(40, 9, 7, TieRule::GlobalOrdering).unwrap();
        let v = check_structural_stability(&g, g.params());
        assert!(v.structural_network_stable);
    }

    #[test]
    fn perturbing_the_stable_wiring_clears_the_network_flag() {
        let mut g = build_stable_topology(24, 3, 6, TieRule::GlobalOrdering).unwrap();
        // rewire one non-miner's miner edge to a late non-miner
        g.remove_edge(NodeId(10), NodeId(0)).unwrap();
        g.add_edge(NodeId(10), NodeId(23), 1).unwrap();
        g.remove_edge(NodeId(10), NodeId(1)).unwrap();
        g.add_edge(NodeId(10), NodeId(22), 1).unwrap();
        let v = check_structural_stability(&g, g.params());
        assert!(!v.structural_network_stable);
    }

    #[test]
    fn empirical_stability_flags_constant_and_toggling_pairs() {
        let stable_pair = (0u32, 1u32);
        let toggling = (1u32, 2u32);
        let mut history = Vec::new();
        for round in 0..10 {
            let mut s = BTreeSet::new();
            s.insert(stable_pair);
            if round % 2 == 1 {
                s.insert(toggling);
            }
            history.push(s);
        }
        let e = empirical_stability(&history, 4).unwrap();
        assert_eq!(e.flags.get(&stable_pair), Some(&true));
        assert_eq!(e.flags.get(&toggling), Some(&false));
        assert_eq!(e.stable_live_edges, 1);
        assert!(matches!(
            empirical_stability(&history, 11),
            Err(AnalysisError::HistoryTooShort { have: 10, need: 11 })
        ));
    }

    #[test]
    fn consequence_audit_accepts_the_equilibrium_family() {
        let g = build_uncapped_nash(12, 4, 2).unwrap();
        let v = check_structural_stability(&g, g.params());
        assert!(v.structural_miner_stable);
        let audit = check_stability_consequences(&g, &v);
        assert!(audit.miner_bound_ok, "miner diameter {}", audit.miner_diameter);
        assert!(audit.network_checked);
        assert_eq!(audit.network_bound_ok, Some(true));
        assert!(audit.violations.is_empty());
    }

    #[test]
    fn consequence_audit_skips_the_network_bound_when_a_nonminer_floats() {
        // miner clique plus one non-miner with no miner contact
        let mut g = clique_graph(7, 5, 10, TieRule::Lifo);
        g.add_edge(NodeId(6), NodeId(5), 0).unwrap();
        let v = check_structural_stability(&g, g.params());
        assert!(v.structural_miner_stable);
        let audit = check_stability_consequences(&g, &v);
        assert!(!audit.network_checked);
        assert_eq!(audit.network_diameter, None);
    }
}
