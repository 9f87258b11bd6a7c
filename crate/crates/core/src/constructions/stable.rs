//! Constructive stable topologies for the round protocol, dispatched by the
//! (tie rule, miner count) regime. Regimes where no stable topology exists
//! yield an error instead of a graph.

use crate::graph::{GameParams, NodeId, PeerGraph, TieRule};

use super::BuildError;

/// Orient a complete graph over nodes `0..size` with balanced out-degrees
/// and no bidirectional pairs: offsets `1..=(size-1)/2` for everyone plus,
/// for even sizes, the half-way offset owned by the first half.
fn orient_clique(g: &mut PeerGraph, size: usize) -> Result<(), BuildError> {
    for o in 1..=size.saturating_sub(1) / 2 {
        for i in 0..size {
            g.add_edge(NodeId(i as u32), NodeId(((i + o) % size) as u32), 0)?;
        }
    }
    if size >= 2 && size % 2 == 0 {
        for i in 0..size / 2 {
            g.add_edge(NodeId(i as u32), NodeId((i + size / 2) as u32), 0)?;
        }
    }
    Ok(())
}

/// Build a topology that is network-stable (LIFO/global-ordering, `m < 2d`),
/// miner-stable (all rules for `m < 2d`; LIFO/global-ordering for `m >= 2d`),
/// or fail when the regime admits neither. Each node is wired with its
/// `d - 1` persistent out-edges; the exploratory d-th slot is left open.
pub fn build_stable_topology(
    n: usize,
    m: usize,
    d: usize,
    tie_rule: TieRule,
) -> Result<PeerGraph, BuildError> {
    let params = GameParams::new(n, m, d, None, tie_rule, 1)?;
    let order_based = matches!(tie_rule, TieRule::Lifo | TieRule::GlobalOrdering);
    if m >= 2 * d && !order_based {
        return Err(BuildError::NoStableTopology(format!(
            "no miner-stable topology exists under {} tie-breaking once m >= 2d (m={}, d={})",
            tie_rule, m, d
        )));
    }
    let mut g = PeerGraph::new(params)?;
    if m >= 2 * d {
        core_construction(&mut g, n, m, d)?;
    } else if m < d {
        full_construction(&mut g, n, m, d)?;
    } else if order_based {
        mid_construction(&mut g, n, m, d)?;
    } else {
        clique_only_construction(&mut g, n, m, d)?;
    }
    Ok(g)
}

/// `m < d`: miner clique; every non-miner adjacent to all miners; everyone
/// tops up to `d - 1` out-edges against the first non-miners in rank order.
fn full_construction(g: &mut PeerGraph, n: usize, m: usize, d: usize) -> Result<(), BuildError> {
    orient_clique(g, m)?;
    for i in 0..m {
        let mut t = m;
        while g.out_degree(NodeId(i as u32)) < d - 1 && t < n {
            g.add_edge(NodeId(i as u32), NodeId(t as u32), 0)?;
            t += 1;
        }
    }
    for h in m..n {
        let h_id = NodeId(h as u32);
        for mi in 0..m {
            if !g.connected(h_id, NodeId(mi as u32)) {
                g.add_edge(h_id, NodeId(mi as u32), 0)?;
            }
        }
        let mut t = m;
        while g.out_degree(h_id) < d - 1 && t < n {
            if t != h && !g.connected(h_id, NodeId(t as u32)) {
                g.add_edge(h_id, NodeId(t as u32), 0)?;
            }
            t += 1;
        }
    }
    Ok(())
}

/// `d <= m < 2d` with an order-based rule: miner clique over `(m-1)/2`
/// out-edges each, the spare miner edges spread round-robin over the
/// top-ranked score-one non-miners, everyone else wired to the top `d - 1`
/// miners. The score-one head count is forced by the balance equation
/// `n' * (m - d + 1) = m * (d - 1 - (m-1)/2)`.
fn mid_construction(g: &mut PeerGraph, n: usize, m: usize, d: usize) -> Result<(), BuildError> {
    if m % 2 == 0 {
        return Err(BuildError::ParityInfeasible(format!(
            "the miner clique spends (m-1)/2 out-edges per miner, so m must be odd; got m={}",
            m
        )));
    }
    let spare = (d - 1) - (m - 1) / 2;
    let total = m * spare;
    let denom = m - d + 1;
    if total % denom != 0 {
        return Err(BuildError::ParityInfeasible(format!(
            "{} spare miner edges cannot spread evenly over score-one non-miners \
             taking {} incoming miner edges each",
            total, denom
        )));
    }
    let n_prime = total / denom;
    if n < m + n_prime {
        return Err(BuildError::BadParams(format!(
            "n={} too small: the construction needs at least {} nodes",
            n,
            m + n_prime
        )));
    }
    orient_clique(g, m)?;
    if spare > 0 {
        let mut p = 0usize;
        for i in 0..m {
            for _ in 0..spare {
                g.add_edge(NodeId(i as u32), NodeId((m + p % n_prime) as u32), 0)?;
                p += 1;
            }
        }
    }
    for h in m..m + n_prime {
        let h_id = NodeId(h as u32);
        for mi in 0..m {
            if !g.connected(h_id, NodeId(mi as u32)) {
                g.add_edge(h_id, NodeId(mi as u32), 0)?;
            }
        }
        debug_assert_eq!(g.out_degree(h_id), d - 1);
    }
    for h in m + n_prime..n {
        for mi in 0..d - 1 {
            g.add_edge(NodeId(h as u32), NodeId(mi as u32), 0)?;
        }
    }
    Ok(())
}

/// `d <= m < 2d` under FIFO/random: the miner clique is the only
/// miner-stable shape; non-miners hang off the first `d - 1` miners.
fn clique_only_construction(
    g: &mut PeerGraph,
    n: usize,
    m: usize,
    d: usize,
) -> Result<(), BuildError> {
    orient_clique(g, m)?;
    for h in m..n {
        for mi in 0..(d - 1).min(m) {
            g.add_edge(NodeId(h as u32), NodeId(mi as u32), 0)?;
        }
    }
    Ok(())
}

/// `m >= 2d` with an order-based rule: the first `d - 1` miners form a
/// clique and everyone else sends all `d - 1` persistent edges at them.
/// Only the miner edges are claimed stable. Degenerate at `d = 1`, where the
/// persistent edge set is empty.
fn core_construction(g: &mut PeerGraph, n: usize, m: usize, d: usize) -> Result<(), BuildError> {
    let core = d - 1;
    orient_clique(g, core)?;
    for x in core..m {
        for c in 0..core {
            g.add_edge(NodeId(x as u32), NodeId(c as u32), 0)?;
        }
    }
    for h in m..n {
        for c in 0..core {
            g.add_edge(NodeId(h as u32), NodeId(c as u32), 0)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_m_construction_wires_everyone_to_all_miners() {
        let g = build_stable_topology(20, 3, 5, TieRule::Lifo).unwrap();
        assert!(g.audit().is_ok());
        for h in 3..20u32 {
            for mi in 0..3u32 {
                assert!(g.connected(NodeId(h), NodeId(mi)));
            }
        }
        for v in 0..20u32 {
            assert_eq!(g.out_degree(NodeId(v)), 4, "d-1 persistent edges");
        }
    }

    #[test]
    fn boundary_m_spends_all_miner_edges_in_the_clique() {
        // m = 2d - 1: the spare count is zero, so no score-one non-miners
        let (d, m) = (4, 7);
        let g = build_stable_topology(30, m, d, TieRule::GlobalOrdering).unwrap();
        assert!(g.audit().is_ok());
        for i in 0..m as u32 {
            assert_eq!(g.out_degree(NodeId(i)), d - 1);
            for e in g.out_edges(NodeId(i)) {
                assert!(g.is_miner(e.dst), "no spare edges leave the clique");
            }
        }
    }

    #[test]
    fn mid_regime_balances_the_score_one_head() {
        // m=5, d=4 (odd m): spare = 3 - 2 = 1, denom = 2, n' would be 5/2:
        // infeasible, the parity error is expected
        assert!(matches!(
            build_stable_topology(30, 5, 4, TieRule::Lifo),
            Err(BuildError::ParityInfeasible(_))
        ));
        // m=5, d=3: spare = 0, n' = 0, builds fine
        let g = build_stable_topology(30, 5, 3, TieRule::Lifo).unwrap();
        assert!(g.audit().is_ok());
        // m=7, d=5: spare = 4 - 3 = 1, denom = 3, total = 7: infeasible
        assert!(matches!(
            build_stable_topology(40, 7, 5, TieRule::Lifo),
            Err(BuildError::ParityInfeasible(_))
        ));
        // m=9, d=7: spare = 6 - 4 = 2, denom = 3, total = 18, n' = 6
        let g = build_stable_topology(40, 9, 7, TieRule::Lifo).unwrap();
        assert!(g.audit().is_ok());
        for h in 9..15u32 {
            assert_eq!(g.out_degree(NodeId(h)), 6);
            for mi in 0..9u32 {
                assert!(g.connected(NodeId(h), NodeId(mi)), "score-one head node");
            }
        }
        for h in 15..40u32 {
            assert_eq!(g.out_degree(NodeId(h)), 6);
        }
    }

    #[test]
    fn even_m_mid_regime_is_parity_infeasible() {
        assert!(matches!(
            build_stable_topology(30, 6, 4, TieRule::Lifo),
            Err(BuildError::ParityInfeasible(_))
        ));
    }

    #[test]
    fn large_m_order_rules_get_the_core_construction() {
        let (n, m, d) = (60, 20, 8);
        let g = build_stable_topology(n, m, d, TieRule::Lifo).unwrap();
        assert!(g.audit().is_ok());
        // first d-1 miners pairwise connected
        for i in 0..7u32 {
            for j in i + 1..7u32 {
                assert!(g.connected(NodeId(i), NodeId(j)));
            }
        }
        // every other node sends all d-1 persistent edges into the core
        for v in 7..60u32 {
            assert_eq!(g.out_degree(NodeId(v)), 7);
            assert!(g.out_edges(NodeId(v)).iter().all(|e| e.dst.0 < 7));
        }
    }

    #[test]
    fn fifo_and_random_large_m_refuse() {
        for rule in [TieRule::Fifo, TieRule::Random] {
            assert!(matches!(
                build_stable_topology(60, 16, 8, rule),
                Err(BuildError::NoStableTopology(_))
            ));
        }
    }

    #[test]
    fn fifo_small_m_gets_the_plain_clique() {
        let g = build_stable_topology(20, 5, 4, TieRule::Fifo).unwrap();
        assert!(g.audit().is_ok());
        for i in 0..5u32 {
            for j in i + 1..5u32 {
                assert!(g.connected(NodeId(i), NodeId(j)));
            }
        }
    }

    #[test]
    fn outputs_are_deterministic() {
        let a = build_stable_topology(25, 3, 6, TieRule::GlobalOrdering)
            .unwrap()
            .export_edge_list();
        let b = build_stable_topology(25, 3, 6, TieRule::GlobalOrdering)
            .unwrap()
            .export_edge_list();
        assert_eq!(a, b);
    }
}
