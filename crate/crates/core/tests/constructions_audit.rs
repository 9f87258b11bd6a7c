//! Builder outputs under simulation: stable topologies must hold still, the
//! layered capped family must survive a single-swap scan in its feasible
//! regime, and the seeded generators must be reproducible.

mod common;

use common::is_miner_pair;
use greedy_peering::{
    audit_capped_general, build_capped_general_nash, build_stable_topology, gen_scale_free,
    gen_small_world, run_simulation, verify_nash, GameParams, NashMode, TieRule,
};
use rand::SeedableRng;

type Rng = greedy_peering::ProtocolRng;

#[test]
fn stable_topology_simulates_with_zero_miner_churn() {
    let g = build_stable_topology(20, 3, 5, TieRule::Lifo).unwrap();
    for seed in 0..5 {
        let mut rng = Rng::seed_from_u64(seed);
        let run = run_simulation(g.params(), &g, 200, &mut rng).unwrap();
        for (report, _) in &run.per_round {
            assert!(
                !report
                    .additions
                    .iter()
                    .chain(&report.drops)
                    .any(|e| is_miner_pair(&run.final_graph, e.src, e.dst)),
                "seed {}",
                seed
            );
        }
    }
}

#[test]
fn network_stable_construction_never_drops_a_persistent_edge() {
    // under LIFO every drop must hit an exploratory edge (added during the
    // run), never one of the built round-0 edges
    for rule in [TieRule::Lifo, TieRule::GlobalOrdering] {
        let g = build_stable_topology(24, 3, 6, rule).unwrap();
        let mut rng = Rng::seed_from_u64(11);
        let run = run_simulation(g.params(), &g, 150, &mut rng).unwrap();
        for (report, _) in &run.per_round {
            for e in &report.drops {
                assert!(
                    e.round_added > 0,
                    "rule {}: persistent edge {}->{} dropped",
                    rule,
                    e.src,
                    e.dst
                );
            }
        }
    }
}

#[test]
fn core_construction_keeps_its_miner_edges_under_lifo() {
    // m >= 2d regime: miner-stability only; miner-miner indicators at every
    // round end must equal the built ones
    let g = build_stable_topology(40, 16, 8, TieRule::Lifo).unwrap();
    let built: Vec<(u32, u32)> = g
        .indicator_pairs()
        .into_iter()
        .filter(|&(a, b)| (a as usize) < 16 && (b as usize) < 16)
        .collect();
    let mut rng = Rng::seed_from_u64(7);
    let run = run_simulation(g.params(), &g, 120, &mut rng).unwrap();
    let final_miner_pairs: Vec<(u32, u32)> = run
        .final_graph
        .indicator_pairs()
        .into_iter()
        .filter(|&(a, b)| (a as usize) < 16 && (b as usize) < 16)
        .collect();
    assert_eq!(built, final_miner_pairs);
}

#[test]
fn layered_family_is_single_swap_stable_in_its_regime() {
    // smallest feasible instance of the layered capped family: 2^k > 2d
    let g = build_capped_general_nash(3, 2, 512).unwrap();
    assert!(audit_capped_general(&g, 3, 2).is_empty());
    let verdict = verify_nash(&g, true, NashMode::SingleSwap, 5_000_000_000).unwrap();
    assert!(verdict.is_nash, "witness: {:?}", verdict.witness);
}

#[test]
fn generators_are_seed_deterministic() {
    let params = GameParams::new(80, 8, 5, None, TieRule::Lifo, 1).unwrap();
    let a = gen_small_world(&params, 0.5, &mut Rng::seed_from_u64(42))
        .unwrap()
        .export_edge_list();
    let b = gen_small_world(&params, 0.5, &mut Rng::seed_from_u64(42))
        .unwrap()
        .export_edge_list();
    assert_eq!(a, b);
    let a = gen_scale_free(&params, 20, &mut Rng::seed_from_u64(42))
        .unwrap()
        .export_edge_list();
    let b = gen_scale_free(&params, 20, &mut Rng::seed_from_u64(42))
        .unwrap()
        .export_edge_list();
    assert_eq!(a, b);
}

#[test]
fn generated_topologies_pass_the_full_audit() {
    for seed in 0..10 {
        let params = GameParams::new(60, 6, 4, Some(9), TieRule::Lifo, 1).unwrap();
        let mut rng = Rng::seed_from_u64(seed);
        let ws = gen_small_world(&params, 0.5, &mut rng).unwrap();
        assert!(ws.audit().is_ok());
        let ba = gen_scale_free(&params, 15, &mut rng).unwrap();
        assert!(ba.audit().is_ok());
    }
}

#[test]
fn small_world_keeps_every_lattice_edge_at_p_zero_under_caps() {
    // the orientation repair must place all n*d lattice edges even when the
    // greedy pass strands some: out-capacity is exactly tight here
    let params = GameParams::new(30, 3, 3, None, TieRule::Lifo, 1).unwrap();
    let g = gen_small_world(&params, 0.0, &mut Rng::seed_from_u64(1)).unwrap();
    assert_eq!(g.edge_count(), 30 * 3);
    assert!((0..30u32).all(|i| g.out_degree(greedy_peering::NodeId(i)) == 3));
}
