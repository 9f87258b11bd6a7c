//! Distance and score computations checked against an independent
//! Floyd-Warshall oracle, plus property tests over the mutation API.

mod common;

use common::{floyd_warshall, random_messy_graph};
use greedy_peering::{
    all_scores, diameter, eccentricity_stats, miner_weights, GameParams, NodeId, PeerGraph, Score,
    TieRule, WeightScheme,
};
use num::{BigInt, BigRational};
use proptest::prelude::*;
use rand::SeedableRng;

type Rng = greedy_peering::ProtocolRng;

fn messy(seed: u64) -> PeerGraph {
    let mut rng = Rng::seed_from_u64(seed);
    let n = 5 + (seed as usize * 7) % 26;
    let m = 1 + (seed as usize * 3) % n.min(6);
    let d = 1 + (seed as usize) % 4;
    random_messy_graph(n, m, d, &mut rng)
}

#[test]
fn bfs_matches_floyd_warshall() {
    for seed in 0..200 {
        let g = messy(seed);
        let fw = floyd_warshall(&g);
        for i in 0..g.n() {
            assert_eq!(g.bfs_distances(NodeId(i as u32)), fw[i], "seed {}", seed);
        }
    }
}

#[test]
fn bfs_distances_are_symmetric() {
    for seed in 0..200 {
        let g = messy(seed);
        let rows: Vec<Vec<usize>> = (0..g.n() as u32)
            .map(|i| g.bfs_distances(NodeId(i)))
            .collect();
        for a in 0..g.n() {
            for b in 0..g.n() {
                assert_eq!(rows[a][b], rows[b][a], "seed {}", seed);
            }
        }
    }
}

#[test]
fn full_diameter_equals_max_eccentricity() {
    for seed in 0..40 {
        let g = messy(seed);
        let (diam, _) = diameter(&g, None);
        let max_ecc = (0..g.n() as u32)
            .map(|i| *g.bfs_distances(NodeId(i)).iter().max().unwrap())
            .max()
            .unwrap();
        assert_eq!(diam, max_ecc);
    }
}

#[test]
fn eccentricity_stats_match_the_oracle() {
    for seed in 0..40 {
        let g = messy(seed);
        let fw = floyd_warshall(&g);
        let (avg, miner_avg) = eccentricity_stats(&g);
        let eccs: Vec<usize> = fw.iter().map(|row| *row.iter().max().unwrap()).collect();
        let sum: u64 = eccs.iter().map(|&e| e as u64).sum();
        let miner_sum: u64 = eccs[..g.m()].iter().map(|&e| e as u64).sum();
        assert_eq!(
            avg,
            BigRational::new(BigInt::from(sum), BigInt::from(g.n() as u64))
        );
        assert_eq!(
            miner_avg,
            BigRational::new(BigInt::from(miner_sum), BigInt::from(g.m() as u64))
        );
    }
}

#[test]
fn scores_match_the_oracle_exactly() {
    for seed in 0..100 {
        let g = messy(seed);
        let m = g.m();
        let w = miner_weights(WeightScheme::Uniform, m);
        let scores = all_scores(&g, &w).unwrap();
        let fw = floyd_warshall(&g);
        for (i, got) in scores.iter().enumerate() {
            let sum: u64 = (0..m).map(|j| fw[i][j] as u64).sum();
            assert_eq!(*got, Score::from_integer_parts(sum, m as u64));
        }
    }
}

#[test]
fn miner_scores_floor_at_the_clique_value() {
    // every miner scores at least (m-1)/m, with equality exactly when it is
    // adjacent to all other miners
    for seed in 0..100 {
        let g = messy(seed);
        let m = g.m();
        let w = miner_weights(WeightScheme::Uniform, m);
        let scores = all_scores(&g, &w).unwrap();
        let floor = Score::from_integer_parts(m as u64 - 1, m as u64);
        for i in 0..m as u32 {
            let adjacent_all =
                (0..m as u32).all(|j| j == i || g.connected(NodeId(i), NodeId(j)));
            assert!(scores[i as usize] >= floor);
            assert_eq!(scores[i as usize] == floor, adjacent_all, "seed {}", seed);
        }
    }
}

proptest! {
    #[test]
    fn mutation_sequences_preserve_all_invariants(
        ops in proptest::collection::vec((0u8..2, 0u32..12, 0u32..12), 1..120)
    ) {
        let params = GameParams::new(12, 3, 3, Some(5), TieRule::Lifo, 1).unwrap();
        let mut g = PeerGraph::new(params).unwrap();
        for (round, (op, a, b)) in ops.into_iter().enumerate() {
            match op {
                0 => { let _ = g.add_edge(NodeId(a), NodeId(b), round); }
                _ => { let _ = g.remove_edge(NodeId(a), NodeId(b)); }
            }
            prop_assert!(g.audit().is_ok());
        }
    }

    #[test]
    fn uniform_score_times_m_is_integral(seed in 0u64..300) {
        let mut rng = Rng::seed_from_u64(seed);
        let m = 1 + (seed as usize % 6);
        let g = random_messy_graph(18, m, 3, &mut rng);
        let w = miner_weights(WeightScheme::Uniform, m);
        for s in all_scores(&g, &w).unwrap() {
            let scaled = s.value() * BigRational::from_integer(BigInt::from(m as u64));
            prop_assert!(scaled.is_integer());
        }
    }

    #[test]
    fn edge_list_round_trip_is_exact(seed in 0u64..200) {
        let mut rng = Rng::seed_from_u64(seed);
        let g = random_messy_graph(15, 4, 3, &mut rng);
        let text = g.export_edge_list();
        let h = PeerGraph::import_edge_list(&text).unwrap();
        prop_assert_eq!(text, h.export_edge_list());
    }
}
