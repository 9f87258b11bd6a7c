//! Network statistics: exact scores, diameters, eccentricities and the
//! histograms the experiment harness reports.
//!
//! Everything here is a pure function over an immutable graph snapshot.
//! Disconnection never aborts a computation: distances saturate at the
//! sentinel `n` and a flag is raised instead.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::graph::{NodeId, PeerGraph};
use crate::score::{validate_miner_weights, Score};

#[derive(Error, Debug, PartialEq, Eq)]
pub enum MetricsError {
    #[error("bad miner weights: {0}")]
    BadWeights(String),
    #[error("bin width must be positive")]
    BadBinWidth,
}

/// Snapshot of every reported statistic for one round.
#[derive(Clone, PartialEq, Debug)]
pub struct RoundMetrics {
    pub round: usize,
    pub avg_score_all: BigRational,
    pub avg_score_miners: BigRational,
    /// Zero when the network has no non-miners.
    pub avg_score_nonminers: BigRational,
    pub diameter: usize,
    pub miner_diameter: usize,
    pub avg_eccentricity: BigRational,
    pub avg_miner_eccentricity: BigRational,
    pub edges_added: usize,
    pub edges_dropped: usize,
    pub disconnected: bool,
}

/// Weighted average distance from `node` to the miners.
pub fn score(
    g: &PeerGraph,
    node: NodeId,
    weights: &[BigRational],
) -> Result<Score, MetricsError> {
    validate_miner_weights(g.m(), weights).map_err(MetricsError::BadWeights)?;
    let dist = g.bfs_distances(node);
    Ok(weighted_score(&dist, weights))
}

pub(crate) fn weighted_score(dist_from_node: &[usize], weights: &[BigRational]) -> Score {
    let mut total = BigRational::zero();
    for (j, w) in weights.iter().enumerate() {
        total += w * BigRational::from_integer(BigInt::from(dist_from_node[j]));
    }
    Score::new(total)
}

/// Scores for every node, computed with one BFS per miner.
pub fn all_scores(g: &PeerGraph, weights: &[BigRational]) -> Result<Vec<Score>, MetricsError> {
    validate_miner_weights(g.m(), weights).map_err(MetricsError::BadWeights)?;
    Ok(all_scores_unchecked(g, weights))
}

/// Scores using the weight vector stored on the graph's nodes, which is
/// validated at assignment time.
pub fn all_scores_graph_weights(g: &PeerGraph) -> Vec<Score> {
    all_scores_unchecked(g, &g.miner_weights())
}

fn all_scores_unchecked(g: &PeerGraph, weights: &[BigRational]) -> Vec<Score> {
    let n = g.n();
    let m = g.m();
    let uniform = weights.windows(2).all(|w| w[0] == w[1]);
    if uniform {
        // dist sums stay integral; build one rational per node, not per miner
        let mut sums = vec![0u64; n];
        for j in 0..m {
            let dist = g.bfs_distances(NodeId(j as u32));
            for (i, s) in sums.iter_mut().enumerate() {
                *s += dist[i] as u64;
            }
        }
        let w = &weights[0];
        return sums
            .into_iter()
            .map(|s| Score::new(w * BigRational::from_integer(BigInt::from(s))))
            .collect();
    }
    let mut totals = vec![BigRational::zero(); n];
    for (j, w) in weights.iter().enumerate() {
        let dist = g.bfs_distances(NodeId(j as u32));
        for (i, t) in totals.iter_mut().enumerate() {
            if dist[i] != 0 {
                *t += w * BigRational::from_integer(BigInt::from(dist[i]));
            }
        }
    }
    totals.into_iter().map(Score::new).collect()
}

/// Maximum undirected distance between any two subset nodes, measured through
/// the whole graph. The flag is raised when a pair is unreachable, in which
/// case the sentinel `n` is reported.
pub fn diameter(g: &PeerGraph, subset: Option<&[NodeId]>) -> (usize, bool) {
    let all: Vec<NodeId> = (0..g.n() as u32).map(NodeId).collect();
    let subset = subset.unwrap_or(&all);
    let n = g.n();
    let mut max = 0;
    let mut disconnected = false;
    for &s in subset {
        let dist = g.bfs_distances(s);
        for &t in subset {
            let d = dist[t.index()];
            if d == n {
                disconnected = true;
            }
            max = max.max(d);
        }
    }
    (max, disconnected)
}

/// Average eccentricity over all nodes and over miners. A node's
/// eccentricity is its maximum distance to any node in the whole graph.
pub fn eccentricity_stats(g: &PeerGraph) -> (BigRational, BigRational) {
    let n = g.n();
    let m = g.m();
    let mut total = 0u64;
    let mut miner_total = 0u64;
    for i in 0..n {
        let ecc = *g.bfs_distances(NodeId(i as u32)).iter().max().unwrap() as u64;
        total += ecc;
        if i < m {
            miner_total += ecc;
        }
    }
    (
        BigRational::new(BigInt::from(total), BigInt::from(n as u64)),
        BigRational::new(BigInt::from(miner_total), BigInt::from(m as u64)),
    )
}

/// In-degree histogram over a node subset (default: all nodes).
pub fn in_degree_distribution(
    g: &PeerGraph,
    subset: Option<&[NodeId]>,
) -> BTreeMap<usize, usize> {
    let all: Vec<NodeId> = (0..g.n() as u32).map(NodeId).collect();
    let subset = subset.unwrap_or(&all);
    let mut hist = BTreeMap::new();
    for &v in subset {
        *hist.entry(g.in_degree(v)).or_insert(0) += 1;
    }
    hist
}

/// Histogram of scores binned by `bin_width`; key is the bin index
/// `floor(score / bin_width)`.
pub fn score_distribution(
    scores: &[Score],
    bin_width: &BigRational,
) -> Result<BTreeMap<u64, usize>, MetricsError> {
    if !bin_width.is_positive() {
        return Err(MetricsError::BadBinWidth);
    }
    let mut hist = BTreeMap::new();
    for s in scores {
        let bin = (s.value() / bin_width).floor().to_integer();
        let bin = bin.to_u64().expect("scores are non-negative");
        *hist.entry(bin).or_insert(0) += 1;
    }
    Ok(hist)
}

/// One full metrics snapshot: a single all-pairs BFS pass feeds the scores,
/// diameters and eccentricities.
pub fn round_metrics(
    g: &PeerGraph,
    round: usize,
    edges_added: usize,
    edges_dropped: usize,
) -> RoundMetrics {
    let n = g.n();
    let m = g.m();
    let weights = g.miner_weights();
    let mut score_totals = vec![BigRational::zero(); n];
    let mut uniform_sums = vec![0u64; n];
    let uniform = weights.windows(2).all(|w| w[0] == w[1]);
    let mut ecc = vec![0usize; n];
    let mut miner_diameter = 0;
    let mut disconnected = false;
    for i in 0..n {
        let dist = g.bfs_distances(NodeId(i as u32));
        let e = *dist.iter().max().unwrap();
        if e == n {
            disconnected = true;
        }
        ecc[i] = e;
        if i < m {
            for j in 0..m {
                miner_diameter = miner_diameter.max(dist[j]);
            }
            if uniform {
                for (v, s) in uniform_sums.iter_mut().enumerate() {
                    *s += dist[v] as u64;
                }
            } else {
                let w = &weights[i];
                for (v, t) in score_totals.iter_mut().enumerate() {
                    if dist[v] != 0 {
                        *t += w * BigRational::from_integer(BigInt::from(dist[v]));
                    }
                }
            }
        }
    }
    let scores: Vec<BigRational> = if uniform {
        let w = &weights[0];
        uniform_sums
            .into_iter()
            .map(|s| w * BigRational::from_integer(BigInt::from(s)))
            .collect()
    } else {
        score_totals
    };
    let avg = |it: &mut dyn Iterator<Item = &BigRational>, count: usize| -> BigRational {
        if count == 0 {
            return BigRational::zero();
        }
        let total: BigRational = it.sum();
        total / BigRational::from_integer(BigInt::from(count as u64))
    };
    let avg_score_all = avg(&mut scores.iter(), n);
    let avg_score_miners = avg(&mut scores[..m].iter(), m);
    let avg_score_nonminers = avg(&mut scores[m..].iter(), n - m);
    let diameter = *ecc.iter().max().unwrap();
    let ecc_sum: u64 = ecc.iter().map(|&e| e as u64).sum();
    let miner_ecc_sum: u64 = ecc[..m].iter().map(|&e| e as u64).sum();
    RoundMetrics {
        round,
        avg_score_all,
        avg_score_miners,
        avg_score_nonminers,
        diameter,
        miner_diameter,
        avg_eccentricity: BigRational::new(BigInt::from(ecc_sum), BigInt::from(n as u64)),
        avg_miner_eccentricity: BigRational::new(
            BigInt::from(miner_ecc_sum),
            BigInt::from(m as u64),
        ),
        edges_added,
        edges_dropped,
        disconnected,
    }
}
