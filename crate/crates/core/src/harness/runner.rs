//! Seeded multi-repetition experiment execution with CSV and edge-list
//! artifacts. Repetitions run in parallel on isolated graphs and RNG
//! streams; aggregation joins them in index order, so outputs are
//! byte-deterministic for a given configuration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use num::{BigInt, BigRational, ToPrimitive, Zero};
use rand::SeedableRng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{check_structural_stability, StabilityVerdict};
use crate::constructions::{generate, BuildError};
use crate::metrics::{
    all_scores_graph_weights, in_degree_distribution, round_metrics, score_distribution,
    RoundMetrics,
};
use crate::protocol::{run_simulation, ProtocolError, ProtocolRng};
use crate::score::miner_weights;

use super::config::ExperimentConfig;

/// Environment variable overriding the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "GREEDY_PEERING_OUT";

const CSV_SCHEMA: &str = "# schema v1: round,avg_score_all,avg_score_miners,avg_score_nonminers,\
diameter,miner_diameter,avg_ecc,avg_miner_ecc,edges_added,edges_dropped,stable_edges,disconnected";

#[derive(Error, Debug)]
pub enum HarnessError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Repetition seed: the master seed in the first eight bytes, the
/// repetition index in the next eight, zero elsewhere. Injective over
/// repetitions by construction.
pub fn derive_rep_seed(master: u64, rep: u64) -> [u8; 32] {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master.to_le_bytes());
    seed[8..16].copy_from_slice(&rep.to_le_bytes());
    seed
}

/// Mean over repetitions of every reported metric, per round, plus final
/// snapshots per repetition.
#[derive(Clone, PartialEq, Debug)]
pub struct AggregateSeries {
    /// `rounds + 1` rows; row 0 describes the initial graphs.
    pub rows: Vec<AggregateRow>,
    pub per_rep_final: Vec<RoundMetrics>,
    pub per_rep_final_score_hist: Vec<BTreeMap<u64, usize>>,
    pub per_rep_final_in_degree: Vec<BTreeMap<usize, usize>>,
    pub per_rep_final_miner_in_degree: Vec<BTreeMap<usize, usize>>,
    pub verdicts: Vec<StabilityVerdict>,
}

#[derive(Clone, PartialEq, Debug)]
pub struct AggregateRow {
    pub round: usize,
    pub avg_score_all: BigRational,
    pub avg_score_miners: BigRational,
    pub avg_score_nonminers: BigRational,
    pub diameter: BigRational,
    pub miner_diameter: BigRational,
    pub avg_eccentricity: BigRational,
    pub avg_miner_eccentricity: BigRational,
    pub edges_added: BigRational,
    pub edges_dropped: BigRational,
    pub stable_edges: BigRational,
    /// Fraction of repetitions disconnected at this round.
    pub disconnected: BigRational,
}

struct RepResult {
    rows: Vec<(RoundMetrics, usize)>,
    final_metrics: RoundMetrics,
    final_score_hist: BTreeMap<u64, usize>,
    final_in_degree: BTreeMap<usize, usize>,
    final_miner_in_degree: BTreeMap<usize, usize>,
    verdict: StabilityVerdict,
}

/// Run every repetition, write per-repetition CSVs and edge-list snapshots,
/// the aggregate CSV and the stability report, and return the aggregate.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateSeries, HarnessError> {
    let out_dir = match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => cfg.output_dir.clone(),
    };
    fs::create_dir_all(&out_dir).map_err(|source| HarnessError::Io {
        path: out_dir.clone(),
        source,
    })?;
    let reps: Vec<RepResult> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(cfg, rep, &out_dir))
        .collect::<Result<Vec<_>, _>>()?;

    let rows = aggregate_rows(&reps, cfg.rounds);
    let mut aggregate_csv = String::from(CSV_SCHEMA);
    aggregate_csv.push('\n');
    for row in &rows {
        aggregate_csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.round,
            fmt_sig12(&row.avg_score_all),
            fmt_sig12(&row.avg_score_miners),
            fmt_sig12(&row.avg_score_nonminers),
            fmt_sig12(&row.diameter),
            fmt_sig12(&row.miner_diameter),
            fmt_sig12(&row.avg_eccentricity),
            fmt_sig12(&row.avg_miner_eccentricity),
            fmt_sig12(&row.edges_added),
            fmt_sig12(&row.edges_dropped),
            fmt_sig12(&row.stable_edges),
            fmt_sig12(&row.disconnected),
        ));
    }
    write_file(&out_dir.join("aggregate.csv"), &aggregate_csv)?;

    let mut stability = String::new();
    for (rep, r) in reps.iter().enumerate() {
        stability.push_str(&format!("rep={} {}\n", rep, r.verdict.report_line()));
    }
    write_file(&out_dir.join("stability.txt"), &stability)?;

    Ok(AggregateSeries {
        rows,
        per_rep_final: reps.iter().map(|r| r.final_metrics.clone()).collect(),
        per_rep_final_score_hist: reps.iter().map(|r| r.final_score_hist.clone()).collect(),
        per_rep_final_in_degree: reps.iter().map(|r| r.final_in_degree.clone()).collect(),
        per_rep_final_miner_in_degree: reps
            .iter()
            .map(|r| r.final_miner_in_degree.clone())
            .collect(),
        verdicts: reps.into_iter().map(|r| r.verdict).collect(),
    })
}

fn run_repetition(
    cfg: &ExperimentConfig,
    rep: usize,
    out_dir: &Path,
) -> Result<RepResult, HarnessError> {
    let mut rng = ProtocolRng::from_seed(derive_rep_seed(cfg.seed, rep as u64));
    let mut initial = generate(&cfg.topology, &cfg.params, &mut rng)?;
    initial
        .set_miner_weights(&miner_weights(cfg.weights, cfg.params.m))
        .expect("scheme weights are valid by construction");
    write_file(
        &out_dir.join(format!("rep_{:02}_initial.edges", rep)),
        &initial.export_edge_list(),
    )?;

    let run = run_simulation(&cfg.params, &initial, cfg.rounds, &mut rng)?;
    let window = cfg.stability_window;

    // end-of-round indicator tracking: a pair is stable at round r when its
    // value held over the trailing `window` end-of-round snapshots
    let mut last_change: HashMap<(u32, u32), usize> = HashMap::new();
    let mut live: BTreeSet<(u32, u32)> = initial.indicator_pairs();
    for pair in &live {
        last_change.insert(*pair, 0);
    }
    let stable_count = |live: &BTreeSet<(u32, u32)>,
                        last_change: &HashMap<(u32, u32), usize>,
                        round: usize| {
        if round + 1 < window {
            return 0;
        }
        live.iter()
            .filter(|p| last_change.get(p).copied().unwrap_or(0) + window <= round + 1)
            .count()
    };

    let mut rows: Vec<(RoundMetrics, usize)> = Vec::with_capacity(cfg.rounds + 1);
    let initial_metrics = round_metrics(&initial, 0, 0, 0);
    let stable0 = stable_count(&live, &last_change, 0);
    rows.push((initial_metrics, stable0));
    for (report, metrics) in &run.per_round {
        for e in &report.additions {
            let pair = norm_pair(e.src.0, e.dst.0);
            last_change.insert(pair, report.round);
            live.insert(pair);
        }
        for e in &report.drops {
            let pair = norm_pair(e.src.0, e.dst.0);
            last_change.insert(pair, report.round);
            live.remove(&pair);
        }
        let stable = stable_count(&live, &last_change, report.round);
        rows.push((metrics.clone(), stable));
    }

    let mut csv = String::from(CSV_SCHEMA);
    csv.push('\n');
    for (metrics, stable) in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            metrics.round,
            fmt_sig12(&metrics.avg_score_all),
            fmt_sig12(&metrics.avg_score_miners),
            fmt_sig12(&metrics.avg_score_nonminers),
            metrics.diameter,
            metrics.miner_diameter,
            fmt_sig12(&metrics.avg_eccentricity),
            fmt_sig12(&metrics.avg_miner_eccentricity),
            metrics.edges_added,
            metrics.edges_dropped,
            stable,
            u8::from(metrics.disconnected),
        ));
    }
    write_file(&out_dir.join(format!("rep_{:02}.csv", rep)), &csv)?;
    write_file(
        &out_dir.join(format!("rep_{:02}_final.edges", rep)),
        &run.final_graph.export_edge_list(),
    )?;

    let final_graph = &run.final_graph;
    let final_scores = all_scores_graph_weights(final_graph);
    let bin = BigRational::new(BigInt::from(1), BigInt::from(10));
    let final_score_hist =
        score_distribution(&final_scores, &bin).expect("positive bin width");
    let miners: Vec<crate::graph::NodeId> = final_graph.miner_ids().collect();
    let final_in_degree = in_degree_distribution(final_graph, None);
    let final_miner_in_degree = in_degree_distribution(final_graph, Some(&miners));
    let mut verdict = check_structural_stability(final_graph, &cfg.params);
    verdict.window = window;
    verdict.empirically_stable_edges = rows.last().map(|(_, s)| *s).unwrap_or(0);
    let final_metrics = rows.last().map(|(m, _)| m.clone()).unwrap();
    Ok(RepResult {
        rows,
        final_metrics,
        final_score_hist,
        final_in_degree,
        final_miner_in_degree,
        verdict,
    })
}

fn norm_pair(a: u32, b: u32) -> (u32, u32) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn aggregate_rows(reps: &[RepResult], rounds: usize) -> Vec<AggregateRow> {
    let count = BigRational::from_integer(BigInt::from(reps.len() as u64));
    let int = |v: usize| BigRational::from_integer(BigInt::from(v as u64));
    (0..=rounds)
        .map(|round| {
            let mut row = AggregateRow {
                round,
                avg_score_all: BigRational::zero(),
                avg_score_miners: BigRational::zero(),
                avg_score_nonminers: BigRational::zero(),
                diameter: BigRational::zero(),
                miner_diameter: BigRational::zero(),
                avg_eccentricity: BigRational::zero(),
                avg_miner_eccentricity: BigRational::zero(),
                edges_added: BigRational::zero(),
                edges_dropped: BigRational::zero(),
                stable_edges: BigRational::zero(),
                disconnected: BigRational::zero(),
            };
            for rep in reps {
                let (m, stable) = &rep.rows[round];
                row.avg_score_all += &m.avg_score_all;
                row.avg_score_miners += &m.avg_score_miners;
                row.avg_score_nonminers += &m.avg_score_nonminers;
                row.diameter += int(m.diameter);
                row.miner_diameter += int(m.miner_diameter);
                row.avg_eccentricity += &m.avg_eccentricity;
                row.avg_miner_eccentricity += &m.avg_miner_eccentricity;
                row.edges_added += int(m.edges_added);
                row.edges_dropped += int(m.edges_dropped);
                row.stable_edges += int(*stable);
                row.disconnected += int(usize::from(m.disconnected));
            }
            row.avg_score_all /= &count;
            row.avg_score_miners /= &count;
            row.avg_score_nonminers /= &count;
            row.diameter /= &count;
            row.miner_diameter /= &count;
            row.avg_eccentricity /= &count;
            row.avg_miner_eccentricity /= &count;
            row.edges_added /= &count;
            row.edges_dropped /= &count;
            row.stable_edges /= &count;
            row.disconnected /= &count;
            row
        })
        .collect()
}

/// Decimal rendering with 12 significant digits for plotting; exact values
/// stay internal.
fn fmt_sig12(v: &BigRational) -> String {
    let f = v.to_f64().unwrap_or(f64::NAN);
    if f == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{:.11e}", f).parse().expect("formatted float");
    format!("{}", rounded)
}

fn write_file(path: &Path, content: &str) -> Result<(), HarnessError> {
    fs::write(path, content).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}
