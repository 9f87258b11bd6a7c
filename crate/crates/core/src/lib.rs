//! Deterministic, seedable simulator and analysis toolkit for greedy peer
//! selection in P2P networks with a designated miner subset.
//!
//! Nodes own up to `d` outgoing edges and replace their worst-performing
//! peers round by round, scoring peers by exact average hop distance to the
//! miners over the undirected graph. The crate provides the round engine
//! with its four tie-breaker rules, generators for initial topologies,
//! constructive builders for the known stable and equilibrium families, a
//! best-response equilibrium verifier, stability analyses, and a seeded
//! multi-repetition experiment harness with CSV output.

pub mod analysis;
pub mod constructions;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod protocol;
pub mod score;

pub use analysis::{
    check_stability_consequences, check_structural_stability, empirical_stability, regime_oracle,
    verify_nash, AnalysisError, ConsequenceAudit, EmpiricalStability, Existence, NashMode,
    NashVerdict, NashWitness, RegimeAnswer, StabilityVerdict,
};
pub use constructions::{
    audit_capped_general, build_capped_general_nash, build_capped_unit_nash, build_stable_topology,
    build_uncapped_nash, gen_random, gen_scale_free, gen_small_world, generate, BuildError,
    TopologySpec,
};
pub use graph::{EdgeRecord, GameParams, GraphError, NodeId, NodeInfo, PeerGraph, TieRule};
pub use harness::{
    load_config, parse_config, run_experiment, AggregateRow, AggregateSeries, ConfigError,
    ExperimentConfig, HarnessError,
};
pub use metrics::{
    all_scores, diameter, eccentricity_stats, in_degree_distribution, round_metrics, score,
    score_distribution, MetricsError, RoundMetrics,
};
pub use protocol::{
    run_round, run_simulation, step_add, step_drop, step_drop_ordered, ProtocolError, ProtocolRng,
    RoundReport, SimulationRun,
};
pub use score::{miner_weights, Score, WeightScheme};
