//! Initial-topology generators and constructive builders for the stable and
//! equilibrium graph families used by the analyses.

mod equilibria;
mod generators;
mod stable;

pub use equilibria::{
    audit_capped_general, build_capped_general_nash, build_capped_unit_nash, build_uncapped_nash,
};
pub use generators::{gen_random, gen_scale_free, gen_small_world};
pub use stable::build_stable_topology;

use rand::Rng;
use thiserror::Error;

use crate::graph::{GameParams, GraphError, PeerGraph};

#[derive(Error, Debug, PartialEq, Eq)]
pub enum BuildError {
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("no stable topology exists here: {0}")]
    NoStableTopology(String),
    #[error("parity constraint violated: {0}")]
    ParityInfeasible(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Initial topology families. The out-degree and the miner count come from
/// the game parameters; miners always occupy the lowest node ids, which for
/// the scale-free family places them inside the seed component whenever
/// `m <= seed_component`.
#[derive(Clone, PartialEq, Debug)]
pub enum TopologySpec {
    /// Every node picks `d` random peers it is not yet connected to.
    Random,
    /// Ring lattice of undirected degree `2d`, rewired edge-wise.
    SmallWorld { rewire_p: f64 },
    /// Preferential attachment growing from a connected seed component.
    ScaleFree { seed_component: usize },
}

impl TopologySpec {
    pub fn token(&self) -> &'static str {
        match self {
            TopologySpec::Random => "random",
            TopologySpec::SmallWorld { .. } => "small-world",
            TopologySpec::ScaleFree { .. } => "scale-free",
        }
    }
}

/// Build an initial graph for the given topology family.
pub fn generate(
    spec: &TopologySpec,
    params: &GameParams,
    rng: &mut impl Rng,
) -> Result<PeerGraph, BuildError> {
    match spec {
        TopologySpec::Random => gen_random(params, rng),
        TopologySpec::SmallWorld { rewire_p } => gen_small_world(params, *rewire_p, rng),
        TopologySpec::ScaleFree { seed_component } => {
            gen_scale_free(params, *seed_component, rng)
        }
    }
}
