//! Existence oracle for miner- and network-stable topologies by parameter
//! regime and tie rule. Encodes the proven existence and impossibility
//! results; outside their guards it answers Unknown with a citation.

use std::fmt;

use crate::graph::TieRule;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Existence {
    Exists,
    Impossible,
    Unknown,
}

impl fmt::Display for Existence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Existence::Exists => "Exists",
            Existence::Impossible => "Impossible",
            Existence::Unknown => "Unknown",
        })
    }
}

/// Answer plus the names of the results it leans on.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegimeAnswer {
    pub miner_stable: Existence,
    pub network_stable: Existence,
    pub citations: Vec<&'static str>,
}

impl RegimeAnswer {
    pub fn report_line(&self) -> String {
        format!(
            "miner_stable={} network_stable={}",
            self.miner_stable, self.network_stable
        )
    }
}

/// The instability results assume a network much larger than the degree;
/// the explicit bound proven for the FIFO/random case is adopted for both
/// rule classes.
fn large_n(n: usize, d: usize) -> bool {
    n > 2 * d * d
}

pub fn regime_oracle(
    n: usize,
    m: usize,
    d: usize,
    d_in: Option<usize>,
    tie_rule: TieRule,
) -> RegimeAnswer {
    let order_based = matches!(tie_rule, TieRule::Lifo | TieRule::GlobalOrdering);
    let mut citations = Vec::new();
    let mut cite = |c: &'static str| {
        if !citations.contains(&c) {
            citations.push(c);
        }
    };
    if let Some(d_in) = d_in {
        let miner_stable = if m < 2 * d {
            cite("capped-clique-miner-stability");
            Existence::Exists
        } else if order_based && 2 * m <= 2 * d_in + d {
            cite("capped-core-miner-stability");
            Existence::Exists
        } else {
            cite("capped-stability-open");
            Existence::Unknown
        };
        cite("capped-network-stability-open");
        return RegimeAnswer {
            miner_stable,
            network_stable: Existence::Unknown,
            citations,
        };
    }
    let miner_stable = if m < 2 * d {
        cite("clique-miner-stability");
        Existence::Exists
    } else if order_based {
        cite("order-rule-miner-stability");
        Existence::Exists
    } else {
        cite("fifo-random-miner-impossibility");
        Existence::Impossible
    };
    let network_stable = if order_based {
        if m < 2 * d {
            cite("small-m-network-stability");
            Existence::Exists
        } else if large_n(n, d) {
            cite("order-rule-network-instability");
            Existence::Impossible
        } else {
            cite("network-size-guard-not-met");
            Existence::Unknown
        }
    } else if large_n(n, d) {
        cite("fifo-random-network-instability");
        Existence::Impossible
    } else if d <= m && m < 2 * d && 2 * n * (m - d + 1) == m * (m + 1) {
        // the unique balanced network size the instability argument cannot
        // rule out: all non-miners adjacent to all miners with every edge
        // slot spoken for
        cite("borderline-network-size");
        Existence::Unknown
    } else {
        cite("network-size-guard-not-met");
        Existence::Unknown
    };
    RegimeAnswer {
        miner_stable,
        network_stable,
        citations,
    }
}
