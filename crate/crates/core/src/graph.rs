//! Directed peer graph with undirected-distance semantics.
//!
//! Nodes own their outgoing edges; distances are measured on the undirected
//! view of the graph. The structural rules enforced on every mutation: no
//! self-loops, at most one of (i,j)/(j,i) per node pair, out-degree at most
//! `d`, and (when configured) in-degree at most `d_in`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num::BigRational;
use thiserror::Error;

use crate::score::validate_miner_weights;

/// Index of a node in a fixed-size network. Nodes `0..m` are the miners.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which peer a node drops when several tie for the worst score.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum TieRule {
    /// Uniformly random victim among the tied peers.
    Random,
    /// First in, first out: the oldest tied edge is dropped.
    Fifo,
    /// Last in, first out: the newest tied edge is dropped.
    Lifo,
    /// Fixed node ranking; the best-ranked tied peer wins (is kept).
    GlobalOrdering,
}

impl TieRule {
    pub const ALL: [TieRule; 4] = [
        TieRule::Random,
        TieRule::Fifo,
        TieRule::Lifo,
        TieRule::GlobalOrdering,
    ];

    pub fn token(self) -> &'static str {
        match self {
            TieRule::Random => "random",
            TieRule::Fifo => "fifo",
            TieRule::Lifo => "lifo",
            TieRule::GlobalOrdering => "global",
        }
    }

    pub fn parse(s: &str) -> Option<TieRule> {
        match s {
            "random" => Some(TieRule::Random),
            "fifo" => Some(TieRule::Fifo),
            "lifo" => Some(TieRule::Lifo),
            "global" | "global-ordering" => Some(TieRule::GlobalOrdering),
            _ => None,
        }
    }
}

impl fmt::Display for TieRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum GraphError {
    #[error("self loops are not allowed")]
    SelfLoop,
    #[error("nodes {0} and {1} are already connected")]
    AlreadyConnected(NodeId, NodeId),
    #[error("node {0} already has {1} outgoing edges")]
    SrcOutFull(NodeId, usize),
    #[error("node {0} is at its inbound capacity {1}")]
    DstInFull(NodeId, usize),
    #[error("no edge from {0} to {1}")]
    NoSuchEdge(NodeId, NodeId),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("malformed edge list: {0}")]
    BadEdgeList(String),
}

/// Full game configuration: node counts, degree limits, tie rule and the
/// number of worst edges dropped per round.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GameParams {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    /// Inbound connection capacity. `None` means unbounded.
    pub d_in: Option<usize>,
    pub tie_rule: TieRule,
    /// How many worst out-edges a full node drops per round (1..=d).
    pub k_worst: usize,
    /// Cap on edges a node may add per round. `None` refills to `d`.
    pub add_per_round: Option<usize>,
}

impl GameParams {
    pub fn new(
        n: usize,
        m: usize,
        d: usize,
        d_in: Option<usize>,
        tie_rule: TieRule,
        k_worst: usize,
    ) -> Result<Self, GraphError> {
        let params = GameParams {
            n,
            m,
            d,
            d_in,
            tie_rule,
            k_worst,
            add_per_round: None,
        };
        params.validate()?;
        Ok(params)
    }

    /// Unbounded in-degree, single worst edge dropped per round.
    pub fn uncapped(n: usize, m: usize, d: usize, tie_rule: TieRule) -> Result<Self, GraphError> {
        GameParams::new(n, m, d, None, tie_rule, 1)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        if self.m < 1 || self.m > self.n {
            return Err(GraphError::BadParams(format!(
                "m must satisfy 1 <= m <= n, got m={} n={}",
                self.m, self.n
            )));
        }
        if self.d < 1 {
            return Err(GraphError::BadParams("d must be at least 1".into()));
        }
        if let Some(d_in) = self.d_in {
            if d_in <= self.d {
                return Err(GraphError::BadParams(format!(
                    "d_in must exceed d, got d_in={} d={}",
                    d_in, self.d
                )));
            }
        }
        if self.k_worst < 1 || self.k_worst > self.d {
            return Err(GraphError::BadParams(format!(
                "k_worst must lie in 1..=d, got k_worst={} d={}",
                self.k_worst, self.d
            )));
        }
        if let Some(k_add) = self.add_per_round {
            if k_add < 1 {
                return Err(GraphError::BadParams("add_per_round must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Per-node identity: miner flag, hashrate weight and tie-breaking rank.
#[derive(Clone, PartialEq, Debug)]
pub struct NodeInfo {
    pub id: NodeId,
    pub is_miner: bool,
    /// Hashrate fraction; zero for non-miners, miner weights sum to one.
    pub weight: BigRational,
    /// Global priority, 0 = highest. Miners hold ranks `0..m`.
    pub rank: usize,
}

/// A directed edge plus the age metadata the FIFO/LIFO tie rules need.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EdgeRecord {
    pub src: NodeId,
    pub dst: NodeId,
    pub round_added: usize,
    pub seq: u64,
}

impl EdgeRecord {
    /// Total age order: lexicographic (round, global sequence).
    pub fn age(&self) -> (usize, u64) {
        (self.round_added, self.seq)
    }
}

fn pair_key(a: NodeId, b: NodeId) -> (u32, u32) {
    if a.0 <= b.0 {
        (a.0, b.0)
    } else {
        (b.0, a.0)
    }
}

/// Directed graph over a fixed node set, with per-edge age metadata and the
/// undirected connectivity indicator `e_{i,j}` maintained alongside.
#[derive(Clone, Debug)]
pub struct PeerGraph {
    params: GameParams,
    nodes: Vec<NodeInfo>,
    out_edges: Vec<Vec<EdgeRecord>>,
    in_neighbors: Vec<Vec<u32>>,
    pairs: HashSet<(u32, u32)>,
    next_seq: u64,
}

impl PeerGraph {
    /// Empty graph: miners are nodes `0..m`, uniform weights, rank = id.
    pub fn new(params: GameParams) -> Result<Self, GraphError> {
        params.validate()?;
        let n = params.n;
        let m = params.m;
        let uniform = BigRational::new(1.into(), (m as i64).into());
        let nodes = (0..n)
            .map(|i| NodeInfo {
                id: NodeId(i as u32),
                is_miner: i < m,
                weight: if i < m {
                    uniform.clone()
                } else {
                    BigRational::from_integer(0.into())
                },
                rank: i,
            })
            .collect();
        Ok(PeerGraph {
            params,
            nodes,
            out_edges: vec![Vec::new(); n],
            in_neighbors: vec![Vec::new(); n],
            pairs: HashSet::new(),
            next_seq: 0,
        })
    }

    pub fn params(&self) -> &GameParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    pub fn node(&self, id: NodeId) -> &NodeInfo {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> &[NodeInfo] {
        &self.nodes
    }

    pub fn is_miner(&self, id: NodeId) -> bool {
        id.index() < self.params.m
    }

    pub fn miner_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.params.m as u32).map(NodeId)
    }

    /// The indicator `e_{i,j}`: true when either direction exists.
    pub fn connected(&self, a: NodeId, b: NodeId) -> bool {
        self.pairs.contains(&pair_key(a, b))
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        self.out_edges[src.index()].iter().any(|e| e.dst == dst)
    }

    pub fn out_degree(&self, id: NodeId) -> usize {
        self.out_edges[id.index()].len()
    }

    pub fn in_degree(&self, id: NodeId) -> usize {
        self.in_neighbors[id.index()].len()
    }

    pub fn has_in_capacity(&self, id: NodeId) -> bool {
        match self.params.d_in {
            Some(cap) => self.in_degree(id) < cap,
            None => true,
        }
    }

    /// Outgoing edges of a node in insertion (age) order.
    pub fn out_edges(&self, id: NodeId) -> &[EdgeRecord] {
        &self.out_edges[id.index()]
    }

    pub fn in_neighbors(&self, id: NodeId) -> &[u32] {
        &self.in_neighbors[id.index()]
    }

    pub fn edge_count(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    /// All live edges, sorted by global sequence number.
    pub fn edges_by_seq(&self) -> Vec<EdgeRecord> {
        let mut edges: Vec<EdgeRecord> = self.out_edges.iter().flatten().copied().collect();
        edges.sort_by_key(|e| e.seq);
        edges
    }

    /// Normalized undirected pairs currently connected.
    pub fn indicator_pairs(&self) -> std::collections::BTreeSet<(u32, u32)> {
        self.pairs.iter().copied().collect()
    }

    pub fn add_edge(
        &mut self,
        src: NodeId,
        dst: NodeId,
        round: usize,
    ) -> Result<EdgeRecord, GraphError> {
        let seq = self.next_seq;
        let record = EdgeRecord {
            src,
            dst,
            round_added: round,
            seq,
        };
        self.insert_record(record)?;
        self.next_seq = seq + 1;
        Ok(record)
    }

    fn insert_record(&mut self, record: EdgeRecord) -> Result<(), GraphError> {
        let (src, dst) = (record.src, record.dst);
        if src == dst {
            return Err(GraphError::SelfLoop);
        }
        if src.index() >= self.params.n || dst.index() >= self.params.n {
            return Err(GraphError::BadParams(format!(
                "edge {}->{} out of range for n={}",
                src, dst, self.params.n
            )));
        }
        if self.connected(src, dst) {
            return Err(GraphError::AlreadyConnected(src, dst));
        }
        if self.out_degree(src) >= self.params.d {
            return Err(GraphError::SrcOutFull(src, self.params.d));
        }
        if !self.has_in_capacity(dst) {
            return Err(GraphError::DstInFull(dst, self.params.d_in.unwrap()));
        }
        self.out_edges[src.index()].push(record);
        self.in_neighbors[dst.index()].push(src.0);
        self.pairs.insert(pair_key(src, dst));
        Ok(())
    }

    pub fn remove_edge(&mut self, src: NodeId, dst: NodeId) -> Result<EdgeRecord, GraphError> {
        let list = &mut self.out_edges[src.index()];
        let pos = list
            .iter()
            .position(|e| e.dst == dst)
            .ok_or(GraphError::NoSuchEdge(src, dst))?;
        let record = list.remove(pos);
        let ins = &mut self.in_neighbors[dst.index()];
        let ipos = ins.iter().position(|&s| s == src.0).expect("in-list entry");
        ins.swap_remove(ipos);
        self.pairs.remove(&pair_key(src, dst));
        Ok(record)
    }

    /// Undirected hop distances from `source`. Unreachable nodes carry the
    /// sentinel value `n`, which exceeds every real distance.
    pub fn bfs_distances(&self, source: NodeId) -> Vec<usize> {
        let n = self.params.n;
        let mut dist = vec![n; n];
        let mut queue = VecDeque::with_capacity(n);
        dist[source.index()] = 0;
        queue.push_back(source.index());
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            for e in &self.out_edges[u] {
                let v = e.dst.index();
                if dist[v] == n {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
            for &s in &self.in_neighbors[u] {
                let v = s as usize;
                if dist[v] == n {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// True when every node is reachable from node 0 on the undirected view.
    pub fn is_connected(&self) -> bool {
        let n = self.params.n;
        self.bfs_distances(NodeId(0)).iter().all(|&d| d < n)
    }

    /// Replace the miner hashrate weights. The vector covers miners only and
    /// must sum to one exactly.
    pub fn set_miner_weights(&mut self, weights: &[BigRational]) -> Result<(), GraphError> {
        validate_miner_weights(self.params.m, weights).map_err(GraphError::BadParams)?;
        for (i, w) in weights.iter().enumerate() {
            self.nodes[i].weight = w.clone();
        }
        Ok(())
    }

    pub fn miner_weights(&self) -> Vec<BigRational> {
        self.nodes[..self.params.m]
            .iter()
            .map(|n| n.weight.clone())
            .collect()
    }

    /// Full invariant scan; returns every violation found.
    pub fn audit(&self) -> Result<(), Vec<String>> {
        let mut violations = Vec::new();
        let mut seen_seq = HashSet::new();
        let mut seen_pairs = HashSet::new();
        for (i, edges) in self.out_edges.iter().enumerate() {
            if edges.len() > self.params.d {
                violations.push(format!("node {} out-degree {} > d", i, edges.len()));
            }
            for e in edges {
                if e.src.index() != i {
                    violations.push(format!("edge {}->{} filed under node {}", e.src, e.dst, i));
                }
                if e.src == e.dst {
                    violations.push(format!("self loop at {}", e.src));
                }
                if !seen_seq.insert(e.seq) {
                    violations.push(format!("duplicate seq {}", e.seq));
                }
                if !seen_pairs.insert(pair_key(e.src, e.dst)) {
                    violations.push(format!("bidirectional or duplicate pair {}-{}", e.src, e.dst));
                }
            }
        }
        if let Some(cap) = self.params.d_in {
            for (i, ins) in self.in_neighbors.iter().enumerate() {
                if ins.len() > cap {
                    violations.push(format!("node {} in-degree {} > d_in", i, ins.len()));
                }
            }
        }
        for (i, ins) in self.in_neighbors.iter().enumerate() {
            for &s in ins {
                if !self.has_edge(NodeId(s), NodeId(i as u32)) {
                    violations.push(format!("stale in-list entry {}->{}", s, i));
                }
            }
        }
        if seen_pairs != self.pairs {
            violations.push("indicator set out of sync with edges".into());
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Text export: one header line, then `src,dst,round_added,seq` per edge
    /// in sequence order. Round-trips bit-exactly through `import_edge_list`.
    pub fn export_edge_list(&self) -> String {
        let p = &self.params;
        let d_in = match p.d_in {
            Some(v) => v.to_string(),
            None => "inf".into(),
        };
        let mut out = format!(
            "# n={} m={} d={} d_in={} tie={} k={}",
            p.n, p.m, p.d, d_in, p.tie_rule, p.k_worst
        );
        if let Some(k_add) = p.add_per_round {
            out.push_str(&format!(" k_add={}", k_add));
        }
        out.push('\n');
        for e in self.edges_by_seq() {
            out.push_str(&format!("{},{},{},{}\n", e.src, e.dst, e.round_added, e.seq));
        }
        out
    }

    pub fn import_edge_list(text: &str) -> Result<PeerGraph, GraphError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| GraphError::BadEdgeList("empty input".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| GraphError::BadEdgeList("missing '#' header".into()))?
            .trim();
        let mut n = None;
        let mut m = None;
        let mut d = None;
        let mut d_in = None;
        let mut tie = None;
        let mut k = None;
        let mut k_add = None;
        for tok in header.split_whitespace() {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| GraphError::BadEdgeList(format!("bad header token '{}'", tok)))?;
            let parse_usize = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| GraphError::BadEdgeList(format!("bad value for {}: '{}'", key, v)))
            };
            match key {
                "n" => n = Some(parse_usize(value)?),
                "m" => m = Some(parse_usize(value)?),
                "d" => d = Some(parse_usize(value)?),
                "d_in" => {
                    d_in = if value == "inf" {
                        Some(None)
                    } else {
                        Some(Some(parse_usize(value)?))
                    };
                }
                "tie" => {
                    tie = Some(TieRule::parse(value).ok_or_else(|| {
                        GraphError::BadEdgeList(format!("unknown tie rule '{}'", value))
                    })?)
                }
                "k" => k = Some(parse_usize(value)?),
                "k_add" => k_add = Some(parse_usize(value)?),
                other => {
                    return Err(GraphError::BadEdgeList(format!(
                        "unknown header key '{}'",
                        other
                    )))
                }
            }
        }
        let missing = |what: &str| GraphError::BadEdgeList(format!("header missing {}", what));
        let mut params = GameParams::new(
            n.ok_or_else(|| missing("n"))?,
            m.ok_or_else(|| missing("m"))?,
            d.ok_or_else(|| missing("d"))?,
            d_in.ok_or_else(|| missing("d_in"))?,
            tie.ok_or_else(|| missing("tie"))?,
            k.ok_or_else(|| missing("k"))?,
        )?;
        params.add_per_round = k_add;
        let mut g = PeerGraph::new(params)?;
        let mut max_seq = None;
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(GraphError::BadEdgeList(format!(
                    "line {}: expected 4 fields",
                    lineno + 2
                )));
            }
            let num = |f: &str| {
                f.parse::<u64>()
                    .map_err(|_| GraphError::BadEdgeList(format!("line {}: bad number", lineno + 2)))
            };
            let record = EdgeRecord {
                src: NodeId(num(fields[0])? as u32),
                dst: NodeId(num(fields[1])? as u32),
                round_added: num(fields[2])? as usize,
                seq: num(fields[3])?,
            };
            if g.out_edges
                .iter()
                .flatten()
                .any(|e| e.seq == record.seq)
            {
                return Err(GraphError::BadEdgeList(format!(
                    "line {}: duplicate seq {}",
                    lineno + 2,
                    record.seq
                )));
            }
            g.insert_record(record)?;
            max_seq = Some(max_seq.map_or(record.seq, |s: u64| s.max(record.seq)));
        }
        g.next_seq = max_seq.map_or(0, |s| s + 1);
        Ok(g)
    }
}
