//! 1-2-1 atomic networks: the compact `h`-vector form and its explicit
//! four-hop graph realization.
//!
//! Every path of subgraph `i` runs `S -> a(i,j) -> v(i) -> b(i,j) -> D`. All
//! identifiers are zero-based in code and JSON; human-facing labels (`p3`,
//! `v1`, `a1.2`) are one-based.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::flow;

/// `(subgraph, branch)` coordinates of an edge-disjoint path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathId {
    pub subgraph: usize,
    pub branch: usize,
}

impl PathId {
    pub fn new(subgraph: usize, branch: usize) -> Self {
        Self { subgraph, branch }
    }
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p({},{})", self.subgraph + 1, self.branch + 1)
    }
}

/// Hop 0 is `S -> a`, 1 is `a -> v`, 2 is `v -> b`, 3 is `b -> D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    pub path: PathId,
    pub hop: u8,
}

impl EdgeId {
    pub const HOPS: u8 = 4;

    pub fn new(path: PathId, hop: u8) -> Self {
        Self { path, hop }
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.path, self.hop)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Source,
    Destination,
    Atom(usize),
    In(PathId),
    Out(PathId),
}

impl Node {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Node::Source | Node::Destination)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Source => write!(f, "S"),
            Node::Destination => write!(f, "D"),
            Node::Atom(i) => write!(f, "v{}", i + 1),
            Node::In(p) => write!(f, "a{}.{}", p.subgraph + 1, p.branch + 1),
            Node::Out(p) => write!(f, "b{}.{}", p.subgraph + 1, p.branch + 1),
        }
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parses a comma-separated `h`-vector such as `"3,2,2"`.
pub fn parse_h(s: &str) -> Result<Vec<usize>> {
    let h = s
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidSpec(format!("bad entry {tok:?} in {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if h.is_empty() {
        return Err(Error::InvalidSpec("empty h-vector".into()));
    }
    Ok(h)
}

/// An atomic network given by its per-subgraph path counts and the
/// source/destination beam budget `M`.
///
/// `h` is kept sorted in descending order; `permutation[k]` is the position
/// in the caller's vector of the subgraph stored at sorted position `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpecRecord", into = "SpecRecord")]
pub struct AtomicNetworkSpec {
    h: Vec<usize>,
    original: Vec<usize>,
    permutation: Vec<usize>,
    m: usize,
}

#[derive(Serialize, Deserialize)]
struct SpecRecord {
    h: Vec<usize>,
    #[serde(rename = "M")]
    m: usize,
}

impl TryFrom<SpecRecord> for AtomicNetworkSpec {
    type Error = Error;

    fn try_from(rec: SpecRecord) -> Result<Self> {
        Self::new(rec.h, rec.m)
    }
}

impl From<AtomicNetworkSpec> for SpecRecord {
    fn from(spec: AtomicNetworkSpec) -> Self {
        SpecRecord {
            h: spec.original,
            m: spec.m,
        }
    }
}

impl AtomicNetworkSpec {
    pub fn new(h: Vec<usize>, m: usize) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidSpec("h must be non-empty".into()));
        }
        if let Some(pos) = h.iter().position(|&x| x == 0) {
            return Err(Error::InvalidSpec(format!("h[{pos}] = 0, entries must be >= 1")));
        }
        if m == 0 {
            return Err(Error::InvalidSpec("M must be >= 1".into()));
        }
        let mut permutation: Vec<usize> = (0..h.len()).collect();
        // stable: equal entries keep their input order
        permutation.sort_by(|&a, &b| h[b].cmp(&h[a]));
        let sorted = permutation.iter().map(|&k| h[k]).collect();
        Ok(Self {
            h: sorted,
            original: h,
            permutation,
            m,
        })
    }

    pub fn parse(h: &str, m: usize) -> Result<Self> {
        Self::new(parse_h(h)?, m)
    }

    /// Descending-sorted path counts.
    pub fn h(&self) -> &[usize] {
        &self.h
    }

    pub fn original_h(&self) -> &[usize] {
        &self.original
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn with_m(&self, m: usize) -> Result<Self> {
        Self::new(self.original.clone(), m)
    }

    pub fn h_v(&self) -> usize {
        self.h.len()
    }

    pub fn h_e(&self) -> usize {
        self.h.iter().sum()
    }

    /// `min(M, H_v)`, the number of paths usable in one network use.
    pub fn m_hat(&self) -> usize {
        self.m.min(self.h_v())
    }
}

impl fmt::Display for AtomicNetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h: Vec<String> = self.h.iter().map(|x| x.to_string()).collect();
        write!(f, "h=[{}] M={}", h.join(","), self.m)
    }
}

impl FromStr for AtomicNetworkSpec {
    type Err = Error;

    /// Accepts `"3,2,2"` (M defaults to H_v) or `"3,2,2;M=2"`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(";M=") {
            Some((h, m)) => {
                let m = m
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidSpec(format!("bad M in {s:?}")))?;
                Self::parse(h, m)
            }
            None => {
                let h = parse_h(s)?;
                let m = h.len();
                Self::new(h, m)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub id: EdgeId,
    pub from: Node,
    pub to: Node,
}

/// Explicit DAG realizing an [`AtomicNetworkSpec`].
///
/// Paths are ordered subgraph-major, branch-minor, so the global index of
/// `p(i,j)` is `sum(h[..i]) + j`. Edges are ordered by path, then hop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpandedGraph {
    h: Vec<usize>,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    paths: Vec<PathId>,
}

pub fn expand(spec: &AtomicNetworkSpec) -> ExpandedGraph {
    let h = spec.h().to_vec();
    let mut nodes = vec![Node::Source];
    let mut edges = Vec::with_capacity(4 * spec.h_e());
    let mut paths = Vec::with_capacity(spec.h_e());
    for (i, &count) in h.iter().enumerate() {
        nodes.push(Node::Atom(i));
        for j in 0..count {
            let p = PathId::new(i, j);
            nodes.push(Node::In(p));
            nodes.push(Node::Out(p));
            paths.push(p);
            let hops = path_nodes(p);
            for hop in 0..EdgeId::HOPS {
                edges.push(Edge {
                    id: EdgeId::new(p, hop),
                    from: hops[hop as usize],
                    to: hops[hop as usize + 1],
                });
            }
        }
    }
    nodes.push(Node::Destination);
    ExpandedGraph {
        h,
        nodes,
        edges,
        paths,
    }
}

fn path_nodes(p: PathId) -> [Node; 5] {
    [
        Node::Source,
        Node::In(p),
        Node::Atom(p.subgraph),
        Node::Out(p),
        Node::Destination,
    ]
}

impl ExpandedGraph {
    pub fn h(&self) -> &[usize] {
        &self.h
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn paths(&self) -> &[PathId] {
        &self.paths
    }

    pub fn contains_path(&self, p: PathId) -> bool {
        p.subgraph < self.h.len() && p.branch < self.h[p.subgraph]
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.contains_path(e.path) && e.hop < EdgeId::HOPS
    }

    /// Position of `p` in [`paths`](Self::paths).
    pub fn global_index(&self, p: PathId) -> Option<usize> {
        self.contains_path(p)
            .then(|| self.h[..p.subgraph].iter().sum::<usize>() + p.branch)
    }

    /// One-based label used in the figures, e.g. `p4` for `p(2,1)` of `[3,2,2]`.
    pub fn path_label(&self, p: PathId) -> String {
        match self.global_index(p) {
            Some(k) => format!("p{}", k + 1),
            None => p.to_string(),
        }
    }

    pub fn path_nodes(&self, p: PathId) -> Result<[Node; 5]> {
        if !self.contains_path(p) {
            return Err(Error::UnknownPath(p));
        }
        Ok(path_nodes(p))
    }

    pub fn path_edges(&self, p: PathId) -> Result<[EdgeId; 4]> {
        if !self.contains_path(p) {
            return Err(Error::UnknownPath(p));
        }
        Ok([0, 1, 2, 3].map(|hop| EdgeId::new(p, hop)))
    }

    pub fn edge(&self, e: EdgeId) -> Result<&Edge> {
        let k = self.global_index(e.path).ok_or(Error::UnknownEdge(e))?;
        if e.hop >= EdgeId::HOPS {
            return Err(Error::UnknownEdge(e));
        }
        Ok(&self.edges[4 * k + e.hop as usize])
    }

    pub fn node_index(&self, n: Node) -> Option<usize> {
        self.nodes.iter().position(|&x| x == n)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization is infallible")
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph atomic {\n  rankdir=LR;\n");
        for n in &self.nodes {
            let shape = match n {
                Node::Source | Node::Destination => "doublecircle",
                Node::Atom(_) => "box",
                _ => "circle",
            };
            out.push_str(&format!("  \"{n}\" [shape={shape}];\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                e.from,
                e.to,
                self.path_label(e.id.path)
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Whether `paths` can be activated in a single network use: at most `m`
/// of them, pairwise vertex-disjoint apart from `S` and `D`.
pub fn check_121_schedule(graph: &ExpandedGraph, paths: &[PathId], m: usize) -> Result<bool> {
    let mut seen_paths = HashSet::new();
    let mut used = HashSet::new();
    let mut disjoint = true;
    for &p in paths {
        let nodes = graph.path_nodes(p)?;
        if !seen_paths.insert(p) {
            disjoint = false;
            continue;
        }
        for n in nodes.iter().filter(|n| !n.is_terminal()) {
            if !used.insert(*n) {
                disjoint = false;
            }
        }
    }
    Ok(disjoint && seen_paths.len() == paths.len() && paths.len() <= m)
}

/// The maximum number of vertex-disjoint S-D paths, `H_v`.
pub fn vertex_disjoint_max(spec: &AtomicNetworkSpec) -> usize {
    spec.h_v()
}

/// The maximum number of edge-disjoint S-D paths, `H_e`.
pub fn edge_disjoint_max(spec: &AtomicNetworkSpec) -> usize {
    spec.h_e()
}

/// Max-flow value with unit capacity on every intermediate node.
pub fn vertex_disjoint_flow(graph: &ExpandedGraph) -> usize {
    flow_with(graph, true)
}

/// Max-flow value with unit capacity on every edge.
pub fn edge_disjoint_flow(graph: &ExpandedGraph) -> usize {
    flow_with(graph, false)
}

fn flow_with(graph: &ExpandedGraph, unit_nodes: bool) -> usize {
    // node k is split into 2k (in) and 2k+1 (out)
    let n = graph.nodes.len();
    let big = graph.edges.len() + 1;
    let mut net = flow::FlowNetwork::new(2 * n);
    for (k, node) in graph.nodes.iter().enumerate() {
        let cap = if unit_nodes && !node.is_terminal() { 1 } else { big };
        net.add_edge(2 * k, 2 * k + 1, cap);
    }
    for e in &graph.edges {
        let u = graph.node_index(e.from).expect("edge endpoint is a node");
        let v = graph.node_index(e.to).expect("edge endpoint is a node");
        let cap = if unit_nodes { big } else { 1 };
        net.add_edge(2 * u + 1, 2 * v, cap);
    }
    let s = graph.node_index(Node::Source).expect("source exists");
    let d = graph.node_index(Node::Destination).expect("destination exists");
    net.max_flow(2 * s, 2 * d + 1)
}

/// Distinct intermediate nodes touched by `paths`.
pub fn touched_nodes(graph: &ExpandedGraph, paths: &[PathId]) -> Result<BTreeSet<Node>> {
    let mut out = BTreeSet::new();
    for &p in paths {
        out.extend(graph.path_nodes(p)?.into_iter().filter(|n| !n.is_terminal()));
    }
    Ok(out)
}
