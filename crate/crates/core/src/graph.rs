//! Node- and edge-labelled directed graphs over fixed label alphabets.
//!
//! A [`Graph`] is an immutable value: a map from node ids to node labels and a
//! set of `(source, label, target)` triples. At most one edge with a given
//! label joins an ordered pair of nodes, loops are allowed, and graphs need
//! not be connected.
//!
//! Node ids are opaque names that rewriting never renames or creates, so two
//! graphs derived from the same start graph are the same state exactly when
//! their [`CanonicalKey`]s are equal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("label set must not be empty ({0} labels)")]
    EmptyAlphabet(&'static str),
    #[error("duplicate {kind} label `{label}`")]
    DuplicateLabel { kind: &'static str, label: String },
    #[error("unknown {kind} label `{label}`")]
    UnknownLabel { kind: &'static str, label: String },
    #[error("edge {source_node} -{label}-> {target} references undeclared node `{missing}`")]
    DanglingEdge {
        source_node: String,
        label: String,
        target: String,
        missing: String,
    },
    #[error("node `{0}` declared twice")]
    DuplicateNodeId(String),
    #[error("node `{0}` is not in the graph")]
    NodeNotInGraph(String),
}

/// Index of a node label in its [`Alphabets`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeLabel(pub(crate) u16);

/// Index of an edge label in its [`Alphabets`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeLabel(pub(crate) u16);

impl NodeLabel {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeLabel {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// The node and edge label sets a graph, rule or weight is written over.
///
/// Declaration order is the iteration order everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabets {
    node_labels: Vec<String>,
    edge_labels: Vec<String>,
}

impl Alphabets {
    pub fn new<N, E>(node_labels: N, edge_labels: E) -> Result<Arc<Self>, GraphError>
    where
        N: IntoIterator,
        N::Item: Into<String>,
        E: IntoIterator,
        E::Item: Into<String>,
    {
        let node_labels: Vec<String> = node_labels.into_iter().map(Into::into).collect();
        let edge_labels: Vec<String> = edge_labels.into_iter().map(Into::into).collect();
        check_label_set("node", &node_labels)?;
        check_label_set("edge", &edge_labels)?;
        Ok(Arc::new(Self {
            node_labels,
            edge_labels,
        }))
    }

    pub fn node_label(&self, name: &str) -> Option<NodeLabel> {
        self.node_labels
            .iter()
            .position(|l| l == name)
            .map(|i| NodeLabel(i as u16))
    }

    pub fn edge_label(&self, name: &str) -> Option<EdgeLabel> {
        self.edge_labels
            .iter()
            .position(|l| l == name)
            .map(|i| EdgeLabel(i as u16))
    }

    pub fn require_node_label(&self, name: &str) -> Result<NodeLabel, GraphError> {
        self.node_label(name)
            .ok_or_else(|| GraphError::UnknownLabel {
                kind: "node",
                label: name.to_string(),
            })
    }

    pub fn require_edge_label(&self, name: &str) -> Result<EdgeLabel, GraphError> {
        self.edge_label(name)
            .ok_or_else(|| GraphError::UnknownLabel {
                kind: "edge",
                label: name.to_string(),
            })
    }

    pub fn node_name(&self, label: NodeLabel) -> &str {
        &self.node_labels[label.index()]
    }

    pub fn edge_name(&self, label: EdgeLabel) -> &str {
        &self.edge_labels[label.index()]
    }

    pub fn node_count(&self) -> usize {
        self.node_labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_labels.len()
    }

    pub fn node_labels(&self) -> impl Iterator<Item = NodeLabel> + '_ {
        (0..self.node_labels.len()).map(|i| NodeLabel(i as u16))
    }

    pub fn edge_labels(&self) -> impl Iterator<Item = EdgeLabel> + '_ {
        (0..self.edge_labels.len()).map(|i| EdgeLabel(i as u16))
    }
}

fn check_label_set(kind: &'static str, labels: &[String]) -> Result<(), GraphError> {
    if labels.is_empty() {
        return Err(GraphError::EmptyAlphabet(kind));
    }
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(GraphError::DuplicateLabel {
                kind,
                label: l.clone(),
            });
        }
    }
    Ok(())
}

/// Opaque node identifier.
///
/// Ordered "naturally": all-digit ids compare numerically and sort before
/// other ids, which compare as strings.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NodeId(Arc<str>);

impl NodeId {
    pub fn new(name: &str) -> Self {
        Self(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric(&self) -> Option<u128> {
        if self.0.is_empty() || !self.0.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        self.0.parse().ok()
    }
}

impl Ord for NodeId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric(), other.numeric()) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for NodeId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: NodeId,
    pub label: EdgeLabel,
    pub target: NodeId,
}

impl Edge {
    pub fn new(source: NodeId, label: EdgeLabel, target: NodeId) -> Self {
        Self {
            source,
            label,
            target,
        }
    }

    pub fn touches(&self, node: &NodeId) -> bool {
        &self.source == node || &self.target == node
    }
}

/// Exact-identity key of a graph: equal keys iff equal node maps and edge sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Short stable hex digest, for traces and reports.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let hash = Sha256::digest(&self.0);
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone)]
pub struct Graph {
    alphabets: Arc<Alphabets>,
    nodes: BTreeMap<NodeId, NodeLabel>,
    edges: BTreeSet<Edge>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && (Arc::ptr_eq(&self.alphabets, &other.alphabets) || self.alphabets == other.alphabets)
    }
}

impl Eq for Graph {}

/// Builds a validated graph from textual labels.
///
/// Repeated edge triples collapse to one edge.
pub fn make_graph(
    alphabets: &Arc<Alphabets>,
    nodes: &[(&str, &str)],
    edges: &[(&str, &str, &str)],
) -> Result<Graph, GraphError> {
    let mut g = Graph::empty(alphabets.clone());
    for (id, label) in nodes {
        let label = alphabets.require_node_label(label)?;
        g.insert_node(NodeId::new(id), label)?;
    }
    for (src, label, tgt) in edges {
        let label = alphabets.require_edge_label(label)?;
        g.insert_edge(Edge::new(NodeId::new(src), label, NodeId::new(tgt)))?;
    }
    Ok(g)
}

impl Graph {
    pub fn empty(alphabets: Arc<Alphabets>) -> Self {
        Self {
            alphabets,
            nodes: BTreeMap::new(),
            edges: BTreeSet::new(),
        }
    }

    /// Adds a node; fails if the id is already present.
    pub fn insert_node(&mut self, id: NodeId, label: NodeLabel) -> Result<(), GraphError> {
        if self.nodes.contains_key(&id) {
            return Err(GraphError::DuplicateNodeId(id.to_string()));
        }
        self.nodes.insert(id, label);
        Ok(())
    }

    /// Adds an edge between existing nodes. Returns whether it was new.
    pub fn insert_edge(&mut self, edge: Edge) -> Result<bool, GraphError> {
        for end in [&edge.source, &edge.target] {
            if !self.nodes.contains_key(end) {
                return Err(GraphError::DanglingEdge {
                    source_node: edge.source.to_string(),
                    label: self.alphabets.edge_name(edge.label).to_string(),
                    target: edge.target.to_string(),
                    missing: end.to_string(),
                });
            }
        }
        Ok(self.edges.insert(edge))
    }

    pub fn alphabets(&self) -> &Arc<Alphabets> {
        &self.alphabets
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&NodeId, NodeLabel)> + '_ {
        self.nodes.iter().map(|(n, l)| (n, *l))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &NodeId> + '_ {
        self.nodes.keys()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter()
    }

    pub fn edge_set(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn label(&self, node: &NodeId) -> Option<NodeLabel> {
        self.nodes.get(node).copied()
    }

    pub fn contains_node(&self, node: &NodeId) -> bool {
        self.nodes.contains_key(node)
    }

    pub fn has_edge(&self, source: &NodeId, label: EdgeLabel, target: &NodeId) -> bool {
        self.edges
            .contains(&Edge::new(source.clone(), label, target.clone()))
    }

    pub fn contains_edge(&self, edge: &Edge) -> bool {
        self.edges.contains(edge)
    }

    pub fn out_edges<'a>(&'a self, source: &'a NodeId) -> impl Iterator<Item = &'a Edge> + 'a {
        // "0" is the least NodeId under the natural order.
        let start = Edge::new(source.clone(), EdgeLabel(0), NodeId::new("0"));
        self.edges
            .range(start..)
            .take_while(move |e| &e.source == source)
    }

    pub fn in_edges<'a>(&'a self, target: &'a NodeId) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| &e.target == target)
    }

    /// Number of edges carrying `label`.
    pub fn count_label(&self, label: EdgeLabel) -> usize {
        self.edges.iter().filter(|e| e.label == label).count()
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        let mut bytes = Vec::with_capacity(8 + self.nodes.len() * 8 + self.edges.len() * 12);
        bytes.extend_from_slice(&(self.nodes.len() as u32).to_le_bytes());
        for (id, label) in &self.nodes {
            push_id(&mut bytes, id);
            bytes.extend_from_slice(&label.0.to_le_bytes());
        }
        bytes.extend_from_slice(&(self.edges.len() as u32).to_le_bytes());
        for e in &self.edges {
            push_id(&mut bytes, &e.source);
            bytes.extend_from_slice(&e.label.0.to_le_bytes());
            push_id(&mut bytes, &e.target);
        }
        CanonicalKey(bytes)
    }

    /// Node and edge decomposition around `image`, with no pattern edges:
    /// every edge inside the image is counted as glued.
    pub fn decompose(
        &self,
        image: &BTreeSet<NodeId>,
    ) -> Result<(NodeDecomposition, EdgeDecomposition), GraphError> {
        self.decompose_with_pattern_edges(image, &BTreeSet::new())
    }

    /// Node and edge decomposition induced by a matching whose image is
    /// `image` and whose pattern edges land on `pattern_edges`.
    pub fn decompose_with_pattern_edges(
        &self,
        image: &BTreeSet<NodeId>,
        pattern_edges: &BTreeSet<Edge>,
    ) -> Result<(NodeDecomposition, EdgeDecomposition), GraphError> {
        if let Some(missing) = image.iter().find(|n| !self.contains_node(n)) {
            return Err(GraphError::NodeNotInGraph(missing.to_string()));
        }
        let crown: BTreeSet<NodeId> = self
            .edges
            .iter()
            .filter_map(
                |e| match (image.contains(&e.source), image.contains(&e.target)) {
                    (true, false) => Some(e.target.clone()),
                    (false, true) => Some(e.source.clone()),
                    _ => None,
                },
            )
            .collect();
        let context = self
            .nodes
            .keys()
            .filter(|n| !image.contains(*n) && !crown.contains(*n))
            .cloned()
            .collect();

        let mut edges = EdgeDecomposition::default();
        for e in &self.edges {
            let bucket = match (image.contains(&e.source), image.contains(&e.target)) {
                (true, true) if pattern_edges.contains(e) => &mut edges.pattern_edges,
                (true, true) => &mut edges.glued_edges,
                (false, false) => &mut edges.context_edges,
                _ => &mut edges.crown_edges,
            };
            bucket.insert(e.clone());
        }
        let nodes = NodeDecomposition {
            pattern_image: image.clone(),
            crown,
            context,
        };
        Ok((nodes, edges))
    }

    // Mutators below are crate-private: the public surface treats graphs as values.

    pub(crate) fn set_label(&mut self, node: &NodeId, label: NodeLabel) -> bool {
        match self.nodes.get_mut(node) {
            Some(l) => {
                *l = label;
                true
            }
            None => false,
        }
    }

    pub(crate) fn remove_edge(&mut self, edge: &Edge) -> bool {
        self.edges.remove(edge)
    }

    pub(crate) fn add_edge_unchecked(&mut self, edge: Edge) -> bool {
        debug_assert!(self.contains_node(&edge.source) && self.contains_node(&edge.target));
        self.edges.insert(edge)
    }

    pub(crate) fn remove_node(&mut self, node: &NodeId) -> bool {
        if self.nodes.remove(node).is_none() {
            return false;
        }
        self.edges.retain(|e| !e.touches(node));
        true
    }

    pub(crate) fn take_edges_where(&mut self, pred: impl Fn(&Edge) -> bool) -> Vec<Edge> {
        let taken: Vec<Edge> = self.edges.iter().filter(|e| pred(e)).cloned().collect();
        for e in &taken {
            self.edges.remove(e);
        }
        taken
    }
}

fn push_id(bytes: &mut Vec<u8>, id: &NodeId) {
    bytes.extend_from_slice(&(id.0.len() as u32).to_le_bytes());
    bytes.extend_from_slice(id.0.as_bytes());
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// One-line form: `{g0:alpha g1:beta | g0 -A-> g1, ...}`.
impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (id, label)) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{id}:{}", self.alphabets.node_name(*label))?;
        }
        f.write_str(" |")?;
        for (i, e) in self.edges.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { ", " })?;
            write!(
                f,
                "{} -{}-> {}",
                e.source,
                self.alphabets.edge_name(e.label),
                e.target
            )?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeDecomposition {
    pub pattern_image: BTreeSet<NodeId>,
    pub crown: BTreeSet<NodeId>,
    pub context: BTreeSet<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeDecomposition {
    pub pattern_edges: BTreeSet<Edge>,
    pub crown_edges: BTreeSet<Edge>,
    pub context_edges: BTreeSet<Edge>,
    pub glued_edges: BTreeSet<Edge>,
}

impl EdgeDecomposition {
    /// Edges not in the context part.
    pub fn non_context_count(&self) -> usize {
        self.pattern_edges.len() + self.crown_edges.len() + self.glued_edges.len()
    }
}
