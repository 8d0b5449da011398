//! Patterns with negative conditions, and the injective matcher.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{
    Alphabets, Edge, EdgeDecomposition, EdgeLabel, Graph, NodeDecomposition, NodeId,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern and graph are written over different alphabets")]
    AlphabetMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternViolation {
    /// A forbidden edge is also a positive pattern edge.
    ForbiddenOverlapsPattern(Edge),
    /// A negative condition names a node outside the basic pattern.
    DanglingNegativeCondition(NodeId),
}

impl fmt::Display for PatternViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ForbiddenOverlapsPattern(e) => write!(
                f,
                "forbidden edge {} -> {} is also a pattern edge",
                e.source, e.target
            ),
            Self::DanglingNegativeCondition(n) => {
                write!(f, "negative condition refers to unknown pattern node `{n}`")
            }
        }
    }
}

/// Basic pattern plus forbidden edges, forbidden in-edges and forbidden out-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub basic: Graph,
    pub forbidden_edges: BTreeSet<Edge>,
    pub forbidden_in: BTreeSet<(NodeId, EdgeLabel)>,
    pub forbidden_out: BTreeSet<(NodeId, EdgeLabel)>,
}

impl Pattern {
    pub fn new(basic: Graph) -> Self {
        Self {
            basic,
            forbidden_edges: BTreeSet::new(),
            forbidden_in: BTreeSet::new(),
            forbidden_out: BTreeSet::new(),
        }
    }

    pub fn alphabets(&self) -> &Arc<Alphabets> {
        self.basic.alphabets()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> + '_ {
        self.basic.node_ids()
    }

    pub fn node_count(&self) -> usize {
        self.basic.node_count()
    }
}

/// Lists every structural problem of `p`; empty means valid.
pub fn check_pattern(p: &Pattern) -> Vec<PatternViolation> {
    let mut out = Vec::new();
    for e in &p.forbidden_edges {
        if p.basic.contains_edge(e) {
            out.push(PatternViolation::ForbiddenOverlapsPattern(e.clone()));
        }
        for end in [&e.source, &e.target] {
            if !p.basic.contains_node(end) {
                out.push(PatternViolation::DanglingNegativeCondition(end.clone()));
            }
        }
    }
    for (n, _) in p.forbidden_in.iter().chain(&p.forbidden_out) {
        if !p.basic.contains_node(n) {
            out.push(PatternViolation::DanglingNegativeCondition(n.clone()));
        }
    }
    out
}

/// Assignment of pattern nodes to host nodes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    pub assignment: BTreeMap<NodeId, NodeId>,
}

impl Matching {
    pub fn identity<'a>(nodes: impl IntoIterator<Item = &'a NodeId>) -> Self {
        Self {
            assignment: nodes.into_iter().map(|n| (n.clone(), n.clone())).collect(),
        }
    }

    pub fn get(&self, pattern_node: &NodeId) -> Option<&NodeId> {
        self.assignment.get(pattern_node)
    }

    pub fn image(&self) -> BTreeSet<NodeId> {
        self.assignment.values().cloned().collect()
    }

    pub fn map_edge(&self, e: &Edge) -> Option<Edge> {
        Some(Edge::new(
            self.get(&e.source)?.clone(),
            e.label,
            self.get(&e.target)?.clone(),
        ))
    }

    /// Decomposition of `g` induced by this matching of `p`.
    pub fn decompose(&self, p: &Pattern, g: &Graph) -> (NodeDecomposition, EdgeDecomposition) {
        let pattern_edges: BTreeSet<Edge> =
            p.basic.edges().filter_map(|e| self.map_edge(e)).collect();
        g.decompose_with_pattern_edges(&self.image(), &pattern_edges)
            .expect("matching image lies in the host graph")
    }
}

/// `b0=g0 b1=g1`
impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, g)) in self.assignment.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}={g}")?;
        }
        Ok(())
    }
}

fn same_alphabets(a: &Arc<Alphabets>, b: &Arc<Alphabets>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Edges to check when the node at a given search depth gets assigned.
struct Step {
    node: NodeId,
    // (other endpoint depth, label, pattern node is source)
    links: Vec<(usize, EdgeLabel, bool)>,
    has_loops: Vec<EdgeLabel>,
}

/// Compiled search plan for a pattern.
struct Plan {
    steps: Vec<Step>,
}

impl Plan {
    fn new(p: &Pattern) -> Self {
        let mut order: Vec<&NodeId> = p.basic.node_ids().collect();
        let degree = |n: &NodeId| p.basic.edges().filter(|e| e.touches(n)).count();
        // Most constrained first; ties keep id order (sort is stable).
        order.sort_by_key(|n| std::cmp::Reverse(degree(n)));
        let depth: BTreeMap<&NodeId, usize> =
            order.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let steps = order
            .iter()
            .enumerate()
            .map(|(d, n)| {
                let mut links = Vec::new();
                let mut has_loops = Vec::new();
                for e in p.basic.edges() {
                    let (ds, dt) = (depth[&e.source], depth[&e.target]);
                    if ds == d && dt == d {
                        has_loops.push(e.label);
                    } else if ds == d && dt < d {
                        links.push((dt, e.label, true));
                    } else if dt == d && ds < d {
                        links.push((ds, e.label, false));
                    }
                }
                Step {
                    node: (*n).clone(),
                    links,
                    has_loops,
                }
            })
            .collect();
        Self { steps }
    }
}

/// All matchings of `p` into `g`, in canonical assignment order.
pub fn find_matchings(p: &Pattern, g: &Graph) -> Result<Vec<Matching>, PatternError> {
    if !same_alphabets(p.alphabets(), g.alphabets()) {
        return Err(PatternError::AlphabetMismatch);
    }
    let plan = Plan::new(p);
    let mut chosen: Vec<NodeId> = Vec::with_capacity(plan.steps.len());
    let mut used: BTreeSet<NodeId> = BTreeSet::new();
    let mut out = Vec::new();
    search(p, g, &plan, &mut chosen, &mut used, &mut out);
    out.sort();
    Ok(out)
}

fn search(
    p: &Pattern,
    g: &Graph,
    plan: &Plan,
    chosen: &mut Vec<NodeId>,
    used: &mut BTreeSet<NodeId>,
    out: &mut Vec<Matching>,
) {
    let depth = chosen.len();
    if depth == plan.steps.len() {
        let m = Matching {
            assignment: plan
                .steps
                .iter()
                .zip(chosen.iter())
                .map(|(s, c)| (s.node.clone(), c.clone()))
                .collect(),
        };
        if negatives_hold(p, g, &m, used) {
            out.push(m);
        }
        return;
    }
    let step = &plan.steps[depth];
    let want = p.basic.label(&step.node);
    for (candidate, label) in g.nodes() {
        if Some(label) != want || used.contains(candidate) {
            continue;
        }
        let loops_ok = step
            .has_loops
            .iter()
            .all(|&l| g.has_edge(candidate, l, candidate));
        let links_ok = step.links.iter().all(|&(other, l, outgoing)| {
            let other = &chosen[other];
            if outgoing {
                g.has_edge(candidate, l, other)
            } else {
                g.has_edge(other, l, candidate)
            }
        });
        if !(loops_ok && links_ok) {
            continue;
        }
        chosen.push(candidate.clone());
        used.insert(candidate.clone());
        search(p, g, plan, chosen, used, out);
        used.remove(candidate);
        chosen.pop();
    }
}

/// The three negative conditions, given a total injective basic matching.
fn negatives_hold(p: &Pattern, g: &Graph, m: &Matching, image: &BTreeSet<NodeId>) -> bool {
    let forbidden_edge_absent = p
        .forbidden_edges
        .iter()
        .all(|e| m.map_edge(e).is_none_or(|img| !g.contains_edge(&img)));
    if !forbidden_edge_absent {
        return false;
    }
    let no_outside_in = p.forbidden_in.iter().all(|(n, l)| {
        let target = &m.assignment[n];
        !g.in_edges(target)
            .any(|e| e.label == *l && !image.contains(&e.source))
    });
    if !no_outside_in {
        return false;
    }
    p.forbidden_out.iter().all(|(n, l)| {
        let source = &m.assignment[n];
        !g.out_edges(source)
            .any(|e| e.label == *l && !image.contains(&e.target))
    })
}

/// Whether `candidate` is one of the matchings of `p` into `g`.
pub fn is_matching(p: &Pattern, g: &Graph, candidate: &BTreeMap<NodeId, NodeId>) -> bool {
    if !same_alphabets(p.alphabets(), g.alphabets()) {
        return false;
    }
    if candidate.len() != p.node_count() || p.nodes().any(|n| !candidate.contains_key(n)) {
        return false;
    }
    let image: BTreeSet<NodeId> = candidate.values().cloned().collect();
    if image.len() != candidate.len() {
        return false;
    }
    let labels_ok = p
        .basic
        .nodes()
        .all(|(n, l)| g.label(&candidate[n]) == Some(l));
    let m = Matching {
        assignment: candidate.clone(),
    };
    labels_ok
        && p.basic
            .edges()
            .all(|e| m.map_edge(e).is_some_and(|img| g.contains_edge(&img)))
        && negatives_hold(p, g, &m, &image)
}
