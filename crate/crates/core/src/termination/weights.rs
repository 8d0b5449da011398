//! Edge weights, node weights and contextual weights.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::graph::{Alphabets, Edge, EdgeLabel, Graph, GraphError, NodeLabel};

/// Integer weight per edge label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeWeight {
    alphabets: Arc<Alphabets>,
    values: Vec<i64>,
}

impl EdgeWeight {
    pub fn zero(alphabets: &Arc<Alphabets>) -> Self {
        Self {
            alphabets: alphabets.clone(),
            values: vec![0; alphabets.edge_count()],
        }
    }

    /// Labels not listed weigh 0.
    pub fn from_pairs(
        alphabets: &Arc<Alphabets>,
        pairs: &[(&str, i64)],
    ) -> Result<Self, GraphError> {
        let mut w = Self::zero(alphabets);
        for (name, v) in pairs {
            w.set(alphabets.require_edge_label(name)?, *v);
        }
        Ok(w)
    }

    pub fn from_values(alphabets: &Arc<Alphabets>, values: Vec<i64>) -> Self {
        assert_eq!(
            values.len(),
            alphabets.edge_count(),
            "one weight per edge label"
        );
        Self {
            alphabets: alphabets.clone(),
            values,
        }
    }

    pub fn alphabets(&self) -> &Arc<Alphabets> {
        &self.alphabets
    }

    pub fn get(&self, label: EdgeLabel) -> i64 {
        self.values[label.index()]
    }

    pub fn set(&mut self, label: EdgeLabel, value: i64) {
        self.values[label.index()] = value;
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn negative_labels(&self) -> impl Iterator<Item = EdgeLabel> + '_ {
        self.alphabets.edge_labels().filter(|l| self.get(*l) < 0)
    }

    pub fn evaluate_edges<'a>(&self, edges: impl IntoIterator<Item = &'a Edge>) -> i64 {
        edges.into_iter().map(|e| self.get(e.label)).sum()
    }

    /// Largest absolute label weight.
    pub fn max_abs(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

pub fn evaluate_w(w: &EdgeWeight, g: &Graph) -> i64 {
    w.evaluate_edges(g.edges())
}

/// Integer weight per node label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeWeight {
    alphabets: Arc<Alphabets>,
    values: Vec<i64>,
}

impl NodeWeight {
    pub fn zero(alphabets: &Arc<Alphabets>) -> Self {
        Self {
            alphabets: alphabets.clone(),
            values: vec![0; alphabets.node_count()],
        }
    }

    pub fn from_pairs(
        alphabets: &Arc<Alphabets>,
        pairs: &[(&str, i64)],
    ) -> Result<Self, GraphError> {
        let mut w = Self::zero(alphabets);
        for (name, v) in pairs {
            w.set(alphabets.require_node_label(name)?, *v);
        }
        Ok(w)
    }

    pub fn get(&self, label: NodeLabel) -> i64 {
        self.values[label.index()]
    }

    pub fn set(&mut self, label: NodeLabel, value: i64) {
        self.values[label.index()] = value;
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn max_abs(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn alphabets(&self) -> &Arc<Alphabets> {
        &self.alphabets
    }
}

pub fn evaluate_eta(eta: &NodeWeight, g: &Graph) -> i64 {
    g.nodes().map(|(_, l)| eta.get(l)).sum()
}

/// `π(G) = a·ω(G) + b·η(G)`, where `ω` weighs an edge by its label and the
/// labels of both endpoints. Unlisted `ω` entries are 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextualWeight {
    pub a: u32,
    pub omega: BTreeMap<(NodeLabel, EdgeLabel, NodeLabel), i64>,
    pub b: u32,
    pub eta: NodeWeight,
}

impl ContextualWeight {
    pub fn new(alphabets: &Arc<Alphabets>, a: u32, b: u32) -> Self {
        Self {
            a,
            omega: BTreeMap::new(),
            b,
            eta: NodeWeight::zero(alphabets),
        }
    }

    pub fn alphabets(&self) -> &Arc<Alphabets> {
        self.eta.alphabets()
    }

    pub fn set_omega(&mut self, source: NodeLabel, label: EdgeLabel, target: NodeLabel, v: i64) {
        if v == 0 {
            self.omega.remove(&(source, label, target));
        } else {
            self.omega.insert((source, label, target), v);
        }
    }

    pub fn omega_of(&self, source: NodeLabel, label: EdgeLabel, target: NodeLabel) -> i64 {
        self.omega
            .get(&(source, label, target))
            .copied()
            .unwrap_or(0)
    }

    pub fn evaluate_omega(&self, g: &Graph) -> i64 {
        g.edges()
            .map(|e| {
                let (s, t) = (
                    g.label(&e.source).expect("edge endpoint"),
                    g.label(&e.target).expect("edge endpoint"),
                );
                self.omega_of(s, e.label, t)
            })
            .sum()
    }

    /// Whether relabelling an endpoint of an `label`-edge can change `π`.
    pub fn is_fragile(&self, label: EdgeLabel) -> bool {
        if self.a == 0 {
            return false;
        }
        let sigma = self.alphabets();
        let mut values = sigma
            .node_labels()
            .flat_map(|s| sigma.node_labels().map(move |t| (s, t)))
            .map(|(s, t)| self.omega_of(s, label, t));
        match values.next() {
            Some(first) => values.any(|v| v != first),
            None => false,
        }
    }

    pub fn fragile_labels(&self) -> Vec<EdgeLabel> {
        self.alphabets()
            .edge_labels()
            .filter(|l| self.is_fragile(*l))
            .collect()
    }

    pub fn max_abs_omega(&self) -> i64 {
        self.omega.values().map(|v| v.abs()).max().unwrap_or(0)
    }
}

pub fn evaluate_pi(pi: &ContextualWeight, g: &Graph) -> i64 {
    i64::from(pi.a) * pi.evaluate_omega(g) + i64::from(pi.b) * evaluate_eta(&pi.eta, g)
}

/// An edge weight followed by contextual weights, compared lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicographicWeight {
    pub w0: EdgeWeight,
    pub pis: Vec<ContextualWeight>,
}

impl LexicographicWeight {
    pub fn evaluate_pis(&self, g: &Graph) -> Vec<i64> {
        self.pis.iter().map(|pi| evaluate_pi(pi, g)).collect()
    }
}
