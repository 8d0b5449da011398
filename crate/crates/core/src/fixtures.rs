//! Small worked examples, embedded from `fixtures/` and parsed on demand.
//!
//! Used by the tests, the benchmarks and the acceptance suite. Every
//! constructor panics on a malformed fixture, which the tests would catch.

use std::sync::Arc;

use crate::engine::{Grs, Pipeline};
use crate::graph::{Alphabets, Edge, Graph, NodeId};
use crate::io::{parse_graph, parse_grs, parse_pipeline_with, parse_weights, ParseError};
use crate::termination::{EdgeWeight, LexicographicWeight};

/// Every fixture file, by file name.
pub const FILES: &[(&str, &str)] = &[
    ("example_g0.gr", include_str!("../fixtures/example_g0.gr")),
    (
        "example_patterns.grs",
        include_str!("../fixtures/example_patterns.grs"),
    ),
    ("counter.grs", include_str!("../fixtures/counter.grs")),
    ("counter_g1.gr", include_str!("../fixtures/counter_g1.gr")),
    ("counter_g2.gr", include_str!("../fixtures/counter_g2.gr")),
    (
        "counter_weights.kv",
        include_str!("../fixtures/counter_weights.kv"),
    ),
    ("clique.grs", include_str!("../fixtures/clique.grs")),
    ("clique3.gr", include_str!("../fixtures/clique3.gr")),
    (
        "clique_weights.kv",
        include_str!("../fixtures/clique_weights.kv"),
    ),
    ("local.grs", include_str!("../fixtures/local.grs")),
    ("local.pipeline", include_str!("../fixtures/local.pipeline")),
    ("local_lex.kv", include_str!("../fixtures/local_lex.kv")),
    ("chain3.gr", include_str!("../fixtures/chain3.gr")),
    (
        "chain3_expected.gr",
        include_str!("../fixtures/chain3_expected.gr"),
    ),
    ("raising.grs", include_str!("../fixtures/raising.grs")),
    ("raising.gr", include_str!("../fixtures/raising.gr")),
    (
        "raising_expected.gr",
        include_str!("../fixtures/raising_expected.gr"),
    ),
    ("passive.grs", include_str!("../fixtures/passive.grs")),
    (
        "passive_short.gr",
        include_str!("../fixtures/passive_short.gr"),
    ),
    (
        "passive_long.gr",
        include_str!("../fixtures/passive_long.gr"),
    ),
    (
        "passive_long_expected.gr",
        include_str!("../fixtures/passive_long_expected.gr"),
    ),
    ("vacuous.grs", include_str!("../fixtures/vacuous.grs")),
    ("vacuous.gr", include_str!("../fixtures/vacuous.gr")),
];

pub fn text(name: &str) -> &'static str {
    FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .unwrap_or_else(|| panic!("no fixture `{name}`"))
}

pub fn grs(name: &str) -> Grs {
    parse_grs(text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn graph(name: &str, alphabets: &Arc<Alphabets>) -> Graph {
    parse_graph(text(name), alphabets).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn edge_weight(name: &str, alphabets: &Arc<Alphabets>) -> EdgeWeight {
    parse_weights(text(name), alphabets)
        .unwrap_or_else(|e| panic!("{name}: {e}"))
        .edge
}

/// Host graph G0 of the matching examples.
pub fn example_g0(alphabets: &Arc<Alphabets>) -> Graph {
    graph("example_g0.gr", alphabets)
}

/// Rules P0, P1, P2 (no commands) over the pattern `b0 -A-> b1`.
pub fn example_patterns() -> Grs {
    grs("example_patterns.grs")
}

/// The looping system {Q1, Q2} with its two start graphs G1 and G2.
pub fn counter_example() -> (Grs, Graph, Graph) {
    let g = grs("counter.grs");
    let g1 = graph("counter_g1.gr", g.alphabets());
    let g2 = graph("counter_g2.gr", g.alphabets());
    (g, g1, g2)
}

/// A:1 B:1 C:-2.
pub fn counter_weight(alphabets: &Arc<Alphabets>) -> EdgeWeight {
    edge_weight("counter_weights.kv", alphabets)
}

pub fn clique_grs() -> Grs {
    grs("clique.grs")
}

fn clique_node(i: usize) -> NodeId {
    NodeId::new(&format!("c{i}"))
}

/// `n` nodes `c0 … c(n-1)` carrying the first node label, no edges.
pub fn edgeless(alphabets: &Arc<Alphabets>, n: usize) -> Graph {
    let label = alphabets.node_labels().next().expect("non-empty alphabet");
    let mut g = Graph::empty(alphabets.clone());
    for i in 0..n {
        g.insert_node(clique_node(i), label).expect("fresh id");
    }
    g
}

/// Complete graph with loops on `n` nodes: `n²` edges, all with the first edge label.
pub fn clique(alphabets: &Arc<Alphabets>, n: usize) -> Graph {
    let label = alphabets.edge_labels().next().expect("non-empty alphabet");
    let mut g = edgeless(alphabets, n);
    for i in 0..n {
        for j in 0..n {
            g.insert_edge(Edge::new(clique_node(i), label, clique_node(j)))
                .expect("nodes exist");
        }
    }
    g
}

pub fn vacuous_add_grs() -> Grs {
    grs("vacuous.grs")
}

pub fn vacuous_add_graph(alphabets: &Arc<Alphabets>) -> Graph {
    graph("vacuous.gr", alphabets)
}

/// Init, Rec, Stop and Clean in one system.
pub fn local_rules() -> Grs {
    grs("local.grs")
}

/// [Init, Rec, Stop] followed by [Clean].
pub fn local_pipeline() -> Pipeline {
    parse_pipeline_with(text("local.pipeline"), |name| {
        FILES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| t.to_string())
            .ok_or_else(|| ParseError::Syntax {
                line: 0,
                column: 0,
                message: format!("no fixture `{name}`"),
            })
    })
    .expect("pipeline fixture")
}

/// w0(A) = -1 and one contextual weight with ω(P,E,X) = 1, ω(Pd,E,X) = -1.
pub fn local_lex_weight(alphabets: &Arc<Alphabets>) -> LexicographicWeight {
    parse_weights(text("local_lex.kv"), alphabets)
        .expect("weights fixture")
        .lexicographic()
}

/// `p <-O- x1 <-O- … <-O- x_len <-M- m`, with p labelled P and the rest X.
pub fn chain(alphabets: &Arc<Alphabets>, len: usize) -> Graph {
    let l = |name: &str| alphabets.require_node_label(name).expect("chain alphabet");
    let e = |name: &str| alphabets.require_edge_label(name).expect("chain alphabet");
    let x = |i: usize| NodeId::new(&format!("x{i}"));
    let mut g = Graph::empty(alphabets.clone());
    g.insert_node(NodeId::new("p"), l("P")).unwrap();
    g.insert_node(NodeId::new("m"), l("X")).unwrap();
    for i in 1..=len {
        g.insert_node(x(i), l("X")).unwrap();
        let next = if i == 1 { NodeId::new("p") } else { x(i - 1) };
        g.insert_edge(Edge::new(x(i), e("O"), next)).unwrap();
    }
    let last = if len == 0 { NodeId::new("p") } else { x(len) };
    g.insert_edge(Edge::new(NodeId::new("m"), e("M"), last))
        .unwrap();
    g
}

/// The chain with the extra `p -A-> m` edge the pipeline should add.
pub fn chain_expected(alphabets: &Arc<Alphabets>, len: usize) -> Graph {
    let mut g = chain(alphabets, len);
    let a = alphabets.require_edge_label("A").expect("chain alphabet");
    g.insert_edge(Edge::new(NodeId::new("p"), a, NodeId::new("m")))
        .unwrap();
    g
}

pub fn raising() -> (Grs, Graph, Graph) {
    let g = grs("raising.grs");
    let start = graph("raising.gr", g.alphabets());
    let expected = graph("raising_expected.gr", g.alphabets());
    (g, start, expected)
}

pub fn passive() -> Grs {
    grs("passive.grs")
}
