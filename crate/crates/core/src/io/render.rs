//! Text renderers; their output parses back to equal values.

use std::fmt::Write;

use crate::engine::Grs;
use crate::graph::Graph;
use crate::rule::Rule;

use super::parse::Weights;

pub fn render_graph(g: &Graph) -> String {
    let s = g.alphabets();
    let mut out = String::new();
    for (id, l) in g.nodes() {
        writeln!(out, "node {id} {}", s.node_name(l)).unwrap();
    }
    for e in g.edges() {
        writeln!(
            out,
            "edge {} {} {}",
            e.source,
            s.edge_name(e.label),
            e.target
        )
        .unwrap();
    }
    out
}

pub fn render_rule(r: &Rule) -> String {
    let s = r.alphabets();
    let p = r.pattern();
    let mut out = format!("rule {}\n  match\n", r.name());
    for line in render_graph(&p.basic).lines() {
        writeln!(out, "    {line}").unwrap();
    }
    for e in &p.forbidden_edges {
        writeln!(
            out,
            "  without edge {} {} {}",
            e.source,
            s.edge_name(e.label),
            e.target
        )
        .unwrap();
    }
    for (n, l) in &p.forbidden_in {
        writeln!(out, "  without in {n} {}", s.edge_name(*l)).unwrap();
    }
    for (n, l) in &p.forbidden_out {
        writeln!(out, "  without out {n} {}", s.edge_name(*l)).unwrap();
    }
    out.push_str("  commands\n");
    for c in r.commands() {
        writeln!(out, "    {}", c.display(s)).unwrap();
    }
    out.push_str("end\n");
    out
}

pub fn render_grs(grs: &Grs) -> String {
    let s = grs.alphabets();
    let names = |it: Vec<&str>| it.join(" ");
    let mut out = format!(
        "node_labels {}\nedge_labels {}\n",
        names(s.node_labels().map(|l| s.node_name(l)).collect()),
        names(s.edge_labels().map(|l| s.edge_name(l)).collect()),
    );
    for r in grs.rules() {
        out.push('\n');
        out.push_str(&render_rule(r));
    }
    out
}

/// Nonzero entries only.
pub fn render_weights(w: &Weights) -> String {
    let s = w.edge.alphabets();
    let mut out = String::new();
    for l in s.edge_labels().filter(|l| w.edge.get(*l) != 0) {
        writeln!(out, "edge {} {}", s.edge_name(l), w.edge.get(l)).unwrap();
    }
    for l in s.node_labels().filter(|l| w.node.get(*l) != 0) {
        writeln!(out, "node {} {}", s.node_name(l), w.node.get(l)).unwrap();
    }
    for pi in &w.pis {
        writeln!(out, "pi {} {}", pi.a, pi.b).unwrap();
        for ((n, e, m), v) in &pi.omega {
            writeln!(
                out,
                "  ctx {} {} {} {v}",
                s.node_name(*n),
                s.edge_name(*e),
                s.node_name(*m)
            )
            .unwrap();
        }
        for l in s.node_labels().filter(|l| pi.eta.get(*l) != 0) {
            writeln!(out, "  node {} {}", s.node_name(l), pi.eta.get(l)).unwrap();
        }
        out.push_str("end\n");
    }
    out
}
