//! Text formats.
//!
//! All formats are line oriented with one declaration per line and `#`
//! comments. Graphs:
//!
//! ```text
//! node g0 alpha
//! edge g0 A g1
//! ```
//!
//! Rule systems declare both alphabets, then `rule <name> … end` blocks:
//!
//! ```text
//! node_labels e
//! edge_labels A B
//! rule R
//!   match
//!     node a e
//!     node b e
//!     edge a A b
//!   without edge b B a
//!   without in a B
//!   commands
//!     del_edge a A b
//!     add_edge b B a
//! end
//! ```
//!
//! Pipelines list `module <name> <rule file> [rule …]`, with paths relative
//! to the pipeline file. Weights files hold `edge <label> <int>`,
//! `node <label> <int>` and `pi <a> <b> … end` blocks of `ctx` and `node`
//! lines.

mod parse;
mod render;

pub use parse::{
    load_pipeline, parse_graph, parse_grs, parse_pipeline_entries, parse_pipeline_with,
    parse_weights, read_file, ModuleEntry, ParseError, Weights,
};
pub use render::{render_graph, render_grs, render_rule, render_weights};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::{make_graph, Alphabets};
    use crate::rule::RuleError;

    #[test]
    fn small_graph() {
        let s = Alphabets::new(["alpha", "beta"], ["A"]).unwrap();
        let g = parse_graph("node g0 alpha\nnode g1 beta\nedge g0 A g1", &s).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert!(parse_graph("", &s).unwrap().is_empty());
        assert!(parse_graph("# nothing\n\n", &s).unwrap().is_empty());
    }

    #[test]
    fn g0_file_matches_hand_built_graph() {
        let s = fixtures::example_patterns().alphabets().clone();
        let hand = make_graph(
            &s,
            &[("g0", "alpha"), ("g1", "beta"), ("g2", "alpha")],
            &[
                ("g0", "A", "g1"),
                ("g0", "B", "g1"),
                ("g0", "D", "g2"),
                ("g1", "C", "g2"),
                ("g2", "A", "g1"),
                ("g0", "E", "g0"),
            ],
        )
        .unwrap();
        assert_eq!(fixtures::example_g0(&s), hand);
    }

    #[test]
    fn every_fixture_round_trips() {
        for (name, text) in fixtures::FILES {
            if name.ends_with(".grs") {
                let g = parse_grs(text).unwrap();
                assert_eq!(parse_grs(&render_grs(&g)).unwrap(), g, "{name}");
            }
        }
        let local = fixtures::local_rules();
        for (name, _) in fixtures::FILES.iter().filter(|(n, _)| n.ends_with(".gr")) {
            let s = if name.starts_with("example") {
                fixtures::example_patterns().alphabets().clone()
            } else if name.starts_with("counter") {
                fixtures::counter_example().0.alphabets().clone()
            } else if name.starts_with("clique") {
                fixtures::clique_grs().alphabets().clone()
            } else if name.starts_with("chain") {
                local.alphabets().clone()
            } else if name.starts_with("vacuous") {
                fixtures::vacuous_add_grs().alphabets().clone()
            } else {
                fixtures::passive().alphabets().clone()
            };
            let g = fixtures::graph(name, &s);
            assert_eq!(parse_graph(&render_graph(&g), &s).unwrap(), g, "{name}");
        }
        let w = parse_weights(fixtures::text("local_lex.kv"), local.alphabets()).unwrap();
        assert_eq!(
            parse_weights(&render_weights(&w), local.alphabets()).unwrap(),
            w
        );
    }

    #[test]
    fn known_systems_parse() {
        let (q, _, _) = fixtures::counter_example();
        let names: Vec<&str> = q.rules().iter().map(|r| r.name()).collect();
        assert_eq!(names, ["Q1", "Q2"]);
        let local = fixtures::local_rules();
        let names: Vec<&str> = local.rules().iter().map(|r| r.name()).collect();
        assert_eq!(names, ["Init", "Rec", "Stop", "Clean"]);
        let p = fixtures::local_pipeline();
        let sizes: Vec<(&str, usize)> = p
            .modules()
            .iter()
            .map(|(n, g)| (n.as_str(), g.rules().len()))
            .collect();
        assert_eq!(sizes, [("spread", 3), ("clean", 1)]);
    }

    #[test]
    fn inconsistent_commands_are_reported_with_their_line() {
        let text = "node_labels X\nedge_labels A\nrule R\n  match\n    node a X\n  commands\n    del_node a\n    label a X\nend\n";
        match parse_grs(text) {
            Err(ParseError::Rule {
                line: 8,
                source: RuleError::InconsistentSequence { index: 1, .. },
                ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let s = Alphabets::new(["alpha"], ["A"]).unwrap();
        let err = parse_graph("node a alpha\n  edge a A\n", &s).unwrap_err();
        assert_eq!(
            err.to_string(),
            "2:11: expected `edge <source> <label> <target>`"
        );
        let err = parse_graph("node a gamma\n", &s).unwrap_err();
        assert_eq!(err.to_string(), "1:8: unknown node label `gamma`");
        let err = parse_graph("node a alpha\nedge a A b\n", &s).unwrap_err();
        assert!(err.to_string().starts_with("2:10: "), "{err}");
        let err = parse_grs("node_labels X\nedge_labels A\nrule R\n").unwrap_err();
        assert_eq!(err.to_string(), "3:1: rule `R` is missing `end`");
        let err =
            parse_grs("node_labels X\nedge_labels A\nrule R\n  commands\n    node a X\nend\n")
                .unwrap_err();
        assert!(err.to_string().starts_with("5:1: "), "{err}");
        let err = parse_grs("edge_labels A\n").unwrap_err();
        assert!(err.to_string().contains("node_labels"), "{err}");
    }

    #[test]
    fn forbidden_pattern_edge_is_rejected() {
        let text = "node_labels X\nedge_labels A\nrule R\n  match\n    node a X\n    edge a A a\n  without edge a A a\nend\n";
        assert!(matches!(
            parse_grs(text),
            Err(ParseError::Rule {
                source: RuleError::InvalidPattern(_),
                ..
            })
        ));
    }

    #[test]
    fn weights_format() {
        let s = fixtures::local_rules().alphabets().clone();
        let err = parse_weights("ctx P E X 1\n", &s).unwrap_err();
        assert!(err.to_string().contains("inside a `pi` block"), "{err}");
        let err = parse_weights("pi 1 0\n", &s).unwrap_err();
        assert!(err.to_string().contains("missing `end`"), "{err}");
        let err = parse_weights("pi -1 0\nend\n", &s).unwrap_err();
        assert!(err.to_string().starts_with("1:4: "), "{err}");
        let w = parse_weights("edge A -1\nnode X 2\n", &s).unwrap();
        assert_eq!(w.edge.get(s.edge_label("A").unwrap()), -1);
        assert_eq!(w.node.get(s.node_label("X").unwrap()), 2);
        assert!(w.pis.is_empty());
    }

    #[test]
    fn pipeline_entries() {
        let e = parse_pipeline_entries("module a x.grs\nmodule b y.grs R S\n").unwrap();
        assert_eq!(e[1].rules, ["R", "S"]);
        assert!(parse_pipeline_entries("module a x.grs\nmodule a y.grs\n").is_err());
        assert!(parse_pipeline_entries("stage a x.grs\n").is_err());
    }
}
