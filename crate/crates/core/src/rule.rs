//! Rules: a pattern plus a consistent sequence of commands.
//!
//! Commands are applied left to right. `label`, `del_edge` and `add_edge`
//! only touch nodes and edges of the matched image; `del_node` drops a node
//! with every incident edge; `shift a b` moves every edge between the image
//! of `a` and non-image nodes over to the image of `b`, merging duplicates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{Alphabets, Edge, EdgeLabel, Graph, NodeId, NodeLabel};
use crate::pattern::{check_pattern, Matching, Pattern, PatternViolation};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Command {
    Label(NodeId, NodeLabel),
    DelEdge(NodeId, EdgeLabel, NodeId),
    AddEdge(NodeId, EdgeLabel, NodeId),
    DelNode(NodeId),
    Shift(NodeId, NodeId),
}

impl Command {
    pub fn nodes(&self) -> Vec<&NodeId> {
        match self {
            Command::Label(a, _) | Command::DelNode(a) => vec![a],
            Command::DelEdge(a, _, b) | Command::AddEdge(a, _, b) | Command::Shift(a, b) => {
                vec![a, b]
            }
        }
    }

    pub fn is_del_node(&self) -> bool {
        matches!(self, Command::DelNode(_))
    }

    pub fn is_shift(&self) -> bool {
        matches!(self, Command::Shift(..))
    }

    pub fn display<'a>(&'a self, alphabets: &'a Alphabets) -> CommandDisplay<'a> {
        CommandDisplay {
            command: self,
            alphabets,
        }
    }
}

pub struct CommandDisplay<'a> {
    command: &'a Command,
    alphabets: &'a Alphabets,
}

impl fmt::Display for CommandDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.alphabets;
        match self.command {
            Command::Label(a, l) => write!(f, "label {a} {}", s.node_name(*l)),
            Command::DelEdge(a, l, b) => write!(f, "del_edge {a} {} {b}", s.edge_name(*l)),
            Command::AddEdge(a, l, b) => write!(f, "add_edge {a} {} {b}", s.edge_name(*l)),
            Command::DelNode(a) => write!(f, "del_node {a}"),
            Command::Shift(a, b) => write!(f, "shift {a} {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("command {index} mentions `{node}` after it was deleted")]
    InconsistentSequence { index: usize, node: NodeId },
    #[error("command {index} mentions `{node}`, which is not a pattern node")]
    DanglingCommandNode { index: usize, node: NodeId },
    #[error("command {index} shifts `{node}` onto itself")]
    ReflexiveShift { index: usize, node: NodeId },
    #[error("invalid pattern: {0}")]
    InvalidPattern(PatternViolation),
    #[error("rule deletes nodes; only node-preserving rules qualify")]
    HasDelNode,
    #[error("command {index} refers to `{node}`, which the matching does not map into the graph")]
    NodeVanished { index: usize, node: NodeId },
}

/// First position where a deleted node is mentioned again, if any.
pub fn check_consistency(commands: &[Command]) -> Result<(), RuleError> {
    let mut deleted: BTreeSet<&NodeId> = BTreeSet::new();
    for (index, c) in commands.iter().enumerate() {
        if let Some(node) = c.nodes().into_iter().find(|n| deleted.contains(n)) {
            return Err(RuleError::InconsistentSequence {
                index,
                node: node.clone(),
            });
        }
        if let Command::DelNode(a) = c {
            deleted.insert(a);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    name: Arc<str>,
    pattern: Pattern,
    commands: Vec<Command>,
}

impl Rule {
    pub fn new(name: &str, pattern: Pattern, commands: Vec<Command>) -> Result<Self, RuleError> {
        if let Some(v) = check_pattern(&pattern).into_iter().next() {
            return Err(RuleError::InvalidPattern(v));
        }
        for (index, c) in commands.iter().enumerate() {
            if let Some(n) = c
                .nodes()
                .into_iter()
                .find(|n| !pattern.basic.contains_node(n))
            {
                return Err(RuleError::DanglingCommandNode {
                    index,
                    node: n.clone(),
                });
            }
            if let Command::Shift(a, b) = c {
                if a == b {
                    return Err(RuleError::ReflexiveShift {
                        index,
                        node: a.clone(),
                    });
                }
            }
        }
        check_consistency(&commands)?;
        Ok(Self {
            name: Arc::from(name),
            pattern,
            commands,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shared_name(&self) -> Arc<str> {
        self.name.clone()
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn alphabets(&self) -> &Arc<Alphabets> {
        self.pattern.alphabets()
    }

    pub fn is_node_preserving(&self) -> bool {
        !self.commands.iter().any(Command::is_del_node)
    }

    pub fn has_shift(&self) -> bool {
        self.commands.iter().any(Command::is_shift)
    }

    /// Added edges are all declared forbidden, deleted edges are all pattern
    /// edges. Judged on the effective commands.
    pub fn is_uniform(&self) -> Result<bool, RuleError> {
        if !self.is_node_preserving() {
            return Err(RuleError::HasDelNode);
        }
        let p = &self.pattern;
        Ok(effective_commands(&self.commands).iter().all(|c| match c {
            Command::AddEdge(a, l, b) => {
                p.forbidden_edges
                    .contains(&Edge::new(a.clone(), *l, b.clone()))
            }
            Command::DelEdge(a, l, b) => p.basic.has_edge(a, *l, b),
            _ => true,
        }))
    }

    pub fn shift_map(&self) -> ShiftMap {
        shift_map(self.pattern.nodes(), &self.commands)
    }

    /// Rewrites `g` at `matching`.
    pub fn apply(&self, g: &Graph, matching: &Matching) -> Result<Graph, RuleError> {
        apply_commands(g, matching, &self.commands)
    }
}

/// Drops add/del commands overridden by a later add/del on the same triple,
/// and labels overridden by a later label of the same node.
pub fn effective_commands(commands: &[Command]) -> Vec<Command> {
    let mut last_edge_cmd: BTreeMap<(&NodeId, EdgeLabel, &NodeId), usize> = BTreeMap::new();
    let mut last_label: BTreeMap<&NodeId, usize> = BTreeMap::new();
    for (i, c) in commands.iter().enumerate() {
        match c {
            Command::AddEdge(a, l, b) | Command::DelEdge(a, l, b) => {
                last_edge_cmd.insert((a, *l, b), i);
            }
            Command::Label(a, _) => {
                last_label.insert(a, i);
            }
            _ => {}
        }
    }
    commands
        .iter()
        .enumerate()
        .filter(|(i, c)| match c {
            Command::AddEdge(a, l, b) | Command::DelEdge(a, l, b) => {
                last_edge_cmd[&(a, *l, b)] == *i
            }
            Command::Label(a, _) => last_label[a] == *i,
            _ => true,
        })
        .map(|(_, c)| c.clone())
        .collect()
}

/// Where each pattern node's outside edges end up after all shifts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftMap {
    pub mapping: BTreeMap<NodeId, NodeId>,
}

impl ShiftMap {
    pub fn apply<'a>(&'a self, n: &'a NodeId) -> &'a NodeId {
        self.mapping.get(n).unwrap_or(n)
    }

    pub fn range(&self) -> BTreeSet<&NodeId> {
        self.mapping.values().collect()
    }

    pub fn preimage(&self, n: &NodeId) -> BTreeSet<&NodeId> {
        self.mapping
            .iter()
            .filter(|(_, v)| *v == n)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().all(|(k, v)| k == v)
    }
}

/// Composes the shifts of `commands` over `nodes`, starting from the identity.
pub fn shift_map<'a>(
    nodes: impl IntoIterator<Item = &'a NodeId>,
    commands: &[Command],
) -> ShiftMap {
    let mut mapping: BTreeMap<NodeId, NodeId> =
        nodes.into_iter().map(|n| (n.clone(), n.clone())).collect();
    for c in commands {
        if let Command::Shift(from, to) = c {
            for v in mapping.values_mut() {
                if v == from {
                    *v = to.clone();
                }
            }
        }
    }
    ShiftMap { mapping }
}

/// `g` rewritten by `commands` under `matching`.
pub fn apply_commands(
    g: &Graph,
    matching: &Matching,
    commands: &[Command],
) -> Result<Graph, RuleError> {
    check_consistency(commands)?;
    let mut out = g.clone();
    let mut image: BTreeSet<NodeId> = matching.image();
    for (index, c) in commands.iter().enumerate() {
        let resolve = |n: &NodeId, out: &Graph| -> Result<NodeId, RuleError> {
            matching
                .get(n)
                .filter(|m| out.contains_node(m))
                .cloned()
                .ok_or_else(|| RuleError::NodeVanished {
                    index,
                    node: n.clone(),
                })
        };
        match c {
            Command::Label(a, l) => {
                let a = resolve(a, &out)?;
                out.set_label(&a, *l);
            }
            Command::DelEdge(a, l, b) => {
                let e = Edge::new(resolve(a, &out)?, *l, resolve(b, &out)?);
                out.remove_edge(&e);
            }
            Command::AddEdge(a, l, b) => {
                let e = Edge::new(resolve(a, &out)?, *l, resolve(b, &out)?);
                out.add_edge_unchecked(e);
            }
            Command::DelNode(a) => {
                let a = resolve(a, &out)?;
                out.remove_node(&a);
                image.remove(&a);
            }
            Command::Shift(a, b) => {
                let (a, b) = (resolve(a, &out)?, resolve(b, &out)?);
                // Edges joining `a` to the crown; edges inside the image and
                // edges among non-image nodes stay put.
                let moved = out.take_edges_where(|e| {
                    (e.source == a && !image.contains(&e.target))
                        || (e.target == a && !image.contains(&e.source))
                });
                for e in moved {
                    let redirected = if e.source == a {
                        Edge::new(b.clone(), e.label, e.target)
                    } else {
                        Edge::new(e.source, e.label, b.clone())
                    };
                    out.add_edge_unchecked(redirected);
                }
            }
        }
    }
    Ok(out)
}
