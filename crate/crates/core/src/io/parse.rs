//! Line-oriented parsers for graphs, rule systems, pipelines and weights.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::engine::{EngineError, Grs, Pipeline};
use crate::graph::{Alphabets, Edge, Graph, GraphError, NodeId};
use crate::pattern::Pattern;
use crate::rule::{Command, Rule, RuleError};
use crate::termination::{ContextualWeight, EdgeWeight, LexicographicWeight, NodeWeight};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: {source}")]
    Graph {
        line: usize,
        column: usize,
        source: GraphError,
    },
    #[error("{line}: rule `{rule}`: {source}")]
    Rule {
        line: usize,
        rule: String,
        source: RuleError,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        source: Box<ParseError>,
    },
}

impl ParseError {
    pub fn in_file(self, path: &Path) -> Self {
        ParseError::InFile {
            path: path.to_path_buf(),
            source: Box::new(self),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

impl<'a> Line<'a> {
    fn error(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.number,
            column,
            message: message.into(),
        }
    }

    fn keyword(&self) -> &'a str {
        self.tokens[0].text
    }

    /// Checks the argument count (keyword excluded).
    fn args(&self, expected: usize, usage: &str) -> Result<&[Token<'a>], ParseError> {
        let args = &self.tokens[1..];
        if args.len() != expected {
            let column = args
                .get(expected)
                .map_or_else(|| self.end_column(), |t| t.column);
            return Err(self.error(column, format!("expected `{usage}`")));
        }
        Ok(args)
    }

    fn end_column(&self) -> usize {
        let last = self.tokens.last().expect("non-empty line");
        last.column + last.text.chars().count()
    }

    fn graph_error(&self, token: Token<'_>, source: GraphError) -> ParseError {
        ParseError::Graph {
            line: self.number,
            column: token.column,
            source,
        }
    }

    fn integer(&self, token: Token<'_>) -> Result<i64, ParseError> {
        token
            .text
            .parse()
            .map_err(|_| self.error(token.column, format!("`{}` is not an integer", token.text)))
    }

    fn natural(&self, token: Token<'_>) -> Result<u32, ParseError> {
        token.text.parse().map_err(|_| {
            self.error(
                token.column,
                format!("`{}` is not a non-negative integer", token.text),
            )
        })
    }
}

/// Non-blank lines with `#` comments removed; columns count characters from 1.
fn lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let content = raw.split('#').next().unwrap_or("");
            let mut tokens = Vec::new();
            // (byte offset, column) of the token being read.
            let mut start: Option<(usize, usize)> = None;
            for (column, (byte, ch)) in content.char_indices().enumerate() {
                match (ch.is_whitespace(), start) {
                    (true, Some((s, c))) => {
                        tokens.push(Token {
                            text: &content[s..byte],
                            column: c,
                        });
                        start = None;
                    }
                    (false, None) => start = Some((byte, column + 1)),
                    _ => {}
                }
            }
            if let Some((s, c)) = start {
                tokens.push(Token {
                    text: &content[s..],
                    column: c,
                });
            }
            (!tokens.is_empty()).then_some(Line {
                number: i + 1,
                tokens,
            })
        })
        .collect()
}

fn add_node(
    g: &mut Graph,
    line: &Line<'_>,
    id: Token<'_>,
    label: Token<'_>,
) -> Result<(), ParseError> {
    let l = g
        .alphabets()
        .require_node_label(label.text)
        .map_err(|e| line.graph_error(label, e))?;
    g.insert_node(NodeId::new(id.text), l)
        .map_err(|e| line.graph_error(id, e))
}

fn edge(alphabets: &Alphabets, line: &Line<'_>, args: &[Token<'_>]) -> Result<Edge, ParseError> {
    let l = alphabets
        .require_edge_label(args[1].text)
        .map_err(|e| line.graph_error(args[1], e))?;
    Ok(Edge::new(
        NodeId::new(args[0].text),
        l,
        NodeId::new(args[2].text),
    ))
}

fn add_edge(g: &mut Graph, line: &Line<'_>, args: &[Token<'_>]) -> Result<(), ParseError> {
    let e = edge(g.alphabets(), line, args)?;
    g.insert_edge(e).map(|_| ()).map_err(|err| {
        let missing = match &err {
            GraphError::DanglingEdge { missing, .. } => missing.clone(),
            _ => String::new(),
        };
        let token = if args[0].text == missing {
            args[0]
        } else {
            args[2]
        };
        line.graph_error(token, err)
    })
}

/// Parses `node <id> <label>` and `edge <src> <label> <tgt>` lines.
///
/// Edges may name nodes declared further down; duplicate edges collapse.
pub fn parse_graph(text: &str, alphabets: &Arc<Alphabets>) -> Result<Graph, ParseError> {
    let lines = lines(text);
    let mut g = Graph::empty(alphabets.clone());
    for line in &lines {
        match line.keyword() {
            "node" => {
                let a = line.args(2, "node <id> <label>")?;
                add_node(&mut g, line, a[0], a[1])?;
            }
            "edge" => {
                line.args(3, "edge <source> <label> <target>")?;
            }
            other => {
                return Err(line.error(1, format!("unknown declaration `{other}`")));
            }
        }
    }
    for line in lines.iter().filter(|l| l.keyword() == "edge") {
        add_edge(&mut g, line, &line.tokens[1..])?;
    }
    Ok(g)
}

#[derive(PartialEq)]
enum Section {
    Header,
    Match,
    Commands,
}

struct RuleDraft<'a> {
    name: &'a str,
    line: usize,
    section: Section,
    pattern_lines: Vec<&'a Line<'a>>,
    negative_lines: Vec<&'a Line<'a>>,
    command_lines: Vec<&'a Line<'a>>,
}

impl RuleDraft<'_> {
    fn build(self, alphabets: &Arc<Alphabets>) -> Result<Rule, ParseError> {
        let mut basic = Graph::empty(alphabets.clone());
        for line in self.pattern_lines.iter().filter(|l| l.keyword() == "node") {
            add_node(&mut basic, line, line.tokens[1], line.tokens[2])?;
        }
        for line in self.pattern_lines.iter().filter(|l| l.keyword() == "edge") {
            add_edge(&mut basic, line, &line.tokens[1..])?;
        }
        let mut pattern = Pattern::new(basic);
        for line in &self.negative_lines {
            let t = &line.tokens;
            match t[1].text {
                "edge" => {
                    pattern
                        .forbidden_edges
                        .insert(edge(alphabets, line, &t[2..])?);
                }
                kind => {
                    let l = alphabets
                        .require_edge_label(t[3].text)
                        .map_err(|e| line.graph_error(t[3], e))?;
                    let entry = (NodeId::new(t[2].text), l);
                    if kind == "in" {
                        pattern.forbidden_in.insert(entry);
                    } else {
                        pattern.forbidden_out.insert(entry);
                    }
                }
            }
        }
        let mut commands = Vec::new();
        for line in &self.command_lines {
            let t = &line.tokens;
            let id = |i: usize| NodeId::new(t[i].text);
            let elabel = |i: usize| {
                alphabets
                    .require_edge_label(t[i].text)
                    .map_err(|e| line.graph_error(t[i], e))
            };
            commands.push(match line.keyword() {
                "label" => {
                    let l = alphabets
                        .require_node_label(t[2].text)
                        .map_err(|e| line.graph_error(t[2], e))?;
                    Command::Label(id(1), l)
                }
                "del_edge" => Command::DelEdge(id(1), elabel(2)?, id(3)),
                "add_edge" => Command::AddEdge(id(1), elabel(2)?, id(3)),
                "del_node" => Command::DelNode(id(1)),
                "shift" => Command::Shift(id(1), id(2)),
                _ => unreachable!("checked while reading"),
            });
        }
        Rule::new(self.name, pattern, commands).map_err(|source| {
            // Point at the offending command when there is one.
            let line = match &source {
                RuleError::InconsistentSequence { index, .. }
                | RuleError::DanglingCommandNode { index, .. }
                | RuleError::ReflexiveShift { index, .. } => self.command_lines[*index].number,
                _ => self.line,
            };
            ParseError::Rule {
                line,
                rule: self.name.to_string(),
                source,
            }
        })
    }
}

fn read_labels<'a>(line: &Line<'a>) -> Result<Vec<&'a str>, ParseError> {
    if line.tokens.len() < 2 {
        return Err(line.error(line.end_column(), "expected at least one label"));
    }
    Ok(line.tokens[1..].iter().map(|t| t.text).collect())
}

/// Parses a rule system: alphabet declarations followed by `rule … end` blocks.
pub fn parse_grs(text: &str) -> Result<Grs, ParseError> {
    let lines = lines(text);
    let mut node_labels: Option<(Vec<&str>, &Line<'_>)> = None;
    let mut edge_labels: Option<(Vec<&str>, &Line<'_>)> = None;
    let mut drafts: Vec<RuleDraft<'_>> = Vec::new();
    let mut open: Option<RuleDraft<'_>> = None;
    for line in &lines {
        let kw = line.keyword();
        let Some(draft) = open.as_mut() else {
            match kw {
                "node_labels" | "edge_labels" => {
                    if !drafts.is_empty() {
                        return Err(line.error(1, "alphabets must be declared before the rules"));
                    }
                    let slot = if kw == "node_labels" {
                        &mut node_labels
                    } else {
                        &mut edge_labels
                    };
                    if slot.is_some() {
                        return Err(line.error(1, format!("`{kw}` declared twice")));
                    }
                    *slot = Some((read_labels(line)?, line));
                }
                "rule" => {
                    let a = line.args(1, "rule <name>")?;
                    if drafts.iter().any(|d| d.name == a[0].text) {
                        return Err(
                            line.error(a[0].column, format!("duplicate rule `{}`", a[0].text))
                        );
                    }
                    open = Some(RuleDraft {
                        name: a[0].text,
                        line: line.number,
                        section: Section::Header,
                        pattern_lines: Vec::new(),
                        negative_lines: Vec::new(),
                        command_lines: Vec::new(),
                    });
                }
                _ => return Err(line.error(1, format!("unexpected `{kw}` outside a rule"))),
            }
            continue;
        };
        match kw {
            "end" => {
                line.args(0, "end")?;
                drafts.push(open.take().expect("open rule"));
            }
            "match" => {
                line.args(0, "match")?;
                if draft.section != Section::Header {
                    return Err(line.error(1, "`match` must come first in a rule"));
                }
                draft.section = Section::Match;
            }
            "commands" => {
                line.args(0, "commands")?;
                if draft.section == Section::Commands {
                    return Err(line.error(1, "`commands` given twice"));
                }
                draft.section = Section::Commands;
            }
            "node" | "edge" => {
                if draft.section != Section::Match {
                    return Err(line.error(1, format!("`{kw}` belongs in the `match` section")));
                }
                if kw == "node" {
                    line.args(2, "node <id> <label>")?;
                } else {
                    line.args(3, "edge <source> <label> <target>")?;
                }
                draft.pattern_lines.push(line);
            }
            "without" => {
                if draft.section == Section::Commands {
                    return Err(line.error(1, "negative conditions must precede `commands`"));
                }
                match line.tokens.get(1).map(|t| t.text) {
                    Some("edge") if line.tokens.len() == 5 => {}
                    Some("in" | "out") if line.tokens.len() == 4 => {}
                    _ => {
                        return Err(line.error(
                            line.tokens.get(1).map_or(line.end_column(), |t| t.column),
                            "expected `without edge <a> <label> <b>`, `without in <a> <label>` or `without out <a> <label>`",
                        ))
                    }
                }
                draft.negative_lines.push(line);
            }
            "label" | "del_edge" | "add_edge" | "del_node" | "shift" => {
                if draft.section != Section::Commands {
                    return Err(line.error(1, format!("`{kw}` belongs in the `commands` section")));
                }
                match kw {
                    "label" => line.args(2, "label <node> <label>")?,
                    "del_edge" => line.args(3, "del_edge <source> <label> <target>")?,
                    "add_edge" => line.args(3, "add_edge <source> <label> <target>")?,
                    "del_node" => line.args(1, "del_node <node>")?,
                    _ => line.args(2, "shift <from> <to>")?,
                };
                draft.command_lines.push(line);
            }
            _ => {
                return Err(line.error(1, format!("unexpected `{kw}` inside rule `{}`", draft.name)))
            }
        }
    }
    if let Some(d) = open {
        return Err(ParseError::Syntax {
            line: d.line,
            column: 1,
            message: format!("rule `{}` is missing `end`", d.name),
        });
    }
    let missing = |what: &str| ParseError::Syntax {
        line: lines.first().map_or(1, |l| l.number),
        column: 1,
        message: format!("missing `{what}` declaration"),
    };
    let (nodes, nline) = node_labels.ok_or_else(|| missing("node_labels"))?;
    let (edges, eline) = edge_labels.ok_or_else(|| missing("edge_labels"))?;
    let alphabets = Alphabets::new(nodes, edges).map_err(|e| {
        let line = match &e {
            GraphError::EmptyAlphabet(kind) | GraphError::DuplicateLabel { kind, .. }
                if *kind == "node" =>
            {
                nline
            }
            _ => eline,
        };
        line.graph_error(line.tokens[0], e)
    })?;
    let rules = drafts
        .into_iter()
        .map(|d| d.build(&alphabets))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Grs::new(alphabets, rules)?)
}

/// One `module <name> <path> [rule …]` line of a pipeline file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleEntry {
    pub name: String,
    pub path: String,
    /// Rules to keep, in file order; empty keeps every rule.
    pub rules: Vec<String>,
    pub line: usize,
}

pub fn parse_pipeline_entries(text: &str) -> Result<Vec<ModuleEntry>, ParseError> {
    let mut out: Vec<ModuleEntry> = Vec::new();
    for line in lines(text) {
        if line.keyword() != "module" {
            return Err(line.error(1, format!("unknown declaration `{}`", line.keyword())));
        }
        if line.tokens.len() < 3 {
            return Err(line.error(
                line.end_column(),
                "expected `module <name> <path> [rule ...]`",
            ));
        }
        let name = line.tokens[1];
        if out.iter().any(|m| m.name == name.text) {
            return Err(line.error(name.column, format!("duplicate module `{}`", name.text)));
        }
        out.push(ModuleEntry {
            name: name.text.to_string(),
            path: line.tokens[2].text.to_string(),
            rules: line.tokens[3..]
                .iter()
                .map(|t| t.text.to_string())
                .collect(),
            line: line.number,
        });
    }
    Ok(out)
}

/// Builds a pipeline, reading each module's rule file through `load`.
pub fn parse_pipeline_with(
    text: &str,
    mut load: impl FnMut(&str) -> Result<String, ParseError>,
) -> Result<Pipeline, ParseError> {
    let mut modules = Vec::new();
    for entry in parse_pipeline_entries(text)? {
        let grs = parse_grs(&load(&entry.path)?).map_err(|e| e.in_file(Path::new(&entry.path)))?;
        let grs = select_rules(grs, &entry)?;
        modules.push((entry.name, grs));
    }
    Ok(Pipeline::new(modules)?)
}

fn select_rules(grs: Grs, entry: &ModuleEntry) -> Result<Grs, ParseError> {
    if entry.rules.is_empty() {
        return Ok(grs);
    }
    let mut picked = Vec::new();
    for name in &entry.rules {
        let rule = grs.rule(name).ok_or_else(|| ParseError::Syntax {
            line: entry.line,
            column: 1,
            message: format!(
                "module `{}`: no rule `{name}` in {}",
                entry.name, entry.path
            ),
        })?;
        picked.push(rule.clone());
    }
    Ok(Grs::new(grs.alphabets().clone(), picked)?)
}

pub fn read_file(path: &Path) -> Result<String, ParseError> {
    std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a pipeline file; module paths are relative to its directory.
pub fn load_pipeline(path: &Path) -> Result<Pipeline, ParseError> {
    let text = read_file(path)?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    parse_pipeline_with(&text, |p| read_file(&base.join(p))).map_err(|e| e.in_file(path))
}

/// Contents of a weights file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weights {
    pub edge: EdgeWeight,
    pub node: NodeWeight,
    pub pis: Vec<ContextualWeight>,
}

impl Weights {
    pub fn lexicographic(&self) -> LexicographicWeight {
        LexicographicWeight {
            w0: self.edge.clone(),
            pis: self.pis.clone(),
        }
    }
}

/// Parses `edge`, `node` and `pi <a> <b> … end` lines. Unlisted entries are 0.
pub fn parse_weights(text: &str, alphabets: &Arc<Alphabets>) -> Result<Weights, ParseError> {
    let mut out = Weights {
        edge: EdgeWeight::zero(alphabets),
        node: NodeWeight::zero(alphabets),
        pis: Vec::new(),
    };
    let mut open: Option<(ContextualWeight, usize)> = None;
    for line in lines(text) {
        let node_entry = |line: &Line<'_>| -> Result<_, ParseError> {
            let a = line.args(2, "node <label> <int>")?;
            let l = alphabets
                .require_node_label(a[0].text)
                .map_err(|e| line.graph_error(a[0], e))?;
            Ok((l, line.integer(a[1])?))
        };
        match (line.keyword(), open.as_mut()) {
            ("edge", None) => {
                let a = line.args(2, "edge <label> <int>")?;
                let l = alphabets
                    .require_edge_label(a[0].text)
                    .map_err(|e| line.graph_error(a[0], e))?;
                out.edge.set(l, line.integer(a[1])?);
            }
            ("node", None) => {
                let (l, v) = node_entry(&line)?;
                out.node.set(l, v);
            }
            ("pi", None) => {
                let a = line.args(2, "pi <a> <b>")?;
                let pi = ContextualWeight::new(alphabets, line.natural(a[0])?, line.natural(a[1])?);
                open = Some((pi, line.number));
            }
            ("ctx", Some((pi, _))) => {
                let a = line.args(4, "ctx <node label> <edge label> <node label> <int>")?;
                let nl = |t: Token<'_>| {
                    alphabets
                        .require_node_label(t.text)
                        .map_err(|e| line.graph_error(t, e))
                };
                let el = alphabets
                    .require_edge_label(a[1].text)
                    .map_err(|e| line.graph_error(a[1], e))?;
                pi.set_omega(nl(a[0])?, el, nl(a[2])?, line.integer(a[3])?);
            }
            ("node", Some((pi, _))) => {
                let (l, v) = node_entry(&line)?;
                pi.eta.set(l, v);
            }
            ("end", Some(_)) => {
                line.args(0, "end")?;
                out.pis.push(open.take().expect("open block").0);
            }
            ("ctx", None) => return Err(line.error(1, "`ctx` is only allowed inside a `pi` block")),
            ("end", None) => return Err(line.error(1, "`end` without an open `pi` block")),
            (kw, Some(_)) => {
                return Err(line.error(1, format!("unexpected `{kw}` inside a `pi` block")))
            }
            (kw, None) => return Err(line.error(1, format!("unknown declaration `{kw}`"))),
        }
    }
    if let Some((_, number)) = open {
        return Err(ParseError::Syntax {
            line: number,
            column: 1,
            message: "`pi` block is missing `end`".into(),
        });
    }
    Ok(out)
}
