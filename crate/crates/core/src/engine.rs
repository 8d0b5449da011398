//! Rewrite steps, normalization, module pipelines and state-space exploration.
//!
//! Rewriting never creates nodes, so every graph reachable from `G` has at
//! most `|G|` nodes and the reachable set is finite. [`explore`] enumerates it
//! breadth-first by exact identity, which decides termination from a given
//! start graph and yields its derivation height.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{Alphabets, CanonicalKey, Graph};
use crate::par::Execution;
use crate::pattern::{find_matchings, Matching, PatternError};
use crate::rule::{Rule, RuleError};

pub const DEFAULT_STATE_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("graph is written over a different alphabet than the rule system")]
    AlphabetMismatch,
    #[error("rule `{rule}` is written over a different alphabet than the rule system")]
    RuleAlphabetMismatch { rule: String },
    #[error("module `{module}` does not share the pipeline's alphabet")]
    ModuleAlphabetMismatch { module: String },
    #[error("fuel exhausted in module `{module}` after {steps} steps")]
    FuelExhausted {
        module: String,
        steps: usize,
        graph: Box<Graph>,
    },
    #[error("the rule system does not terminate from this graph")]
    NotTerminating,
    #[error("state limit reached after {states} states")]
    LimitExceeded { states: usize },
    #[error(transparent)]
    Rule(#[from] RuleError),
}

impl From<PatternError> for EngineError {
    fn from(e: PatternError) -> Self {
        match e {
            PatternError::AlphabetMismatch => EngineError::AlphabetMismatch,
        }
    }
}

/// A graph rewrite system: rules over one pair of alphabets, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grs {
    alphabets: Arc<Alphabets>,
    rules: Vec<Rule>,
}

impl Grs {
    pub fn new(alphabets: Arc<Alphabets>, rules: Vec<Rule>) -> Result<Self, EngineError> {
        for r in &rules {
            if !Arc::ptr_eq(r.alphabets(), &alphabets) && **r.alphabets() != *alphabets {
                return Err(EngineError::RuleAlphabetMismatch {
                    rule: r.name().to_string(),
                });
            }
        }
        Ok(Self { alphabets, rules })
    }

    pub fn alphabets(&self) -> &Arc<Alphabets> {
        &self.alphabets
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name() == name)
    }

    fn check_graph(&self, g: &Graph) -> Result<(), EngineError> {
        if Arc::ptr_eq(g.alphabets(), &self.alphabets) || **g.alphabets() == *self.alphabets {
            Ok(())
        } else {
            Err(EngineError::AlphabetMismatch)
        }
    }
}

/// Named modules applied one after another, each to a normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pipeline {
    modules: Vec<(String, Grs)>,
}

impl Pipeline {
    pub fn new(modules: Vec<(String, Grs)>) -> Result<Self, EngineError> {
        if let Some((_, first)) = modules.first() {
            for (name, grs) in &modules {
                if **grs.alphabets() != **first.alphabets() {
                    return Err(EngineError::ModuleAlphabetMismatch {
                        module: name.clone(),
                    });
                }
            }
        }
        Ok(Self { modules })
    }

    pub fn modules(&self) -> &[(String, Grs)] {
        &self.modules
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: usize,
    pub rule_name: Arc<str>,
    pub matching: Matching,
    pub result: Graph,
}

/// Every one-step rewrite of `g`: rules in declaration order, matchings in
/// canonical order. Steps whose result equals `g` are included.
pub fn step_all(grs: &Grs, g: &Graph) -> Result<Vec<RewriteStep>, EngineError> {
    grs.check_graph(g)?;
    let mut out = Vec::new();
    for (i, rule) in grs.rules.iter().enumerate() {
        for matching in find_matchings(rule.pattern(), g)? {
            let result = rule.apply(g, &matching)?;
            out.push(RewriteStep {
                rule: i,
                rule_name: rule.shared_name(),
                matching,
                result,
            });
        }
    }
    Ok(out)
}

/// The first entry of [`step_all`], without computing the rest.
pub fn first_step(grs: &Grs, g: &Graph) -> Result<Option<RewriteStep>, EngineError> {
    grs.check_graph(g)?;
    for (i, rule) in grs.rules.iter().enumerate() {
        if let Some(matching) = find_matchings(rule.pattern(), g)?.into_iter().next() {
            let result = rule.apply(g, &matching)?;
            return Ok(Some(RewriteStep {
                rule: i,
                rule_name: rule.shared_name(),
                matching,
                result,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeStatus {
    NormalForm,
    FuelExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub graph: Graph,
    pub steps: usize,
    pub status: NormalizeStatus,
}

/// Rewrites with the first available step until none applies or `fuel` steps
/// have been taken.
pub fn normalize(grs: &Grs, g: &Graph, fuel: usize) -> Result<Normalized, EngineError> {
    normalize_traced(grs, g, fuel, |_| {})
}

pub fn normalize_traced(
    grs: &Grs,
    g: &Graph,
    fuel: usize,
    mut on_step: impl FnMut(&RewriteStep),
) -> Result<Normalized, EngineError> {
    let mut current = g.clone();
    let mut steps = 0;
    loop {
        if steps == fuel {
            // Out of fuel only counts if another step was available.
            let status = if first_step(grs, &current)?.is_some() {
                NormalizeStatus::FuelExhausted
            } else {
                NormalizeStatus::NormalForm
            };
            return Ok(Normalized {
                graph: current,
                steps,
                status,
            });
        }
        match first_step(grs, &current)? {
            None => {
                return Ok(Normalized {
                    graph: current,
                    steps,
                    status: NormalizeStatus::NormalForm,
                })
            }
            Some(step) => {
                on_step(&step);
                current = step.result;
                steps += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineRun {
    pub graph: Graph,
    /// Steps taken by each module, in order.
    pub steps: Vec<(String, usize)>,
}

pub fn run_pipeline(p: &Pipeline, g: &Graph, fuel: usize) -> Result<PipelineRun, EngineError> {
    run_pipeline_traced(p, g, fuel, |_, _| {})
}

pub fn run_pipeline_traced(
    p: &Pipeline,
    g: &Graph,
    fuel: usize,
    mut on_step: impl FnMut(&str, &RewriteStep),
) -> Result<PipelineRun, EngineError> {
    let mut current = g.clone();
    let mut steps = Vec::with_capacity(p.modules.len());
    for (name, grs) in &p.modules {
        let n = normalize_traced(grs, &current, fuel, |s| on_step(name, s))?;
        if n.status == NormalizeStatus::FuelExhausted {
            return Err(EngineError::FuelExhausted {
                module: name.clone(),
                steps: n.steps,
                graph: Box::new(n.graph),
            });
        }
        steps.push((name.clone(), n.steps));
        current = n.graph;
    }
    Ok(PipelineRun {
        graph: current,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub rule: usize,
    pub matching: Matching,
    pub target: usize,
}

/// The explored part of the reachable-state graph.
///
/// State 0 is the start graph; states are numbered in discovery (BFS) order.
#[derive(Debug, Clone)]
pub struct DerivationSpace {
    states: Vec<Graph>,
    depth: Vec<usize>,
    index: HashMap<CanonicalKey, usize>,
    transitions: Vec<Vec<Transition>>,
    expanded: Vec<bool>,
    complete: bool,
}

impl DerivationSpace {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    pub fn state(&self, i: usize) -> &Graph {
        &self.states[i]
    }

    pub fn states(&self) -> &[Graph] {
        &self.states
    }

    pub fn index_of(&self, key: &CanonicalKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Outgoing transitions of state `i`; empty for unexpanded states.
    pub fn transitions(&self, i: usize) -> &[Transition] {
        &self.transitions[i]
    }

    pub fn is_expanded(&self, i: usize) -> bool {
        self.expanded[i]
    }

    /// Whether every reachable state was recorded and expanded.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Largest BFS distance from the start among recorded states.
    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// A reachable cycle, as (entry path, cycle) state/transition index pairs.
    fn find_cycle(&self) -> Option<(Path, Path)> {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let mut color = vec![Color::White; self.states.len()];
        // (state, index of the next transition to try)
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        color[0] = Color::Gray;
        while let Some(&mut (s, ref mut next)) = stack.last_mut() {
            if *next >= self.transitions[s].len() {
                color[s] = Color::Black;
                stack.pop();
                continue;
            }
            let t_idx = *next;
            *next += 1;
            let t = self.transitions[s][t_idx].target;
            match color[t] {
                Color::White => {
                    color[t] = Color::Gray;
                    stack.push((t, 0));
                }
                Color::Gray => {
                    // Frames hold the transition already taken as `next - 1`.
                    let path: Vec<(usize, usize)> =
                        stack.iter().map(|&(st, nx)| (st, nx - 1)).collect();
                    let start = path
                        .iter()
                        .position(|&(st, _)| st == t)
                        .expect("gray is on stack");
                    return Some((path[..start].to_vec(), path[start..].to_vec()));
                }
                Color::Black => {}
            }
        }
        None
    }

    /// Longest path from the start, assuming the space is acyclic.
    fn longest_path(&self) -> usize {
        let n = self.states.len();
        let mut height: Vec<Option<usize>> = vec![None; n];
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        while let Some(&mut (s, ref mut next)) = stack.last_mut() {
            let ts = &self.transitions[s];
            if *next < ts.len() {
                let t = ts[*next].target;
                *next += 1;
                if height[t].is_none() {
                    stack.push((t, 0));
                }
            } else {
                let h = ts
                    .iter()
                    .map(|tr| height[tr.target].expect("acyclic: successors finished") + 1)
                    .max()
                    .unwrap_or(0);
                height[s] = Some(h);
                stack.pop();
            }
        }
        height[0].unwrap_or(0)
    }

    fn trace_step(&self, grs: &Grs, (state, t_idx): (usize, usize)) -> TraceStep {
        let t = &self.transitions[state][t_idx];
        TraceStep {
            rule: t.rule,
            rule_name: grs.rules[t.rule].shared_name(),
            matching: t.matching.clone(),
            source: self.states[state].clone(),
            target: self.states[t.target].clone(),
            source_state: state,
            target_state: t.target,
        }
    }

    /// Termination verdict for the explored space.
    pub fn verdict(&self, grs: &Grs) -> TerminationVerdict {
        let states = self.states.len();
        if let Some((entry, cycle)) = self.find_cycle() {
            return TerminationVerdict::Loops {
                witness: LoopWitness {
                    entry: entry.into_iter().map(|p| self.trace_step(grs, p)).collect(),
                    cycle: cycle.into_iter().map(|p| self.trace_step(grs, p)).collect(),
                },
                states,
            };
        }
        if !self.complete {
            return TerminationVerdict::LimitExceeded { states };
        }
        TerminationVerdict::Terminates {
            height: self.longest_path(),
            states,
        }
    }
}

/// Breadth-first exploration of the states reachable from `g`, recording at
/// most `state_limit` states.
pub fn explore(grs: &Grs, g: &Graph, state_limit: usize) -> Result<DerivationSpace, EngineError> {
    explore_with(grs, g, state_limit, Execution::default())
}

/// (state, transition) index pairs.
type Path = Vec<(usize, usize)>;

const FRONTIER_CHUNK: usize = 1024;

pub fn explore_with(
    grs: &Grs,
    g: &Graph,
    state_limit: usize,
    exec: Execution,
) -> Result<DerivationSpace, EngineError> {
    grs.check_graph(g)?;
    let state_limit = state_limit.max(1);
    let mut space = DerivationSpace {
        states: vec![g.clone()],
        depth: vec![0],
        index: HashMap::from([(g.canonical_key(), 0)]),
        transitions: vec![Vec::new()],
        expanded: vec![false],
        complete: false,
    };
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let mut next_frontier = Vec::new();
        for chunk in frontier.chunks(FRONTIER_CHUNK) {
            let expansions = exec.map(chunk, |&s| -> Result<Vec<_>, EngineError> {
                Ok(step_all(grs, &space.states[s])?
                    .into_iter()
                    .map(|step| {
                        let key = step.result.canonical_key();
                        (step, key)
                    })
                    .collect())
            });
            for (&s, expansion) in chunk.iter().zip(expansions) {
                let mut trans = Vec::new();
                for (step, key) in expansion? {
                    let target = match space.index.get(&key) {
                        Some(&t) => t,
                        None => {
                            if space.states.len() >= state_limit {
                                // `s` stays unexpanded; its partial transitions are dropped.
                                return Ok(space);
                            }
                            let t = space.states.len();
                            space.index.insert(key, t);
                            space.states.push(step.result);
                            space.depth.push(space.depth[s] + 1);
                            space.transitions.push(Vec::new());
                            space.expanded.push(false);
                            next_frontier.push(t);
                            t
                        }
                    };
                    trans.push(Transition {
                        rule: step.rule,
                        matching: step.matching,
                        target,
                    });
                }
                space.transitions[s] = trans;
                space.expanded[s] = true;
            }
        }
        frontier = next_frontier;
    }
    space.complete = true;
    Ok(space)
}

/// One rewrite step of a witness, with both graphs materialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: usize,
    pub rule_name: Arc<str>,
    pub matching: Matching,
    pub source: Graph,
    pub target: Graph,
    pub source_state: usize,
    pub target_state: usize,
}

/// A path from the start graph to a cycle, and the cycle itself.
///
/// The cycle's last target is its first source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopWitness {
    pub entry: Vec<TraceStep>,
    pub cycle: Vec<TraceStep>,
}

impl LoopWitness {
    /// State indices along entry and cycle, ending with the repeated state.
    pub fn state_path(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .entry
            .iter()
            .chain(&self.cycle)
            .map(|s| s.source_state)
            .collect();
        if let Some(last) = self.cycle.last() {
            out.push(last.target_state);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TerminationVerdict {
    Terminates { height: usize, states: usize },
    Loops { witness: LoopWitness, states: usize },
    LimitExceeded { states: usize },
}

impl TerminationVerdict {
    pub fn states(&self) -> usize {
        match self {
            Self::Terminates { states, .. }
            | Self::Loops { states, .. }
            | Self::LimitExceeded { states } => *states,
        }
    }
}

pub fn decide_termination_from(
    grs: &Grs,
    g: &Graph,
    state_limit: usize,
) -> Result<TerminationVerdict, EngineError> {
    Ok(explore(grs, g, state_limit)?.verdict(grs))
}

/// Length of the longest derivation from `g`.
pub fn derivation_height_of(
    grs: &Grs,
    g: &Graph,
    state_limit: usize,
) -> Result<usize, EngineError> {
    match decide_termination_from(grs, g, state_limit)? {
        TerminationVerdict::Terminates { height, .. } => Ok(height),
        TerminationVerdict::Loops { .. } => Err(EngineError::NotTerminating),
        TerminationVerdict::LimitExceeded { states } => Err(EngineError::LimitExceeded { states }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn counter_example_single_step() {
        let (grs, g1, g2) = fixtures::counter_example();
        let steps = step_all(&grs, &g1).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(&*steps[0].rule_name, "Q1");
        assert_eq!(steps[0].result, g2);
        assert_eq!(steps[0].matching.to_string(), "0=1 1=2");
    }

    #[test]
    fn empty_systems_do_nothing() {
        let (grs, g1, _) = fixtures::counter_example();
        let empty = Grs::new(grs.alphabets().clone(), vec![]).unwrap();
        assert!(step_all(&empty, &g1).unwrap().is_empty());
        let space = explore(&empty, &g1, 10).unwrap();
        assert_eq!((space.state_count(), space.transition_count()), (1, 0));
        assert_eq!(
            decide_termination_from(&empty, &g1, 1).unwrap(),
            TerminationVerdict::Terminates {
                height: 0,
                states: 1
            }
        );
    }

    #[test]
    fn clique_single_node_has_no_steps() {
        let grs = fixtures::clique_grs();
        let lone = fixtures::edgeless(grs.alphabets(), 1);
        assert!(step_all(&grs, &lone).unwrap().is_empty());
    }

    #[test]
    fn normalize_counter_example_runs_out_of_fuel() {
        let (grs, g1, _) = fixtures::counter_example();
        let n = normalize(&grs, &g1, 5).unwrap();
        assert_eq!(n.status, NormalizeStatus::FuelExhausted);
        assert_eq!(n.steps, 5);
    }

    #[test]
    fn normalize_clique() {
        let grs = fixtures::clique_grs();
        let n = normalize(&grs, &fixtures::clique(grs.alphabets(), 2), 100).unwrap();
        assert_eq!(n.status, NormalizeStatus::NormalForm);
        assert_eq!(n.steps, 4);
        assert_eq!(n.graph, fixtures::edgeless(grs.alphabets(), 2));
        let again = normalize(&grs, &n.graph, 3).unwrap();
        assert_eq!(
            (again.steps, again.status),
            (0, NormalizeStatus::NormalForm)
        );
    }

    #[test]
    fn exact_fuel_reaching_normal_form_is_not_exhaustion() {
        let grs = fixtures::clique_grs();
        let n = normalize(&grs, &fixtures::clique(grs.alphabets(), 2), 4).unwrap();
        assert_eq!(n.status, NormalizeStatus::NormalForm);
    }

    #[test]
    fn explore_counter_example() {
        let (grs, g1, g2) = fixtures::counter_example();
        let space = explore(&grs, &g1, 100).unwrap();
        assert_eq!(space.state_count(), 2);
        assert!(space.is_complete());
        assert_eq!(space.state(1), &g2);
        assert_eq!(space.transitions(0)[0].target, 1);
        assert_eq!(space.transitions(1)[0].target, 0);
    }

    #[test]
    fn explore_clique_two_reaches_every_subset() {
        let grs = fixtures::clique_grs();
        let space = explore(&grs, &fixtures::clique(grs.alphabets(), 2), 1_000_000).unwrap();
        assert_eq!(space.state_count(), 16);
    }

    #[test]
    fn loops_witness() {
        let (grs, g1, g2) = fixtures::counter_example();
        match decide_termination_from(&grs, &g1, 100).unwrap() {
            TerminationVerdict::Loops { witness, states } => {
                assert_eq!(states, 2);
                assert!(witness.entry.is_empty());
                assert_eq!(witness.state_path(), vec![0, 1, 0]);
                assert_eq!(witness.cycle[0].target, g2);
                assert_eq!(witness.cycle[1].target, g1);
            }
            other => panic!("expected loop, got {other:?}"),
        }
    }

    #[test]
    fn heights() {
        let grs = fixtures::clique_grs();
        for (n, h) in [(2, 4), (3, 9)] {
            let g = fixtures::clique(grs.alphabets(), n);
            assert_eq!(derivation_height_of(&grs, &g, 1_000_000), Ok(h));
        }
        let (q, g1, _) = fixtures::counter_example();
        assert_eq!(
            derivation_height_of(&q, &g1, 100),
            Err(EngineError::NotTerminating)
        );
        let g = fixtures::clique(grs.alphabets(), 3);
        assert!(matches!(
            derivation_height_of(&grs, &g, 10),
            Err(EngineError::LimitExceeded { states: 10 })
        ));
    }

    #[test]
    fn sequential_and_parallel_exploration_agree() {
        let grs = fixtures::clique_grs();
        let g = fixtures::clique(grs.alphabets(), 3);
        let a = explore_with(&grs, &g, 1_000_000, Execution::Sequential).unwrap();
        let b = explore_with(&grs, &g, 1_000_000, Execution::Parallel).unwrap();
        assert_eq!(a.states(), b.states());
        for i in 0..a.state_count() {
            assert_eq!(a.transitions(i), b.transitions(i));
        }
    }

    #[test]
    fn identity_step_is_a_loop() {
        let grs = fixtures::vacuous_add_grs();
        let g = fixtures::vacuous_add_graph(grs.alphabets());
        match decide_termination_from(&grs, &g, 10).unwrap() {
            TerminationVerdict::Loops { witness, .. } => {
                assert_eq!(witness.state_path(), vec![0, 0]);
            }
            other => panic!("expected loop, got {other:?}"),
        }
    }

    #[test]
    fn pipelines() {
        let (grs, g1, _) = fixtures::counter_example();
        let empty = Pipeline::new(vec![]).unwrap();
        let run = run_pipeline(&empty, &g1, 10).unwrap();
        assert_eq!(run.graph, g1);
        assert!(run.steps.is_empty());
        let one = Pipeline::new(vec![(
            "nothing".into(),
            Grs::new(grs.alphabets().clone(), vec![]).unwrap(),
        )])
        .unwrap();
        let run = run_pipeline(&one, &g1, 10).unwrap();
        assert_eq!(run.steps, vec![("nothing".to_string(), 0)]);
        let looping = Pipeline::new(vec![("loop".into(), grs)]).unwrap();
        assert!(matches!(
            run_pipeline(&looping, &g1, 10),
            Err(EngineError::FuelExhausted { ref module, steps: 10, .. }) if module == "loop"
        ));
    }
}
