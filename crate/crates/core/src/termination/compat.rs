//! Compatibility of weights with rules.
//!
//! A node-preserving, uniform rule changes exactly the image-internal edges
//! its pattern says it changes, so the effect of a step on the image can be
//! read off the pattern rewritten by the identity matching. Crown edges only
//! move through shifts; merging two crown edges of a negative label raises
//! the weight, which the forbidden in/out conditions must rule out.

use std::collections::BTreeSet;
use std::fmt;

use crate::engine::Grs;
use crate::graph::{EdgeLabel, Graph, NodeId, NodeLabel};
use crate::pattern::Matching;
use crate::rule::{apply_commands, effective_commands, Command, Rule, RuleError, ShiftMap};

use super::weights::{evaluate_w, EdgeWeight, LexicographicWeight};

/// Effect of a node-preserving rule on its own pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleDelta {
    /// Change in the number of edges carrying each label, by label index.
    pub edge_deltas: Vec<i64>,
    pub before: Graph,
    pub after: Graph,
    /// (node, old label, new label) for every node whose label changes.
    pub relabels: Vec<(NodeId, NodeLabel, NodeLabel)>,
}

impl RuleDelta {
    pub fn weight_change(&self, w: &EdgeWeight) -> i64 {
        self.edge_deltas
            .iter()
            .zip(w.values())
            .map(|(d, v)| d * v)
            .sum()
    }
}

pub fn rule_deltas(r: &Rule) -> Result<RuleDelta, RuleError> {
    if !r.is_node_preserving() {
        return Err(RuleError::HasDelNode);
    }
    let before = r.pattern().basic.clone();
    let identity = Matching::identity(before.node_ids());
    let after = apply_commands(&before, &identity, &effective_commands(r.commands()))?;
    let alphabets = before.alphabets();
    let edge_deltas = alphabets
        .edge_labels()
        .map(|l| after.count_label(l) as i64 - before.count_label(l) as i64)
        .collect();
    let relabels = before
        .nodes()
        .filter_map(|(n, old)| {
            let new = after.label(n).expect("node-preserving");
            (new != old).then(|| (n.clone(), old, new))
        })
        .collect();
    Ok(RuleDelta {
        edge_deltas,
        before,
        after,
        relabels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    /// The rule deletes a node.
    DeletesNode,
    /// Uniform, strictly decreasing, merges guarded.
    Weighted,
    /// Lexicographic: the edge weight strictly decreases.
    LexWeight,
    /// Lexicographic: edge weight ties, contextual weights decrease.
    LexContext,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::DeletesNode => "del_node",
            Clause::Weighted => "2a-2c",
            Clause::LexWeight => "lex-2a",
            Clause::LexContext => "lex-2b",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    NotUniform,
    NotDecreasing {
        before: i64,
        after: i64,
    },
    UnguardedMerge {
        label: EdgeLabel,
        target: NodeId,
        direction: Direction,
        members: Vec<NodeId>,
    },
    /// Lexicographic: the edge weight grows.
    WeightIncreases {
        before: i64,
        after: i64,
    },
    NoLexDecrease {
        before: Vec<i64>,
        after: Vec<i64>,
    },
    FragileRelabel {
        node: NodeId,
        label: EdgeLabel,
    },
    ShiftWithoutWeightDecrease,
}

impl Failure {
    /// Short name of the violated condition.
    pub fn condition(&self, lexicographic: bool) -> &'static str {
        match (self, lexicographic) {
            (Failure::NotUniform, _) => "2.a",
            (Failure::NotDecreasing { .. }, _) => "2.b",
            (Failure::UnguardedMerge { .. }, false) => "2.c",
            (Failure::UnguardedMerge { .. }, true) => "2.a.ii",
            (Failure::WeightIncreases { .. }, _) => "2.a.i/2.b.i",
            (Failure::NoLexDecrease { .. }, _) => "2.b.ii",
            (Failure::FragileRelabel { .. }, _) => "2.b.iii",
            (Failure::ShiftWithoutWeightDecrease, _) => "2.b.iv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleVerdict {
    Compatible(Clause),
    Incompatible(Failure),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleReport {
    pub rule: String,
    pub verdict: RuleVerdict,
    /// Edge weight of the pattern before and after the commands (node-preserving rules).
    pub weight_before: Option<i64>,
    pub weight_after: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityReport {
    pub lexicographic: bool,
    pub rules: Vec<RuleReport>,
}

impl CompatibilityReport {
    pub fn is_compatible(&self) -> bool {
        self.rules
            .iter()
            .all(|r| matches!(r.verdict, RuleVerdict::Compatible(_)))
    }

    pub fn get(&self, rule: &str) -> Option<&RuleReport> {
        self.rules.iter().find(|r| r.rule == rule)
    }

    pub fn first_failure(&self) -> Option<(&str, &Failure)> {
        self.rules.iter().find_map(|r| match &r.verdict {
            RuleVerdict::Incompatible(f) => Some((r.rule.as_str(), f)),
            _ => None,
        })
    }
}

/// For each shift target, at most one merged node may lack a forbidden
/// in-edge (resp. out-edge) condition on `label`.
pub(crate) fn merge_guard(rule: &Rule, phi: &ShiftMap, label: EdgeLabel) -> Option<Failure> {
    let p = rule.pattern();
    for n in phi.range() {
        let members = phi.preimage(n);
        if members.len() < 2 {
            continue;
        }
        for (direction, guards) in [
            (Direction::In, &p.forbidden_in),
            (Direction::Out, &p.forbidden_out),
        ] {
            let unguarded: Vec<NodeId> = members
                .iter()
                .filter(|m| !guards.contains(&((**m).clone(), label)))
                .map(|m| (*m).clone())
                .collect();
            if unguarded.len() > 1 {
                return Some(Failure::UnguardedMerge {
                    label,
                    target: n.clone(),
                    direction,
                    members: unguarded,
                });
            }
        }
    }
    None
}

/// Labels whose negativity would break the merge guard of `rule`.
pub(crate) fn merge_blocked_labels(rule: &Rule) -> BTreeSet<EdgeLabel> {
    let phi = rule.shift_map();
    if phi.is_identity() {
        return BTreeSet::new();
    }
    rule.alphabets()
        .edge_labels()
        .filter(|l| merge_guard(rule, &phi, *l).is_some())
        .collect()
}

fn check_rule(rule: &Rule, w: &EdgeWeight) -> RuleReport {
    let report = |verdict, before, after| RuleReport {
        rule: rule.name().to_string(),
        verdict,
        weight_before: before,
        weight_after: after,
    };
    if !rule.is_node_preserving() {
        return report(RuleVerdict::Compatible(Clause::DeletesNode), None, None);
    }
    let delta = rule_deltas(rule).expect("node-preserving");
    let (before, after) = (evaluate_w(w, &delta.before), evaluate_w(w, &delta.after));
    let fail = |f| report(RuleVerdict::Incompatible(f), Some(before), Some(after));
    if rule.is_uniform() != Ok(true) {
        return fail(Failure::NotUniform);
    }
    if after >= before {
        return fail(Failure::NotDecreasing { before, after });
    }
    let phi = rule.shift_map();
    if let Some(f) = w.negative_labels().find_map(|l| merge_guard(rule, &phi, l)) {
        return fail(f);
    }
    report(
        RuleVerdict::Compatible(Clause::Weighted),
        Some(before),
        Some(after),
    )
}

/// Checks `w` against every rule of `grs`, in rule order.
pub fn check_compatible(grs: &Grs, w: &EdgeWeight) -> CompatibilityReport {
    CompatibilityReport {
        lexicographic: false,
        rules: grs.rules().iter().map(|r| check_rule(r, w)).collect(),
    }
}

fn check_rule_lex(rule: &Rule, lw: &LexicographicWeight) -> RuleReport {
    let report = |verdict, before, after| RuleReport {
        rule: rule.name().to_string(),
        verdict,
        weight_before: before,
        weight_after: after,
    };
    if !rule.is_node_preserving() {
        return report(RuleVerdict::Compatible(Clause::DeletesNode), None, None);
    }
    let delta = rule_deltas(rule).expect("node-preserving");
    let (before, after) = (
        evaluate_w(&lw.w0, &delta.before),
        evaluate_w(&lw.w0, &delta.after),
    );
    let done = |v| report(v, Some(before), Some(after));
    let fail = |f| done(RuleVerdict::Incompatible(f));
    if rule.is_uniform() != Ok(true) {
        return fail(Failure::NotUniform);
    }
    if after < before {
        let phi = rule.shift_map();
        return match lw
            .w0
            .negative_labels()
            .find_map(|l| merge_guard(rule, &phi, l))
        {
            Some(f) => fail(f),
            None => done(RuleVerdict::Compatible(Clause::LexWeight)),
        };
    }
    if after > before {
        return fail(Failure::WeightIncreases { before, after });
    }
    let (pi_before, pi_after) = (
        lw.evaluate_pis(&delta.before),
        lw.evaluate_pis(&delta.after),
    );
    // Equal-length vectors: plain lexicographic comparison.
    if pi_after >= pi_before {
        return fail(Failure::NoLexDecrease {
            before: pi_before,
            after: pi_after,
        });
    }
    let fragile: BTreeSet<EdgeLabel> = lw.pis.iter().flat_map(|pi| pi.fragile_labels()).collect();
    let p = rule.pattern();
    for c in rule.commands() {
        if let Command::Label(n, _) = c {
            for &l in &fragile {
                let key = (n.clone(), l);
                if !p.forbidden_in.contains(&key) && !p.forbidden_out.contains(&key) {
                    return fail(Failure::FragileRelabel {
                        node: n.clone(),
                        label: l,
                    });
                }
            }
        }
    }
    if rule.has_shift() {
        return fail(Failure::ShiftWithoutWeightDecrease);
    }
    done(RuleVerdict::Compatible(Clause::LexContext))
}

/// Checks a lexicographic weight against every rule of `grs`, in rule order.
pub fn check_lexicographic(grs: &Grs, lw: &LexicographicWeight) -> CompatibilityReport {
    CompatibilityReport {
        lexicographic: true,
        rules: grs.rules().iter().map(|r| check_rule_lex(r, lw)).collect(),
    }
}
