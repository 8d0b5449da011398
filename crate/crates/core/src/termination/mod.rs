//! Weight-based termination: weights, compatibility checks, weight synthesis
//! and the size bounds that turn compatibility into derivation-length bounds.

mod bounds;
mod compat;
mod synth;
mod weights;

pub use bounds::{bound_constants, energy, kappa, BoundConstants};
pub use compat::{
    check_compatible, check_lexicographic, rule_deltas, Clause, CompatibilityReport, Direction,
    Failure, RuleDelta, RuleReport, RuleVerdict,
};
pub use synth::{
    synthesize_weight, synthesize_weight_with, NoWeight, Synthesis, MAX_SEARCH_LABELS,
};
pub use weights::{
    evaluate_eta, evaluate_pi, evaluate_w, ContextualWeight, EdgeWeight, LexicographicWeight,
    NodeWeight,
};
