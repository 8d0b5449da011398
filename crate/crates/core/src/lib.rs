//! Graph rewriting with negative conditions and termination analysis.
//!
//! * [`graph`]: labelled directed graphs with stable node identities.
//! * [`pattern`]: patterns with forbidden edges and the injective matcher.
//! * [`rule`]: commands, rules and their application.
//! * [`engine`]: rule systems, normalization, pipelines and exhaustive exploration.
//! * [`termination`]: weights, compatibility checks and weight synthesis.
//! * [`io`]: the text formats.

pub mod engine;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod par;
pub mod pattern;
pub mod rule;
pub mod termination;

pub use engine::{Grs, Pipeline};
pub use graph::{Alphabets, Edge, EdgeLabel, Graph, NodeId, NodeLabel};
pub use pattern::{Matching, Pattern};
pub use rule::{Command, Rule};
