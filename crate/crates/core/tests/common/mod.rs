//! Random inputs, independent oracles and the invariant checks shared by the
//! property tests and the acceptance suite. Every check takes a seed and
//! returns `Err` with a description on the first violation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use grw::engine::{explore, step_all, Grs, TerminationVerdict};
use grw::graph::{Alphabets, Edge, EdgeLabel, Graph, NodeId, NodeLabel};
use grw::pattern::{find_matchings, Pattern};
use grw::rule::{apply_commands, effective_commands, Command, Rule};
use grw::termination::{
    bound_constants, check_compatible, energy, evaluate_eta, evaluate_w, kappa, synthesize_weight,
    EdgeWeight, LexicographicWeight, NodeWeight, Synthesis,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 1–2 node labels and 1–3 edge labels.
pub fn random_alphabets(rng: &mut impl Rng) -> Arc<Alphabets> {
    let nodes = ["a", "b"][..rng.gen_range(1..=2)].to_vec();
    let edges = ["A", "B", "C"][..rng.gen_range(1..=3)].to_vec();
    Alphabets::new(nodes, edges).unwrap()
}

fn pick<T: Copy>(rng: &mut impl Rng, items: &[T]) -> T {
    *items.choose(rng).expect("non-empty")
}

fn node_labels(s: &Alphabets) -> Vec<NodeLabel> {
    s.node_labels().collect()
}

fn edge_labels(s: &Alphabets) -> Vec<EdgeLabel> {
    s.edge_labels().collect()
}

/// 1 to `max_nodes` nodes `g0…`; each possible edge present with probability `density`.
pub fn random_graph(
    rng: &mut impl Rng,
    s: &Arc<Alphabets>,
    max_nodes: usize,
    density: f64,
) -> Graph {
    let n = rng.gen_range(1..=max_nodes);
    let ids: Vec<NodeId> = (0..n).map(|i| NodeId::new(&format!("g{i}"))).collect();
    let mut g = Graph::empty(s.clone());
    for id in &ids {
        g.insert_node(id.clone(), pick(rng, &node_labels(s)))
            .unwrap();
    }
    for a in &ids {
        for l in edge_labels(s) {
            for b in &ids {
                if rng.gen_bool(density) {
                    g.insert_edge(Edge::new(a.clone(), l, b.clone())).unwrap();
                }
            }
        }
    }
    g
}

/// 1–3 nodes `p0…`, sparse edges and random negative conditions.
pub fn random_pattern(rng: &mut impl Rng, s: &Arc<Alphabets>) -> Pattern {
    let k = rng.gen_range(1..=3);
    let ids: Vec<NodeId> = (0..k).map(|i| NodeId::new(&format!("p{i}"))).collect();
    let mut basic = Graph::empty(s.clone());
    for id in &ids {
        basic
            .insert_node(id.clone(), pick(rng, &node_labels(s)))
            .unwrap();
    }
    let mut p = Pattern::new(basic);
    let mut slots: Vec<Edge> = Vec::new();
    for a in &ids {
        for l in edge_labels(s) {
            for b in &ids {
                slots.push(Edge::new(a.clone(), l, b.clone()));
            }
        }
    }
    slots.shuffle(rng);
    let positive = rng.gen_range(0..=k);
    let negative = rng.gen_range(0..=2);
    for e in slots.iter().take(positive) {
        p.basic.insert_edge(e.clone()).unwrap();
    }
    for e in slots.iter().skip(positive).take(negative) {
        p.forbidden_edges.insert(e.clone());
    }
    for a in &ids {
        for l in edge_labels(s) {
            if rng.gen_bool(0.1) {
                p.forbidden_in.insert((a.clone(), l));
            }
            if rng.gen_bool(0.1) {
                p.forbidden_out.insert((a.clone(), l));
            }
        }
    }
    p
}

/// A valid rule. With `uniform_bias`, most rules only delete pattern edges
/// and add forbidden edges, so that weights have a chance to exist.
pub fn random_rule(rng: &mut impl Rng, s: &Arc<Alphabets>, name: &str, uniform_bias: f64) -> Rule {
    let p = random_pattern(rng, s);
    let uniform = rng.gen_bool(uniform_bias);
    let mut alive: Vec<NodeId> = p.nodes().cloned().collect();
    let pattern_edges: Vec<Edge> = p.basic.edges().cloned().collect();
    let forbidden: Vec<Edge> = p.forbidden_edges.iter().cloned().collect();
    let mut commands = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        if alive.is_empty() {
            break;
        }
        let c = match rng.gen_range(0..10) {
            0..=2 => {
                let e = if uniform {
                    live_edge(rng, &pattern_edges, &alive)
                } else {
                    Some(any_edge(rng, s, &alive))
                };
                e.map(|e| Command::DelEdge(e.source, e.label, e.target))
            }
            3..=5 => {
                let e = if uniform {
                    live_edge(rng, &forbidden, &alive)
                } else {
                    Some(any_edge(rng, s, &alive))
                };
                e.map(|e| Command::AddEdge(e.source, e.label, e.target))
            }
            6 => Some(Command::Label(
                pick_id(rng, &alive),
                pick(rng, &node_labels(s)),
            )),
            7 | 8 if alive.len() >= 2 => {
                let a = pick_id(rng, &alive);
                let others: Vec<NodeId> = alive.iter().filter(|n| **n != a).cloned().collect();
                Some(Command::Shift(a, pick_id(rng, &others)))
            }
            9 if rng.gen_bool(0.4) => {
                let a = pick_id(rng, &alive);
                alive.retain(|n| *n != a);
                Some(Command::DelNode(a))
            }
            _ => None,
        };
        commands.extend(c);
    }
    Rule::new(name, p, commands).expect("generated rules are valid")
}

/// An edge of `pool` whose endpoints are both still alive.
fn live_edge(rng: &mut impl Rng, pool: &[Edge], alive: &[NodeId]) -> Option<Edge> {
    let ok: Vec<&Edge> = pool
        .iter()
        .filter(|e| alive.contains(&e.source) && alive.contains(&e.target))
        .collect();
    ok.choose(rng).map(|e| (*e).clone())
}

fn any_edge(rng: &mut impl Rng, s: &Alphabets, alive: &[NodeId]) -> Edge {
    Edge::new(
        pick_id(rng, alive),
        pick(rng, &edge_labels(s)),
        pick_id(rng, alive),
    )
}

fn pick_id(rng: &mut impl Rng, ids: &[NodeId]) -> NodeId {
    ids.choose(rng).expect("non-empty").clone()
}

pub fn random_grs(rng: &mut impl Rng, s: &Arc<Alphabets>, uniform_bias: f64) -> Grs {
    let n = rng.gen_range(1..=3);
    let rules = (0..n)
        .map(|i| random_rule(rng, s, &format!("R{i}"), uniform_bias))
        .collect();
    Grs::new(s.clone(), rules).unwrap()
}

/// Every injective label- and edge-preserving map satisfying the negative
/// conditions, by exhaustive enumeration.
pub fn brute_force_matchings(p: &Pattern, g: &Graph) -> Vec<BTreeMap<NodeId, NodeId>> {
    let pn: Vec<NodeId> = p.nodes().cloned().collect();
    let gn: Vec<NodeId> = g.node_ids().cloned().collect();
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    fn rec(
        p: &Pattern,
        g: &Graph,
        pn: &[NodeId],
        gn: &[NodeId],
        current: &mut Vec<usize>,
        out: &mut Vec<BTreeMap<NodeId, NodeId>>,
    ) {
        if current.len() == pn.len() {
            let mu: BTreeMap<NodeId, NodeId> = pn
                .iter()
                .cloned()
                .zip(current.iter().map(|&i| gn[i].clone()))
                .collect();
            if accepts(p, g, &mu) {
                out.push(mu);
            }
            return;
        }
        for i in 0..gn.len() {
            if !current.contains(&i) {
                current.push(i);
                rec(p, g, pn, gn, current, out);
                current.pop();
            }
        }
    }
    rec(p, g, &pn, &gn, &mut current, &mut out);
    out.sort();
    out
}

fn accepts(p: &Pattern, g: &Graph, mu: &BTreeMap<NodeId, NodeId>) -> bool {
    let image: BTreeSet<&NodeId> = mu.values().collect();
    let labels_ok = p.basic.nodes().all(|(n, l)| g.label(&mu[n]) == Some(l));
    let edges_ok = p
        .basic
        .edges()
        .all(|e| g.has_edge(&mu[&e.source], e.label, &mu[&e.target]));
    let forbidden_ok = p
        .forbidden_edges
        .iter()
        .all(|e| !g.has_edge(&mu[&e.source], e.label, &mu[&e.target]));
    let in_ok = p.forbidden_in.iter().all(|(n, l)| {
        !g.edges()
            .any(|e| e.label == *l && e.target == mu[n] && !image.contains(&e.source))
    });
    let out_ok = p.forbidden_out.iter().all(|(n, l)| {
        !g.edges()
            .any(|e| e.label == *l && e.source == mu[n] && !image.contains(&e.target))
    });
    labels_ok && edges_ok && forbidden_ok && in_ok && out_ok
}

// Individual invariant checks, one seed each.

/// Matcher equals brute force; results sorted; negatives only shrink results.
pub fn check_matcher(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let s = random_alphabets(&mut r);
    let g = random_graph(&mut r, &s, 5, 0.35);
    let p = random_pattern(&mut r, &s);
    let got: Vec<BTreeMap<NodeId, NodeId>> = find_matchings(&p, &g)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|m| m.assignment)
        .collect();
    let expected = brute_force_matchings(&p, &g);
    if got != expected {
        return Err(format!(
            "seed {seed}: matcher {got:?} vs brute force {expected:?}\n{g}"
        ));
    }
    let plain = Pattern::new(p.basic.clone());
    let all: BTreeSet<_> = find_matchings(&plain, &g)
        .unwrap()
        .into_iter()
        .map(|m| m.assignment)
        .collect();
    if !got.iter().all(|m| all.contains(m)) {
        return Err(format!("seed {seed}: negative conditions added matchings"));
    }
    Ok(())
}

/// Node count never grows, and drops exactly when a node is deleted;
/// effective and raw command lists agree; local commands stay local.
pub fn check_commands(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let s = random_alphabets(&mut r);
    let g = random_graph(&mut r, &s, 6, 0.2);
    let rule = random_rule(&mut r, &s, "R", 0.5);
    for m in find_matchings(rule.pattern(), &g).unwrap() {
        let out = apply_commands(&g, &m, rule.commands()).map_err(|e| e.to_string())?;
        let deletes = rule.commands().iter().any(Command::is_del_node);
        if out.node_count() > g.node_count() || (out.node_count() < g.node_count()) != deletes {
            return Err(format!(
                "seed {seed}: {} -> {} nodes (deletes: {deletes})",
                g.node_count(),
                out.node_count()
            ));
        }
        let eff = apply_commands(&g, &m, &effective_commands(rule.commands())).unwrap();
        if eff != out {
            return Err(format!(
                "seed {seed}: effective commands disagree\n{out}\n{eff}"
            ));
        }
        let image = m.image();
        let local = rule.commands().iter().all(|c| {
            matches!(
                c,
                Command::Label(..) | Command::DelEdge(..) | Command::AddEdge(..)
            )
        });
        if local {
            let outside = |h: &Graph| -> BTreeSet<Edge> {
                h.edges()
                    .filter(|e| !(image.contains(&e.source) && image.contains(&e.target)))
                    .cloned()
                    .collect()
            };
            if outside(&g) != outside(&out) {
                return Err(format!("seed {seed}: local commands touched outside edges"));
            }
        }
    }
    Ok(())
}

/// Shift moves exactly the image/non-image edges of its source.
pub fn check_shift(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let s = random_alphabets(&mut r);
    let g = random_graph(&mut r, &s, 6, 0.25);
    let mut p = random_pattern(&mut r, &s);
    if p.node_count() < 2 {
        return Ok(());
    }
    p.forbidden_edges.clear();
    p.forbidden_in.clear();
    p.forbidden_out.clear();
    let (a, b) = (NodeId::new("p0"), NodeId::new("p1"));
    let rule = Rule::new("S", p, vec![Command::Shift(a.clone(), b.clone())]).unwrap();
    for m in find_matchings(rule.pattern(), &g).unwrap() {
        let out = rule.apply(&g, &m).unwrap();
        let image = m.image();
        let (ma, mb) = (&m.assignment[&a], &m.assignment[&b]);
        for e in g.edges().chain(out.edges()) {
            let src_in = image.contains(&e.source);
            let tgt_in = image.contains(&e.target);
            if src_in == tgt_in {
                // image-internal or context edges are untouched
                if g.contains_edge(e) != out.contains_edge(e) {
                    return Err(format!("seed {seed}: shift changed untouched edge {e:?}"));
                }
            }
        }
        for q in g.node_ids().filter(|q| !image.contains(*q)) {
            for l in s.edge_labels() {
                let before_a_out = g.has_edge(ma, l, q);
                let before_b_out = g.has_edge(mb, l, q);
                let before_a_in = g.has_edge(q, l, ma);
                let before_b_in = g.has_edge(q, l, mb);
                if out.has_edge(ma, l, q) || out.has_edge(q, l, ma) {
                    return Err(format!(
                        "seed {seed}: shift left a crown edge on the source"
                    ));
                }
                if out.has_edge(mb, l, q) != (before_a_out || before_b_out)
                    || out.has_edge(q, l, mb) != (before_a_in || before_b_in)
                {
                    return Err(format!("seed {seed}: shift did not merge onto the target"));
                }
            }
        }
    }
    Ok(())
}

/// Node and edge decompositions are exact partitions, and the non-context
/// part stays within `C·(|G|+1)` before and after a step.
pub fn check_decomposition(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let s = random_alphabets(&mut r);
    let g = random_graph(&mut r, &s, 6, 0.25);
    let grs = random_grs(&mut r, &s, 0.5);
    let c = bound_constants(&grs, &EdgeWeight::zero(&s)).c as usize;
    for rule in grs.rules() {
        for m in find_matchings(rule.pattern(), &g).unwrap() {
            let (nodes, edges) = m.decompose(rule.pattern(), &g);
            let parts = [&nodes.pattern_image, &nodes.crown, &nodes.context];
            let total: usize = parts.iter().map(|p| p.len()).sum();
            let union: BTreeSet<&NodeId> = parts.iter().flat_map(|p| p.iter()).collect();
            if total != g.node_count() || union.len() != total {
                return Err(format!(
                    "seed {seed}: node parts do not partition the graph"
                ));
            }
            let eparts = [
                &edges.pattern_edges,
                &edges.crown_edges,
                &edges.context_edges,
                &edges.glued_edges,
            ];
            let etotal: usize = eparts.iter().map(|p| p.len()).sum();
            let eunion: BTreeSet<&Edge> = eparts.iter().flat_map(|p| p.iter()).collect();
            if etotal != g.edge_count() || eunion.len() != etotal {
                return Err(format!(
                    "seed {seed}: edge parts do not partition the graph"
                ));
            }
            let out = rule.apply(&g, &m).unwrap();
            let image: BTreeSet<NodeId> = m
                .image()
                .into_iter()
                .filter(|n| out.contains_node(n))
                .collect();
            let (_, after) = out.decompose(&image).unwrap();
            let bound = c * (g.node_count() + 1);
            if edges.non_context_count() > bound || after.non_context_count() > bound {
                return Err(format!("seed {seed}: non-context edges exceed {bound}"));
            }
            if after.context_edges != edges.context_edges {
                return Err(format!("seed {seed}: context edges changed"));
            }
        }
    }
    Ok(())
}

/// |w(E)| <= K_w·|E|, |w(G)| <= K_E·|G|², |η(G)| <= K_η·|G|.
pub fn check_weight_bounds(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let s = random_alphabets(&mut r);
    let g = random_graph(&mut r, &s, 6, 0.3);
    let grs = Grs::new(s.clone(), vec![]).unwrap();
    let w = EdgeWeight::from_values(&s, s.edge_labels().map(|_| r.gen_range(-5..=5)).collect());
    let mut eta = NodeWeight::zero(&s);
    for l in s.node_labels() {
        eta.set(l, r.gen_range(-5..=5));
    }
    let k = bound_constants(&grs, &w).with_node_weight(&eta);
    let n = g.node_count() as i64;
    let subset: Vec<&Edge> = g.edges().filter(|_| r.gen_bool(0.5)).collect();
    let ws = w.evaluate_edges(subset.iter().copied());
    if ws.abs() > k.k_w * subset.len() as i64 {
        return Err(format!(
            "seed {seed}: |w(E)| = {} > {}",
            ws.abs(),
            k.k_w * subset.len() as i64
        ));
    }
    let wg = evaluate_w(&w, &g);
    if wg.abs() > k.k_e * n * n {
        return Err(format!("seed {seed}: |w(G)| = {} > K_E·|G|²", wg.abs()));
    }
    let e = evaluate_eta(&eta, &g);
    if e.abs() > k.k_eta * n {
        return Err(format!("seed {seed}: |η(G)| = {} > K_η·|G|", e.abs()));
    }
    Ok(())
}

/// Outcome of [`check_weighted_system`].
#[derive(Debug, Default, Clone, Copy)]
pub struct WeightedStats {
    /// The random system received a weight.
    pub synthesized: bool,
    pub start_graphs: usize,
    pub transitions: usize,
    /// Explorations cut short by the state limit.
    pub truncated: usize,
}

pub const WEIGHTED_STATE_LIMIT: usize = 20_000;

/// For a random system with a synthesized weight: the weight is accepted,
/// every explored step drops |G| or keeps it and drops w, Ω drops strictly,
/// and the longest derivation is at most Ω(G) + K_E·|G|².
pub fn check_weighted_system(seed: u64) -> Result<WeightedStats, String> {
    let mut r = rng(seed);
    let s = random_alphabets(&mut r);
    let grs = random_grs(&mut r, &s, 0.9);
    let mut stats = WeightedStats::default();
    let w = match synthesize_weight(&grs) {
        Synthesis::Found(w) => w,
        Synthesis::NoWeightExists(_) => return Ok(stats),
    };
    stats.synthesized = true;
    if !check_compatible(&grs, &w).is_compatible() {
        return Err(format!("seed {seed}: synthesized weight rejected"));
    }
    let k = bound_constants(&grs, &w);
    for _ in 0..3 {
        let g = random_graph(&mut r, &s, 5, 0.35);
        stats.start_graphs += 1;
        let space = explore(&grs, &g, WEIGHTED_STATE_LIMIT).map_err(|e| e.to_string())?;
        for i in 0..space.state_count() {
            let from = space.state(i);
            for t in space.transitions(i) {
                stats.transitions += 1;
                let to = space.state(t.target);
                let (n0, n1) = (from.node_count(), to.node_count());
                let dichotomy = n1 < n0 || (n1 == n0 && evaluate_w(&w, to) < evaluate_w(&w, from));
                if !dichotomy {
                    return Err(format!("seed {seed}: step keeps |G| and w\n{from}\n{to}"));
                }
                if energy(to, &w, &k) >= energy(from, &w, &k) {
                    return Err(format!("seed {seed}: energy does not drop\n{from}\n{to}"));
                }
            }
        }
        match space.verdict(&grs) {
            TerminationVerdict::Terminates { height, .. } => {
                let n = g.node_count() as i64;
                let bound = energy(&g, &w, &k) + k.k_e * n * n;
                if height as i64 > bound {
                    return Err(format!("seed {seed}: height {height} exceeds {bound}"));
                }
            }
            TerminationVerdict::Loops { .. } => {
                return Err(format!("seed {seed}: compatible system loops\n{g}"));
            }
            TerminationVerdict::LimitExceeded { .. } => stats.truncated += 1,
        }
    }
    Ok(stats)
}

/// Every weight in `[-3, 3]^Σ_E` that `check_compatible` accepts.
pub fn brute_force_weights(grs: &Grs) -> Vec<EdgeWeight> {
    let s = grs.alphabets();
    let n = s.edge_count();
    let mut out = Vec::new();
    let total = 7usize.pow(n as u32);
    for code in 0..total {
        let values: Vec<i64> = (0..n)
            .map(|i| (code / 7usize.pow(i as u32) % 7) as i64 - 3)
            .collect();
        let w = EdgeWeight::from_values(s, values);
        if check_compatible(grs, &w).is_compatible() {
            out.push(w);
        }
    }
    out
}

/// Synthesis agrees with the bounded brute-force oracle: it finds a weight
/// whenever the oracle does, and whatever it returns is accepted.
pub fn check_synthesis_oracle(seed: u64) -> Result<bool, String> {
    let mut r = rng(seed);
    let s = random_alphabets(&mut r);
    let grs = random_grs(&mut r, &s, 0.9);
    let oracle = brute_force_weights(&grs);
    match synthesize_weight(&grs) {
        Synthesis::Found(w) => {
            if !check_compatible(&grs, &w).is_compatible() {
                return Err(format!("seed {seed}: synthesized weight rejected"));
            }
            Ok(true)
        }
        Synthesis::NoWeightExists(why) => {
            if let Some(w) = oracle.first() {
                return Err(format!(
                    "seed {seed}: synthesis says {why} but {:?} works",
                    w.values()
                ));
            }
            Ok(false)
        }
    }
}

/// κ strictly decreases along every explored step of the lexicographic fixture.
pub fn check_kappa(grs: &Grs, lw: &LexicographicWeight, g: &Graph) -> Result<usize, String> {
    let space = explore(grs, g, 200_000).map_err(|e| e.to_string())?;
    if !space.is_complete() {
        return Err(format!("exploration incomplete from\n{g}"));
    }
    let mut steps = 0;
    for i in 0..space.state_count() {
        let before = kappa(space.state(i), lw);
        for t in space.transitions(i) {
            steps += 1;
            let after = kappa(space.state(t.target), lw);
            if after >= before {
                return Err(format!(
                    "κ {before:?} -> {after:?} by {}\n{}\n{}",
                    grs.rules()[t.rule].name(),
                    space.state(i),
                    space.state(t.target)
                ));
            }
        }
    }
    Ok(steps)
}

/// A random graph over the lexicographic fixture's alphabet, shaped so the
/// rules fire: O and M edges run between X nodes and into P/Pd nodes, with
/// sparse E and A edges out of P/Pd nodes.
pub fn random_local_graph(seed: u64, s: &Arc<Alphabets>) -> Graph {
    let mut r = rng(seed);
    let n = r.gen_range(2..=6);
    let label = |name| s.node_label(name).unwrap();
    let edge = |name| s.edge_label(name).unwrap();
    let mut g = Graph::empty(s.clone());
    let mut is_x = Vec::new();
    for i in 0..n {
        let l = match r.gen_range(0..10) {
            0..=1 => "P",
            2 => "Pd",
            _ => "X",
        };
        is_x.push(l == "X");
        g.insert_node(NodeId::new(&format!("g{i}")), label(l))
            .unwrap();
    }
    for (i, &from_x) in is_x.iter().enumerate() {
        for j in 0..n {
            if i == j {
                continue;
            }
            let odds: &[(&str, f64)] = if from_x {
                &[("O", 0.35), ("M", 0.15)]
            } else {
                &[("E", 0.15), ("A", 0.05)]
            };
            for &(l, p) in odds {
                if r.gen_bool(p) {
                    let (a, b) = (NodeId::new(&format!("g{i}")), NodeId::new(&format!("g{j}")));
                    g.insert_edge(Edge::new(a, edge(l), b)).unwrap();
                }
            }
        }
    }
    g
}

/// Runs `check` over `count` consecutive seeds, stopping at the first failure.
pub fn run_seeds<T>(
    count: u64,
    mut check: impl FnMut(u64) -> Result<T, String>,
) -> Result<Vec<T>, String> {
    (0..count).map(&mut check).collect()
}

pub fn all_steps_deterministic(grs: &Grs, g: &Graph) -> bool {
    step_all(grs, g).unwrap() == step_all(grs, g).unwrap()
}
