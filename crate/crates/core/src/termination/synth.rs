//! Search for a compatible edge weight.
//!
//! Once the sign of every label weight is fixed, the merge guard becomes a
//! fixed yes/no per rule and the remaining conditions are linear
//! inequalities over the label weights. Sign patterns are tried from the
//! empty set of negative labels upward; each system is solved exactly by
//! Fourier–Motzkin elimination over the rationals. A single relaxed system
//! with free signs is solved first, so infeasible inputs skip the search.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::engine::Grs;
use crate::graph::EdgeLabel;
use crate::par::Execution;

use super::compat::{merge_blocked_labels, rule_deltas};
use super::weights::EdgeWeight;

/// Largest number of free labels the sign search accepts.
pub const MAX_SEARCH_LABELS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoWeight {
    /// A node-preserving rule is not uniform; no weight can help.
    NotUniform {
        rule: String,
    },
    /// Every sign pattern leads to an infeasible system.
    Infeasible,
    TooManyLabels {
        labels: usize,
    },
}

impl fmt::Display for NoWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoWeight::NotUniform { rule } => write!(f, "rule `{rule}` is not uniform"),
            NoWeight::Infeasible => f.write_str("no sign pattern admits a solution"),
            NoWeight::TooManyLabels { labels } => {
                write!(
                    f,
                    "{labels} labels exceed the search limit of {MAX_SEARCH_LABELS}"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Synthesis {
    Found(EdgeWeight),
    NoWeightExists(NoWeight),
}

impl Synthesis {
    pub fn weight(&self) -> Option<&EdgeWeight> {
        match self {
            Synthesis::Found(w) => Some(w),
            Synthesis::NoWeightExists(_) => None,
        }
    }
}

pub fn synthesize_weight(grs: &Grs) -> Synthesis {
    synthesize_weight_with(grs, Execution::default())
}

pub fn synthesize_weight_with(grs: &Grs, exec: Execution) -> Synthesis {
    let alphabets = grs.alphabets();
    let n = alphabets.edge_count();
    let mut deltas: Vec<Vec<i64>> = Vec::new();
    let mut blocked: BTreeSet<EdgeLabel> = BTreeSet::new();
    for r in grs.rules().iter().filter(|r| r.is_node_preserving()) {
        if r.is_uniform() != Ok(true) {
            return Synthesis::NoWeightExists(NoWeight::NotUniform {
                rule: r.name().to_string(),
            });
        }
        deltas.push(rule_deltas(r).expect("node-preserving").edge_deltas);
        blocked.extend(merge_blocked_labels(r));
    }
    // Labels that may be negative; any sign pattern using a blocked label fails 2.c.
    let free: Vec<usize> = alphabets
        .edge_labels()
        .filter(|l| !blocked.contains(l))
        .map(EdgeLabel::index)
        .collect();
    if free.len() > MAX_SEARCH_LABELS {
        return Synthesis::NoWeightExists(NoWeight::TooManyLabels { labels: free.len() });
    }
    // Every sign pattern's system lies inside this one, so if it is empty
    // there is nothing to enumerate.
    let signs: Vec<Option<bool>> = (0..n)
        .map(|i| (!free.contains(&i)).then_some(false))
        .collect();
    if solve(&deltas, &signs).is_none() {
        return Synthesis::NoWeightExists(NoWeight::Infeasible);
    }
    let found = (0..=free.len()).find_map(|size| {
        let patterns = combinations(free.len(), size);
        exec.find_map_first(patterns.len() as u64, |i| {
            let mask = patterns[i as usize];
            let mut signs = vec![Some(false); n];
            for (bit, &label) in free.iter().enumerate() {
                signs[label] = Some(mask >> bit & 1 == 1);
            }
            solve(&deltas, &signs)
        })
    });
    match found {
        Some(values) => Synthesis::Found(EdgeWeight::from_values(alphabets, values)),
        None => Synthesis::NoWeightExists(NoWeight::Infeasible),
    }
}

/// Every `size`-element subset of `k` bits, in increasing mask order.
fn combinations(k: usize, size: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, u64, usize)> = vec![(0, 0, 0)];
    while let Some((next, mask, taken)) = stack.pop() {
        if taken == size {
            out.push(mask);
            continue;
        }
        for bit in (next..k).rev() {
            if k - bit >= size - taken {
                stack.push((bit + 1, mask | 1 << bit, taken + 1));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Integer weights making every delta row sum to at most -1, with label `i`
/// negative if `signs[i]` is `Some(true)`, non-negative if `Some(false)`.
fn solve(deltas: &[Vec<i64>], signs: &[Option<bool>]) -> Option<Vec<i64>> {
    let n = signs.len();
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let mut rows: Vec<Constraint> = deltas
        .iter()
        .map(|d| Constraint {
            coeffs: d.iter().map(|&v| int(v)).collect(),
            bound: int(-1),
        })
        .collect();
    for (i, neg) in signs.iter().enumerate() {
        let Some(neg) = *neg else { continue };
        let mut coeffs = vec![BigRational::zero(); n];
        // w(e) <= -1, or -w(e) <= 0.
        coeffs[i] = if neg { int(1) } else { int(-1) };
        rows.push(Constraint {
            coeffs,
            bound: if neg { int(-1) } else { int(0) },
        });
    }
    let rational = fourier_motzkin(rows, n)?;
    let scale = rational
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    rational
        .iter()
        .map(|q| {
            (q * BigRational::from_integer(scale.clone()))
                .to_integer()
                .to_i64()
        })
        .collect()
}

/// `coeffs · x <= bound`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Constraint {
    pub coeffs: Vec<BigRational>,
    pub bound: BigRational,
}

impl Constraint {
    /// Scaled so the last nonzero coefficient has absolute value 1.
    fn normalized(mut self) -> Self {
        if let Some(pivot) = self
            .coeffs
            .iter()
            .rev()
            .find(|c| !c.is_zero())
            .map(|c| c.abs())
        {
            for c in &mut self.coeffs {
                *c = &*c / &pivot;
            }
            self.bound = &self.bound / &pivot;
        }
        self
    }
}

/// A rational solution of `rows` over `n` variables, or `None` if infeasible.
///
/// Variables are eliminated from the last to the first; back-substitution
/// picks, for each variable, the value nearest to zero within its bounds,
/// preferring integers.
pub(crate) fn fourier_motzkin(rows: Vec<Constraint>, n: usize) -> Option<Vec<BigRational>> {
    // stages[k] holds constraints over variables 0..k.
    let mut stages: Vec<Vec<Constraint>> = vec![Vec::new(); n + 1];
    let dedup = |rows: Vec<Constraint>| -> Vec<Constraint> {
        rows.into_iter()
            .map(Constraint::normalized)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    };
    stages[n] = dedup(rows);
    for k in (0..n).rev() {
        let current = &stages[k + 1];
        let (mut upper, mut lower, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for c in current {
            let a = &c.coeffs[k];
            if a.is_positive() {
                upper.push(c);
            } else if a.is_negative() {
                lower.push(c);
            } else {
                rest.push(c.clone());
            }
        }
        for u in &upper {
            for l in &lower {
                let (au, al) = (u.coeffs[k].clone(), -l.coeffs[k].clone());
                let coeffs: Vec<BigRational> = u
                    .coeffs
                    .iter()
                    .zip(&l.coeffs)
                    .map(|(cu, cl)| cu * &al + cl * &au)
                    .collect();
                rest.push(Constraint {
                    coeffs,
                    bound: &u.bound * &al + &l.bound * &au,
                });
            }
        }
        stages[k] = dedup(rest);
    }
    if stages[0].iter().any(|c| c.bound.is_negative()) {
        return None;
    }
    let mut x: Vec<BigRational> = Vec::with_capacity(n);
    for k in 0..n {
        let (mut lo, mut hi): (Option<BigRational>, Option<BigRational>) = (None, None);
        for c in &stages[k + 1] {
            let a = &c.coeffs[k];
            if a.is_zero() {
                continue;
            }
            let fixed: BigRational = c.coeffs[..k].iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
            let limit = (&c.bound - fixed) / a;
            if a.is_positive() {
                hi = Some(hi.map_or(limit.clone(), |h| h.min(limit)));
            } else {
                lo = Some(lo.map_or(limit.clone(), |l| l.max(limit)));
            }
        }
        x.push(pick_nearest_zero(lo, hi));
    }
    Some(x)
}

fn pick_nearest_zero(lo: Option<BigRational>, hi: Option<BigRational>) -> BigRational {
    match (lo, hi) {
        (Some(l), hi) if l.is_positive() => {
            let c = l.ceil();
            if hi.is_none_or(|h| c <= h) {
                c
            } else {
                l
            }
        }
        (lo, Some(h)) if h.is_negative() => {
            let f = h.floor();
            if lo.is_none_or(|l| f >= l) {
                f
            } else {
                h
            }
        }
        _ => BigRational::zero(),
    }
}
