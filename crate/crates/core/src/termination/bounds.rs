//! Size bounds and the measures used to bound derivation lengths.

use crate::engine::Grs;
use crate::graph::Graph;

use super::weights::{evaluate_w, EdgeWeight, LexicographicWeight, NodeWeight};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundConstants {
    /// Largest absolute edge-label weight.
    pub k_w: i64,
    /// `|Σ_E| · K_w`, so that `|w(G)| <= K_E · |G|²`.
    pub k_e: i64,
    /// Largest absolute node-label weight (0 unless a node weight is given).
    pub k_eta: i64,
    /// Bound on the non-context edges a single step can touch, per `|G|`.
    pub c: i64,
    /// Longest command list.
    pub h: i64,
    /// Coefficient of `|G|²` in the energy.
    pub a: i64,
}

impl BoundConstants {
    pub fn with_node_weight(mut self, eta: &NodeWeight) -> Self {
        self.k_eta = eta.max_abs();
        self
    }
}

pub fn bound_constants(grs: &Grs, w: &EdgeWeight) -> BoundConstants {
    let labels = grs.alphabets().edge_count() as i64;
    let k_w = w.max_abs();
    let c = grs
        .rules()
        .iter()
        .map(|r| {
            let p = r.pattern().node_count() as i64;
            2 * p * p * labels
        })
        .max()
        .unwrap_or(0);
    let h = grs
        .rules()
        .iter()
        .map(|r| r.commands().len() as i64)
        .max()
        .unwrap_or(0);
    BoundConstants {
        k_w,
        k_e: labels * k_w,
        k_eta: 0,
        c,
        h,
        a: 2 * k_w.max(1) * c * (h + 1) + 1,
    }
}

/// `Ω(G) = w(G) + A·|G|²`.
pub fn energy(g: &Graph, w: &EdgeWeight, consts: &BoundConstants) -> i64 {
    let n = g.node_count() as i64;
    evaluate_w(w, g) + consts.a * n * n
}

/// `(|G|, w0(G), π1(G), …, πk(G))`, compared lexicographically.
pub fn kappa(g: &Graph, lw: &LexicographicWeight) -> Vec<i64> {
    let mut v = vec![g.node_count() as i64, evaluate_w(&lw.w0, g)];
    v.extend(lw.evaluate_pis(g));
    v
}
