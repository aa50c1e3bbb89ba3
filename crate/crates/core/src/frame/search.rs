//! Backtracking search for onto p-morphisms between small frames.

use std::collections::VecDeque;

use serde::Serialize;

use super::{verify_pmorphism, Frame, PMorphismMap};
use crate::formula::Axis;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Maximum number of source worlds searched exhaustively.
    pub bound: usize,
    /// Give up (inconclusive) after this many search nodes.
    pub node_limit: Option<u64>,
    /// If the source is `diff(nx) × diff(ny)` laid out by
    /// [`super::product_index`], pass `(nx, ny)` to enable row/column
    /// symmetry breaking.
    pub product_shape: Option<(usize, usize)>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            bound: 16,
            node_limit: None,
            product_shape: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SearchResult {
    Found { map: PMorphismMap },
    NotFound,
    Inconclusive { reason: String },
}

type Mask = u64;

fn mask_of(bits: impl Iterator<Item = usize>) -> Mask {
    bits.fold(0, |m, b| m | (1u64 << b))
}

struct Ctx<'a> {
    src: &'a Frame,
    order: Vec<usize>,
    // per axis, per source world: successor lists
    succ: [Vec<Vec<usize>>; 2],
    pred: [Vec<Vec<usize>>; 2],
    // per axis, per target world: successor and predecessor masks
    dsucc: [Vec<Mask>; 2],
    dpred: [Vec<Mask>; 2],
    all: Mask,
    // for symmetry breaking: (world, world whose value must not exceed it)
    le_after: Vec<Option<usize>>,
    nodes: u64,
    limit: Option<u64>,
}

fn ax(i: usize) -> Axis {
    if i == 0 {
        Axis::H
    } else {
        Axis::V
    }
}

impl Ctx<'_> {
    /// Prune domains to a fixpoint; false on wipe-out.
    fn propagate(&self, dom: &mut [Mask]) -> bool {
        loop {
            let mut changed = false;
            let mut union = 0;
            for w in 0..dom.len() {
                let before = dom[w];
                if before == 0 {
                    return false;
                }
                let mut d = before;
                for a in 0..2 {
                    // forth: every successor's domain must meet succ(t)
                    // back: succ(t) must be covered by successors' domains
                    let mut cover = 0;
                    for &u in &self.succ[a][w] {
                        cover |= dom[u];
                    }
                    let mut keep = 0;
                    for t in ones(d) {
                        let ok_back = self.dsucc[a][t] & !cover == 0;
                        let ok_forth = self.succ[a][w]
                            .iter()
                            .all(|&u| dom[u] & self.dsucc[a][t] != 0)
                            && self.pred[a][w]
                                .iter()
                                .all(|&u| dom[u] & self.dpred[a][t] != 0);
                        if ok_back && ok_forth {
                            keep |= 1 << t;
                        }
                    }
                    d = keep;
                }
                if d == 0 {
                    return false;
                }
                if d != before {
                    dom[w] = d;
                    changed = true;
                }
                union |= d;
            }
            if union != self.all {
                return false;
            }
            if !changed {
                return true;
            }
        }
    }

    fn dfs(&mut self, k: usize, dom: &mut Vec<Mask>) -> Option<Option<PMorphismMap>> {
        self.nodes += 1;
        if let Some(l) = self.limit {
            if self.nodes > l {
                return None;
            }
        }
        if k == self.order.len() {
            return Some(Some(
                dom.iter().map(|m| m.trailing_zeros() as usize).collect(),
            ));
        }
        let w = self.order[k];
        let mut d = dom[w];
        if let Some(prev) = self.le_after[w] {
            // value(w) ≥ value(prev); prev is assigned earlier in the order
            let lo = dom[prev].trailing_zeros();
            d &= !((1u64 << lo) - 1);
        }
        for t in ones(d) {
            let mut next = dom.clone();
            next[w] = 1 << t;
            if self.propagate(&mut next) {
                match self.dfs(k + 1, &mut next)? {
                    Some(m) => return Some(Some(m)),
                    None => {}
                }
            }
        }
        Some(None)
    }
}

fn ones(mut m: Mask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let t = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(t)
        }
    })
}

/// Search for an onto p-morphism `src → dst`. `dst` may have at most 64
/// worlds. Any returned map has been re-verified.
pub fn search_pmorphism(src: &Frame, dst: &Frame, opts: &SearchOptions) -> SearchResult {
    let (ns, nd) = (src.size(), dst.size());
    if nd > 64 {
        return SearchResult::Inconclusive {
            reason: format!("target has {nd} worlds; at most 64 supported"),
        };
    }
    if ns > opts.bound {
        return SearchResult::Inconclusive {
            reason: format!("source has {ns} worlds, bound is {}", opts.bound),
        };
    }
    if nd > ns {
        return SearchResult::NotFound;
    }
    let rel = |f: &Frame, a: usize| f.rel(ax(a)).clone();
    let succ = [0, 1].map(|a| {
        (0..ns)
            .map(|w| rel(src, a).succ(w).ones().collect())
            .collect::<Vec<Vec<usize>>>()
    });
    let pred = [0, 1].map(|a| {
        let t = rel(src, a).transpose();
        (0..ns)
            .map(|w| t.succ(w).ones().collect())
            .collect::<Vec<Vec<usize>>>()
    });
    let dsucc = [0, 1].map(|a| {
        (0..nd)
            .map(|t| mask_of(rel(dst, a).succ(t).ones()))
            .collect::<Vec<_>>()
    });
    let dpred = [0, 1].map(|a| {
        let tr = rel(dst, a).transpose();
        (0..nd)
            .map(|t| mask_of(tr.succ(t).ones()))
            .collect::<Vec<_>>()
    });
    let all: Mask = if nd == 64 { !0 } else { (1u64 << nd) - 1 };

    // Initial domains: loops preserved, and no more target successors than
    // source successors on either axis.
    let mut dom = vec![0; ns];
    for w in 0..ns {
        for t in 0..nd {
            let ok = (0..2).all(|a| {
                let r = src.rel(ax(a));
                (!r.contains(w, w) || dst.rel(ax(a)).contains(t, t))
                    && dsucc[a][t].count_ones() as usize <= succ[a][w].len()
            });
            if ok {
                dom[w] |= 1 << t;
            }
        }
    }

    // BFS order from world 0 (or the product's corner), then stragglers.
    let mut order = Vec::with_capacity(ns);
    let mut seen = vec![false; ns];
    for start in 0..ns {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(w) = q.pop_front() {
            order.push(w);
            for a in 0..2 {
                for &u in &succ[a][w] {
                    if !seen[u] {
                        seen[u] = true;
                        q.push_back(u);
                    }
                }
            }
        }
    }

    // Symmetry breaking for products: columns sorted by their value in row
    // y = 0, then rows y ≥ 1 sorted by their value in column x = 0.
    let mut le_after = vec![None; ns];
    if let Some((nx, ny)) = opts.product_shape {
        if nx * ny == ns {
            let idx = |x: usize, y: usize| super::product_index(x, y, ny);
            let pos: Vec<usize> = {
                let mut p = vec![0; ns];
                for (i, &w) in order.iter().enumerate() {
                    p[w] = i;
                }
                p
            };
            for x in 1..nx {
                le_after[idx(x, 0)] = Some(idx(x - 1, 0));
            }
            for y in 2..ny {
                le_after[idx(0, y)] = Some(idx(0, y - 1));
            }
            // Only valid if the predecessor is decided first.
            for w in 0..ns {
                if let Some(p) = le_after[w] {
                    if pos[p] > pos[w] {
                        le_after[w] = None;
                    }
                }
            }
        }
    }

    let mut ctx = Ctx {
        src,
        order,
        succ,
        pred,
        dsucc,
        dpred,
        all,
        le_after,
        nodes: 0,
        limit: opts.node_limit,
    };
    if !ctx.propagate(&mut dom) {
        return SearchResult::NotFound;
    }
    match ctx.dfs(0, &mut dom) {
        None => SearchResult::Inconclusive {
            reason: format!("node limit {} reached", opts.node_limit.unwrap_or(0)),
        },
        Some(None) => SearchResult::NotFound,
        Some(Some(map)) => {
            verify_pmorphism(ctx.src, dst, &map, true)
                .expect("search produced a map that fails verification");
            SearchResult::Found { map }
        }
    }
}
