use serde::Serialize;

use super::{compute_solution, node_bounds, ConstraintSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NodeStatus {
    /// `z = n` is a constraint.
    Strict {
        n: u64,
    },
    /// Reachable from a strict node; `path` runs from that node to `z` and
    /// attains `ub`.
    Bounded {
        ub: u64,
        path: Vec<usize>,
    },
    Unbounded,
}

impl NodeStatus {
    pub fn ub(&self) -> Option<u64> {
        match self {
            NodeStatus::Strict { n } => Some(*n),
            NodeStatus::Bounded { ub, .. } => Some(*ub),
            NodeStatus::Unbounded => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.ub().is_some()
    }
}

/// Status of every node. Meaningful when the constraint set has no bad path:
/// then components reachable from strict nodes carry no internal `→²` edge
/// and every path weight is the number of `→²` steps between components.
pub fn node_status(con: &ConstraintSet) -> Vec<NodeStatus> {
    let r = compute_solution(con);
    let (g, cond) = (&r.graph, &r.cond);
    let n = con.len();
    let strict: Vec<Option<u64>> = (0..n).map(|z| node_bounds(con, z).0.finite()).collect();

    // For each strict source: longest →² count to every component, with
    // the predecessor component that attains it (least id on ties).
    let k = cond.len();
    let mut topo = cond.reverse_topo.clone();
    topo.reverse();
    let mut best: Vec<Option<(u64, usize)>> = vec![None; n]; // (ub, source)
    let mut dist_from: Vec<Vec<Option<(u32, usize)>>> = vec![Vec::new(); n];
    for s in 0..n {
        let Some(ns) = strict[s] else { continue };
        let mut dist: Vec<Option<(u32, usize)>> = vec![None; k];
        let home = cond.scc_of[s];
        dist[home] = Some((0, home));
        for &c in &topo {
            let Some((d, _)) = dist[c] else { continue };
            for &t in &cond.dag[c] {
                let cand = (d + 1, c);
                match dist[t] {
                    Some((dt, pt)) if dt > cand.0 || (dt == cand.0 && pt <= c) => {}
                    _ => dist[t] = Some(cand),
                }
            }
        }
        for z in 0..n {
            if let Some((d, _)) = dist[cond.scc_of[z]] {
                let ub = if d >= 64 { 0 } else { ns >> d };
                if best[z].map_or(true, |(b, _)| ub < b) {
                    best[z] = Some((ub, s));
                }
            }
        }
        dist_from[s] = dist;
    }

    (0..n)
        .map(|z| {
            if let Some(m) = strict[z] {
                return NodeStatus::Strict { n: m };
            }
            let Some((ub, s)) = best[z] else {
                return NodeStatus::Unbounded;
            };
            // Component chain from SCC(s) to SCC(z), then expand.
            let dist = &dist_from[s];
            let mut chain = vec![cond.scc_of[z]];
            while *chain.last().unwrap() != cond.scc_of[s] {
                let c = *chain.last().unwrap();
                chain.push(dist[c].unwrap().1);
            }
            chain.reverse();
            let mut path = vec![s];
            for w in chain.windows(2) {
                let (u, v) = g
                    .edges
                    .iter()
                    .find(|&&(u, _, v)| cond.scc_of[u] == w[0] && cond.scc_of[v] == w[1])
                    .map(|&(u, _, v)| (u, v))
                    .unwrap();
                let here = *path.last().unwrap();
                let inner = g.bfs_path(here, u, |x| cond.scc_of[x] == w[0]).unwrap();
                path.extend(&inner[1..]);
                path.push(v);
            }
            let here = *path.last().unwrap();
            let inner = g
                .bfs_path(here, z, |x| cond.scc_of[x] == cond.scc_of[z])
                .unwrap();
            path.extend(&inner[1..]);
            NodeStatus::Bounded { ub, path }
        })
        .collect()
}

/// `⌊n / λ1···λm⌋` for a path starting at a strict node.
#[cfg(test)]
pub(crate) fn path_bound(con: &ConstraintSet, path: &[usize]) -> Option<u64> {
    let n = node_bounds(con, path[0]).0.finite()?;
    let g = super::build_graph(con);
    let mut prod = 1u64;
    for w in path.windows(2) {
        prod = prod.saturating_mul(g.label(w[0], w[1])? as u64);
    }
    Some(n / prod)
}
