use serde::{Deserialize, Serialize};

use super::{check_solution, compute_solution, node_bounds, Constraint, ConstraintSet};
use crate::extnat::{ExtNat, Fin};

/// A path `z0 →^λ1 … →^λm zm` with `max(z0) < λ1···λm · min(zm)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadPath {
    pub nodes: Vec<usize>,
    /// `labels[i]` is the label of `nodes[i] → nodes[i+1]`.
    pub labels: Vec<u8>,
    pub max_start: ExtNat,
    pub min_end: ExtNat,
}

impl BadPath {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `λ1···λm · min(zm)`, saturating to `ℵ₀`.
    pub fn weight(&self) -> ExtNat {
        self.labels
            .iter()
            .fold(self.min_end, |acc, &l| acc.mul_small(l as u64))
    }

    pub fn holds(&self) -> bool {
        self.max_start < self.weight()
    }

    /// Edges exist, bounds match the constraint set and the inequality holds.
    pub fn verify(&self, con: &ConstraintSet) -> bool {
        if self.nodes.len() != self.labels.len() + 1 {
            return false;
        }
        let edges_ok = self.nodes.windows(2).zip(&self.labels).all(|(w, &l)| {
            con.constraints.contains(&Constraint::GeScaled {
                z: w[0],
                lambda: l,
                w: w[1],
            })
        });
        edges_ok
            && node_bounds(con, self.nodes[0]).0 == self.max_start
            && node_bounds(con, *self.nodes.last().unwrap()).1 == self.min_end
            && self.holds()
    }

    pub fn render(&self, con: &ConstraintSet) -> String {
        let mut s = con.names[self.nodes[0]].clone();
        for (z, l) in self.nodes[1..].iter().zip(&self.labels) {
            s.push_str(&format!(" ->{l} {}", con.names[*z]));
        }
        s
    }
}

/// A bad path if one exists. Prefers a length-0 path; otherwise follows the
/// components that force the canonical solution over an equality bound.
/// Backtracks `u →¹ v →¹ u` are removed.
pub fn find_bad_path(con: &ConstraintSet) -> Option<BadPath> {
    let mut p = find_raw(con)?;
    let mut i = 0;
    while i + 2 < p.nodes.len() {
        if p.labels[i] == 1 && p.labels[i + 1] == 1 && p.nodes[i] == p.nodes[i + 2] {
            p.nodes.drain(i + 1..i + 3);
            p.labels.drain(i..i + 2);
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
    Some(p)
}

fn find_raw(con: &ConstraintSet) -> Option<BadPath> {
    let bounds: Vec<(ExtNat, ExtNat)> = (0..con.len()).map(|z| node_bounds(con, z)).collect();
    if let Some(z) = (0..con.len()).find(|&z| bounds[z].0 < bounds[z].1) {
        return Some(BadPath {
            nodes: vec![z],
            labels: vec![],
            max_start: bounds[z].0,
            min_end: bounds[z].1,
        });
    }
    let r = compute_solution(con);
    let z0 = match check_solution(con, &r.xi) {
        Ok(()) => return None,
        Err(Constraint::Eq { z, .. }) => z,
        Err(c) => unreachable!("canonical solution violates {c:?}"),
    };
    let (g, cond) = (&r.graph, &r.cond);
    let in_scc = |s: usize| move |z: usize| cond.scc_of[z] == s;

    // Chain of components, each with ν twice its successor's, down to one
    // whose ν is its own lower bound.
    let mut nodes = vec![z0];
    let mut labels = vec![];
    let mut s = cond.scc_of[z0];
    let mut entry = z0;
    while r.nu[s] != cond.min_s[s] {
        let t = *cond.dag[s]
            .iter()
            .find(|&&t| r.nu[t].mul_small(2) == r.nu[s])
            .expect("ν above minS is attained by a successor");
        let (u, v) = g
            .edges
            .iter()
            .filter(|&&(u, _, v)| cond.scc_of[u] == s && cond.scc_of[v] == t)
            .map(|&(u, _, v)| (u, v))
            .next()
            .unwrap();
        let inner = g.bfs_path(entry, u, in_scc(s)).unwrap();
        nodes.extend(&inner[1..]);
        nodes.push(v);
        labels.extend(inner[1..].iter().map(|_| 1u8));
        labels.push(2);
        s = t;
        entry = v;
    }

    let max_start = bounds[z0].0;
    if !cond.internal_double[s] {
        // The component's bound is attained at a member.
        let target = *cond.members[s]
            .iter()
            .find(|&&z| bounds[z].1 == cond.min_s[s])
            .unwrap();
        let inner = g.bfs_path(entry, target, in_scc(s)).unwrap();
        nodes.extend(&inner[1..]);
        labels.extend(inner[1..].iter().map(|_| 1u8));
        let p = BadPath {
            nodes,
            labels,
            max_start,
            min_end: bounds[target].1,
        };
        debug_assert!(p.holds());
        return Some(p);
    }

    // Pump a cycle through an internal →² edge until the bound is exceeded.
    let (a, b) = g
        .edges
        .iter()
        .find(|&&(u, l, v)| l == 2 && cond.scc_of[u] == s && cond.scc_of[v] == s)
        .map(|&(u, _, v)| (u, v))
        .unwrap();
    let to_a = g.bfs_path(entry, a, in_scc(s)).unwrap();
    let back = g.bfs_path(b, entry, in_scc(s)).unwrap();
    let mut cycle_nodes: Vec<usize> = to_a[1..].to_vec();
    cycle_nodes.push(b);
    cycle_nodes.extend(&back[1..]);
    let mut prev = entry;
    let cycle_labels: Vec<u8> = cycle_nodes
        .iter()
        .map(|&z| {
            let l = g.label(prev, z).unwrap();
            prev = z;
            l
        })
        .collect();
    let end_min = bounds[entry].1;
    loop {
        let p = BadPath {
            nodes: nodes.clone(),
            labels: labels.clone(),
            max_start,
            min_end: end_min,
        };
        if p.holds() {
            return Some(p);
        }
        nodes.extend(&cycle_nodes);
        labels.extend(&cycle_labels);
    }
}

/// Reference check: saturating max-product over all paths up to a length
/// that suffices whenever a bad path exists.
pub fn bad_path_exists_bruteforce(con: &ConstraintSet) -> bool {
    let n = con.len();
    let bounds: Vec<(ExtNat, ExtNat)> = (0..n).map(|z| node_bounds(con, z)).collect();
    let edges: Vec<(usize, u8, usize)> = con
        .constraints
        .iter()
        .filter_map(|c| match *c {
            Constraint::GeScaled { z, lambda, w } => Some((z, lambda, w)),
            _ => None,
        })
        .collect();
    for z0 in 0..n {
        let Fin(m) = bounds[z0].0 else { continue };
        let cap = m + 1;
        let len = 2 * n * (64 - m.leading_zeros() as usize + 1) + 2;
        let mut best = vec![0u64; n];
        best[z0] = 1;
        for _ in 0..len {
            let mut next = best.clone();
            for &(u, l, v) in &edges {
                if best[u] > 0 {
                    next[v] = next[v].max((best[u] * l as u64).min(cap));
                }
            }
            if next == best {
                break;
            }
            best = next;
        }
        for z in 0..n {
            if best[z] > 0 {
                let w = match bounds[z].1 {
                    Fin(k) => Fin(best[z].saturating_mul(k)),
                    inf => inf,
                };
                if Fin(m) < w {
                    return true;
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::super::extract_constraints;
    use super::super::fixtures::*;
    use super::*;
    use crate::grid::{build_family, Family};

    #[test]
    fn length_zero_on_f_family() {
        for k in 3..=6 {
            let con = extract_constraints(&build_family(Family::F, k).unwrap()).unwrap();
            let p = find_bad_path(&con).unwrap();
            assert!(p.is_empty());
            assert_eq!((p.max_start, p.min_end), (Fin(k), Fin(k + 1)));
            assert!(p.verify(&con));
        }
    }

    #[test]
    fn within_one_component() {
        let con = extract_constraints(&badgrids1()).unwrap();
        let p = find_bad_path(&con).unwrap();
        assert!(p.verify(&con));
        assert_eq!(p.max_start, Fin(6));
        assert_eq!(p.weight(), Fin(12));
        assert_eq!(p.render(&con), "y1 ->2 x1 ->1 y2 ->1 x2 ->1 y1");
    }

    #[test]
    fn not_simple() {
        let con = extract_constraints(&badgrids2()).unwrap();
        let p = find_bad_path(&con).unwrap();
        assert!(p.verify(&con));
        assert_eq!((p.max_start, p.weight()), (Fin(12), Fin(24)));
        let mut seen = p.nodes.clone();
        seen.sort();
        seen.dedup();
        assert!(seen.len() < p.nodes.len());
        assert!(bad_path_exists_bruteforce(&con));
        for i in 0..p.len().saturating_sub(1) {
            let backtrack =
                p.labels[i] == 1 && p.labels[i + 1] == 1 && p.nodes[i] == p.nodes[i + 2];
            assert!(!backtrack);
        }
    }

    #[test]
    fn good_grids_have_none() {
        for g in [grid_sqbad(), bothways()] {
            let con = extract_constraints(&g).unwrap();
            assert_eq!(find_bad_path(&con), None);
            assert!(!bad_path_exists_bruteforce(&con));
        }
    }
}
