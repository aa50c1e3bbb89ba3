use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{node_bounds, Constraint, ConstraintSet, Solution};
use crate::extnat::{Aleph0, ExtNat};

/// Edges `z →^λ w` for every `z ≥ λ·w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintGraph {
    pub n: usize,
    /// All labelled edges, sorted and deduplicated.
    pub edges: BTreeSet<(usize, u8, usize)>,
    /// Per node: successors with the largest label, sorted by target.
    pub adj: Vec<Vec<(usize, u8)>>,
}

impl ConstraintGraph {
    pub fn label(&self, z: usize, w: usize) -> Option<u8> {
        self.adj[z].iter().find(|&&(t, _)| t == w).map(|&(_, l)| l)
    }

    /// Shortest path `from → to` staying inside `allowed`, lexicographically
    /// least among shortest.
    pub fn bfs_path(
        &self,
        from: usize,
        to: usize,
        allowed: impl Fn(usize) -> bool,
    ) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.n];
        prev[from] = from;
        let mut q = VecDeque::from([from]);
        while let Some(z) = q.pop_front() {
            if z == to {
                let mut path = vec![to];
                let mut c = to;
                while c != from {
                    c = prev[c];
                    path.push(c);
                }
                path.reverse();
                return Some(path);
            }
            for &(w, _) in &self.adj[z] {
                if prev[w] == usize::MAX && allowed(w) {
                    prev[w] = z;
                    q.push_back(w);
                }
            }
        }
        None
    }
}

pub fn build_graph(con: &ConstraintSet) -> ConstraintGraph {
    let n = con.len();
    let mut edges = BTreeSet::new();
    let mut best: Vec<BTreeMap<usize, u8>> = vec![BTreeMap::new(); n];
    for c in &con.constraints {
        if let Constraint::GeScaled { z, lambda, w } = *c {
            edges.insert((z, lambda, w));
            let e = best[z].entry(w).or_insert(lambda);
            *e = (*e).max(lambda);
        }
    }
    let adj = best.into_iter().map(|m| m.into_iter().collect()).collect();
    ConstraintGraph { n, edges, adj }
}

/// Strongly connected components of the constraint graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condensation {
    pub scc_of: Vec<usize>,
    /// Components numbered by their least member; members sorted.
    pub members: Vec<Vec<usize>>,
    /// `S ⇒ S'`: some edge from `S` to `S'` (always labelled 2).
    pub dag: Vec<BTreeSet<usize>>,
    /// Whether the component has an internal `→²` edge.
    pub internal_double: Vec<bool>,
    pub max_s: Vec<ExtNat>,
    pub min_s: Vec<ExtNat>,
    /// Sinks first: every component appears after all its successors.
    pub reverse_topo: Vec<usize>,
}

impl Condensation {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn tarjan(g: &ConstraintGraph) -> Vec<Vec<usize>> {
    struct St<'a> {
        g: &'a ConstraintGraph,
        index: Vec<usize>,
        low: Vec<usize>,
        on: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn visit(s: &mut St, v: usize) {
        s.index[v] = s.next;
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on[v] = true;
        for i in 0..s.g.adj[v].len() {
            let w = s.g.adj[v][i].0;
            if s.index[w] == usize::MAX {
                visit(s, w);
                s.low[v] = s.low[v].min(s.low[w]);
            } else if s.on[w] {
                s.low[v] = s.low[v].min(s.index[w]);
            }
        }
        if s.low[v] == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().unwrap();
                s.on[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            s.out.push(comp);
        }
    }
    let mut s = St {
        g,
        index: vec![usize::MAX; g.n],
        low: vec![0; g.n],
        on: vec![false; g.n],
        stack: vec![],
        next: 0,
        out: vec![],
    };
    for v in 0..g.n {
        if s.index[v] == usize::MAX {
            visit(&mut s, v);
        }
    }
    s.out
}

pub fn condense(con: &ConstraintSet, g: &ConstraintGraph) -> Condensation {
    // Tarjan emits components sinks first.
    let mut comps = tarjan(g);
    for c in &mut comps {
        c.sort_unstable();
    }
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by_key(|&i| comps[i][0]);
    let mut renum = vec![0; comps.len()];
    for (new, &old) in order.iter().enumerate() {
        renum[old] = new;
    }
    let reverse_topo: Vec<usize> = (0..comps.len()).map(|old| renum[old]).collect();
    let members: Vec<Vec<usize>> = order.iter().map(|&old| comps[old].clone()).collect();
    let k = members.len();
    let mut scc_of = vec![0; g.n];
    for (s, m) in members.iter().enumerate() {
        for &z in m {
            scc_of[z] = s;
        }
    }
    let mut dag = vec![BTreeSet::new(); k];
    let mut internal_double = vec![false; k];
    for &(z, l, w) in &g.edges {
        let (a, b) = (scc_of[z], scc_of[w]);
        if a == b {
            internal_double[a] |= l == 2;
        } else {
            dag[a].insert(b);
        }
    }
    let bounds: Vec<(ExtNat, ExtNat)> = (0..g.n).map(|z| node_bounds(con, z)).collect();
    let max_s = members
        .iter()
        .map(|m| m.iter().map(|&z| bounds[z].0).min().unwrap())
        .collect();
    let min_s = members
        .iter()
        .enumerate()
        .map(|(s, m)| {
            if internal_double[s] {
                Aleph0
            } else {
                m.iter().map(|&z| bounds[z].1).max().unwrap()
            }
        })
        .collect();
    Condensation {
        scc_of,
        members,
        dag,
        internal_double,
        max_s,
        min_s,
        reverse_topo,
    }
}

/// `ν_min` per component and the induced node values `ξ_min`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NuMin {
    pub graph: ConstraintGraph,
    pub cond: Condensation,
    pub nu: Vec<ExtNat>,
    pub xi: Solution,
}

/// `ν(S) = max(minS, 2·ν(S'))` over `S ⇒ S'`. The result is a solution
/// whenever the constraint set has one.
pub fn compute_solution(con: &ConstraintSet) -> NuMin {
    let graph = build_graph(con);
    let cond = condense(con, &graph);
    let mut nu = vec![ExtNat::ZERO; cond.len()];
    for &s in &cond.reverse_topo {
        let mut v = cond.min_s[s];
        for &t in &cond.dag[s] {
            v = v.max(nu[t].mul_small(2));
        }
        nu[s] = v;
    }
    let xi = (0..con.len()).map(|z| nu[cond.scc_of[z]]).collect();
    NuMin {
        graph,
        cond,
        nu,
        xi,
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{check_solution, extract_constraints};
    use super::*;
    use crate::extnat::Fin;

    fn comp_of(r: &NuMin, con: &ConstraintSet, names: &[&str]) -> usize {
        let ids: Vec<usize> = names.iter().map(|n| con.node(n).unwrap()).collect();
        let s = r.cond.scc_of[ids[0]];
        let mut want = ids.clone();
        want.sort();
        assert_eq!(r.cond.members[s], want, "component of {names:?}");
        s
    }

    #[test]
    fn bothways_components_and_nu() {
        let con = extract_constraints(&bothways()).unwrap();
        let r = compute_solution(&con);
        let expect: [(&[&str], u64); 6] = [
            (&["y1"], 14),
            (&["x1"], 14),
            (&["y3", "x2", "y2"], 7),
            (&["y4"], 8),
            (&["x4", "y5", "x5", "x6"], 3),
            (&["x3"], 8),
        ];
        let ids: Vec<usize> = expect.iter().map(|(m, _)| comp_of(&r, &con, m)).collect();
        for ((_, v), &s) in expect.iter().zip(&ids) {
            assert_eq!(r.nu[s], Fin(*v));
        }
        assert_eq!(r.cond.len(), 6);
        let dag_edges: Vec<(usize, usize)> = (0..6)
            .flat_map(|s| r.cond.dag[s].iter().map(move |&t| (s, t)))
            .collect();
        let mut want = vec![(ids[1], ids[2]), (ids[3], ids[4])];
        want.sort();
        assert_eq!(dag_edges, want);
        assert!(check_solution(&con, &r.xi).is_ok());
    }

    #[test]
    fn singletons_without_scaled_edges() {
        let con = ConstraintSet::from_json(&serde_json::json!([
            {"ge": ["x1", 2]}, {"ge": ["y1", 3]}, {"eq": ["x2", 4]}
        ]))
        .unwrap();
        let r = compute_solution(&con);
        assert_eq!(r.cond.len(), 3);
        assert_eq!(r.xi, vec![Fin(2), Fin(3), Fin(4)]);
    }

    #[test]
    fn internal_double_edge_forces_infinity() {
        let con = ConstraintSet::from_json(&serde_json::json!([
            {"ges": ["x1", 2, "y1"]}, {"ges": ["y1", 1, "x1"]}
        ]))
        .unwrap();
        let r = compute_solution(&con);
        assert_eq!(r.cond.len(), 1);
        assert!(r.cond.internal_double[0]);
        assert_eq!(r.xi, vec![Aleph0, Aleph0]);
    }

    #[test]
    fn bfs_is_shortest() {
        let con = extract_constraints(&badgrids1()).unwrap();
        let g = build_graph(&con);
        let (y1, x2) = (con.node("y1").unwrap(), con.node("x2").unwrap());
        let p = g.bfs_path(y1, x2, |_| true).unwrap();
        assert_eq!(p.first(), Some(&y1));
        assert_eq!(p.last(), Some(&x2));
        assert!(p.len() <= 3);
    }
}
