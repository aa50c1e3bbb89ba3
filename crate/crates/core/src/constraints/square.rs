use serde::Serialize;

use super::{
    check_solution, compute_solution, diagnose, extract_constraints, node_bounds, node_status,
    ConstraintSet, Diagnosis, NodeStatus, Solution,
};
use crate::extnat::{Aleph0, ExtNat, Fin};
use crate::grid::{GridSpec, Side};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SquareVerdict {
    /// A solution with equal side sums. For an open side the witness is over
    /// the one-copy materialization, with the open side summing to `ℵ₀`.
    SquareGood {
        witness: Solution,
    },
    /// Every node is bounded and no solution balances the sides.
    #[serde(rename = "bad_case_i")]
    BadCaseI,
    /// Every node of `bounded_side` is bounded, `unbounded` is a node of the
    /// other side, and every solution has the bounded side strictly smaller.
    #[serde(rename = "bad_case_ii")]
    BadCaseII {
        bounded_side: Side,
        unbounded: usize,
    },
    /// `side` is infinite, every node of the other side is bounded, and the
    /// finite `subgrid` already forces the other side to be smaller.
    #[serde(rename = "bad_case_iii")]
    BadCaseIII {
        side: Side,
        subgrid: GridSpec,
    },
    NotApplicable {
        reason: String,
    },
}

/// Classify a grid whose constraint set is solvable by whether some solution
/// has equal X and Y sums.
pub fn square_diagnose(g: &GridSpec) -> SquareVerdict {
    match diagnose(g) {
        Diagnosis::Good { .. } => {}
        d => {
            return SquareVerdict::NotApplicable {
                reason: match d {
                    Diagnosis::Impossible(_) => "grid has an impossible bi-cluster".into(),
                    _ => "constraint graph has a bad path".into(),
                },
            }
        }
    }
    let con = extract_constraints(g).expect("checked above");
    let status = node_status(&con);
    let unbounded = |side: Side| -> Vec<usize> {
        (0..con.len())
            .filter(|&z| con.sides[z] == side && !status[z].is_bounded())
            .collect()
    };
    let (ux, uy) = (unbounded(Side::X), unbounded(Side::Y));

    if let Some(open) = &g.open {
        let finite = open.side.other();
        if unbounded(finite).is_empty() {
            return SquareVerdict::BadCaseIII {
                side: open.side,
                subgrid: finite_witness(g, &con, &status),
            };
        }
        return SquareVerdict::SquareGood {
            witness: all_unbounded_infinite(&con, &status),
        };
    }

    if !ux.is_empty() && !uy.is_empty() {
        return SquareVerdict::SquareGood {
            witness: all_unbounded_infinite(&con, &status),
        };
    }
    match balanced_solution(&con, &status) {
        Some(xi) => SquareVerdict::SquareGood { witness: xi },
        None if ux.is_empty() && uy.is_empty() => SquareVerdict::BadCaseI,
        None if ux.is_empty() => SquareVerdict::BadCaseII {
            bounded_side: Side::X,
            unbounded: uy[0],
        },
        None => SquareVerdict::BadCaseII {
            bounded_side: Side::Y,
            unbounded: ux[0],
        },
    }
}

fn all_unbounded_infinite(con: &ConstraintSet, status: &[NodeStatus]) -> Solution {
    let mut xi = compute_solution(con).xi;
    for (z, st) in status.iter().enumerate() {
        if !st.is_bounded() {
            xi[z] = Aleph0;
        }
    }
    debug_assert!(check_solution(con, &xi).is_ok());
    xi
}

/// Given grid plus enough copies of the open template that the open side
/// outnumbers the sum of upper bounds on the finite side.
fn finite_witness(g: &GridSpec, con: &ConstraintSet, status: &[NodeStatus]) -> GridSpec {
    let open = g.open.as_ref().unwrap();
    let finite = open.side.other();
    let total: u64 = (0..con.len())
        .filter(|&z| con.sides[z] == finite)
        .map(|z| status[z].ub().unwrap())
        .sum();
    let explicit = match open.side {
        Side::X => g.nx(),
        Side::Y => g.ny(),
    } as u64;
    let copies = (total + 1).saturating_sub(explicit).max(1);
    g.materialize_open(copies as usize)
}

/// Search the bounded components' values (finitely many) for a solution with
/// equal side sums; unbounded nodes, all on one side, take their least values
/// and one of them absorbs any deficit.
fn balanced_solution(con: &ConstraintSet, status: &[NodeStatus]) -> Option<Solution> {
    let r = compute_solution(con);
    let cond = &r.cond;
    let k = cond.len();
    let bounds: Vec<(ExtNat, ExtNat)> = (0..con.len()).map(|z| node_bounds(con, z)).collect();
    let bounded_comp: Vec<bool> = (0..k)
        .map(|s| status[cond.members[s][0]].is_bounded())
        .collect();
    let order: Vec<usize> = cond
        .reverse_topo
        .iter()
        .copied()
        .filter(|&s| bounded_comp[s])
        .collect();
    let hi: Vec<u64> = (0..k)
        .map(|s| {
            let ub = cond.members[s]
                .iter()
                .filter_map(|&z| status[z].ub())
                .min()
                .unwrap_or(u64::MAX);
            match cond.max_s[s] {
                Fin(m) => ub.min(m),
                Aleph0 => ub,
            }
        })
        .collect();

    struct Search<'a> {
        con: &'a ConstraintSet,
        cond: &'a super::Condensation,
        bounds: &'a [(ExtNat, ExtNat)],
        bounded_comp: &'a [bool],
        order: &'a [usize],
        hi: &'a [u64],
        val: Vec<ExtNat>,
    }

    impl Search<'_> {
        fn lower(&self, s: usize) -> ExtNat {
            let mut lo = self.cond.min_s[s];
            for &t in &self.cond.dag[s] {
                lo = lo.max(self.val[t].mul_small(2));
            }
            lo
        }

        fn leaf(&self) -> Option<Solution> {
            let mut val = self.val.clone();
            for &s in &self.cond.reverse_topo {
                if !self.bounded_comp[s] {
                    val[s] = self.lower(s);
                }
            }
            let mut xi: Solution = (0..self.con.len())
                .map(|z| val[self.cond.scc_of[z]])
                .collect();
            let unb: Vec<usize> = (0..self.con.len())
                .filter(|&z| !self.bounded_comp[self.cond.scc_of[z]])
                .collect();
            let sx = self.con.side_sum(&xi, Side::X);
            let sy = self.con.side_sum(&xi, Side::Y);
            if unb.is_empty() {
                return (sx == sy).then_some(xi);
            }
            let (Fin(a), Fin(b)) = (sx, sy) else {
                return None;
            };
            let u = unb[0];
            let (mine, other) = if self.con.sides[u] == Side::X {
                (a, b)
            } else {
                (b, a)
            };
            if mine > other {
                return None;
            }
            xi[u] = xi[u] + Fin(other - mine);
            // Raising a lone unbounded node cannot break an equality: it has none.
            debug_assert!(self.bounds[u].0 == Aleph0);
            check_solution(self.con, &xi).ok().map(|_| xi)
        }

        fn go(&mut self, i: usize) -> Option<Solution> {
            if i == self.order.len() {
                return self.leaf();
            }
            let s = self.order[i];
            let Fin(lo) = self.lower(s) else { return None };
            for v in lo..=self.hi[s] {
                self.val[s] = Fin(v);
                if let Some(xi) = self.go(i + 1) {
                    return Some(xi);
                }
            }
            None
        }
    }

    let mut search = Search {
        con,
        cond,
        bounds: &bounds,
        bounded_comp: &bounded_comp,
        order: &order,
        hi: &hi,
        val: vec![ExtNat::ZERO; k],
    };
    search.go(0)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::grid::{build_family, BiCluster, Family, OpenSide};

    #[test]
    fn sqbad_is_case_ii() {
        let g = grid_sqbad();
        let y2 = g.node_index("y2").unwrap();
        assert_eq!(
            square_diagnose(&g),
            SquareVerdict::BadCaseII {
                bounded_side: Side::X,
                unbounded: y2
            }
        );
    }

    #[test]
    fn families() {
        assert!(matches!(
            square_diagnose(&build_family(Family::G, 4).unwrap()),
            SquareVerdict::SquareGood { .. }
        ));
        let h3 = build_family(Family::H, 3).unwrap();
        assert!(matches!(
            square_diagnose(&h3),
            SquareVerdict::BadCaseII {
                bounded_side: Side::Y,
                ..
            }
        ));
        assert!(matches!(
            square_diagnose(&build_family(Family::F, 3).unwrap()),
            SquareVerdict::NotApplicable { .. }
        ));
    }

    #[test]
    fn bothways_is_case_i() {
        assert_eq!(square_diagnose(&bothways()), SquareVerdict::BadCaseI);
    }

    #[test]
    fn balanced_grid_is_good() {
        let g = GridSpec::with_default(
            &["x1", "x2"],
            &["y1", "y2"],
            BiCluster::new(0, 0, 0, 1),
            &[],
        )
        .unwrap();
        let SquareVerdict::SquareGood { witness } = square_diagnose(&g) else {
            panic!()
        };
        let con = extract_constraints(&g).unwrap();
        assert_eq!(
            con.side_sum(&witness, Side::X),
            con.side_sum(&witness, Side::Y)
        );
    }

    #[test]
    fn open_side_case_iii() {
        // One column of strict cells and infinitely many rows like it.
        let mut g =
            GridSpec::with_default(&["x1"], &["y1"], BiCluster::new(0, 0, 0, 2), &[]).unwrap();
        g.open = Some(OpenSide {
            side: Side::Y,
            template: vec![BiCluster::new(1, 0, 0, 0)],
        });
        let SquareVerdict::BadCaseIII { side, subgrid } = square_diagnose(&g) else {
            panic!()
        };
        assert_eq!(side, Side::Y);
        assert!(subgrid.open.is_none());
        assert!(subgrid.ny() as u64 > 2);
        // The witness itself is square-bad with the y side larger.
        assert!(matches!(
            square_diagnose(&subgrid),
            SquareVerdict::BadCaseII {
                bounded_side: Side::X,
                ..
            }
        ));
    }
}
