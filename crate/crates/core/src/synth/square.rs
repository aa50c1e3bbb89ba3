use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{
    cell_points, irreflexive_marker, point_index, remap, split_points, transpose_map, Countermodel,
    VariableScheme as V,
};
use crate::constraints::{
    compute_solution, extract_constraints, node_bounds, node_status, square_diagnose,
    ConstraintSet, NodeStatus, SquareVerdict,
};
use crate::error::{Error, Result};
use crate::extnat::{ExtNat, Fin};
use crate::formula::{box_plus, conj, dia, dia_plus, implies, not, var, Axis, Formula};
use crate::grid::{realize_grid, BiClusterType, GridSpec, PointInfo, PointKind, Side};
use crate::semantics::Model;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SquareCase {
    I,
    II,
    III,
}

/// `grid` is the finite grid the formula is built from (the witness
/// subgrid in case III); every node of `bounded_side` is bounded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareParams {
    pub case: SquareCase,
    pub bounded_side: Side,
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareParts {
    pub upper_bound: Formula,
    pub switch: Formula,
    pub lower_bound: Formula,
    pub out: Formula,
}

impl SquareParts {
    pub fn solution(&self) -> Formula {
        conj([
            self.upper_bound.clone(),
            self.switch.clone(),
            self.lower_bound.clone(),
        ])
    }

    pub fn formula(&self) -> Formula {
        implies(self.solution(), self.out.clone())
    }

    fn swap_axes(&self) -> Self {
        SquareParts {
            upper_bound: self.upper_bound.swap_axes(),
            switch: self.switch.swap_axes(),
            lower_bound: self.lower_bound.swap_axes(),
            out: self.out.swap_axes(),
        }
    }
}

/// Orientation of the construction: `h` has every X node bounded.
struct Setup {
    params: SquareParams,
    h: GridSpec,
    transposed: bool,
    /// Finite grid the countermodel lives on, oriented like `h`, with `h` as
    /// its leading rows.
    model_grid: GridSpec,
}

fn setup(g: &GridSpec) -> Result<Setup> {
    let orient = |t: bool, x: GridSpec| if t { x.transpose() } else { x };
    match square_diagnose(g) {
        SquareVerdict::SquareGood { .. } => Err(Error::Precondition("grid is square-good".into())),
        SquareVerdict::NotApplicable { reason } => Err(Error::Precondition(reason)),
        SquareVerdict::BadCaseI => Ok(Setup {
            params: SquareParams {
                case: SquareCase::I,
                bounded_side: Side::X,
                grid: g.clone(),
            },
            h: g.clone(),
            transposed: false,
            model_grid: g.clone(),
        }),
        SquareVerdict::BadCaseII { bounded_side, .. } => {
            let t = bounded_side == Side::Y;
            Ok(Setup {
                params: SquareParams {
                    case: SquareCase::II,
                    bounded_side,
                    grid: g.clone(),
                },
                h: orient(t, g.clone()),
                transposed: t,
                model_grid: orient(t, g.clone()),
            })
        }
        SquareVerdict::BadCaseIII { side, subgrid } => {
            let t = side == Side::X;
            let extra = match side {
                Side::Y => subgrid.ny() - g.ny(),
                Side::X => subgrid.nx() - g.nx(),
            };
            Ok(Setup {
                params: SquareParams {
                    case: SquareCase::III,
                    bounded_side: side.other(),
                    grid: subgrid.clone(),
                },
                h: orient(t, subgrid),
                transposed: t,
                model_grid: orient(t, g.materialize_open(extra + 1)),
            })
        }
    }
}

struct Build<'a> {
    h: &'a GridSpec,
    con: ConstraintSet,
    status: Vec<NodeStatus>,
    xi: Vec<ExtNat>,
    /// Acyclic subgraph of the constraint graph: spanning trees inside the
    /// bounded components plus every `→²` edge.
    edges: BTreeSet<(usize, u8, usize)>,
    tok: Vec<String>,
}

impl<'a> Build<'a> {
    fn new(h: &'a GridSpec) -> Result<Self> {
        let con = extract_constraints(h)
            .map_err(|c| Error::Precondition(format!("impossible cell ({},{})", c.x, c.y)))?;
        let status = node_status(&con);
        if let Some(x) = (0..h.nx()).find(|&x| !status[x].is_bounded()) {
            return Err(Error::Precondition(format!(
                "{} is unbounded",
                h.node_name(x)
            )));
        }
        let r = compute_solution(&con);
        let (graph, cond) = (&r.graph, &r.cond);
        let mut edges = BTreeSet::new();
        for (s, members) in cond.members.iter().enumerate() {
            if !members.iter().all(|&z| status[z].is_bounded()) {
                continue;
            }
            let strict_root = members
                .iter()
                .copied()
                .find(|&z| matches!(status[z], NodeStatus::Strict { .. }));
            let root = strict_root
                .or_else(|| {
                    members.iter().copied().find(|&z| {
                        graph.edges.iter().any(|&(u, l, v)| {
                            v == z && l == 2 && cond.scc_of[u] != s && status[u].is_bounded()
                        })
                    })
                })
                .ok_or_else(|| Error::Precondition("bounded component without an entry".into()))?;
            let mut seen = BTreeSet::from([root]);
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                for &(a, l, b) in graph.edges.range((u, 0, 0)..=(u, u8::MAX, usize::MAX)) {
                    if cond.scc_of[b] == s && seen.insert(b) {
                        edges.insert((a, l, b));
                        queue.push_back(b);
                    }
                }
            }
        }
        edges.extend(graph.edges.iter().filter(|e| e.1 == 2));

        let n = h.node_count();
        let raw: Vec<String> = (0..n).map(|z| V::sanitize(h.node_name(z))).collect();
        let tok = if raw.iter().collect::<BTreeSet<_>>().len() == n {
            raw
        } else {
            (0..n)
                .map(|z| match h.side(z) {
                    Side::X => format!("x{z}"),
                    Side::Y => format!("y{}", z - h.nx()),
                })
                .collect()
        };
        Ok(Build {
            h,
            xi: r.xi.clone(),
            con,
            status,
            edges,
            tok,
        })
    }

    fn strict(&self, z: usize) -> Option<u64> {
        match self.status[z] {
            NodeStatus::Strict { n } => Some(n),
            _ => None,
        }
    }

    fn bounded(&self, z: usize) -> bool {
        self.status[z].is_bounded()
    }

    fn is_x(&self, z: usize) -> bool {
        self.h.side(z) == Side::X
    }

    fn succ(&self, z: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|e| e.0 == z)
            .map(|e| e.2)
            .collect()
    }

    fn pred(&self, z: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|e| e.2 == z)
            .map(|e| e.0)
            .collect()
    }

    fn label(&self, u: usize, v: usize) -> Option<u8> {
        self.edges
            .iter()
            .find(|e| e.0 == u && e.2 == v)
            .map(|e| e.1)
    }

    /// `(x, y)` for a node and a neighbour on the other side.
    fn pair(&self, z: usize, w: usize) -> (usize, usize) {
        if self.is_x(z) {
            (z, w)
        } else {
            (w, z)
        }
    }

    fn switch_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.edges
            .iter()
            .map(|&(u, _, v)| self.pair(u, v))
            .collect()
    }

    fn same_side(&self, z: usize) -> Vec<usize> {
        (0..self.h.node_count())
            .filter(|&w| self.h.side(w) == self.h.side(z))
            .collect()
    }

    fn marker(&self, z: usize) -> Formula {
        var(V::node(&self.tok[z]))
    }

    /// Column (row) marker holding along the whole line, false on the others.
    fn bar(&self, z: usize) -> Formula {
        let ax = if self.is_x(z) { Axis::V } else { Axis::H };
        conj([
            box_plus(ax, self.marker(z)),
            conj(
                self.same_side(z)
                    .into_iter()
                    .filter(|&w| w != z)
                    .map(|w| not(self.marker(w))),
            ),
        ])
    }

    fn cvar(&self, (x, y): (usize, usize)) -> String {
        V::switch(&self.tok[x], &self.tok[y])
    }

    fn hvar(&self, z: usize, i: u64) -> Formula {
        var(V::strict(&self.tok[z], i as usize))
    }

    fn hvars(&self, z: usize) -> Formula {
        conj((1..=self.strict(z).unwrap()).map(|i| self.hvar(z, i)))
    }

    fn c_kind(&self, (x, y): (usize, usize)) -> PointKind {
        match (self.label(x, y), self.label(y, x)) {
            (Some(2), _) => PointKind::RI,
            (_, Some(2)) => PointKind::IR,
            _ => PointKind::II,
        }
    }

    fn chat(&self, xy: (usize, usize)) -> Formula {
        let (x, y) = xy;
        let c = self.cvar(xy);
        let base = |boxes: &[Axis]| conj([self.bar(x), self.bar(y), irreflexive_marker(&c, boxes)]);
        match self.c_kind(xy) {
            PointKind::RI => {
                let b = base(&[Axis::V]);
                conj([b.clone(), dia(Axis::H, b)])
            }
            PointKind::IR => {
                let b = base(&[Axis::H]);
                conj([b.clone(), dia(Axis::V, b)])
            }
            _ => base(&[Axis::H, Axis::V]),
        }
    }

    /// Unravelled subtree at `z`; strict nodes below the root are leaves.
    fn tree(&self, z: usize, parent: Option<usize>) -> Formula {
        let is_x = self.is_x(z);
        let (step, along) = if is_x {
            (Axis::V, Axis::H)
        } else {
            (Axis::H, Axis::V)
        };
        let leaf = parent.is_some() && self.strict(z).is_some();
        let kids: Vec<Formula> = if leaf {
            vec![]
        } else {
            self.succ(z)
                .into_iter()
                .filter(|&c| self.bounded(c))
                .map(|c| dia(step, self.tree(c, Some(z))))
                .collect()
        };
        let extras: Vec<Formula> = self
            .pred(z)
            .into_iter()
            .filter(|&w| Some(w) != parent)
            .map(|w| {
                let xy = self.pair(z, w);
                if self.bounded(w) {
                    dia(step, not(var(self.cvar(xy))))
                } else {
                    dia(step, self.chat(xy))
                }
            })
            .collect();
        match parent {
            Some(p) => conj([self.chat(self.pair(z, p)), conj(kids), conj(extras)]),
            None => {
                let kids = conj(kids);
                let extras = conj(extras);
                conj((1..=self.strict(z).unwrap()).map(|i| {
                    let h = V::strict(&self.tok[z], i as usize);
                    dia_plus(
                        along,
                        conj([
                            self.bar(z),
                            irreflexive_marker(&h, &[along]),
                            kids.clone(),
                            extras.clone(),
                        ]),
                    )
                }))
            }
        }
    }

    fn upper_bound(&self) -> Formula {
        conj(
            (0..self.h.node_count())
                .filter(|&z| self.strict(z).is_some())
                .map(|z| dia_plus(Axis::H, dia_plus(Axis::V, self.tree(z, None)))),
        )
    }

    fn switch(&self) -> Formula {
        let mut parts = vec![];
        for z in (0..self.h.node_count()).filter(|&z| self.bounded(z)) {
            let ax = if self.is_x(z) { Axis::V } else { Axis::H };
            let boxc = |w: usize| box_plus(ax, var(self.cvar(self.pair(z, w))));
            let body = if self.strict(z).is_some() {
                let nbrs: BTreeSet<usize> = self.succ(z).into_iter().chain(self.pred(z)).collect();
                if nbrs.is_empty() {
                    continue;
                }
                implies(self.hvars(z), conj(nbrs.into_iter().map(boxc)))
            } else {
                let (ins, outs) = (self.pred(z), self.succ(z));
                if ins.is_empty() || outs.is_empty() {
                    continue;
                }
                conj(
                    ins.iter()
                        .flat_map(|&a| outs.iter().map(move |&b| (a, b)))
                        .map(|(a, b)| implies(boxc(a), boxc(b))),
                )
            };
            parts.push(box_plus(Axis::H, box_plus(Axis::V, body)));
        }
        conj(parts)
    }

    fn lb_nodes(&self) -> Vec<usize> {
        (0..self.h.node_count())
            .filter(|&z| {
                let tight = self.strict(z).is_none() && node_bounds(&self.con, z).1 == self.xi[z];
                tight || !self.bounded(z)
            })
            .collect()
    }

    /// Points on `z`'s line whose sizes along the line add up to at least
    /// `min(z)`; a cell of exactly that size is preferred.
    fn lb_witness(&self, z: usize) -> Result<(Vec<PointInfo>, Vec<PointInfo>)> {
        let Fin(min) = node_bounds(&self.con, z).1 else {
            return Err(Error::Precondition(format!(
                "{} has no finite lower bound",
                self.h.node_name(z)
            )));
        };
        let along = if self.is_x(z) { Axis::H } else { Axis::V };
        let cells: Vec<(usize, usize)> = self
            .same_side_other(z)
            .into_iter()
            .map(|w| self.h.cell_of_nodes(z, w))
            .filter(|&(xi, yi)| self.h.cell(xi, yi).is_finite())
            .collect();
        let size = |(xi, yi): (usize, usize)| {
            let (hs, vs, _) = self.h.cell(xi, yi).sizes();
            if along == Axis::H {
                hs
            } else {
                vs
            }
        };
        let exact = cells.iter().copied().find(|&c| size(c) == Fin(min));
        for cell in exact.into_iter().chain(cells.iter().copied()) {
            let (refl, irr): (Vec<PointInfo>, Vec<PointInfo>) = cell_points(self.h, cell, |_| true)
                .into_iter()
                .partition(|p| p.kind.reflexive(along));
            if let Some((r, i)) = split_points(refl.len(), irr.len(), min) {
                return Ok((refl[..r].to_vec(), irr[..i].to_vec()));
            }
        }
        Err(Error::Precondition(format!(
            "no cell witnesses min({})",
            self.h.node_name(z)
        )))
    }

    fn same_side_other(&self, z: usize) -> Vec<usize> {
        (0..self.h.node_count())
            .filter(|&w| self.h.side(w) != self.h.side(z))
            .collect()
    }

    fn lower_bound(&self) -> Result<Formula> {
        let mut parts = vec![];
        for z in self.lb_nodes() {
            let (refl, irr) = self.lb_witness(z)?;
            let (n_r, n_i) = (refl.len(), irr.len());
            let is_x = self.is_x(z);
            let (along, across) = if is_x {
                (Axis::H, Axis::V)
            } else {
                (Axis::V, Axis::H)
            };
            let guards = conj(
                self.pred(z)
                    .into_iter()
                    .filter(|&w| self.bounded(w))
                    .map(|w| dia_plus(across, not(var(self.cvar(self.pair(z, w)))))),
            );
            let bo = |j: usize| var(V::witness_refl(&self.tok[z], j));
            let bi = |s: usize| var(V::witness_irr(&self.tok[z], s));
            let bo_hat = |j: usize| {
                conj([
                    self.bar(z),
                    bo(j),
                    conj((1..=n_r).filter(|&t| t != j).map(|t| not(bo(t)))),
                    conj((1..=n_i).map(|t| not(bi(t)))),
                    guards.clone(),
                ])
            };
            let bi_hat = |s: usize| {
                conj([
                    self.bar(z),
                    bi(s),
                    conj((1..=n_i).filter(|&t| t != s).map(|t| not(bi(t)))),
                    conj((1..=n_r).map(|t| not(bo(t)))),
                    guards.clone(),
                ])
            };
            let lb = conj(
                (1..=n_r)
                    .map(|j| dia_plus(along, conj([bo_hat(j), dia(along, bo_hat(j))])))
                    .chain((1..=n_i).map(|s| dia_plus(along, bi_hat(s)))),
            );
            parts.push(dia_plus(Axis::H, dia_plus(Axis::V, lb)));
        }
        Ok(conj(parts))
    }

    fn final_formula(&self, z: usize) -> Formula {
        let line = if self.is_x(z) { Axis::V } else { Axis::H };
        if self.strict(z).is_some() {
            return dia_plus(line, self.hvars(z));
        }
        conj(
            self.pred(z)
                .into_iter()
                .filter(|&w| self.bounded(w))
                .map(|w| box_plus(line, var(self.cvar(self.pair(z, w))))),
        )
    }

    fn parts(&self, case: SquareCase) -> Result<SquareParts> {
        let xs: Vec<usize> = (0..self.h.nx()).collect();
        let ys: Vec<usize> = (self.h.nx()..self.h.node_count()).collect();
        let out_x = dia_plus(Axis::H, conj(xs.iter().map(|&x| self.final_formula(x))));
        let all_bounded = ys.iter().all(|&y| self.bounded(y));
        let out = if all_bounded && case != SquareCase::III {
            let out_y = dia_plus(Axis::V, conj(ys.iter().map(|&y| self.final_formula(y))));
            Formula::Or(vec![out_x, out_y])
        } else {
            out_x
        };
        Ok(SquareParts {
            upper_bound: self.upper_bound(),
            switch: self.switch(),
            lower_bound: self.lower_bound()?,
            out,
        })
    }

    /// Cell points the strict node's `h`-variables single out.
    fn a_points(&self, z: usize) -> Vec<PointInfo> {
        let n = self.strict(z).unwrap();
        let types = if self.is_x(z) {
            [BiClusterType::HStrict, BiClusterType::HVStrict]
        } else {
            [BiClusterType::VStrict, BiClusterType::HVStrict]
        };
        self.same_side_other(z)
            .into_iter()
            .map(|w| self.h.cell_of_nodes(z, w))
            .find(|&(xi, yi)| {
                let c = self.h.cell(xi, yi);
                c.classify().is_ok_and(|t| types.contains(&t)) && c.total() == Fin(n)
            })
            .map(|cell| cell_points(self.h, cell, |_| true))
            .expect("a strict node has a strict cell of its size")
    }
}

pub fn square_bad_parts(g: &GridSpec) -> Result<(SquareParams, SquareParts)> {
    let s = setup(g)?;
    let parts = Build::new(&s.h)?.parts(s.params.case)?;
    Ok((
        s.params,
        if s.transposed {
            parts.swap_axes()
        } else {
            parts
        },
    ))
}

pub fn synth_square_bad(g: &GridSpec) -> Result<Formula> {
    Ok(square_bad_parts(g)?.1.formula())
}

pub fn countermodel_square(g: &GridSpec) -> Result<Countermodel> {
    let s = setup(g)?;
    let b = Build::new(&s.h)?;
    let parts = b.parts(s.params.case)?;
    let r = realize_grid(&s.model_grid)?;
    let idx = point_index(&r);
    let w = |p: &PointInfo| idx[p];
    let mut m = Model::new(r.frame.clone());
    let mut notes = vec![];

    for x in 0..s.h.nx() {
        m.set(V::node(&b.tok[x]), r.column(x));
    }
    for yi in 0..s.h.ny() {
        m.set(V::node(&b.tok[s.h.y_node(yi)]), r.row(yi));
    }
    if s.model_grid.ny() > s.h.ny() {
        let extra: Vec<&str> = s.model_grid.ys[s.h.ny()..]
            .iter()
            .map(String::as_str)
            .collect();
        notes.push(format!(
            "rows {} lie outside the described subgrid and carry no row marker",
            extra.join(", ")
        ));
    }
    for xy in b.switch_pairs() {
        let (xi, yi) = s.h.cell_of_nodes(xy.0, xy.1);
        let kind = b.c_kind(xy);
        let c = PointInfo {
            x: xi,
            y: yi,
            kind,
            ordinal: 0,
        };
        let cw = w(&c);
        m.set(b.cvar(xy), (0..r.points.len()).filter(|&u| u != cw));
    }
    for z in (0..s.h.node_count()).filter(|&z| b.strict(z).is_some()) {
        let along = if b.is_x(z) { Axis::H } else { Axis::V };
        for (i, p) in b.a_points(z).iter().enumerate() {
            m.set(
                V::strict(&b.tok[z], i + 1),
                r.frame.rel(along).succ(w(p)).ones(),
            );
        }
    }
    for z in b.lb_nodes() {
        let (refl, irr) = b.lb_witness(z)?;
        for (j, p) in refl.iter().enumerate() {
            m.set(V::witness_refl(&b.tok[z], j + 1), [w(p)]);
        }
        for (j, p) in irr.iter().enumerate() {
            m.set(V::witness_irr(&b.tok[z], j + 1), [w(p)]);
        }
    }

    let mut cm = Countermodel {
        model: m,
        world: 0,
        notes,
    };
    cm.verify(&parts.formula())?;
    if s.transposed {
        let back = s.model_grid.transpose();
        let r0 = realize_grid(&back)?;
        let map = transpose_map(&r, &r0)?;
        cm.model = remap(&cm.model, &map, r0.frame);
        cm.world = map[cm.world];
        cm.verify(&parts.swap_axes().formula())?;
    }
    Ok(cm)
}
