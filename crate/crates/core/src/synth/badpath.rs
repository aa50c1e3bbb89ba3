use serde::{Deserialize, Serialize};

use super::{
    cell_points, irreflexive_marker, point_index, split_points, Countermodel, VariableScheme as V,
};
use crate::constraints::{extract_constraints, BadPath};
use crate::error::{Error, Result};
use crate::extnat::Fin;
use crate::formula::{box_plus, bx, conj, dia, dia_plus, implies, not, var, Axis, Formula};
use crate::grid::{realize_grid, BiClusterType, GridSpec, PointInfo, PointKind, Side};
use crate::semantics::Model;

/// The switch bi-cluster type behind one edge of a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    EqSw,
    H2VSw,
    V2HSw,
}

impl StepKind {
    pub fn of(ty: BiClusterType) -> Option<Self> {
        match ty {
            BiClusterType::EqSw => Some(StepKind::EqSw),
            BiClusterType::H2VSw => Some(StepKind::H2VSw),
            BiClusterType::V2HSw => Some(StepKind::V2HSw),
            _ => None,
        }
    }

    /// Kind of the point that witnesses the step.
    pub fn point(self) -> PointKind {
        match self {
            StepKind::EqSw => PointKind::II,
            StepKind::H2VSw => PointKind::RI,
            StepKind::V2HSw => PointKind::IR,
        }
    }

    /// Axes along which that point is irreflexive.
    pub fn boxes(self) -> &'static [Axis] {
        match self {
            StepKind::EqSw => &[Axis::H, Axis::V],
            StepKind::H2VSw => &[Axis::V],
            StepKind::V2HSw => &[Axis::H],
        }
    }

    fn doubled(self) -> bool {
        self != StepKind::EqSw
    }
}

/// How the end node's line supplies `k` distinct values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerateSub {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum LastCase {
    /// `n_r` points reflexive along the end axis count twice, `n_i`
    /// irreflexive ones once.
    Points { n_r: usize, n_i: usize },
    /// Two points of an infinity bi-cluster generate `k` values.
    Generate { sub: GenerateSub, k: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadPathParams {
    pub start: Side,
    /// Size of the strict cell bounding the start node.
    pub n_c: u64,
    pub steps: Vec<StepKind>,
    pub last: LastCase,
}

impl BadPathParams {
    pub fn end(&self) -> Side {
        if self.steps.len() % 2 == 0 {
            self.start
        } else {
            self.start.other()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LastPoints {
    Points {
        refl: Vec<PointInfo>,
        irr: Vec<PointInfo>,
    },
    Generate {
        c: PointInfo,
        d: PointInfo,
    },
}

impl LastPoints {
    fn all(&self) -> Vec<PointInfo> {
        match self {
            LastPoints::Points { refl, irr } => refl.iter().chain(irr).copied().collect(),
            LastPoints::Generate { c, d } => vec![*c, *d],
        }
    }
}

/// Parameters plus the grid points the countermodel is built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadPathPlan {
    pub params: BadPathParams,
    pub k: u64,
    pub a_points: Vec<PointInfo>,
    /// `c_1..c_m`
    pub c_points: Vec<PointInfo>,
    pub last_points: LastPoints,
}

fn other_side_nodes(g: &GridSpec, z: usize) -> Vec<usize> {
    match g.side(z) {
        Side::X => (0..g.ny()).map(|y| g.y_node(y)).collect(),
        Side::Y => (0..g.nx()).map(|x| g.x_node(x)).collect(),
    }
}

pub fn plan_badpath(g: &GridSpec, p: &BadPath) -> Result<BadPathPlan> {
    let g = &g.materialize_open(1);
    let con = extract_constraints(g)
        .map_err(|c| Error::Precondition(format!("impossible cell ({},{})", c.x, c.y)))?;
    if !p.verify(&con) {
        return Err(Error::Precondition("not a bad path of this grid".into()));
    }
    let z0 = p.nodes[0];
    let start = g.side(z0);
    let Fin(n_c) = p.max_start else {
        return Err(Error::Precondition("start node has no finite bound".into()));
    };
    let a_types: [BiClusterType; 2] = match start {
        Side::Y => [BiClusterType::VStrict, BiClusterType::HVStrict],
        Side::X => [BiClusterType::HStrict, BiClusterType::HVStrict],
    };
    let a_cell = other_side_nodes(g, z0)
        .into_iter()
        .map(|w| g.cell_of_nodes(z0, w))
        .find(|&(xi, yi)| {
            let c = g.cell(xi, yi);
            a_types.contains(&c.classify().unwrap()) && c.total() == Fin(n_c)
        })
        .ok_or_else(|| Error::Precondition("no strict cell bounds the start node".into()))?;
    let a_points = cell_points(g, a_cell, |_| true);

    let edge_cells: Vec<(usize, usize)> = p
        .nodes
        .windows(2)
        .map(|w| g.cell_of_nodes(w[0], w[1]))
        .collect();
    let steps: Vec<StepKind> = edge_cells
        .iter()
        .map(|&(xi, yi)| {
            StepKind::of(g.cell(xi, yi).classify().unwrap())
                .ok_or_else(|| Error::Precondition(format!("cell ({xi},{yi}) is not a switch")))
        })
        .collect::<Result<_>>()?;
    let lambda = p
        .labels
        .iter()
        .fold(1u64, |acc, &l| acc.saturating_mul(l as u64));
    let k = n_c / lambda + 1;

    let zm = *p.nodes.last().unwrap();
    let end = g.side(zm);
    let (ax_a, ax_b) = (end.axis(), end.axis().other());
    // Keep the shared cell for last so the last step's witness stays free.
    let last_step = edge_cells.last().copied();
    let mut cands: Vec<(usize, usize)> = other_side_nodes(g, zm)
        .into_iter()
        .map(|w| g.cell_of_nodes(zm, w))
        .filter(|&c| Some(c) != last_step)
        .collect();
    cands.extend(last_step);
    let available = |cell: (usize, usize)| -> Vec<PointInfo> {
        let mut pts = cell_points(g, cell, |_| true);
        if Some(cell) == last_step {
            let kind = steps.last().unwrap().point();
            if let Some(i) = pts.iter().rposition(|q| q.kind == kind) {
                pts.remove(i);
            }
        }
        pts
    };

    let mut last = None;
    for &cell in &cands {
        let c = g.cell(cell.0, cell.1);
        if !c.is_finite() {
            continue;
        }
        let (h, v, _) = c.sizes();
        if (if end == Side::Y { v } else { h }) < Fin(k) {
            continue;
        }
        let pts = available(cell);
        let (refl, irr): (Vec<PointInfo>, Vec<PointInfo>) =
            pts.into_iter().partition(|q| q.kind.reflexive(ax_a));
        if let Some((n_r, n_i)) = split_points(refl.len(), irr.len(), k) {
            last = Some((
                LastCase::Points { n_r, n_i },
                LastPoints::Points {
                    refl: refl[..n_r].to_vec(),
                    irr: irr[..n_i].to_vec(),
                },
            ));
            break;
        }
    }
    if last.is_none() {
        for &cell in &cands {
            let c = g.cell(cell.0, cell.1);
            if !c.is_finite() || !c.classify().unwrap().is_infinity() {
                continue;
            }
            let pts = available(cell);
            let find = |f: &dyn Fn(PointKind) -> bool| pts.iter().copied().find(|q| f(q.kind));
            let a_c = find(&|k| !k.reflexive(ax_b) && k.reflexive(ax_a));
            let a_d = find(&|k| !k.reflexive(ax_a));
            let b_c = find(&|k| !k.reflexive(ax_b));
            let b_d = find(&|k| !k.reflexive(ax_a) && k.reflexive(ax_b));
            let pick = match (a_c, a_d, b_c, b_d) {
                (Some(c), Some(d), _, _) => Some((GenerateSub::A, c, d)),
                (_, _, Some(c), Some(d)) => Some((GenerateSub::B, c, d)),
                _ => None,
            };
            if let Some((sub, c, d)) = pick {
                last = Some((LastCase::Generate { sub, k }, LastPoints::Generate { c, d }));
                break;
            }
        }
    }
    let (last, last_points) = last.ok_or_else(|| {
        Error::Precondition("no cell on the end node's line witnesses its lower bound".into())
    })?;

    // Witnesses for the steps, from the end backwards, each distinct from
    // the points where the next formula up is evaluated.
    let m = steps.len();
    let mut c_points = vec![a_points[0]; m];
    let mut avoid = last_points.all();
    for j in (0..m).rev() {
        let pts = cell_points(g, edge_cells[j], |kd| kd == steps[j].point());
        let chosen = pts
            .iter()
            .copied()
            .find(|q| !avoid.contains(q))
            .unwrap_or(pts[0]);
        c_points[j] = chosen;
        avoid = vec![chosen];
    }

    Ok(BadPathPlan {
        params: BadPathParams {
            start,
            n_c,
            steps,
            last,
        },
        k,
        a_points,
        c_points,
        last_points,
    })
}

/// `path_m` for the given steps.
fn path_formula(p: &BadPathParams) -> Formula {
    let b0 = p.start.axis().other();
    let mut path = conj([not(var("a")), bx(b0, var("b"))]);
    let mut side = p.start;
    for (j, &step) in p.steps.iter().enumerate() {
        let c = V::indexed("c", j + 1);
        let ax = side.axis();
        let inner = conj([irreflexive_marker(&c, step.boxes()), path]);
        path = if step.doubled() {
            dia(ax, conj([inner.clone(), dia(ax, inner)]))
        } else {
            dia(ax, inner)
        };
        side = side.other();
    }
    path
}

fn last_formula(p: &BadPathParams, path: &Formula) -> Formula {
    let a = p.end().axis();
    let b = a.other();
    match p.last {
        LastCase::Points { n_r, n_i } => {
            let bo = |j: usize| var(V::indexed("bo", j));
            let bi = |s: usize| var(V::indexed("bi", s));
            let bo_hat = |j: usize| {
                conj([
                    bo(j),
                    conj((1..=n_r).filter(|&t| t != j).map(|t| not(bo(t)))),
                    conj((1..=n_i).map(|t| not(bi(t)))),
                ])
            };
            let bi_hat = |s: usize| {
                conj([
                    bi(s),
                    conj((1..=n_i).filter(|&t| t != s).map(|t| not(bi(t)))),
                    conj((1..=n_r).map(|t| not(bo(t)))),
                ])
            };
            conj(
                (1..=n_r)
                    .map(|j| {
                        let inner = conj([bo_hat(j), path.clone()]);
                        dia_plus(a, conj([inner.clone(), dia(a, inner)]))
                    })
                    .chain((1..=n_i).map(|s| dia_plus(a, conj([bi_hat(s), path.clone()])))),
            )
        }
        LastCase::Generate { sub, k } => {
            let chat = irreflexive_marker("c", &[b]);
            let dhat = irreflexive_marker("d", &[a]);
            // (outer marker, its axis, inner marker, axis of the recursion)
            let (outer, step, inner, rec) = match sub {
                GenerateSub::A => (chat, b, dhat, a),
                GenerateSub::B => (dhat, a, chat, b),
            };
            let mut large = conj([
                outer.clone(),
                dia(step, conj([inner.clone(), path.clone()])),
            ]);
            for _ in 2..=k {
                large = conj([
                    outer.clone(),
                    dia(
                        step,
                        conj([
                            inner.clone(),
                            path.clone(),
                            dia(rec, conj([large.clone(), dia(rec, large)])),
                        ]),
                    ),
                ]);
            }
            large
        }
    }
}

/// `(first ∧ ◇_h⁺◇_v⁺ last) → ◇⁺(b ∧ ⋀ a_i)` with the box and diamond of
/// `first` and the consequent along the start node's axis.
pub fn badpath_formula(p: &BadPathParams) -> Formula {
    let a0 = p.start.axis();
    let ai = |i: u64| var(V::indexed("a", i as usize));
    let first = conj([
        box_plus(a0, var("a")),
        conj(
            (1..=p.n_c)
                .map(|i| dia_plus(a0, irreflexive_marker(&V::indexed("a", i as usize), &[a0]))),
        ),
    ]);
    let path = path_formula(p);
    let last = last_formula(p, &path);
    implies(
        conj([first, dia_plus(Axis::H, dia_plus(Axis::V, last))]),
        dia_plus(
            a0,
            conj(std::iter::once(var("b")).chain((1..=p.n_c).map(ai))),
        ),
    )
}

pub fn synth_badpath(g: &GridSpec, p: &BadPath) -> Result<Formula> {
    Ok(badpath_formula(&plan_badpath(g, p)?.params))
}

pub fn countermodel_badpath(g: &GridSpec, p: &BadPath) -> Result<Countermodel> {
    if g.open.is_some() {
        return Err(Error::Infinite("open side".into()));
    }
    let plan = plan_badpath(g, p)?;
    let r = realize_grid(g)?;
    let idx = point_index(&r);
    let w = |q: &PointInfo| idx[q];
    let succ = |q: &PointInfo, ax: Axis| r.frame.rel(ax).succ(w(q)).ones().collect::<Vec<usize>>();
    let params = &plan.params;
    let a0 = params.start.axis();
    let (ax_a, ax_b) = (params.end().axis(), params.end().axis().other());

    let mut m = Model::new(r.frame.clone());
    let a1 = &plan.a_points[0];
    m.set("a", std::iter::once(w(a1)).chain(succ(a1, a0)));
    for (i, q) in plan.a_points.iter().enumerate() {
        m.set(V::indexed("a", i + 1), succ(q, a0));
    }
    let path0_at = match plan.c_points.first() {
        Some(c1) => vec![*c1],
        None => plan.last_points.all(),
    };
    m.set("b", path0_at.iter().flat_map(|q| succ(q, a0.other())));
    for (j, (q, step)) in plan.c_points.iter().zip(&params.steps).enumerate() {
        m.set(
            V::indexed("c", j + 1),
            step.boxes().iter().flat_map(|&ax| succ(q, ax)),
        );
    }
    match &plan.last_points {
        LastPoints::Points { refl, irr } => {
            for (j, q) in refl.iter().enumerate() {
                m.set(V::indexed("bo", j + 1), [w(q)]);
            }
            for (s, q) in irr.iter().enumerate() {
                m.set(V::indexed("bi", s + 1), [w(q)]);
            }
        }
        LastPoints::Generate { c, d } => {
            m.set("c", succ(c, ax_b));
            m.set("d", succ(d, ax_a));
        }
    }
    let cm = Countermodel {
        model: m,
        world: w(a1),
        notes: vec![],
    };
    cm.verify(&badpath_formula(params))?;
    Ok(cm)
}
