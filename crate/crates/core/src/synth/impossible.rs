use serde::{Deserialize, Serialize};

use super::{Countermodel, VariableScheme as V};
use crate::error::{Error, Result};
use crate::formula::{bx, conj, dia, dia_plus, implies, not, var, Axis, Formula};
use crate::grid::{realize_grid, BiCluster, BiClusterType, GridSpec, PointKind};
use crate::semantics::Model;

/// `k` points marked by `a`-variables, `ℓ` by `b`-variables; `swapped`
/// builds on the transposed cluster and exchanges the axes back.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpossibleParams {
    pub k: usize,
    pub l: usize,
    pub swapped: bool,
}

/// The `a` points are the RI points (the IR points when swapped); every
/// other point of the cluster is a `b` point.
pub fn impossible_params(c: &BiCluster) -> Result<ImpossibleParams> {
    let ty = c.classify()?;
    if !ty.is_impossible() {
        return Err(Error::Precondition(format!(
            "{c} is {ty:?}, not impossible"
        )));
    }
    if !c.is_finite() {
        return Err(Error::Infinite(c.to_string()));
    }
    let swapped = ty == BiClusterType::Impossible2;
    let a_kind = if swapped {
        PointKind::IR
    } else {
        PointKind::RI
    };
    let k = c.n(a_kind) as usize;
    let l = c.total().finite().unwrap() as usize - k;
    Ok(ImpossibleParams { k, l, swapped })
}

fn a(i: usize) -> Formula {
    var(V::indexed("a", i))
}

fn b(j: usize) -> Formula {
    var(V::indexed("b", j))
}

/// Unswapped orientation: `a` points are `R_v`-irreflexive, `b` points
/// `R_h`-irreflexive.
fn template(k: usize, l: usize) -> Formula {
    let ahat = |i: usize| conj([not(a(i)), bx(Axis::V, a(i)), conj((1..=l).map(b))]);
    let bhat = |j: usize| conj([not(b(j)), bx(Axis::H, b(j)), conj((1..=k).map(a))]);
    let clash = conj([
        ahat(1),
        conj((1..=k).map(|i| {
            dia(
                Axis::H,
                conj([
                    ahat(i),
                    conj((1..=k).filter(|&s| s != i).map(|s| dia(Axis::V, ahat(s)))),
                ]),
            )
        })),
        conj((1..=l).map(|j| {
            dia(
                Axis::H,
                conj([bhat(j), conj((1..=k).map(|s| dia(Axis::V, ahat(s))))]),
            )
        })),
        conj((2..=k).map(|i| {
            dia(
                Axis::V,
                conj([ahat(i), conj((1..=l).map(|t| dia(Axis::H, bhat(t))))]),
            )
        })),
        conj((1..=l).map(|j| {
            dia(
                Axis::V,
                conj([
                    bhat(j),
                    conj((1..=l).filter(|&t| t != j).map(|t| dia(Axis::H, bhat(t)))),
                ]),
            )
        })),
    ]);
    let all = conj((1..=k).map(a).chain((1..=l).map(b)));
    implies(clash, dia_plus(Axis::H, dia_plus(Axis::V, all)))
}

pub fn impossible_formula(p: &ImpossibleParams) -> Formula {
    let f = template(p.k, p.l);
    if p.swapped {
        f.swap_axes()
    } else {
        f
    }
}

pub fn synth_impossible(c: &BiCluster) -> Result<Formula> {
    Ok(impossible_formula(&impossible_params(c)?))
}

/// `M(a_i)` = successors of `a_i` along its irreflexive axis, `M(b_j)`
/// likewise for `b_j`; refuted at `a_1`.
pub fn countermodel_impossible(g: &GridSpec, cell: (usize, usize)) -> Result<Countermodel> {
    let (xi, yi) = cell;
    if xi >= g.nx() || yi >= g.ny() {
        return Err(Error::InvalidArgument(format!("no cell ({xi},{yi})")));
    }
    let p = impossible_params(g.cell(xi, yi))?;
    let r = realize_grid(g)?;
    let (a_kind, a_axis) = if p.swapped {
        (PointKind::IR, Axis::H)
    } else {
        (PointKind::RI, Axis::V)
    };
    let worlds = r.cell_worlds(xi, yi);
    let (a_pts, b_pts): (Vec<usize>, Vec<usize>) =
        worlds.iter().partition(|&&w| r.points[w].kind == a_kind);
    let mut m = Model::new(r.frame.clone());
    for (i, &w) in a_pts.iter().enumerate() {
        m.set(V::indexed("a", i + 1), r.frame.rel(a_axis).succ(w).ones());
    }
    for (j, &w) in b_pts.iter().enumerate() {
        m.set(
            V::indexed("b", j + 1),
            r.frame.rel(a_axis.other()).succ(w).ones(),
        );
    }
    let cm = Countermodel {
        model: m,
        world: a_pts[0],
        notes: vec![],
    };
    cm.verify(&impossible_formula(&p))?;
    Ok(cm)
}
