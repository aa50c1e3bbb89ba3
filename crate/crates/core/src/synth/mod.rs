//! Axioms that hold in every product of difference frames but fail on a
//! given grid, together with the models that refute them there.

mod badpath;
mod impossible;
mod recognize;
mod square;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::formula::{bx, conj, dia, implies, not, render_formula, var, Axis, Formula};
use crate::grid::{GridSpec, PointInfo, PointKind, Realization};
use crate::semantics::{satisfies, Model};

pub use badpath::{
    badpath_formula, countermodel_badpath, plan_badpath, synth_badpath, BadPathParams, BadPathPlan,
    GenerateSub, LastCase, StepKind,
};
pub use impossible::{
    countermodel_impossible, impossible_formula, impossible_params, synth_impossible,
    ImpossibleParams,
};
pub use recognize::{canonical_names, recognize_axiom};
pub use square::{
    countermodel_square, square_bad_parts, synth_square_bad, SquareCase, SquareParams, SquareParts,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum AxiomKind {
    CommPse,
    ImpossibleC(ImpossibleParams),
    BadPathP(BadPathParams),
    SquareBadF(SquareParams),
}

/// Variable names used by the constructions. Node names are sanitized to
/// identifier characters; callers check injectivity over their node set.
pub struct VariableScheme;

impl VariableScheme {
    pub fn indexed(base: &str, i: usize) -> String {
        format!("{base}{i}")
    }

    pub fn sanitize(name: &str) -> String {
        name.chars()
            .map(|c| match c {
                c if c.is_ascii_alphanumeric() => c,
                '+' => 'p',
                _ => '_',
            })
            .collect()
    }

    /// Row or column marker of a grid node.
    pub fn node(name: &str) -> String {
        format!("n_{}", Self::sanitize(name))
    }

    /// Switch-point variable of the cell `(x, y)`.
    pub fn switch(x: &str, y: &str) -> String {
        format!("c_{}_{}", Self::sanitize(x), Self::sanitize(y))
    }

    pub fn strict(z: &str, i: usize) -> String {
        format!("h_{}_{i}", Self::sanitize(z))
    }

    pub fn witness_refl(z: &str, j: usize) -> String {
        format!("bo_{}_{j}", Self::sanitize(z))
    }

    pub fn witness_irr(z: &str, s: usize) -> String {
        format!("bi_{}_{s}", Self::sanitize(z))
    }
}

/// Commutativity of the two boxes plus symmetry and pseudo-transitivity
/// for each axis.
pub fn axiom_comm_pse() -> Formula {
    let p = var("p");
    let hv = bx(Axis::H, bx(Axis::V, p.clone()));
    let vh = bx(Axis::V, bx(Axis::H, p.clone()));
    let mut parts = vec![implies(hv.clone(), vh.clone()), implies(vh, hv)];
    for ax in [Axis::H, Axis::V] {
        parts.push(implies(p.clone(), bx(ax, dia(ax, p.clone()))));
        parts.push(implies(
            dia(ax, dia(ax, p.clone())),
            crate::formula::disj([p.clone(), dia(ax, p.clone())]),
        ));
    }
    conj(parts)
}

/// A model and a world where an implication's antecedent holds and its
/// consequent fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Countermodel {
    pub model: Model,
    pub world: usize,
    pub notes: Vec<String>,
}

impl Countermodel {
    /// Re-check with the model checker.
    pub fn verify(&self, f: &Formula) -> Result<()> {
        let Formula::Implies(a, c) = f else {
            return Err(Error::InvalidArgument("axiom is not an implication".into()));
        };
        if !satisfies(&self.model, self.world, a)? {
            return Err(Error::Precondition(format!(
                "antecedent fails at world {}",
                self.world
            )));
        }
        if satisfies(&self.model, self.world, c)? {
            return Err(Error::Precondition(format!(
                "consequent holds at world {}",
                self.world
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomBundle {
    pub kind: AxiomKind,
    pub formula: Formula,
    pub countermodel: Option<Countermodel>,
}

impl AxiomBundle {
    pub fn to_json(&self) -> Value {
        let kind = serde_json::to_value(&self.kind).expect("serializable");
        let mut v = json!({
            "kind": kind["kind"],
            "params": kind.get("params").cloned().unwrap_or(Value::Null),
            "formula": render_formula(&self.formula),
        });
        if let Some(cm) = &self.countermodel {
            v["countermodel"] = serde_json::to_value(&cm.model).expect("serializable");
            v["refuted_world"] = json!(cm.world);
            if !cm.notes.is_empty() {
                v["notes"] = json!(cm.notes);
            }
        }
        v
    }
}

/// Worlds of a realization by point identity.
fn point_index(r: &Realization) -> BTreeMap<PointInfo, usize> {
    r.points.iter().enumerate().map(|(w, p)| (*p, w)).collect()
}

/// World map from `src` to `dst`, where `src` realizes the transpose of
/// the grid `dst` realizes.
fn transpose_map(src: &Realization, dst: &Realization) -> Result<Vec<usize>> {
    let idx = point_index(dst);
    src.points
        .iter()
        .map(|p| {
            let q = PointInfo {
                x: p.y,
                y: p.x,
                kind: p.kind.transpose(),
                ordinal: p.ordinal,
            };
            idx.get(&q).copied().ok_or_else(|| {
                Error::InvalidArgument(format!("point {q:?} missing after transpose"))
            })
        })
        .collect()
}

fn remap(m: &Model, map: &[usize], frame: crate::frame::Frame) -> Model {
    let mut out = Model::new(frame);
    for (p, s) in &m.valuation {
        out.set(p.clone(), s.ones().map(|w| map[w]));
    }
    out
}

/// Points of a cell in realization order, restricted to `keep`.
pub(super) fn cell_points(
    g: &GridSpec,
    (xi, yi): (usize, usize),
    keep: impl Fn(PointKind) -> bool,
) -> Vec<PointInfo> {
    g.cell(xi, yi)
        .points()
        .into_iter()
        .filter(|&(kind, _)| keep(kind))
        .map(|(kind, ordinal)| PointInfo {
            x: xi,
            y: yi,
            kind,
            ordinal,
        })
        .collect()
}

/// Choose `n_r` reflexive and `n_i` irreflexive points with `2n_r + n_i ≥ k`,
/// spending reflexive points first.
pub(super) fn split_points(refl: usize, irr: usize, k: u64) -> Option<(usize, usize)> {
    let k = k as usize;
    let mut n_r = refl.min(k / 2);
    let rem = k - 2 * n_r;
    let n_i = rem.min(irr);
    if rem > irr {
        n_r += (rem - irr).div_ceil(2);
    }
    (n_r <= refl).then_some((n_r, n_i))
}

/// `¬p ∧ □_ax p`: true exactly at an `ax`-irreflexive point `w` when `p`
/// is the set of `ax`-successors of `w`.
fn irreflexive_marker(p: &str, axes: &[Axis]) -> Formula {
    conj(std::iter::once(not(var(p))).chain(axes.iter().map(|&a| bx(a, var(p)))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::classify_sahlqvist;
    use crate::frame::{diff_product, Frame, Relation};
    use crate::semantics::{valid_in_frame, CheckMode, Validity};

    #[test]
    fn comm_pse_shape_and_validity() {
        let f = axiom_comm_pse();
        assert!(classify_sahlqvist(&f).is_sahlqvist());
        assert_eq!(
            valid_in_frame(
                &diff_product(3, 3).unwrap(),
                &f,
                CheckMode::Exhaustive { budget: 9 }
            )
            .unwrap(),
            Validity::Valid
        );
    }

    #[test]
    fn comm_pse_fails_without_commutation() {
        // An h-step then a v-step with no v-then-h route back.
        let fr = Frame {
            rh: Relation::from_pairs(3, [(0, 1), (1, 0)]).unwrap(),
            rv: Relation::from_pairs(3, [(1, 2), (2, 1)]).unwrap(),
        };
        assert!(
            valid_in_frame(&fr, &axiom_comm_pse(), CheckMode::exhaustive())
                .unwrap()
                .is_refuted()
        );
    }

    #[test]
    fn sanitized_names_are_identifiers() {
        let f = var(VariableScheme::switch("y+1", "x-2"));
        let back = crate::formula::parse_formula(&render_formula(&f)).unwrap();
        assert_eq!(back, f);
    }
}
