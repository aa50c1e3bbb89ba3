//! Whole-grid pipelines shared by the command line and the bindings.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constraints::{
    diagnose, extract_constraints, node_status, square_diagnose, Diagnosis, SquareVerdict,
};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::grid::{decompose_frame, GridSpec};
use crate::synth::{
    countermodel_badpath, countermodel_impossible, countermodel_square, impossible_params,
    plan_badpath, square_bad_parts, synth_badpath, synth_impossible, AxiomBundle, AxiomKind,
};

/// Either a grid or a frame to be decomposed into one.
pub fn grid_from_json(v: &Value) -> Result<(GridSpec, Option<Value>)> {
    if v.get("worlds").is_some() {
        let f: Frame = serde_json::from_value(v.clone()).map_err(|e| Error::Json(e.to_string()))?;
        let d = decompose_frame(&f)?;
        let info = json!({ "root": d.root, "world_cell": d.world_cell });
        Ok((d.grid, Some(info)))
    } else {
        let g = serde_json::from_value(v.clone()).map_err(|e| Error::Json(e.to_string()))?;
        Ok((g, None))
    }
}

/// Verdict, certificate and, for solvable grids, the canonical solution and
/// the square verdict.
pub fn diagnosis_report(g: &GridSpec) -> Value {
    let mut out = json!({ "grid": g });
    match diagnose(g) {
        Diagnosis::Impossible(cell) => {
            out["verdict"] = json!("impossible");
            out["cell"] = json!({
                "x": g.node_name(g.x_node(cell.x)),
                "y": g.node_name(g.y_node(cell.y)),
                "type": cell.kind,
            });
        }
        Diagnosis::BadPath(p) => {
            let con = extract_constraints(g).expect("no impossible cell");
            out["verdict"] = json!("bad_path");
            out["constraints"] = con.to_json();
            out["certificate"] = json!({
                "path": p.render(&con),
                "inequality": format!("{} < {}", p.max_start, p.weight()),
                "verified": p.verify(&con),
                "raw": p,
            });
        }
        Diagnosis::Good { xi_min } => {
            let con = extract_constraints(g).expect("no impossible cell");
            out["verdict"] = json!("good");
            out["constraints"] = con.to_json();
            out["xi_min"] = json!(con.named(&xi_min));
            out["status"] = json!(node_status(&con)
                .iter()
                .enumerate()
                .map(|(z, s)| (con.names[z].clone(), s))
                .collect::<std::collections::BTreeMap<_, _>>());
            out["square"] = serde_json::to_value(square_diagnose(g)).expect("serializable");
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    Auto,
    Impossible,
    Badpath,
    Square,
}

/// The axiom the diagnosis calls for, with a checked countermodel.
pub fn synth_bundle(g: &GridSpec, want: SynthKind) -> Result<AxiomBundle> {
    let mismatch = |found: &str| {
        Err(Error::Precondition(format!(
            "asked for {want:?} but the grid is {found}"
        )))
    };
    match diagnose(g) {
        Diagnosis::Impossible(cell) => {
            if !matches!(want, SynthKind::Auto | SynthKind::Impossible) {
                return mismatch("impossible");
            }
            let c = g.cell(cell.x, cell.y);
            let formula = synth_impossible(c)?;
            let cm = countermodel_impossible(g, (cell.x, cell.y))?;
            cm.verify(&formula)?;
            Ok(AxiomBundle {
                kind: AxiomKind::ImpossibleC(impossible_params(c)?),
                formula,
                countermodel: Some(cm),
            })
        }
        Diagnosis::BadPath(p) => {
            if !matches!(want, SynthKind::Auto | SynthKind::Badpath) {
                return mismatch("bad-path");
            }
            let formula = synth_badpath(g, &p)?;
            let plan = plan_badpath(g, &p)?;
            let cm = countermodel_badpath(g, &p)?;
            cm.verify(&formula)?;
            Ok(AxiomBundle {
                kind: AxiomKind::BadPathP(plan.params),
                formula,
                countermodel: Some(cm),
            })
        }
        Diagnosis::Good { .. } => {
            if !matches!(want, SynthKind::Auto | SynthKind::Square) {
                return mismatch("good");
            }
            if let v @ (SquareVerdict::SquareGood { .. } | SquareVerdict::NotApplicable { .. }) =
                square_diagnose(g)
            {
                return Err(Error::Precondition(format!(
                    "no axiom refutes this grid: {}",
                    serde_json::to_string(&v).expect("serializable")
                )));
            }
            let (params, parts) = square_bad_parts(g)?;
            let formula = parts.formula();
            let cm = countermodel_square(g)?;
            cm.verify(&formula)?;
            Ok(AxiomBundle {
                kind: AxiomKind::SquareBadF(params),
                formula,
                countermodel: Some(cm),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::fixtures::{badgrids1, grid_sqbad};
    use crate::grid::{build_family, realize_grid, BiCluster, Family};

    #[test]
    fn reports() {
        let r = diagnosis_report(&grid_sqbad());
        assert_eq!(r["verdict"], "good");
        assert_eq!(r["square"]["verdict"], "bad_case_ii");
        let r = diagnosis_report(&build_family(Family::F, 3).unwrap());
        assert_eq!(r["verdict"], "bad_path");
        assert_eq!(r["certificate"]["verified"], true);
        let one = GridSpec::new(
            vec!["x".into()],
            vec!["y".into()],
            vec![vec![BiCluster::new(0, 1, 1, 0)]],
        )
        .unwrap();
        assert_eq!(diagnosis_report(&one)["verdict"], "impossible");
    }

    #[test]
    fn bundles() {
        for g in [
            build_family(Family::F, 3).unwrap(),
            badgrids1(),
            grid_sqbad(),
            build_family(Family::H, 3).unwrap(),
        ] {
            let b = synth_bundle(&g, SynthKind::Auto).unwrap();
            assert!(b.countermodel.is_some());
        }
        assert!(synth_bundle(&build_family(Family::G, 4).unwrap(), SynthKind::Auto).is_err());
        assert!(synth_bundle(&grid_sqbad(), SynthKind::Badpath).is_err());
    }

    #[test]
    fn frames_are_decomposed() {
        let g = grid_sqbad();
        let f = realize_grid(&g).unwrap().frame;
        let (back, info) = grid_from_json(&serde_json::to_value(&f).unwrap()).unwrap();
        assert!(info.is_some());
        assert_eq!(back.world_count(), g.world_count());
    }
}
