//! End-to-end runs over the families `F_k`, `G_k`, `H_k`: every witness is
//! stored in the report and re-checked from the report alone.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::constraints::{
    diagnose, extract_constraints, square_diagnose, BadPath, Diagnosis, SquareVerdict,
};
use crate::error::{Error, Result};
use crate::formula::{parse_formula, render_formula};
use crate::frame::{
    make_difference_frame, make_universal_frame, product_frame, product_index, verify_pmorphism,
    PMorphismMap,
};
use crate::grid::{build_family, realize_grid, Family, GridSpec, PointKind, Realization};
use crate::pmorph::{assemble_product_pmorphism, h2vsw_universal_preimage, ProductMap};
use crate::semantics::{satisfies, verify_model_pmorphism, Model};
use crate::synth::{countermodel_square, synth_square_bad};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub k: u64,
    pub m: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub name: String,
    pub ok: bool,
    pub summary: String,
    pub witness: Value,
    /// SHA-256 of the compact JSON of `witness`.
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: Params,
    pub steps: Vec<Step>,
    pub verified: bool,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }
}

fn digest(v: &Value) -> String {
    let s = serde_json::to_string(v).expect("serializable");
    format!("{:x}", Sha256::digest(s.as_bytes()))
}

fn step(name: &str, summary: String, witness: Value) -> Step {
    Step {
        name: name.into(),
        ok: true,
        summary,
        digest: digest(&witness),
        witness,
    }
}

fn fail(what: impl std::fmt::Display) -> Error {
    Error::Precondition(what.to_string())
}

/// `(U, U×U) × diff(k)` onto `G_k` with `|U| = 2k`: one block of `k`
/// columns per cell.
fn g_image(k: u64) -> Result<(usize, usize, PMorphismMap)> {
    let g = build_family(Family::G, k)?;
    let r = realize_grid(&g)?;
    let n = k as usize;
    let mut map = vec![0; 2 * n * n];
    for xi in 0..2 {
        let c = g.cell(xi, 0);
        let pts = c.points();
        let local = h2vsw_universal_preimage(c, n)?;
        for u in 0..n {
            for v in 0..n {
                let (kind, ord) = pts[local[product_index(u, v, n)]];
                map[product_index(xi * n + u, v, n)] =
                    r.world(xi, 0, kind, ord).expect("point exists");
            }
        }
    }
    Ok((2 * n, n, map))
}

fn check_g_image(k: u64, u: usize, v: usize, map: &[usize]) -> Result<()> {
    if u < 2 * v || (v as u64) < k {
        return Err(fail(format!(
            "sizes |U| = {u}, |V| = {v} too small for k = {k}"
        )));
    }
    let src = product_frame(&make_universal_frame(u)?, &make_difference_frame(v)?);
    let dst = realize_grid(&build_family(Family::G, k)?)?.frame;
    verify_pmorphism(&src, &dst, map, true).map_err(|w| fail(format!("G_k image: {w:?}")))
}

fn random_model(r: &Realization, m: u32, rng: &mut ChaCha8Rng) -> Model {
    let mut model = Model::new(r.frame.clone());
    for i in 0..m {
        let ws: Vec<usize> = (0..r.points.len()).filter(|_| rng.gen_bool(0.5)).collect();
        model.set(format!("p{i}"), ws);
    }
    model
}

/// Worlds of each source cell grouped by which variables hold; in each
/// cell the first class big enough goes to the `rr` point of `G_k`, the
/// rest to its `ri` points in order.
fn pigeonhole_quotient(
    src: &Realization,
    dst: &Realization,
    model: &Model,
    k: u64,
) -> Result<PMorphismMap> {
    let mut map = vec![usize::MAX; src.points.len()];
    for xi in 0..2 {
        let worlds: Vec<usize> = (0..src.points.len())
            .filter(|&w| src.points[w].x == xi)
            .collect();
        let need = worlds.len() + 2 - k as usize;
        let mut classes: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
        for &w in &worlds {
            let sig = model.valuation.keys().map(|p| model.holds(p, w)).collect();
            classes.entry(sig).or_default().push(w);
        }
        let class = classes
            .values()
            .find(|c| c.len() >= need)
            .ok_or_else(|| fail(format!("no class of {need} points in column {xi}")))?;
        let rr = dst.world(xi, 0, PointKind::RR, 0).expect("rr point");
        let mut ri = (0..).map(|o| dst.world(xi, 0, PointKind::RI, o));
        for &w in &worlds {
            map[w] = if class[..need].contains(&w) {
                rr
            } else {
                ri.next().flatten().expect("enough ri points")
            };
        }
    }
    Ok(map)
}

fn image_model(model: &Model, dst: &Realization, map: &[usize]) -> Model {
    let mut n = Model::new(dst.frame.clone());
    for (p, s) in &model.valuation {
        n.set(p.clone(), s.ones().map(|w| map[w]));
    }
    n
}

fn valuation_json(m: &Model) -> Value {
    let v: BTreeMap<&String, Vec<usize>> = m
        .valuation
        .iter()
        .map(|(p, s)| (p, s.ones().collect()))
        .collect();
    json!(v)
}

fn model_from(frame: crate::frame::Frame, v: &Value) -> Result<Model> {
    let val: BTreeMap<String, Vec<usize>> =
        serde_json::from_value(v.clone()).map_err(|e| Error::Json(e.to_string()))?;
    let n = frame.size();
    let mut m = Model::new(frame);
    for (p, ws) in val {
        if let Some(&w) = ws.iter().find(|&&w| w >= n) {
            return Err(Error::InvalidWorld(w));
        }
        m.set(p, ws);
    }
    Ok(m)
}

fn quotient_step(src_kind: Family, p: &Params) -> Result<Step> {
    let src = realize_grid(&build_family(src_kind, p.k)?)?;
    let dst = realize_grid(&build_family(Family::G, p.k)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let model = random_model(&src, p.m, &mut rng);
    let map = pigeonhole_quotient(&src, &dst, &model, p.k)?;
    let image = image_model(&model, &dst, &map);
    let w = json!({
        "source": format!("{src_kind:?}"),
        "source_valuation": valuation_json(&model),
        "map": map,
        "target_valuation": valuation_json(&image),
    });
    check_quotient(p, &w)?;
    Ok(step(
        "quotient",
        format!(
            "{}-generated model on {src_kind:?}_{} maps onto a model on G_{}",
            p.m, p.k, p.k
        ),
        w,
    ))
}

fn check_quotient(p: &Params, w: &Value) -> Result<()> {
    let kind = match w["source"].as_str() {
        Some("F") => Family::F,
        Some("H") => Family::H,
        other => return Err(fail(format!("unknown source family {other:?}"))),
    };
    let src = realize_grid(&build_family(kind, p.k)?)?;
    let dst = realize_grid(&build_family(Family::G, p.k)?)?;
    let m = model_from(src.frame.clone(), &w["source_valuation"])?;
    let n = model_from(dst.frame.clone(), &w["target_valuation"])?;
    let nonempty = m
        .valuation
        .values()
        .filter(|s| s.count_ones(..) > 0)
        .count();
    if nonempty > p.m as usize {
        return Err(fail(format!(
            "{nonempty} nonempty variables, expected at most {}",
            p.m
        )));
    }
    let map: PMorphismMap =
        serde_json::from_value(w["map"].clone()).map_err(|e| Error::Json(e.to_string()))?;
    verify_pmorphism(&src.frame, &dst.frame, &map, true)
        .map_err(|e| fail(format!("quotient: {e:?}")))?;
    verify_model_pmorphism(&m, &n, &map).map_err(|e| fail(format!("quotient valuation: {e:?}")))
}

fn g_image_step(p: &Params) -> Result<Step> {
    let (u, v, map) = g_image(p.k)?;
    check_g_image(p.k, u, v, &map)?;
    Ok(step(
        "g_image",
        format!(
            "G_{k} is an onto image of (U, U×U) × diff({k}) with |U| = {u}",
            k = p.k
        ),
        json!({ "u": u, "v": v, "map": map }),
    ))
}

fn h_product_step(p: &Params) -> Result<Step> {
    let h = build_family(Family::H, p.k)?;
    let verdict = square_diagnose(&h);
    let Diagnosis::Good { xi_min } = diagnose(&h) else {
        return Err(fail("H_k should have a solution"));
    };
    let pm = assemble_product_pmorphism(&h, &xi_min)?;
    let w = json!({ "verdict": verdict, "map": pm });
    check_h_product(p, &w)?;
    Ok(step(
        "h_not_square",
        format!(
            "H_{} is square-bad; diff({}) × diff({}) maps onto it",
            p.k, pm.nx, pm.ny
        ),
        w,
    ))
}

fn check_h_product(p: &Params, w: &Value) -> Result<()> {
    let h = build_family(Family::H, p.k)?;
    if matches!(
        square_diagnose(&h),
        SquareVerdict::SquareGood { .. } | SquareVerdict::NotApplicable { .. }
    ) {
        return Err(fail("H_k is not square-bad"));
    }
    let pm: ProductMap =
        serde_json::from_value(w["map"].clone()).map_err(|e| Error::Json(e.to_string()))?;
    pm.verify_onto(&realize_grid(&h)?.frame)?;
    if pm.nx == pm.ny {
        return Err(fail("product preimage is square"));
    }
    Ok(())
}

fn diagnose_step(p: &Params) -> Result<Step> {
    let f = build_family(Family::F, p.k)?;
    let g = build_family(Family::G, p.k)?;
    let Diagnosis::BadPath(path) = diagnose(&f) else {
        return Err(fail("F_k has no bad path"));
    };
    let Diagnosis::Good { xi_min } = diagnose(&g) else {
        return Err(fail("G_k is not good"));
    };
    let con_f = extract_constraints(&f).expect("no impossible cells");
    let con_g = extract_constraints(&g).expect("no impossible cells");
    let w = json!({
        "f_bad_path": path,
        "g_solution": con_g.named(&xi_min),
    });
    check_diagnose(p, &w)?;
    Ok(step(
        "diagnose",
        format!(
            "F_{k}: bad path {}; G_{k}: solution {}",
            path.render(&con_f),
            serde_json::to_string(&con_g.named(&xi_min)).expect("serializable"),
            k = p.k
        ),
        w,
    ))
}

fn check_diagnose(p: &Params, w: &Value) -> Result<()> {
    let con_f =
        extract_constraints(&build_family(Family::F, p.k)?).map_err(|_| fail("impossible cell"))?;
    let path: BadPath =
        serde_json::from_value(w["f_bad_path"].clone()).map_err(|e| Error::Json(e.to_string()))?;
    if !path.verify(&con_f) {
        return Err(fail("F_k bad path does not verify"));
    }
    let con_g =
        extract_constraints(&build_family(Family::G, p.k)?).map_err(|_| fail("impossible cell"))?;
    let named =
        serde_json::from_value(w["g_solution"].clone()).map_err(|e| Error::Json(e.to_string()))?;
    let xi = con_g.from_named(&named)?;
    crate::constraints::check_solution(&con_g, &xi)
        .map_err(|c| fail(format!("G_k solution breaks {}", con_g.render(&c))))
}

fn square_axiom_step(p: &Params) -> Result<Step> {
    let h = build_family(Family::H, p.k)?;
    let f = synth_square_bad(&h)?;
    let cm = countermodel_square(&h)?;
    cm.verify(&f)?;
    let w = json!({
        "formula": render_formula(&f),
        "valuation": valuation_json(&cm.model),
        "world": cm.world,
    });
    check_square_axiom(p, &w)?;
    Ok(step(
        "square_axiom",
        format!("square axiom of H_{} refuted at world {}", p.k, cm.world),
        w,
    ))
}

fn check_square_axiom(p: &Params, w: &Value) -> Result<()> {
    let f = parse_formula(
        w["formula"]
            .as_str()
            .ok_or_else(|| fail("missing formula"))?,
    )?;
    let r = realize_grid(&build_family(Family::H, p.k)?)?;
    let m = model_from(r.frame, &w["valuation"])?;
    let world = w["world"].as_u64().ok_or_else(|| fail("missing world"))? as usize;
    let crate::formula::Formula::Implies(a, c) = &f else {
        return Err(fail("axiom is not an implication"));
    };
    if satisfies(&m, world, a)? && !satisfies(&m, world, c)? {
        Ok(())
    } else {
        Err(fail("square axiom is not refuted"))
    }
}

fn check_step(p: &Params, s: &Step) -> Result<()> {
    if digest(&s.witness) != s.digest {
        return Err(fail(format!("{}: digest mismatch", s.name)));
    }
    let w = &s.witness;
    match s.name.as_str() {
        "g_image" => {
            let u = w["u"].as_u64().ok_or_else(|| fail("missing u"))? as usize;
            let v = w["v"].as_u64().ok_or_else(|| fail("missing v"))? as usize;
            let map: PMorphismMap =
                serde_json::from_value(w["map"].clone()).map_err(|e| Error::Json(e.to_string()))?;
            check_g_image(p.k, u, v, &map)
        }
        "quotient" => check_quotient(p, w),
        "diagnose" => check_diagnose(p, w),
        "h_not_square" => check_h_product(p, w),
        "square_axiom" => check_square_axiom(p, w),
        other => Err(fail(format!("unknown step {other}"))),
    }
}

/// Re-check every witness of a report; uses only the report.
pub fn verify_report(r: &ExperimentReport) -> Result<()> {
    let expected: &[&str] = match r.experiment.as_str() {
        "nonfinax" => &["g_image", "quotient", "diagnose", "h_not_square"],
        "square" => &["h_not_square", "square_axiom", "quotient", "g_image"],
        other => return Err(fail(format!("unknown experiment {other}"))),
    };
    let names: Vec<&str> = r.steps.iter().map(|s| s.name.as_str()).collect();
    if names != expected {
        return Err(fail(format!("steps {names:?}, expected {expected:?}")));
    }
    for s in &r.steps {
        check_step(&r.params, s)?;
    }
    Ok(())
}

/// `F_k` fails every product with a pseudo-equivalence factor while each
/// `m`-generated model on it maps onto one on `G_k`, which is a product
/// image. Needs `k ≥ 2^{m+1}`.
pub fn experiment_nonfinax(k: u64, m: u32, seed: u64) -> Result<ExperimentReport> {
    if m >= 62 || k < 2u64 << m {
        return Err(Error::InvalidArgument(format!(
            "k = {k} is below 2^(m+1) for m = {m}"
        )));
    }
    let p = Params { k, m, seed };
    let steps = vec![
        g_image_step(&p)?,
        quotient_step(Family::F, &p)?,
        diagnose_step(&p)?,
        h_product_step(&p)?,
    ];
    finish("nonfinax", p, steps)
}

/// `H_k` has product preimages but no square one, while each
/// `m`-generated model on it maps onto one on `G_k`. Needs `k > 2^m`.
pub fn experiment_square(k: u64, m: u32, seed: u64) -> Result<ExperimentReport> {
    if m >= 63 || k <= 1u64 << m {
        return Err(Error::InvalidArgument(format!(
            "k = {k} is not above 2^m for m = {m}"
        )));
    }
    let p = Params { k, m, seed };
    let steps = vec![
        h_product_step(&p)?,
        square_axiom_step(&p)?,
        quotient_step(Family::H, &p)?,
        g_image_step(&p)?,
    ];
    finish("square", p, steps)
}

fn finish(name: &str, params: Params, steps: Vec<Step>) -> Result<ExperimentReport> {
    let mut r = ExperimentReport {
        experiment: name.into(),
        params,
        steps,
        verified: false,
    };
    verify_report(&r)?;
    r.verified = true;
    Ok(r)
}

/// Grid by family name, for command-line use.
pub fn family_grid(name: &str, k: u64) -> Result<GridSpec> {
    let kind = match name {
        "F" | "f" => Family::F,
        "G" | "g" => Family::G,
        "H" | "h" => Family::H,
        other => return Err(Error::InvalidArgument(format!("unknown family {other}"))),
    };
    build_family(kind, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonfinax_examples() {
        for k in [4, 8] {
            let r = experiment_nonfinax(k, 1, 3).unwrap();
            assert!(r.verified);
            let text = serde_json::to_string(&r).unwrap();
            let back: ExperimentReport = serde_json::from_str(&text).unwrap();
            verify_report(&back).unwrap();
        }
        assert!(matches!(
            experiment_nonfinax(2, 1, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn reports_are_deterministic() {
        let a = serde_json::to_string(&experiment_nonfinax(8, 2, 9).unwrap()).unwrap();
        let b = serde_json::to_string(&experiment_nonfinax(8, 2, 9).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tampered_witness_is_caught() {
        let mut r = experiment_nonfinax(4, 1, 0).unwrap();
        let s = &mut r.steps[1];
        let map = s.witness["map"].as_array_mut().unwrap();
        let last = map.len() - 1;
        map.swap(0, last);
        s.digest = digest(&s.witness);
        assert!(verify_report(&r).is_err());
        r.steps[1].digest = "0".into();
        assert!(verify_report(&r).is_err());
    }

    #[test]
    fn square_experiment() {
        let r = experiment_square(3, 1, 1).unwrap();
        assert!(r.verified);
        assert!(experiment_square(2, 1, 0).is_err());
    }
}
