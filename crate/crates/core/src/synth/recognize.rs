//! Template matching: extract candidate parameters from the formula's
//! shape, rebuild the template and compare up to variable renaming.

use std::collections::BTreeMap;

use super::{
    axiom_comm_pse, badpath_formula, impossible_formula, AxiomKind, BadPathParams, GenerateSub,
    ImpossibleParams, LastCase, StepKind,
};
use crate::formula::{Axis, Formula};
use crate::grid::Side;

/// Rename variables to `v0, v1, …` in order of first occurrence.
pub fn canonical_names(f: &Formula) -> Formula {
    fn walk(f: &Formula, map: &mut BTreeMap<String, String>) {
        if let Formula::Var(p) = f {
            if !map.contains_key(p) {
                let n = format!("v{}", map.len());
                map.insert(p.clone(), n);
            }
        }
        for c in f.children() {
            walk(c, map);
        }
    }
    let mut map = BTreeMap::new();
    walk(f, &mut map);
    f.rename(&map)
}

pub fn recognize_axiom(f: &Formula) -> Option<AxiomKind> {
    let canon = canonical_names(f);
    if canon == canonical_names(&axiom_comm_pse()) {
        return Some(AxiomKind::CommPse);
    }
    let Formula::Implies(ante, cons) = f else {
        return None;
    };
    let matches = |g: &Formula| canonical_names(g) == canon;
    if let Some(p) = impossible_candidates(cons)
        .into_iter()
        .find(|p| matches(&impossible_formula(p)))
    {
        return Some(AxiomKind::ImpossibleC(p));
    }
    badpath_candidates(ante, cons)
        .into_iter()
        .find(|p| matches(&badpath_formula(p)))
        .map(AxiomKind::BadPathP)
}

/// `φ ∨ ◇_ax φ` → `(ax, φ)`
fn as_dia_plus(f: &Formula) -> Option<(Axis, &Formula)> {
    match f {
        Formula::Or(xs) if xs.len() == 2 => match &xs[1] {
            Formula::Diamond(ax, g) if **g == xs[0] => Some((*ax, &xs[0])),
            _ => None,
        },
        _ => None,
    }
}

fn as_var(f: &Formula) -> Option<&str> {
    match f {
        Formula::Var(p) => Some(p),
        _ => None,
    }
}

fn items(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::And(xs) => xs.iter().collect(),
        f => vec![f],
    }
}

fn impossible_candidates(cons: &Formula) -> Vec<ImpossibleParams> {
    let Some((ax1, inner)) = as_dia_plus(cons) else {
        return vec![];
    };
    let Some((ax2, all)) = as_dia_plus(inner) else {
        return vec![];
    };
    if ax1 == ax2 {
        return vec![];
    }
    let n = items(all).len();
    if n < 2 || !items(all).iter().all(|x| as_var(x).is_some()) {
        return vec![];
    }
    let swapped = ax1 == Axis::V;
    (1..n)
        .map(|k| ImpossibleParams {
            k,
            l: n - k,
            swapped,
        })
        .collect()
}

fn side_of(ax: Axis) -> Side {
    if ax == Axis::H {
        Side::X
    } else {
        Side::Y
    }
}

fn badpath_candidates(ante: &Formula, cons: &Formula) -> Vec<BadPathParams> {
    let Some((a0, target)) = as_dia_plus(cons) else {
        return vec![];
    };
    let t = items(target);
    if t.len() < 2 || !t.iter().all(|x| as_var(x).is_some()) {
        return vec![];
    }
    let (Some(b), Formula::And(parts)) = (as_var(t[0]), ante) else {
        return vec![];
    };
    let Some(a) = parts.first().and_then(as_var) else {
        return vec![];
    };
    let start = side_of(a0);
    let n_c = (t.len() - 1) as u64;
    let Some((Axis::H, inner)) = parts.last().and_then(as_dia_plus) else {
        return vec![];
    };
    let Some((Axis::V, last)) = as_dia_plus(inner) else {
        return vec![];
    };

    let build = |steps: Vec<StepKind>, last: LastCase| BadPathParams {
        start,
        n_c,
        steps,
        last,
    };
    let case1: Option<Vec<&Formula>> = match last {
        Formula::Or(_) => Some(vec![last]),
        Formula::And(xs) if xs.iter().all(|x| matches!(x, Formula::Or(_))) => {
            Some(xs.iter().collect())
        }
        _ => None,
    };
    if let Some(list) = case1 {
        let mut n_r = 0;
        let mut path = None;
        for it in &list {
            let Some((_, body)) = as_dia_plus(it) else {
                return vec![];
            };
            let body = items(body);
            let rest = match body.split_last() {
                Some((Formula::Diamond(_, g), rest)) if items(g) == rest => {
                    n_r += 1;
                    rest.to_vec()
                }
                _ => body,
            };
            path = Some(strip_markers(&rest, a));
        }
        let Some(steps) = path.and_then(|p| parse_path(&p, a, b)) else {
            return vec![];
        };
        return vec![build(
            steps,
            LastCase::Points {
                n_r,
                n_i: list.len() - n_r,
            },
        )];
    }

    // Generate: outer marker, then ◇(inner marker ∧ path ∧ recursion).
    let mut cur = last;
    let mut k = 1u64;
    loop {
        let Some(Formula::Diamond(_, body)) = items(cur).last().copied() else {
            return vec![];
        };
        let body = items(body);
        if body.len() < 3 {
            return vec![];
        }
        // With a recursion the body is marker, path, then the doubled
        // diamond; without one the path's own diamond comes right after
        // the marker.
        if body.len() >= 4 {
            if let Some((Formula::Diamond(_, g), _)) = body.split_last() {
                let gi = items(g);
                if let Some((Formula::Diamond(_, h), lrest)) = gi.split_last() {
                    if items(h) == lrest {
                        cur = h;
                        k += 1;
                        continue;
                    }
                }
            }
        }
        let Some(steps) = parse_path(&body[2..], a, b) else {
            return vec![];
        };
        return [GenerateSub::A, GenerateSub::B]
            .into_iter()
            .map(|sub| build(steps.clone(), LastCase::Generate { sub, k }))
            .collect();
    }
}

/// Drop the leading witness literals; `¬a` belongs to the path.
fn strip_markers<'f>(xs: &[&'f Formula], a: &str) -> Vec<&'f Formula> {
    let is_marker = |f: &Formula| match f {
        Formula::Var(_) => true,
        Formula::Not(g) => matches!(&**g, Formula::Var(p) if p != a),
        _ => false,
    };
    xs.iter().copied().skip_while(|f| is_marker(f)).collect()
}

/// Steps `c_1..c_m` of a path given as its list of conjuncts.
fn parse_path(xs: &[&Formula], a: &str, b: &str) -> Option<Vec<StepKind>> {
    match xs {
        [Formula::Not(na), Formula::Box(_, vb)]
            if as_var(na) == Some(a) && as_var(vb) == Some(b) =>
        {
            Some(vec![])
        }
        [Formula::Diamond(_, inner)] => {
            let body = items(inner);
            let body: Vec<&Formula> = match body.split_last() {
                Some((Formula::Diamond(_, g), rest)) if items(g) == rest => rest.to_vec(),
                _ => body,
            };
            let (Formula::Not(c), rest) = body.split_first()? else {
                return None;
            };
            let c = as_var(c)?;
            let mut axes = vec![];
            let mut i = 0;
            while let Some(Formula::Box(ax, v)) = rest.get(i) {
                if as_var(v) != Some(c) {
                    break;
                }
                axes.push(*ax);
                i += 1;
            }
            let step = match axes.as_slice() {
                [Axis::H, Axis::V] => StepKind::EqSw,
                [Axis::V] => StepKind::H2VSw,
                [Axis::H] => StepKind::V2HSw,
                _ => return None,
            };
            let mut steps = parse_path(&rest[i..], a, b)?;
            steps.push(step);
            Some(steps)
        }
        _ => None,
    }
}
