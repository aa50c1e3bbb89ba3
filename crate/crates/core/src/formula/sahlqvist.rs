//! Syntactic recognition of Sahlqvist and generalised Sahlqvist formulas.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::Formula;

/// Heads of the boxed formulas in an antecedent, with an edge `q ⇛ p`
/// whenever `q` is an inessential variable of a boxed formula with head `p`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DependencyDigraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl DependencyDigraph {
    pub fn is_acyclic(&self) -> bool {
        let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (q, p) in &self.edges {
            succ.entry(q).or_default().push(p);
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        fn dfs<'a>(
            n: &'a str,
            succ: &BTreeMap<&'a str, Vec<&'a str>>,
            state: &mut BTreeMap<&'a str, u8>,
        ) -> bool {
            match state.get(n) {
                Some(1) => return false,
                Some(2) => return true,
                _ => {}
            }
            state.insert(n, 1);
            for &m in succ.get(n).map(|v| v.as_slice()).unwrap_or(&[]) {
                if !dfs(m, succ, state) {
                    return false;
                }
            }
            state.insert(n, 2);
            true
        }
        self.nodes.iter().all(|n| dfs(n, &succ, &mut state))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class")]
pub enum SahlqvistVerdict {
    Sahlqvist,
    /// One digraph per antecedent found in the formula.
    GeneralisedSahlqvist {
        digraphs: Vec<DependencyDigraph>,
    },
    /// `path` is a child-index path (see [`Formula::at_path`]) to the
    /// offending subterm.
    Neither {
        path: Vec<usize>,
        reason: String,
    },
}

impl SahlqvistVerdict {
    pub fn is_sahlqvist(&self) -> bool {
        matches!(self, SahlqvistVerdict::Sahlqvist)
    }

    /// Plain Sahlqvist formulas are generalised Sahlqvist as well.
    pub fn is_generalised(&self) -> bool {
        !matches!(self, SahlqvistVerdict::Neither { .. })
    }
}

/// Occurrence polarity: (some variable under an even number of negations,
/// some variable under an odd number). The left side of `->` counts as negated.
fn polarity(f: &Formula, neg: bool, acc: &mut (bool, bool)) {
    match f {
        Formula::Var(_) => {
            if neg {
                acc.1 = true
            } else {
                acc.0 = true
            }
        }
        Formula::Top | Formula::Bot => {}
        Formula::Not(a) => polarity(a, !neg, acc),
        Formula::Implies(a, b) => {
            polarity(a, !neg, acc);
            polarity(b, neg, acc);
        }
        _ => {
            for c in f.children() {
                polarity(c, neg, acc);
            }
        }
    }
}

pub fn is_positive(f: &Formula) -> bool {
    let mut acc = (false, false);
    polarity(f, false, &mut acc);
    !acc.1
}

pub fn is_negative(f: &Formula) -> bool {
    let mut acc = (false, false);
    polarity(f, false, &mut acc);
    !acc.0
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Part {
    head: String,
    inessential: BTreeSet<String>,
}

/// Decompose a boxed formula `□(ψ₁ → □(ψ₂ → … □p))`. Boxes are allowed to
/// range over conjunctions of boxed formulas, which are split.
fn boxed_parts(f: &Formula) -> Option<Vec<Part>> {
    match f {
        Formula::Var(p) => Some(vec![Part {
            head: p.clone(),
            inessential: BTreeSet::new(),
        }]),
        Formula::Top => Some(vec![]),
        Formula::Box(_, a) => boxed_parts(a),
        Formula::And(xs) => {
            let mut out = Vec::new();
            for x in xs {
                out.extend(boxed_parts(x)?);
            }
            Some(out)
        }
        Formula::Implies(psi, g) if is_positive(psi) => {
            let extra = psi.vars();
            let mut parts = boxed_parts(g)?;
            for p in &mut parts {
                p.inessential.extend(extra.iter().cloned());
            }
            Some(parts)
        }
        _ => None,
    }
}

type Fail = (Vec<usize>, String);

fn antecedent(f: &Formula, path: &mut Vec<usize>) -> Result<Vec<Part>, Fail> {
    if matches!(f, Formula::Top | Formula::Bot) || is_negative(f) {
        return Ok(vec![]);
    }
    if let Some(parts) = boxed_parts(f) {
        return Ok(parts);
    }
    match f {
        Formula::And(xs) | Formula::Or(xs) => {
            let mut out = Vec::new();
            for (i, x) in xs.iter().enumerate() {
                path.push(i);
                out.extend(antecedent(x, path)?);
                path.pop();
            }
            Ok(out)
        }
        Formula::Diamond(_, a) => {
            path.push(0);
            let r = antecedent(a, path)?;
            path.pop();
            Ok(r)
        }
        _ => Err((
            path.clone(),
            "not built from boxed formulas and negative formulas by and/or/diamond".into(),
        )),
    }
}

fn digraph(parts: &[Part]) -> DependencyDigraph {
    let nodes: BTreeSet<String> = parts.iter().map(|p| p.head.clone()).collect();
    let mut edges = BTreeSet::new();
    for p in parts {
        for q in &p.inessential {
            if nodes.contains(q) {
                edges.insert((q.clone(), p.head.clone()));
            }
        }
    }
    DependencyDigraph { nodes, edges }
}

/// Dependency digraph of a potential generalised Sahlqvist antecedent, or
/// the failing subterm if `f` is not of that shape.
pub fn antecedent_digraph(f: &Formula) -> Result<DependencyDigraph, Fail> {
    Ok(digraph(&antecedent(f, &mut vec![])?))
}

fn formula(f: &Formula, path: &mut Vec<usize>, out: &mut Vec<Vec<Part>>) -> Result<(), Fail> {
    if is_positive(f) {
        return Ok(());
    }
    match f {
        Formula::Implies(a, c) => {
            if !is_positive(c) {
                path.push(1);
                let e = (path.clone(), "consequent is not positive".to_string());
                path.pop();
                return Err(e);
            }
            path.push(0);
            out.push(antecedent(a, path)?);
            path.pop();
            Ok(())
        }
        Formula::Not(a) => {
            path.push(0);
            out.push(antecedent(a, path)?);
            path.pop();
            Ok(())
        }
        Formula::Box(_, a) => {
            path.push(0);
            formula(a, path, out)?;
            path.pop();
            Ok(())
        }
        Formula::And(xs) => {
            for (i, x) in xs.iter().enumerate() {
                path.push(i);
                formula(x, path, out)?;
                path.pop();
            }
            Ok(())
        }
        Formula::Or(xs) => {
            for i in 0..xs.len() {
                for j in i + 1..xs.len() {
                    if !xs[i].vars().is_disjoint(&xs[j].vars()) {
                        return Err((
                            path.clone(),
                            format!("disjuncts {i} and {j} share variables"),
                        ));
                    }
                }
            }
            for (i, x) in xs.iter().enumerate() {
                path.push(i);
                formula(x, path, out)?;
                path.pop();
            }
            Ok(())
        }
        _ => Err((
            path.clone(),
            "not an implication, box, conjunction or disjunction".into(),
        )),
    }
}

pub fn classify_sahlqvist(f: &Formula) -> SahlqvistVerdict {
    let mut ants = Vec::new();
    if let Err((path, reason)) = formula(f, &mut vec![], &mut ants) {
        return SahlqvistVerdict::Neither { path, reason };
    }
    if ants.iter().flatten().all(|p| p.inessential.is_empty()) {
        return SahlqvistVerdict::Sahlqvist;
    }
    let digraphs: Vec<DependencyDigraph> = ants.iter().map(|a| digraph(a)).collect();
    if let Some(i) = digraphs.iter().position(|d| !d.is_acyclic()) {
        return SahlqvistVerdict::Neither {
            path: vec![],
            reason: format!("dependency digraph of antecedent {i} has a cycle"),
        };
    }
    SahlqvistVerdict::GeneralisedSahlqvist { digraphs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn class(s: &str) -> SahlqvistVerdict {
        classify_sahlqvist(&parse_formula(s).unwrap())
    }

    #[test]
    fn diff_axioms() {
        assert!(class("p -> [h]<h> p").is_sahlqvist());
        assert!(class("<v><v> p -> p | <v> p").is_sahlqvist());
        assert!(class("[h][v] p <-> [v][h] p").is_sahlqvist());
    }

    #[test]
    fn boxed_formula_with_inessential() {
        // q ⇛ p only: generalised, acyclic.
        let v = class("<h>([v](q -> p) & q) -> <h> p");
        assert!(matches!(v, SahlqvistVerdict::GeneralisedSahlqvist { .. }));
        // p ⇛ q and q ⇛ p: cycle.
        let v = class("[v](q -> p) & [h](p -> q) -> <h> p");
        assert!(!v.is_generalised());
    }

    #[test]
    fn rejects() {
        // box over a diamond in the antecedent
        let v = class("[h]<v> p -> p");
        assert!(matches!(v, SahlqvistVerdict::Neither { ref path, .. } if path == &vec![0]));
        assert!(!class("p -> !p").is_generalised());
        assert!(!class("(p -> q) | (q -> p)").is_generalised());
        assert!(class("(p -> <h> p) | (q -> <v> q)").is_sahlqvist());
    }

    #[test]
    fn polarity() {
        assert!(is_positive(&parse_formula("!!p & (q -> r) -> s").unwrap()) == false);
        assert!(is_positive(&parse_formula("(!p -> q)").unwrap()));
        assert!(is_negative(&parse_formula("!p & !<h> q").unwrap()));
        assert!(is_negative(&parse_formula("T").unwrap()));
    }
}
