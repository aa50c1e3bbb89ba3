//! Bimodal formulas over the axes `h` and `v`.

mod parse;
mod render;
pub mod sahlqvist;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use parse::parse_formula;
pub use render::render_formula;
pub use sahlqvist::{classify_sahlqvist, DependencyDigraph, SahlqvistVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    H,
    V,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::H => Axis::V,
            Axis::V => Axis::H,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::H => "h",
            Axis::V => "v",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Formula AST. `And`/`Or` carry at least two children when built through
/// the parser or the smart constructors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(String),
    Top,
    Bot,
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Box(Axis, Box<Formula>),
    Diamond(Axis, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&render_formula(self))
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_formula(&s).map_err(serde::de::Error::custom)
    }
}

pub fn var(name: impl Into<String>) -> Formula {
    Formula::Var(name.into())
}

pub fn not(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}

pub fn bx(axis: Axis, f: Formula) -> Formula {
    Formula::Box(axis, Box::new(f))
}

pub fn dia(axis: Axis, f: Formula) -> Formula {
    Formula::Diamond(axis, Box::new(f))
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Box::new(a), Box::new(b))
}

/// Conjunction that flattens nested `And`s, drops `⊤`, and collapses
/// singletons. The empty conjunction is `⊤`.
pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
    let mut out = Vec::new();
    for f in items {
        match f {
            Formula::Top => {}
            Formula::And(xs) => out.extend(xs),
            f => out.push(f),
        }
    }
    match out.len() {
        0 => Formula::Top,
        1 => out.pop().unwrap(),
        _ => Formula::And(out),
    }
}

/// Dual of [`conj`]; the empty disjunction is `⊥`.
pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
    let mut out = Vec::new();
    for f in items {
        match f {
            Formula::Bot => {}
            Formula::Or(xs) => out.extend(xs),
            f => out.push(f),
        }
    }
    match out.len() {
        0 => Formula::Bot,
        1 => out.pop().unwrap(),
        _ => Formula::Or(out),
    }
}

/// `φ ∨ ◇φ`
pub fn dia_plus(axis: Axis, f: Formula) -> Formula {
    Formula::Or(vec![f.clone(), dia(axis, f)])
}

/// `φ ∧ □φ`
pub fn box_plus(axis: Axis, f: Formula) -> Formula {
    Formula::And(vec![f.clone(), bx(axis, f)])
}

/// `◇(φ ∧ ◇φ)`: at least two distinct successors satisfy φ (on difference frames).
pub fn at_least_two(axis: Axis, f: Formula) -> Formula {
    dia(axis, Formula::And(vec![f.clone(), dia(axis, f)]))
}

/// `(φ ∨ ◇φ) ∧ ¬◇(φ ∧ ◇φ)`
pub fn exactly_one(axis: Axis, f: Formula) -> Formula {
    Formula::And(vec![dia_plus(axis, f.clone()), not(at_least_two(axis, f))])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Macro {
    DiamondPlus,
    BoxPlus,
    Forall,
    AtLeastTwo,
    ExactlyOne,
}

impl std::str::FromStr for Macro {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "diamond_plus" => Macro::DiamondPlus,
            "box_plus" => Macro::BoxPlus,
            "forall" => Macro::Forall,
            "at_least_two" => Macro::AtLeastTwo,
            "exactly_one" => Macro::ExactlyOne,
            _ => return Err(Error::UnknownMacro(s.to_string())),
        })
    }
}

/// Expand a derived modality by name. Every macro takes exactly one argument.
pub fn expand_macro(kind: &str, args: &[Formula], axis: Axis) -> Result<Formula> {
    let kind: Macro = kind.parse()?;
    let [f] = args else {
        return Err(Error::InvalidArgument(format!(
            "macro expects one argument, got {}",
            args.len()
        )));
    };
    let f = f.clone();
    Ok(match kind {
        Macro::DiamondPlus => dia_plus(axis, f),
        Macro::BoxPlus | Macro::Forall => box_plus(axis, f),
        Macro::AtLeastTwo => at_least_two(axis, f),
        Macro::ExactlyOne => exactly_one(axis, f),
    })
}

impl Formula {
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) | Formula::Top | Formula::Bot => vec![],
            Formula::Not(a) | Formula::Box(_, a) | Formula::Diamond(_, a) => vec![a],
            Formula::And(xs) | Formula::Or(xs) => xs.iter().collect(),
            Formula::Implies(a, b) => vec![a, b],
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        if let Formula::Var(p) = self {
            out.insert(p.clone());
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    fn map_children(&self, g: &mut impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Formula::Var(_) | Formula::Top | Formula::Bot => self.clone(),
            Formula::Not(a) => not(g(a)),
            Formula::Box(x, a) => bx(*x, g(a)),
            Formula::Diamond(x, a) => dia(*x, g(a)),
            Formula::And(xs) => Formula::And(xs.iter().map(&mut *g).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(&mut *g).collect()),
            Formula::Implies(a, b) => implies(g(a), g(b)),
        }
    }

    /// Exchange the roles of `h` and `v` throughout.
    pub fn swap_axes(&self) -> Formula {
        match self {
            Formula::Box(x, a) => bx(x.other(), a.swap_axes()),
            Formula::Diamond(x, a) => dia(x.other(), a.swap_axes()),
            _ => self.map_children(&mut |c| c.swap_axes()),
        }
    }

    /// Rename variables; names missing from the map are kept.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Formula {
        match self {
            Formula::Var(p) => var(map.get(p).cloned().unwrap_or_else(|| p.clone())),
            _ => self.map_children(&mut |c| c.rename(map)),
        }
    }

    /// Normal form modulo associativity and commutativity of `∧`/`∨`.
    /// Used to compare formulas whose conjunct order is immaterial.
    pub fn ac_normal(&self) -> Formula {
        match self {
            Formula::And(_) | Formula::Or(_) => {
                let is_and = matches!(self, Formula::And(_));
                let mut flat = Vec::new();
                self.flatten_into(is_and, &mut flat);
                let mut xs: Vec<Formula> = flat.iter().map(|c| c.ac_normal()).collect();
                xs.sort();
                if is_and {
                    Formula::And(xs)
                } else {
                    Formula::Or(xs)
                }
            }
            _ => self.map_children(&mut |c| c.ac_normal()),
        }
    }

    fn flatten_into<'a>(&'a self, is_and: bool, out: &mut Vec<&'a Formula>) {
        match (self, is_and) {
            (Formula::And(xs), true) | (Formula::Or(xs), false) => {
                for x in xs {
                    x.flatten_into(is_and, out);
                }
            }
            _ => out.push(self),
        }
    }

    /// Subterm at a child-index path, as produced by the classifier.
    pub fn at_path(&self, path: &[usize]) -> Option<&Formula> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn macros() {
        let p = var("p");
        assert_eq!(
            expand_macro("diamond_plus", &[p.clone()], Axis::H).unwrap(),
            Formula::Or(vec![p.clone(), dia(Axis::H, p.clone())])
        );
        assert_eq!(
            expand_macro("at_least_two", &[p.clone()], Axis::H).unwrap(),
            dia(
                Axis::H,
                Formula::And(vec![p.clone(), dia(Axis::H, p.clone())])
            )
        );
        assert!(matches!(
            expand_macro("nope", &[p.clone()], Axis::H),
            Err(Error::UnknownMacro(_))
        ));
        assert!(expand_macro("forall", &[], Axis::H).is_err());
    }

    #[test]
    fn smart_constructors() {
        assert_eq!(conj(vec![]), Formula::Top);
        assert_eq!(conj(vec![Formula::Top, var("p")]), var("p"));
        assert_eq!(
            conj(vec![conj(vec![var("a"), var("b")]), var("c")]),
            Formula::And(vec![var("a"), var("b"), var("c")])
        );
        assert_eq!(disj(vec![]), Formula::Bot);
    }

    #[test]
    fn ac_normal_ignores_order() {
        let a = conj(vec![var("b"), conj(vec![var("a"), var("c")])]);
        let b = Formula::And(vec![var("c"), Formula::And(vec![var("b"), var("a")])]);
        assert_eq!(a.ac_normal(), b.ac_normal());
    }

    #[test]
    fn swap_is_involution() {
        let f = parse_formula("[h]<v> p -> <h> q").unwrap();
        assert_eq!(f.swap_axes().swap_axes(), f);
        assert_eq!(f.swap_axes(), parse_formula("[v]<h> p -> <v> q").unwrap());
    }
}
